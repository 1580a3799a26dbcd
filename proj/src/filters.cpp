#include "dsbad/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "dsbad/random.hpp"

namespace dsbad {

namespace {

void require_prunable(const CandidateSet& s, std::size_t budget) {
    if (budget < 1) {
        throw Error("budget must be >= 1");
    }
    if (s.size() < budget) {
        throw Error("strategy requires |S| >= B (got |S|=" + std::to_string(s.size()) +
                    ", B=" + std::to_string(budget) + ")");
    }
}

FilteredSet gather(const CandidateSet& s, std::span<const std::size_t> order, std::size_t budget) {
    FilteredSet out;
    out.budget = budget;
    out.items.reserve(order.size());
    for (auto i : order) {
        out.items.push_back(s[i]);
    }
    return out;
}

// Indices of the `budget` smallest keys; stable, so equal keys keep acquisition order.
template <typename Key>
std::vector<std::size_t> bottom_k(const std::vector<Key>& keys, std::size_t budget) {
    std::vector<std::size_t> idx(keys.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    idx.resize(budget);
    return idx;
}

}  // namespace

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
        case Strategy::FarthestFirst: return "ff";
        case Strategy::Tfdp: return "tfdp";
        case Strategy::Moderate: return "moderate";
        case Strategy::LeastConfidence: return "least-confidence";
        case Strategy::Random: return "random";
    }
    return "?";
}

Strategy parse_strategy(std::string_view s) {
    for (auto st : {Strategy::FarthestFirst, Strategy::Tfdp, Strategy::Moderate, Strategy::LeastConfidence,
                    Strategy::Random}) {
        if (to_string(st) == s) {
            return st;
        }
    }
    throw Error("unknown strategy '" + std::string(s) +
                "' (expected ff|tfdp|moderate|least-confidence|random)");
}

void FilterConfig::validate() const {
    if (budget < 1) {
        throw Error("budget must be >= 1");
    }
    if (strategy == Strategy::Random && !seed) {
        throw Error("random strategy requires a seed");
    }
    if (!(area_epsilon > 0.0)) {
        throw Error("area_epsilon must be positive");
    }
}

FilteredSet filter(const CandidateSet& candidates, const FilterConfig& cfg) {
    cfg.validate();
    if (candidates.empty()) {
        throw Error("cannot filter an empty candidate set");
    }
    if (candidates.size() <= cfg.budget) {
        return FilteredSet{{candidates.items().begin(), candidates.items().end()}, cfg.budget};
    }
    switch (cfg.strategy) {
        case Strategy::FarthestFirst: return ff_select(candidates, cfg.budget, cfg.density_metric);
        case Strategy::Tfdp: return tfdp_select(candidates, cfg.budget, cfg.area_epsilon);
        case Strategy::Moderate: return moderate_select(candidates, cfg.budget);
        case Strategy::LeastConfidence: return least_confidence_select(candidates, cfg.budget);
        case Strategy::Random: return random_select(candidates, cfg.budget, *cfg.seed);
    }
    throw Error("unhandled strategy");
}

FilteredSet ff_select(const CandidateSet& candidates, std::size_t budget, DensityMetric density_metric) {
    require_prunable(candidates, budget);
    const auto items = candidates.items();
    const std::size_t n = items.size();

    const auto density = density_scores(items, density_metric);
    std::size_t first = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (density[i] > density[first]) {
            first = i;
        }
    }

    std::vector<std::size_t> order{first};
    order.reserve(budget);
    std::vector<bool> taken(n, false);
    taken[first] = true;
    // Max cosine similarity of each remaining item to the current selection.
    std::vector<double> max_sim(n, -std::numeric_limits<double>::infinity());

    std::size_t last = first;
    while (order.size() < budget) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) {
                continue;
            }
            max_sim[i] = std::max(max_sim[i], cosine_similarity(items[last].embedding, items[i].embedding));
            if (best == n || max_sim[i] < max_sim[best]) {
                best = i;
            }
        }
        taken[best] = true;
        order.push_back(best);
        last = best;
    }
    return gather(candidates, order, budget);
}

double shape_complexity(const BoundingBox& box, double area_epsilon) {
    const double perimeter = 2.0 * (box.w + box.h);
    const double area = std::max(box.w * box.h, area_epsilon);
    return perimeter / (2.0 * std::sqrt(std::numbers::pi * area));
}

double image_shape_score(const FrameRecord& frame, double area_epsilon) {
    double score = 0.0;
    for (const auto& d : frame.detections) {
        score += shape_complexity(d.bbox, area_epsilon);
    }
    return score;
}

FilteredSet tfdp_select(const CandidateSet& candidates, std::size_t budget, double area_epsilon) {
    require_prunable(candidates, budget);
    std::vector<double> neg_scores;
    neg_scores.reserve(candidates.size());
    for (const auto& r : candidates.items()) {
        neg_scores.push_back(-image_shape_score(r, area_epsilon));
    }
    return gather(candidates, bottom_k(neg_scores, budget), budget);
}

FilteredSet moderate_select(const CandidateSet& candidates, std::size_t budget) {
    require_prunable(candidates, budget);
    const auto dist = distances_to_center(candidates.items());
    const double median = quantile(dist, 0.5);
    std::vector<double> gap;
    gap.reserve(dist.size());
    for (double d : dist) {
        gap.push_back(std::abs(d - median));
    }
    return gather(candidates, bottom_k(gap, budget), budget);
}

FilteredSet least_confidence_select(const CandidateSet& candidates, std::size_t budget) {
    require_prunable(candidates, budget);
    std::vector<double> conf;
    conf.reserve(candidates.size());
    for (const auto& r : candidates.items()) {
        conf.push_back(frame_confidence(r));
    }
    return gather(candidates, bottom_k(conf, budget), budget);
}

FilteredSet random_select(const CandidateSet& candidates, std::size_t budget, std::uint64_t seed) {
    require_prunable(candidates, budget);
    Rng rng(seed);
    std::vector<std::size_t> idx(candidates.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t k = 0; k < budget; ++k) {
        const auto j = k + static_cast<std::size_t>(uniform_index(rng, idx.size() - k));
        std::swap(idx[k], idx[j]);
    }
    idx.resize(budget);
    return gather(candidates, idx, budget);
}

}  // namespace dsbad
