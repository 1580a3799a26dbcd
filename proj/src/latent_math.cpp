#include "dsbad/latent_math.hpp"

#include <algorithm>
#include <cmath>

namespace dsbad {

namespace {

void require_same_dim(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw Error("embedding dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()) + ")");
    }
}

}  // namespace

std::string_view to_string(DensityMetric m) noexcept {
    return m == DensityMetric::Inner ? "inner" : "cosine";
}

DensityMetric parse_density_metric(std::string_view s) {
    if (s == "inner") return DensityMetric::Inner;
    if (s == "cosine") return DensityMetric::Cosine;
    throw Error("unknown density metric '" + std::string(s) + "' (expected inner|cosine)");
}

double inner_product(const Embedding& a, const Embedding& b) {
    require_same_dim(a, b);
    const auto x = a.values();
    const auto y = b.values();
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        acc += x[k] * y[k];
    }
    return acc;
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
    const double c = inner_product(a, b) / (a.norm() * b.norm());
    return std::clamp(c, -1.0, 1.0);
}

SimilarityMatrix::SimilarityMatrix(std::span<const FrameRecord> items)
    : n_(items.size()), data_(items.size() * items.size()) {
    for (std::size_t i = 0; i < n_; ++i) {
        data_[i * n_ + i] = 1.0;
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double c = cosine_similarity(items[i].embedding, items[j].embedding);
            data_[i * n_ + j] = c;
            data_[j * n_ + i] = c;
        }
    }
}

std::vector<double> density_scores(std::span<const FrameRecord> items, DensityMetric metric) {
    std::vector<double> scores(items.size(), 0.0);
    for (std::size_t i = 0; i < items.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < items.size(); ++j) {
            acc += metric == DensityMetric::Inner
                       ? inner_product(items[i].embedding, items[j].embedding)
                       : cosine_similarity(items[i].embedding, items[j].embedding);
        }
        scores[i] = acc;
    }
    return scores;
}

double quantile(std::span<const double> values, double q) {
    if (values.empty()) {
        throw Error("quantile of an empty sample");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw Error("quantile level must lie in [0,1]");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    // q*n is nudged down so levels like 1-0.1 land on the intended rank.
    auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

std::vector<double> distances_to_center(std::span<const FrameRecord> items) {
    if (items.empty()) {
        return {};
    }
    const std::size_t d = items.front().embedding.dim();
    std::vector<double> center(d, 0.0);
    for (const auto& r : items) {
        if (r.embedding.dim() != d) {
            throw Error("embedding dimension mismatch in candidate set");
        }
        const auto v = r.embedding.values();
        for (std::size_t k = 0; k < d; ++k) {
            center[k] += v[k];
        }
    }
    for (auto& c : center) {
        c /= static_cast<double>(items.size());
    }
    std::vector<double> out;
    out.reserve(items.size());
    for (const auto& r : items) {
        const auto v = r.embedding.values();
        double sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double diff = v[k] - center[k];
            sq += diff * diff;
        }
        out.push_back(std::sqrt(sq));
    }
    return out;
}

}  // namespace dsbad
