#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "dsbad/latent_math.hpp"
#include "dsbad/model.hpp"

namespace dsbad {

enum class Strategy { FarthestFirst, Tfdp, Moderate, LeastConfidence, Random };

/// Stable CLI/config names: ff, tfdp, moderate, least-confidence, random.
std::string_view to_string(Strategy s) noexcept;
Strategy parse_strategy(std::string_view s);

struct FilterConfig {
    Strategy strategy = Strategy::FarthestFirst;
    std::size_t budget = 32;
    std::optional<std::uint64_t> seed;  // Random only
    DensityMetric density_metric = DensityMetric::Inner;
    double area_epsilon = 1e-6;

    void validate() const;
};

/// FILTER(S, B). Identity (acquisition order) when |S| <= B, otherwise the
/// strategy-specific selection. Output is in selection order.
FilteredSet filter(const CandidateSet& candidates, const FilterConfig& cfg);

// Strategy entry points; each requires |S| >= B >= 1 (filter() only calls them when
// |S| > B). Ties always go to the item acquired first.

/// Deterministic Farthest First: start from the densest item, then repeatedly add
/// the item whose maximum cosine similarity to the selection is smallest.
FilteredSet ff_select(const CandidateSet& candidates, std::size_t budget,
                      DensityMetric density_metric = DensityMetric::Inner);

/// Shape complexity of one axis-aligned box: P / (2 sqrt(pi A)), A clamped to area_epsilon.
double shape_complexity(const BoundingBox& box, double area_epsilon = 1e-6);

/// Sum of per-detection shape complexity; 0 for frames without detections.
double image_shape_score(const FrameRecord& frame, double area_epsilon = 1e-6);

/// Highest image shape scores, emitted in descending-score order.
FilteredSet tfdp_select(const CandidateSet& candidates, std::size_t budget, double area_epsilon = 1e-6);

/// Items whose distance to the mean embedding is closest to the median distance.
FilteredSet moderate_select(const CandidateSet& candidates, std::size_t budget);

/// Lowest frame confidence first.
FilteredSet least_confidence_select(const CandidateSet& candidates, std::size_t budget);

/// Uniform sample without replacement (partial Fisher-Yates on mt19937_64).
FilteredSet random_select(const CandidateSet& candidates, std::size_t budget, std::uint64_t seed);

}  // namespace dsbad
