#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "dsbad/model.hpp"

namespace dsbad {

enum class DensityMetric { Inner, Cosine };

std::string_view to_string(DensityMetric m) noexcept;
DensityMetric parse_density_metric(std::string_view s);

double inner_product(const Embedding& a, const Embedding& b);

/// <a,b> / (|a||b|), clamped to [-1, 1].
double cosine_similarity(const Embedding& a, const Embedding& b);

/// Row-major n x n cosine similarity matrix over a candidate set.
class SimilarityMatrix {
public:
    explicit SimilarityMatrix(std::span<const FrameRecord> items);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<double> data_;
};

/// Latent density of each item: sum over every item of the set (itself included) of
/// the inner product (or cosine similarity) with it. Summation runs in set order.
std::vector<double> density_scores(std::span<const FrameRecord> items,
                                   DensityMetric metric = DensityMetric::Inner);

/// Nearest-rank quantile: the element of rank ceil(q*n) (1-based) of the sorted values;
/// q = 0 gives the minimum.
double quantile(std::span<const double> values, double q);

/// Euclidean distance of every embedding to the arithmetic mean embedding.
std::vector<double> distances_to_center(std::span<const FrameRecord> items);

}  // namespace dsbad
