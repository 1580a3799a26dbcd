#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dsbad/model.hpp"

namespace dsbad {

/// Synthetic camera streams. Generative model, per stream:
///  - `clusters` scene centers, each a standard-normal vector scaled to unit length.
///  - A sticky scene process: each frame switches to a uniformly drawn scene with
///    probability `switch_prob`, otherwise stays.
///  - Within a scene, an AR(1) drift offset o_t = rho * o_{t-1} + e_t with stationary
///    per-component std `scene_spread`, plus iid per-frame noise of std `frame_noise`.
///    The embedding is center + o_t + noise.
///  - 0..max_objects detections per frame (uniform count). Confidences are
///    sqrt(uniform), boxes uniform in size within a 1920x1080 image, classes 0 or 1.
///  - Teacher labels (oracle) for every frame that has at least one detection: the same
///    boxes and classes with confidence 0.5 + 0.5 * student confidence.
///  - Every frame declares `image_bytes` (constant unless `image_bytes_jitter` > 0,
///    which draws uniformly within +/- that fraction).
/// Timestamps advance by `frame_interval_ms`. Stream k draws from mt19937_64 seeded by
/// splitmix64(seed + k), so output is byte-identical for a given spec.
struct FixtureSpec {
    std::size_t streams = 15;
    std::size_t frames = 2000;
    std::size_t dim = 16;
    std::size_t clusters = 8;
    std::uint64_t seed = 7;
    double switch_prob = 0.02;
    double drift_rho = 0.9;
    double scene_spread = 0.08;
    double frame_noise = 0.02;
    std::size_t max_objects = 4;
    std::uint64_t image_bytes = 250'000;
    double image_bytes_jitter = 0.0;
    std::uint64_t frame_interval_ms = 40;

    void validate() const;
};

struct GeneratedStream {
    std::vector<FrameRecord> frames;
    OracleLabels oracle;
    std::vector<std::size_t> scene;  // ground-truth scene of each frame
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

GeneratedStream generate_stream(const FixtureSpec& spec, std::size_t index);

/// Writes stream_NN.ndjson and oracle_NN.ndjson for every stream; returns the stream paths.
std::vector<std::filesystem::path> write_fixtures(const FixtureSpec& spec, const std::filesystem::path& out_dir);

}  // namespace dsbad
