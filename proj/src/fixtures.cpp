#include "dsbad/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dsbad/random.hpp"
#include "dsbad/stream_io.hpp"

namespace dsbad {

void FixtureSpec::validate() const {
    if (dim == 0) throw Error("fixture dimension d must be > 0");
    if (streams == 0) throw Error("fixture stream count must be > 0");
    if (clusters == 0) throw Error("fixture cluster count must be > 0");
    if (!(switch_prob >= 0.0 && switch_prob <= 1.0)) throw Error("switch_prob must lie in [0,1]");
    if (!(drift_rho >= 0.0 && drift_rho < 1.0)) throw Error("drift_rho must lie in [0,1)");
    if (!(scene_spread >= 0.0) || !(frame_noise >= 0.0)) throw Error("noise scales must be >= 0");
    if (!(image_bytes_jitter >= 0.0 && image_bytes_jitter < 1.0)) throw Error("image_bytes_jitter must lie in [0,1)");
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

GeneratedStream generate_stream(const FixtureSpec& spec, std::size_t index) {
    spec.validate();
    Rng rng(splitmix64(spec.seed + index));
    const std::size_t d = spec.dim;

    std::vector<std::vector<double>> centers(spec.clusters, std::vector<double>(d));
    for (auto& c : centers) {
        double sq = 0.0;
        do {
            sq = 0.0;
            for (auto& v : c) {
                v = standard_normal(rng);
                sq += v * v;
            }
        } while (sq == 0.0);
        const double inv = 1.0 / std::sqrt(sq);
        for (auto& v : c) v *= inv;
    }

    const double innovation = spec.scene_spread * std::sqrt(1.0 - spec.drift_rho * spec.drift_rho);
    std::vector<double> offset(d, 0.0);
    for (auto& o : offset) o = spec.scene_spread * standard_normal(rng);
    std::size_t scene = static_cast<std::size_t>(uniform_index(rng, spec.clusters));

    GeneratedStream out;
    out.frames.reserve(spec.frames);
    out.scene.reserve(spec.frames);
    for (std::size_t t = 0; t < spec.frames; ++t) {
        if (t > 0 && uniform01(rng) < spec.switch_prob) {
            scene = static_cast<std::size_t>(uniform_index(rng, spec.clusters));
        }
        std::vector<double> emb(d);
        for (;;) {
            double sq = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                offset[k] = spec.drift_rho * offset[k] + innovation * standard_normal(rng);
                emb[k] = centers[scene][k] + offset[k] + spec.frame_noise * standard_normal(rng);
                sq += emb[k] * emb[k];
            }
            if (sq > 0.0) break;
        }

        const auto n_obj = static_cast<std::size_t>(uniform_index(rng, spec.max_objects + 1));
        std::vector<Detection> dets;
        dets.reserve(n_obj);
        for (std::size_t o = 0; o < n_obj; ++o) {
            Detection det;
            det.class_id = static_cast<std::uint32_t>(uniform_index(rng, 2));
            det.confidence = std::sqrt(uniform01(rng));
            const double w = 10.0 + 190.0 * uniform01(rng);
            const double h = 10.0 + 190.0 * uniform01(rng);
            det.bbox = {(1920.0 - w) * uniform01(rng), (1080.0 - h) * uniform01(rng), w, h};
            dets.push_back(det);
        }

        std::uint64_t bytes = spec.image_bytes;
        if (spec.image_bytes_jitter > 0.0) {
            const double f = 1.0 + spec.image_bytes_jitter * (2.0 * uniform01(rng) - 1.0);
            bytes = static_cast<std::uint64_t>(std::llround(static_cast<double>(spec.image_bytes) * f));
        }

        const FrameId id = t;
        if (!dets.empty()) {
            std::vector<Detection> labels = dets;
            for (auto& l : labels) l.confidence = 0.5 + 0.5 * l.confidence;
            out.oracle.emplace(id, std::move(labels));
        }
        out.frames.push_back(
            FrameRecord{id, t * spec.frame_interval_ms, Embedding(std::move(emb)), std::move(dets), bytes});
        out.scene.push_back(scene);
    }
    return out;
}

std::vector<std::filesystem::path> write_fixtures(const FixtureSpec& spec, const std::filesystem::path& out_dir) {
    spec.validate();
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> paths;
    for (std::size_t k = 0; k < spec.streams; ++k) {
        const auto g = generate_stream(spec, k);
        char stream_name[32];
        char oracle_name[32];
        std::snprintf(stream_name, sizeof stream_name, "stream_%02zu.ndjson", k);
        std::snprintf(oracle_name, sizeof oracle_name, "oracle_%02zu.ndjson", k);
        write_stream(g.frames, out_dir / stream_name);
        write_oracle(g.oracle, out_dir / oracle_name);
        paths.push_back(out_dir / stream_name);
    }
    return paths;
}

}  // namespace dsbad
