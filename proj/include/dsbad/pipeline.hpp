#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsbad/client.hpp"
#include "dsbad/filters.hpp"
#include "dsbad/stream_gate.hpp"

namespace dsbad {

enum class GateRewarm { PerRound, Once };

std::string_view to_string(GateRewarm r) noexcept;
GateRewarm parse_gate_rewarm(std::string_view s);

struct RoundConfig {
    std::size_t budget = 32;
    std::size_t gamma = 8;
    std::size_t rounds = 1;
    GateConfig gate;
    GateRewarm rewarm = GateRewarm::PerRound;
    // filter.budget is overwritten by `budget` when a round runs.
    FilterConfig filter;

    std::size_t target_candidates() const noexcept { return gamma * budget; }
    void validate() const;
};

struct DiversityMetrics {
    double min_pairwise_cos_distance = 0.0;
    double mean_pairwise_cos_similarity = 0.0;
};

/// Pairwise cosine diversity of a selection; absent for fewer than two frames.
std::optional<DiversityMetrics> diversity_metrics(std::span<const FrameRecord> frames);
inline std::optional<DiversityMetrics> diversity_metrics(const FilteredSet& f) {
    return diversity_metrics(f.items);
}

struct RoundReport {
    std::uint64_t round_id = 0;
    std::size_t frames_observed = 0;
    std::size_t warmup_frames = 0;
    std::size_t frames_gated_in = 0;
    std::size_t frames_gated_out = 0;
    std::size_t candidate_count = 0;
    std::size_t selected_count = 0;
    std::uint64_t bytes_sent = 0;
    double gate_threshold = 0.0;
    std::optional<DiversityMetrics> diversity;
    // Stream ran out before the buffer reached gamma * B; the round still completed.
    bool partial = false;
    std::vector<FrameId> selected_frame_ids;
    std::optional<double> wall_time_ms;
};

nlohmann::json to_json(const RoundReport& r);

/// The stream ended before a round could be completed.
class StreamExhausted : public Error {
public:
    using Error::Error;
};

/// Drives rounds of gate -> buffer -> filter -> annotate over one stream.
class RoundRunner {
public:
    struct Options {
        std::optional<std::filesystem::path> output_dir;  // round_<id>.json, labeled_<id>.ndjson
        bool record_timing = false;
    };

    RoundRunner(RoundConfig config, AnnotationClient& client, Options options);

    /// Runs the next round starting at `cursor`, which is advanced past every consumed
    /// frame. Throws StreamExhausted when warm-up eats the rest of the stream or fewer
    /// than B candidates could be collected.
    RoundReport run_round(std::span<const FrameRecord> stream, std::size_t& cursor);

    /// Runs config.rounds rounds back to back over the stream.
    std::vector<RoundReport> run(std::span<const FrameRecord> stream);

    const RoundConfig& config() const noexcept { return config_; }

private:
    RoundConfig config_;
    AnnotationClient* client_;
    Options options_;
    std::optional<StreamGate> gate_;
    std::uint64_t next_round_ = 1;
};

/// Single round on a fresh in-process annotation server.
RoundReport run_round(std::span<const FrameRecord> stream, const RoundConfig& cfg, const OracleLabels& oracle);

}  // namespace dsbad
