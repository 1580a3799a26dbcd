#include "dsbad/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <limits>

#include "dsbad/latent_math.hpp"

namespace dsbad {

std::string_view to_string(GateRewarm r) noexcept {
    return r == GateRewarm::PerRound ? "per-round" : "once";
}

GateRewarm parse_gate_rewarm(std::string_view s) {
    if (s == "per-round") return GateRewarm::PerRound;
    if (s == "once") return GateRewarm::Once;
    throw Error("unknown gate.rewarm '" + std::string(s) + "' (expected per-round|once)");
}

void RoundConfig::validate() const {
    if (budget < 1) throw Error("budget must be >= 1");
    if (gamma < 1) throw Error("gamma must be >= 1");
    if (rounds < 1) throw Error("rounds must be >= 1");
    gate.validate();
    auto f = filter;
    f.budget = budget;
    f.validate();
}

std::optional<DiversityMetrics> diversity_metrics(std::span<const FrameRecord> frames) {
    if (frames.size() < 2) {
        return std::nullopt;
    }
    double min_dist = std::numeric_limits<double>::infinity();
    double sum_sim = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        for (std::size_t j = i + 1; j < frames.size(); ++j) {
            const double s = cosine_similarity(frames[i].embedding, frames[j].embedding);
            min_dist = std::min(min_dist, 1.0 - s);
            sum_sim += s;
            ++pairs;
        }
    }
    return DiversityMetrics{min_dist, sum_sim / static_cast<double>(pairs)};
}

nlohmann::json to_json(const RoundReport& r) {
    nlohmann::json j{{"round_id", r.round_id},
                     {"frames_observed", r.frames_observed},
                     {"warmup_frames", r.warmup_frames},
                     {"frames_gated_in", r.frames_gated_in},
                     {"frames_gated_out", r.frames_gated_out},
                     {"candidate_count", r.candidate_count},
                     {"selected_count", r.selected_count},
                     {"bytes_sent", r.bytes_sent},
                     {"gate_threshold", r.gate_threshold},
                     {"partial", r.partial},
                     {"selected_frame_ids", r.selected_frame_ids}};
    if (r.diversity) {
        j["diversity"] = {{"min_pairwise_cos_distance", r.diversity->min_pairwise_cos_distance},
                          {"mean_pairwise_cos_similarity", r.diversity->mean_pairwise_cos_similarity}};
    } else {
        j["diversity"] = nullptr;
    }
    if (r.wall_time_ms) {
        j["wall_time_ms"] = *r.wall_time_ms;
    }
    return j;
}

RoundRunner::RoundRunner(RoundConfig config, AnnotationClient& client, Options options)
    : config_(std::move(config)), client_(&client), options_(std::move(options)) {
    config_.validate();
    config_.filter.budget = config_.budget;
}

RoundReport RoundRunner::run_round(std::span<const FrameRecord> stream, std::size_t& cursor) {
    const auto started = std::chrono::steady_clock::now();
    RoundReport report;
    report.round_id = next_round_;

    if (!gate_ || config_.rewarm == GateRewarm::PerRound) {
        gate_.emplace(config_.gate);
    }
    StreamGate& gate = *gate_;

    CandidateSet candidates(config_.target_candidates());
    while (cursor < stream.size() && !candidates.full()) {
        const auto& frame = stream[cursor++];
        ++report.frames_observed;
        switch (gate.observe(frame)) {
            case GateDecision::DiscardedWarmup: ++report.warmup_frames; break;
            case GateDecision::Selected:
                ++report.frames_gated_in;
                candidates.add(frame);
                break;
            case GateDecision::Rejected: ++report.frames_gated_out; break;
        }
    }

    if (!gate.active() || report.frames_observed == report.warmup_frames) {
        throw StreamExhausted("warm-up consumed entire stream: round " + std::to_string(report.round_id) +
                              " needs w=" + std::to_string(config_.gate.warmup) + " warm-up frames, only " +
                              std::to_string(report.warmup_frames) + " remained");
    }
    report.gate_threshold = *gate.threshold();
    report.candidate_count = candidates.size();
    if (candidates.size() < config_.budget) {
        throw StreamExhausted("stream exhausted in round " + std::to_string(report.round_id) + " with |S|=" +
                              std::to_string(candidates.size()) + " < B=" + std::to_string(config_.budget));
    }
    report.partial = !candidates.full();

    auto filter_cfg = config_.filter;
    if (filter_cfg.seed) {
        *filter_cfg.seed += report.round_id - 1;
    }
    const auto selected = filter(candidates, filter_cfg);

    std::optional<std::filesystem::path> labeled_out;
    if (options_.output_dir) {
        labeled_out = *options_.output_dir / ("labeled_" + std::to_string(report.round_id) + ".ndjson");
    }
    const auto result = client_->client_round(report.round_id, selected, labeled_out);
    ++next_round_;

    report.selected_count = selected.size();
    report.bytes_sent = result.ledger.bytes_sent;
    report.diversity = diversity_metrics(selected);
    report.selected_frame_ids.reserve(selected.size());
    for (const auto& f : selected.items) {
        report.selected_frame_ids.push_back(f.frame_id);
    }
    if (options_.record_timing) {
        report.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    }
    if (options_.output_dir) {
        std::ofstream out(*options_.output_dir / ("round_" + std::to_string(report.round_id) + ".json"),
                          std::ios::binary | std::ios::trunc);
        out << to_json(report).dump(2) << '\n';
        if (!out) {
            throw Error("cannot write round report to " + options_.output_dir->string());
        }
    }
    return report;
}

std::vector<RoundReport> RoundRunner::run(std::span<const FrameRecord> stream) {
    std::vector<RoundReport> reports;
    std::size_t cursor = 0;
    for (std::size_t r = 0; r < config_.rounds; ++r) {
        reports.push_back(run_round(stream, cursor));
    }
    return reports;
}

RoundReport run_round(std::span<const FrameRecord> stream, const RoundConfig& cfg, const OracleLabels& oracle) {
    LoopbackStream transport(oracle);
    AnnotationClient client(transport);
    client.hello();
    RoundRunner runner(cfg, client, {});
    std::size_t cursor = 0;
    return runner.run_round(stream, cursor);
}

}  // namespace dsbad
