#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dsbad/model.hpp"

namespace dsbad {

struct GateConfig {
    double alpha = 0.1;
    std::size_t warmup = 720;

    void validate() const;
};

enum class GateDecision { DiscardedWarmup, Selected, Rejected };

const char* to_string(GateDecision d) noexcept;

/// TOP-CONFIDENCE gate. The first `warmup` frames only feed the threshold estimate
/// tau = quantile(confidences, 1 - alpha); afterwards a frame is selected iff its
/// confidence is strictly above tau. tau never changes once fixed.
class StreamGate {
public:
    explicit StreamGate(GateConfig config);

    GateDecision observe(const FrameRecord& frame);
    GateDecision observe_confidence(double confidence);

    bool active() const noexcept { return threshold_.has_value(); }
    std::optional<double> threshold() const noexcept { return threshold_; }
    const GateConfig& config() const noexcept { return config_; }
    std::size_t warmup_observed() const noexcept { return warmup_confidences_.size(); }

    std::size_t frames_seen() const noexcept { return seen_; }
    std::size_t frames_selected() const noexcept { return selected_; }

private:
    GateConfig config_;
    std::vector<double> warmup_confidences_;
    std::optional<double> threshold_;
    std::size_t seen_ = 0;
    std::size_t selected_ = 0;
};

/// Fraction of post-warm-up frames that were selected.
double gate_acceptance_rate(const StreamGate& gate);
double gate_acceptance_rate(std::size_t frames_seen, std::size_t frames_selected);

}  // namespace dsbad
