#include "dsbad/stream_gate.hpp"

#include "dsbad/latent_math.hpp"

namespace dsbad {

void GateConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error("gate.alpha must lie in (0,1)");
    }
    if (warmup < 1) {
        throw Error("gate.warmup must be >= 1");
    }
}

const char* to_string(GateDecision d) noexcept {
    switch (d) {
        case GateDecision::DiscardedWarmup: return "discarded-warmup";
        case GateDecision::Selected: return "selected";
        case GateDecision::Rejected: return "rejected";
    }
    return "?";
}

StreamGate::StreamGate(GateConfig config) : config_(config) {
    config_.validate();
    warmup_confidences_.reserve(config_.warmup);
}

GateDecision StreamGate::observe(const FrameRecord& frame) {
    return observe_confidence(frame_confidence(frame));
}

GateDecision StreamGate::observe_confidence(double confidence) {
    if (!threshold_) {
        warmup_confidences_.push_back(confidence);
        if (warmup_confidences_.size() == config_.warmup) {
            threshold_ = quantile(warmup_confidences_, 1.0 - config_.alpha);
        }
        return GateDecision::DiscardedWarmup;
    }
    ++seen_;
    if (confidence > *threshold_) {
        ++selected_;
        return GateDecision::Selected;
    }
    return GateDecision::Rejected;
}

double gate_acceptance_rate(const StreamGate& gate) {
    if (!gate.active()) {
        throw Error("acceptance rate is undefined during warm-up");
    }
    return gate_acceptance_rate(gate.frames_seen(), gate.frames_selected());
}

double gate_acceptance_rate(std::size_t frames_seen, std::size_t frames_selected) {
    if (frames_seen == 0) {
        throw Error("acceptance rate is undefined with no frames seen");
    }
    if (frames_selected > frames_seen) {
        throw Error("frames_selected exceeds frames_seen");
    }
    return static_cast<double>(frames_selected) / static_cast<double>(frames_seen);
}

}  // namespace dsbad
