#include "dsbad/model.hpp"

#include <algorithm>
#include <cmath>

namespace dsbad {

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw Error("embedding must have dimension > 0");
    }
    double sq = 0.0;
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw Error("embedding contains a non-finite component");
        }
        sq += v * v;
    }
    norm_ = std::sqrt(sq);
    if (!(norm_ > 0.0)) {
        throw Error("embedding has zero norm");
    }
}

void Detection::validate() const {
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
        throw Error("detection confidence outside [0,1]");
    }
    if (!std::isfinite(bbox.x) || !std::isfinite(bbox.y) || !std::isfinite(bbox.w) ||
        !std::isfinite(bbox.h)) {
        throw Error("detection bbox has a non-finite coordinate");
    }
    if (bbox.w < 0.0 || bbox.h < 0.0) {
        throw Error("detection bbox has negative width or height");
    }
}

double frame_confidence(const FrameRecord& record) noexcept {
    double best = 0.0;
    for (const auto& d : record.detections) {
        best = std::max(best, d.confidence);
    }
    return best;
}

CandidateSet::CandidateSet(std::vector<FrameRecord> records) {
    items_.reserve(records.size());
    for (auto& r : records) {
        add(std::move(r));
    }
}

bool CandidateSet::add(FrameRecord record) {
    if (full()) {
        return false;
    }
    if (!ids_.insert(record.frame_id).second) {
        throw Error("duplicate frame_id " + std::to_string(record.frame_id) + " in candidate set");
    }
    items_.push_back(std::move(record));
    return true;
}

std::uint64_t FilteredSet::total_image_bytes() const noexcept {
    std::uint64_t total = 0;
    for (const auto& r : items) {
        total += r.image_bytes;
    }
    return total;
}

}  // namespace dsbad
