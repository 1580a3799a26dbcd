#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace dsbad {

using FrameId = std::uint64_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by file readers; carries the 1-based line number of the offending record.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Latent representation of a frame. Non-empty, finite, nonzero norm.
class Embedding {
public:
    explicit Embedding(std::vector<double> values);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double norm() const noexcept { return norm_; }

    friend bool operator==(const Embedding& a, const Embedding& b) { return a.values_ == b.values_; }

private:
    std::vector<double> values_;
    double norm_ = 0.0;
};

struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
    std::uint32_t class_id = 0;
    double confidence = 0.0;
    BoundingBox bbox;

    /// Throws Error if confidence is outside [0,1] or the box has negative extent.
    void validate() const;

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct FrameRecord {
    FrameId frame_id = 0;
    std::uint64_t timestamp_ms = 0;
    Embedding embedding;
    std::vector<Detection> detections;
    // Declared size of the image payload that would accompany this frame on the wire.
    std::uint64_t image_bytes = 0;

    friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

/// Image-level student confidence: max over detections, 0 when there are none.
double frame_confidence(const FrameRecord& record) noexcept;

/// Buffered candidates in acquisition order. Duplicate frame ids are rejected.
class CandidateSet {
public:
    CandidateSet() = default;
    explicit CandidateSet(std::optional<std::size_t> capacity) : capacity_(capacity) {}
    explicit CandidateSet(std::vector<FrameRecord> records);

    /// Returns false when the set is at capacity. Throws Error on a duplicate frame id.
    bool add(FrameRecord record);

    bool full() const noexcept { return capacity_ && items_.size() >= *capacity_; }
    bool empty() const noexcept { return items_.empty(); }
    std::size_t size() const noexcept { return items_.size(); }
    std::optional<std::size_t> capacity() const noexcept { return capacity_; }
    const FrameRecord& operator[](std::size_t i) const { return items_[i]; }
    std::span<const FrameRecord> items() const noexcept { return items_; }

private:
    std::vector<FrameRecord> items_;
    std::unordered_set<FrameId> ids_;
    std::optional<std::size_t> capacity_;
};

/// Output of a filter: the frames chosen for transmission, in selection order.
struct FilteredSet {
    std::vector<FrameRecord> items;
    std::size_t budget = 0;

    std::size_t size() const noexcept { return items.size(); }
    std::uint64_t total_image_bytes() const noexcept;
};

/// Teacher pseudo-labels keyed by frame id.
using OracleLabels = std::map<FrameId, std::vector<Detection>>;

}  // namespace dsbad
