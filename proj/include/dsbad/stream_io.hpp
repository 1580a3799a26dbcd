#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsbad/model.hpp"

namespace dsbad {

// JSON mapping of the frame-record and oracle-label NDJSON formats:
//   {"frame_id": u, "timestamp_ms": u, "embedding": [f...], "detections": [...], "image_bytes": u?}
//   detection: {"class_id": u, "confidence": f, "bbox": [x, y, w, h]}
//   oracle line: {"frame_id": u, "labels": [detection...]}
nlohmann::json to_json(const Detection& d);
nlohmann::json to_json(const FrameRecord& r);
Detection detection_from_json(const nlohmann::json& j);
FrameRecord frame_from_json(const nlohmann::json& j);

/// Parses an NDJSON frame stream. Enforces a common embedding dimension, unique
/// frame ids and non-decreasing timestamps. Violations raise ParseError with the line.
std::vector<FrameRecord> read_stream(std::istream& in);
std::vector<FrameRecord> read_stream(const std::filesystem::path& path);

/// Throws Error if the records would not read back (duplicate ids, mixed dimensions,
/// decreasing timestamps, invalid detections).
void check_stream(std::span<const FrameRecord> records);

void write_stream(std::span<const FrameRecord> records, std::ostream& out);
void write_stream(std::span<const FrameRecord> records, const std::filesystem::path& path);

OracleLabels read_oracle(std::istream& in);
OracleLabels read_oracle(const std::filesystem::path& path);
void write_oracle(const OracleLabels& labels, const std::filesystem::path& path);

/// Every oracle frame id must appear in the stream.
void check_oracle_against_stream(const OracleLabels& labels, std::span<const FrameRecord> stream);

}  // namespace dsbad
