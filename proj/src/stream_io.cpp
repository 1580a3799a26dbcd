#include "dsbad/stream_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace dsbad {

using nlohmann::json;

namespace {

std::uint64_t get_uint(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw Error(std::string("missing field '") + key + "'");
    }
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
        throw Error(std::string("field '") + key + "' must be a non-negative integer");
    }
    return it->get<std::uint64_t>();
}

double as_double(const json& j, const char* what) {
    if (!j.is_number()) {
        throw Error(std::string(what) + " must be a number");
    }
    return j.get<double>();
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

}  // namespace

json to_json(const Detection& d) {
    return json{{"class_id", d.class_id},
                {"confidence", d.confidence},
                {"bbox", json::array({d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h})}};
}

json to_json(const FrameRecord& r) {
    json dets = json::array();
    for (const auto& d : r.detections) {
        dets.push_back(to_json(d));
    }
    json j{{"frame_id", r.frame_id},
           {"timestamp_ms", r.timestamp_ms},
           {"embedding", std::vector<double>(r.embedding.values().begin(), r.embedding.values().end())},
           {"detections", std::move(dets)}};
    if (r.image_bytes != 0) {
        j["image_bytes"] = r.image_bytes;
    }
    return j;
}

Detection detection_from_json(const json& j) {
    if (!j.is_object()) {
        throw Error("detection must be an object");
    }
    Detection d;
    d.class_id = static_cast<std::uint32_t>(get_uint(j, "class_id"));
    if (!j.contains("confidence")) {
        throw Error("missing field 'confidence'");
    }
    d.confidence = as_double(j.at("confidence"), "confidence");
    const auto it = j.find("bbox");
    if (it == j.end() || !it->is_array() || it->size() != 4) {
        throw Error("bbox must be an array [x, y, w, h]");
    }
    d.bbox = {as_double((*it)[0], "bbox"), as_double((*it)[1], "bbox"), as_double((*it)[2], "bbox"),
              as_double((*it)[3], "bbox")};
    d.validate();
    return d;
}

FrameRecord frame_from_json(const json& j) {
    if (!j.is_object()) {
        throw Error("frame record must be a JSON object");
    }
    const auto frame_id = get_uint(j, "frame_id");
    const auto timestamp = get_uint(j, "timestamp_ms");

    const auto emb = j.find("embedding");
    if (emb == j.end() || !emb->is_array()) {
        throw Error("embedding must be an array");
    }
    std::vector<double> values;
    values.reserve(emb->size());
    for (const auto& v : *emb) {
        values.push_back(as_double(v, "embedding component"));
    }

    std::vector<Detection> detections;
    if (const auto dets = j.find("detections"); dets != j.end()) {
        if (!dets->is_array()) {
            throw Error("detections must be an array");
        }
        for (const auto& d : *dets) {
            detections.push_back(detection_from_json(d));
        }
    } else {
        throw Error("missing field 'detections'");
    }

    std::uint64_t image_bytes = 0;
    if (j.contains("image_bytes")) {
        image_bytes = get_uint(j, "image_bytes");
    }
    return FrameRecord{frame_id, timestamp, Embedding(std::move(values)), std::move(detections), image_bytes};
}

std::vector<FrameRecord> read_stream(std::istream& in) {
    std::vector<FrameRecord> records;
    std::unordered_set<FrameId> seen;
    std::size_t dim = 0;
    std::uint64_t last_ts = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            auto record = frame_from_json(json::parse(line));
            if (records.empty()) {
                dim = record.embedding.dim();
            } else if (record.embedding.dim() != dim) {
                throw Error("embedding dimension mismatch: expected " + std::to_string(dim) + ", got " +
                            std::to_string(record.embedding.dim()));
            }
            if (!seen.insert(record.frame_id).second) {
                throw Error("duplicate frame_id " + std::to_string(record.frame_id));
            }
            if (!records.empty() && record.timestamp_ms < last_ts) {
                throw Error("timestamp_ms decreases (" + std::to_string(record.timestamp_ms) + " < " +
                            std::to_string(last_ts) + ")");
            }
            last_ts = record.timestamp_ms;
            records.push_back(std::move(record));
        } catch (const json::exception& e) {
            throw ParseError(lineno, std::string("malformed JSON: ") + e.what());
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return records;
}

std::vector<FrameRecord> read_stream(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_stream(in);
}

void check_stream(std::span<const FrameRecord> records) {
    std::unordered_set<FrameId> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.embedding.dim() != records.front().embedding.dim()) {
            throw Error("record " + std::to_string(i) + ": embedding dimension mismatch");
        }
        if (!seen.insert(r.frame_id).second) {
            throw Error("record " + std::to_string(i) + ": duplicate frame_id " + std::to_string(r.frame_id));
        }
        if (i > 0 && r.timestamp_ms < records[i - 1].timestamp_ms) {
            throw Error("record " + std::to_string(i) + ": timestamp_ms decreases");
        }
        for (const auto& d : r.detections) {
            d.validate();
        }
    }
}

void write_stream(std::span<const FrameRecord> records, std::ostream& out) {
    check_stream(records);
    for (const auto& r : records) {
        out << to_json(r).dump() << '\n';
    }
    if (!out) {
        throw Error("write failed");
    }
}

void write_stream(std::span<const FrameRecord> records, const std::filesystem::path& path) {
    check_stream(records);
    auto out = open_out(path);
    write_stream(records, out);
}

OracleLabels read_oracle(std::istream& in) {
    OracleLabels labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = json::parse(line);
            if (!j.is_object()) {
                throw Error("oracle record must be a JSON object");
            }
            const auto id = get_uint(j, "frame_id");
            const auto lab = j.find("labels");
            if (lab == j.end() || !lab->is_array()) {
                throw Error("labels must be an array");
            }
            std::vector<Detection> dets;
            for (const auto& d : *lab) {
                dets.push_back(detection_from_json(d));
            }
            if (!labels.emplace(id, std::move(dets)).second) {
                throw Error("duplicate frame_id " + std::to_string(id));
            }
        } catch (const json::exception& e) {
            throw ParseError(lineno, std::string("malformed JSON: ") + e.what());
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return labels;
}

OracleLabels read_oracle(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_oracle(in);
}

void write_oracle(const OracleLabels& labels, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& [id, dets] : labels) {
        json arr = json::array();
        for (const auto& d : dets) {
            arr.push_back(to_json(d));
        }
        out << json{{"frame_id", id}, {"labels", std::move(arr)}}.dump() << '\n';
    }
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

void check_oracle_against_stream(const OracleLabels& labels, std::span<const FrameRecord> stream) {
    std::unordered_set<FrameId> ids;
    for (const auto& r : stream) {
        ids.insert(r.frame_id);
    }
    for (const auto& [id, _] : labels) {
        if (!ids.contains(id)) {
            throw Error("oracle label for frame_id " + std::to_string(id) + " not present in stream");
        }
    }
}

}  // namespace dsbad
