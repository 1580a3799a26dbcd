#include "dsbad/protocol.hpp"

#include <nlohmann/json.hpp>

#include "dsbad/stream_io.hpp"

namespace dsbad {

using nlohmann::json;

namespace {

constexpr std::string_view kTypeNames[] = {"HELLO", "SUBMIT_BATCH", "LABELS", "ACK", "ERROR"};

json detections_json(const std::vector<Detection>& dets) {
    json arr = json::array();
    for (const auto& d : dets) {
        arr.push_back(to_json(d));
    }
    return arr;
}

std::vector<Detection> detections_from(const json& arr) {
    if (!arr.is_array()) {
        throw ProtocolError("labels must be an array");
    }
    std::vector<Detection> out;
    for (const auto& d : arr) {
        out.push_back(detection_from_json(d));
    }
    return out;
}

struct PayloadToJson {
    json operator()(const HelloBody& b) const { return {{"client", b.client}}; }
    json operator()(const SubmitBatchBody& b) const {
        json frames = json::array();
        for (const auto& f : b.frames) {
            auto j = to_json(f);
            j["image_bytes"] = f.image_bytes;
            frames.push_back(std::move(j));
        }
        return {{"frames", std::move(frames)}};
    }
    json operator()(const LabelsBody& b) const {
        json arr = json::array();
        for (const auto& l : b.labels) {
            arr.push_back({{"frame_id", l.frame_id}, {"labels", detections_json(l.labels)}});
        }
        return {{"labels", std::move(arr)}};
    }
    json operator()(const AckBody&) const { return json::object(); }
    json operator()(const ErrorBody& b) const { return {{"reason", b.reason}}; }
};

Payload payload_from_json(MessageType type, const json& p) {
    if (!p.is_object()) {
        throw ProtocolError("payload must be an object");
    }
    switch (type) {
        case MessageType::Hello: return HelloBody{p.at("client").get<std::string>()};
        case MessageType::SubmitBatch: {
            SubmitBatchBody b;
            for (const auto& f : p.at("frames")) {
                b.frames.push_back(frame_from_json(f));
            }
            return b;
        }
        case MessageType::Labels: {
            LabelsBody b;
            for (const auto& e : p.at("labels")) {
                b.labels.push_back({e.at("frame_id").get<FrameId>(), detections_from(e.at("labels"))});
            }
            return b;
        }
        case MessageType::Ack: return AckBody{};
        case MessageType::Error: return ErrorBody{p.at("reason").get<std::string>()};
    }
    throw ProtocolError("unhandled message type");
}

std::uint64_t read_length(std::span<const std::uint8_t> bytes) {
    return (std::uint64_t{bytes[0]} << 24) | (std::uint64_t{bytes[1]} << 16) | (std::uint64_t{bytes[2]} << 8) |
           std::uint64_t{bytes[3]};
}

void check_length(std::uint64_t n, std::uint64_t max_body) {
    if (n > max_body) {
        throw ProtocolError("oversize frame: body of " + std::to_string(n) + " bytes exceeds limit of " +
                            std::to_string(max_body));
    }
}

}  // namespace

std::string_view to_string(MessageType t) noexcept {
    return kTypeNames[static_cast<std::size_t>(t)];
}

MessageType parse_message_type(std::string_view s) {
    for (std::size_t i = 0; i < std::size(kTypeNames); ++i) {
        if (kTypeNames[i] == s) {
            return static_cast<MessageType>(i);
        }
    }
    throw ProtocolError("unknown message type '" + std::string(s) + "'");
}

std::string encode_body(const Message& m) {
    const json j{{"type", std::string(to_string(m.type()))},
                 {"round_id", m.round_id},
                 {"payload", std::visit(PayloadToJson{}, m.payload)}};
    return j.dump();
}

Message decode_body(std::string_view body) {
    try {
        const auto j = json::parse(body);
        if (!j.is_object()) {
            throw ProtocolError("message body must be a JSON object");
        }
        const auto type = parse_message_type(j.at("type").get<std::string>());
        Message m;
        m.round_id = j.at("round_id").get<std::uint64_t>();
        m.payload = payload_from_json(type, j.at("payload"));
        return m;
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed message body: ") + e.what());
    } catch (const ProtocolError&) {
        throw;
    } catch (const Error& e) {
        throw ProtocolError(std::string("invalid message content: ") + e.what());
    }
}

std::vector<std::uint8_t> encode_message(const Message& m, std::uint64_t max_body) {
    const auto body = encode_body(m);
    check_length(body.size(), std::min(max_body, kMaxBodyBytes));
    const auto n = static_cast<std::uint32_t>(body.size());
    std::vector<std::uint8_t> out;
    out.reserve(kFrameHeaderBytes + body.size());
    out.push_back(static_cast<std::uint8_t>(n >> 24));
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    out.push_back(static_cast<std::uint8_t>(n >> 8));
    out.push_back(static_cast<std::uint8_t>(n));
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

Message decode_message(std::span<const std::uint8_t> bytes, std::size_t* consumed, std::uint64_t max_body) {
    if (bytes.size() < kFrameHeaderBytes) {
        throw ProtocolError("incomplete frame: header needs 4 bytes, " + std::to_string(bytes.size()) +
                            " available");
    }
    const auto n = read_length(bytes);
    check_length(n, max_body);
    if (bytes.size() - kFrameHeaderBytes < n) {
        throw ProtocolError("incomplete frame: length says " + std::to_string(n) + ", " +
                            std::to_string(bytes.size() - kFrameHeaderBytes) + " available");
    }
    const auto* body = reinterpret_cast<const char*>(bytes.data() + kFrameHeaderBytes);
    auto m = decode_body(std::string_view(body, static_cast<std::size_t>(n)));
    if (consumed) {
        *consumed = kFrameHeaderBytes + static_cast<std::size_t>(n);
    }
    return m;
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
    if (offset_ > 0 && offset_ == buffer_.size()) {
        buffer_.clear();
        offset_ = 0;
    }
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> FrameDecoder::next() {
    const std::span<const std::uint8_t> pending(buffer_.data() + offset_, buffer_.size() - offset_);
    if (pending.size() < kFrameHeaderBytes) {
        return std::nullopt;
    }
    const auto n = read_length(pending);
    check_length(n, max_body_);
    if (pending.size() - kFrameHeaderBytes < n) {
        return std::nullopt;
    }
    std::size_t used = 0;
    auto m = decode_message(pending, &used, max_body_);
    offset_ += used;
    return m;
}

Message teacher_annotate(const SubmitBatchBody& batch, std::uint64_t round_id, const OracleLabels& oracle) {
    LabelsBody body;
    body.labels.reserve(batch.frames.size());
    for (const auto& f : batch.frames) {
        const auto it = oracle.find(f.frame_id);
        body.labels.push_back({f.frame_id, it == oracle.end() ? std::vector<Detection>{} : it->second});
    }
    return Message{round_id, std::move(body)};
}

}  // namespace dsbad
