#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dsbad/model.hpp"

namespace dsbad {

// Wire format: 4-byte big-endian body length N, then N bytes of canonical JSON
// (sorted keys, no insignificant whitespace):
//   {"payload":{...},"round_id":<uint>,"type":"HELLO|SUBMIT_BATCH|LABELS|ACK|ERROR"}

class ProtocolError : public Error {
public:
    using Error::Error;
};

inline constexpr std::size_t kFrameHeaderBytes = 4;
inline constexpr std::uint64_t kMaxBodyBytes = 0xFFFF'FFFFull;

enum class MessageType { Hello, SubmitBatch, Labels, Ack, Error };

std::string_view to_string(MessageType t) noexcept;
MessageType parse_message_type(std::string_view s);

struct HelloBody {
    std::string client;
    friend bool operator==(const HelloBody&, const HelloBody&) = default;
};

/// Frames selected for annotation; each frame's image_bytes is its declared payload size.
struct SubmitBatchBody {
    std::vector<FrameRecord> frames;
    friend bool operator==(const SubmitBatchBody&, const SubmitBatchBody&) = default;
};

struct LabeledFrame {
    FrameId frame_id = 0;
    std::vector<Detection> labels;
    friend bool operator==(const LabeledFrame&, const LabeledFrame&) = default;
};

/// Teacher labels, one entry per submitted frame in submission order.
struct LabelsBody {
    std::vector<LabeledFrame> labels;
    friend bool operator==(const LabelsBody&, const LabelsBody&) = default;
};

struct AckBody {
    friend bool operator==(const AckBody&, const AckBody&) = default;
};

struct ErrorBody {
    std::string reason;
    friend bool operator==(const ErrorBody&, const ErrorBody&) = default;
};

using Payload = std::variant<HelloBody, SubmitBatchBody, LabelsBody, AckBody, ErrorBody>;

struct Message {
    std::uint64_t round_id = 0;
    Payload payload;

    MessageType type() const noexcept { return static_cast<MessageType>(payload.index()); }
    friend bool operator==(const Message&, const Message&) = default;
};

/// Canonical JSON body without the length prefix.
std::string encode_body(const Message& m);
Message decode_body(std::string_view body);

/// Length-prefixed frame. Throws ProtocolError if the body exceeds max_body bytes.
std::vector<std::uint8_t> encode_message(const Message& m, std::uint64_t max_body = kMaxBodyBytes);

/// Decodes one frame from the front of `bytes`. Throws ProtocolError("incomplete frame")
/// when fewer bytes are available than the header declares.
Message decode_message(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr,
                       std::uint64_t max_body = kMaxBodyBytes);

/// Incremental decoder for a byte stream carrying back-to-back frames.
class FrameDecoder {
public:
    explicit FrameDecoder(std::uint64_t max_body = kMaxBodyBytes) : max_body_(max_body) {}

    void feed(std::span<const std::uint8_t> bytes);
    /// Next complete message, if one is buffered. Throws ProtocolError on an oversize
    /// header or a malformed body.
    std::optional<Message> next();
    std::size_t buffered() const noexcept { return buffer_.size() - offset_; }

private:
    std::uint64_t max_body_;
    std::vector<std::uint8_t> buffer_;
    std::size_t offset_ = 0;
};

/// Teacher stand-in: labels every batch frame from the oracle; absent frames get no labels.
Message teacher_annotate(const SubmitBatchBody& batch, std::uint64_t round_id, const OracleLabels& oracle);

}  // namespace dsbad
