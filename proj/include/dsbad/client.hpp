#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsbad/protocol.hpp"
#include "dsbad/transport.hpp"

namespace dsbad {

/// The server answered with an ERROR message.
class ServerError : public Error {
public:
    using Error::Error;
};

struct LedgerEntry {
    std::uint64_t round_id = 0;
    std::uint64_t frames_sent = 0;
    std::uint64_t bytes_sent = 0;
    std::uint64_t frames_labeled = 0;
};

/// Per-round transmission accounting. Only completed rounds are recorded.
class TransmissionLedger {
public:
    void commit(const LedgerEntry& entry) { entries_.push_back(entry); }

    const std::vector<LedgerEntry>& entries() const noexcept { return entries_; }
    std::uint64_t total_frames_sent() const noexcept;
    std::uint64_t total_bytes_sent() const noexcept;

private:
    std::vector<LedgerEntry> entries_;
};

struct RoundResult {
    std::uint64_t round_id = 0;
    std::vector<LabeledFrame> labeled;
    LedgerEntry ledger;
};

/// Edge side of the annotation protocol. Synchronous within a round.
class AnnotationClient {
public:
    explicit AnnotationClient(ByteStream& stream, std::string name = "dsbad-edge")
        : stream_(&stream), name_(std::move(name)) {}

    /// Sends HELLO and waits for ACK.
    void hello();

    /// Submits F, waits for the matching LABELS and, if `labeled_out` is given, writes the
    /// labeled set there as NDJSON. The ledger is updated only when all of that succeeds.
    RoundResult client_round(std::uint64_t round_id, const FilteredSet& filtered,
                             const std::optional<std::filesystem::path>& labeled_out = std::nullopt);

    const TransmissionLedger& ledger() const noexcept { return ledger_; }
    bool connected() const noexcept { return greeted_; }

private:
    ByteStream* stream_;
    std::string name_;
    bool greeted_ = false;
    std::uint64_t last_round_ = 0;
    TransmissionLedger ledger_;
};

void write_labeled_set(const std::vector<LabeledFrame>& labeled, const std::filesystem::path& path);

}  // namespace dsbad
