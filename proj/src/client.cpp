#include "dsbad/client.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "dsbad/stream_io.hpp"

namespace dsbad {

std::uint64_t TransmissionLedger::total_frames_sent() const noexcept {
    std::uint64_t total = 0;
    for (const auto& e : entries_) total += e.frames_sent;
    return total;
}

std::uint64_t TransmissionLedger::total_bytes_sent() const noexcept {
    std::uint64_t total = 0;
    for (const auto& e : entries_) total += e.bytes_sent;
    return total;
}

void AnnotationClient::hello() {
    send_message(*stream_, Message{0, HelloBody{name_}});
    const auto reply = receive_message(*stream_);
    if (const auto* err = std::get_if<ErrorBody>(&reply.payload)) {
        throw ServerError("server rejected HELLO: " + err->reason);
    }
    if (reply.type() != MessageType::Ack) {
        throw ProtocolError("expected ACK after HELLO, got " + std::string(to_string(reply.type())));
    }
    greeted_ = true;
}

RoundResult AnnotationClient::client_round(std::uint64_t round_id, const FilteredSet& filtered,
                                           const std::optional<std::filesystem::path>& labeled_out) {
    if (!greeted_) {
        throw Error("client_round called before hello()");
    }
    if (round_id <= last_round_) {
        throw Error("round_id must strictly increase within a session");
    }
    if (filtered.items.size() > filtered.budget) {
        throw Error("filtered set exceeds its budget");
    }

    SubmitBatchBody batch{filtered.items};
    send_message(*stream_, Message{round_id, batch});
    const auto reply = receive_message(*stream_);
    last_round_ = round_id;

    if (const auto* err = std::get_if<ErrorBody>(&reply.payload)) {
        throw ServerError(err->reason);
    }
    const auto* labels = std::get_if<LabelsBody>(&reply.payload);
    if (labels == nullptr) {
        throw ProtocolError("expected LABELS, got " + std::string(to_string(reply.type())));
    }
    if (reply.round_id != round_id) {
        throw ProtocolError("LABELS round_id " + std::to_string(reply.round_id) + " does not match " +
                            std::to_string(round_id));
    }
    if (labels->labels.size() != filtered.items.size()) {
        throw ProtocolError("LABELS does not cover the submitted batch");
    }
    for (std::size_t i = 0; i < filtered.items.size(); ++i) {
        if (labels->labels[i].frame_id != filtered.items[i].frame_id) {
            throw ProtocolError("LABELS frame ids do not match the submitted batch");
        }
    }

    if (labeled_out) {
        write_labeled_set(labels->labels, *labeled_out);
    }

    RoundResult result;
    result.round_id = round_id;
    result.labeled = labels->labels;
    result.ledger = {round_id, filtered.items.size(), filtered.total_image_bytes(), labels->labels.size()};
    ledger_.commit(result.ledger);
    return result;
}

void write_labeled_set(const std::vector<LabeledFrame>& labeled, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    for (const auto& l : labeled) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& d : l.labels) {
            arr.push_back(to_json(d));
        }
        out << nlohmann::json{{"frame_id", l.frame_id}, {"labels", std::move(arr)}}.dump() << '\n';
    }
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

}  // namespace dsbad
