#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dsbad/protocol.hpp"

namespace dsbad {

class TransportError : public Error {
public:
    using Error::Error;
};

/// Bidirectional byte stream between an edge client and the annotation server.
class ByteStream {
public:
    virtual ~ByteStream() = default;

    virtual void write_all(std::span<const std::uint8_t> bytes) = 0;
    /// Reads at least one byte; returns 0 only when the peer has closed.
    virtual std::size_t read_some(std::span<std::uint8_t> buffer) = 0;
};

void send_message(ByteStream& stream, const Message& m);
/// Blocks until a whole frame arrives. Throws TransportError if the stream closes first.
Message receive_message(ByteStream& stream, std::uint64_t max_body = kMaxBodyBytes);

/// Server-side state for one client connection. Messages are handled strictly in order;
/// the session shares nothing but the (immutable) oracle with other sessions.
class ServerSession {
public:
    explicit ServerSession(const OracleLabels& oracle) : oracle_(&oracle) {}

    /// Feeds received bytes and returns the encoded replies. After a framing error the
    /// session replies with ERROR and is closed.
    std::vector<std::uint8_t> consume(std::span<const std::uint8_t> bytes);
    Message handle(const Message& m);

    bool closed() const noexcept { return closed_; }
    std::uint64_t last_round_id() const noexcept { return last_round_; }

private:
    const OracleLabels* oracle_;
    FrameDecoder decoder_;
    bool greeted_ = false;
    bool closed_ = false;
    std::uint64_t last_round_ = 0;
};

/// In-process transport: every complete client frame is handed synchronously to a
/// ServerSession and the replies are queued for reading.
class LoopbackStream final : public ByteStream {
public:
    explicit LoopbackStream(const OracleLabels& oracle) : session_(oracle) {}

    void write_all(std::span<const std::uint8_t> bytes) override;
    std::size_t read_some(std::span<std::uint8_t> buffer) override;

    const ServerSession& session() const noexcept { return session_; }

private:
    ServerSession session_;
    std::vector<std::uint8_t> inbound_;
    std::size_t read_pos_ = 0;
};

/// RAII TCP client connection.
class TcpStream final : public ByteStream {
public:
    /// `address` is "host:port".
    static TcpStream connect(const std::string& address);
    explicit TcpStream(int fd) : fd_(fd) {}
    TcpStream(TcpStream&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    TcpStream& operator=(TcpStream&& other) noexcept;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;
    ~TcpStream() override;

    void write_all(std::span<const std::uint8_t> bytes) override;
    std::size_t read_some(std::span<std::uint8_t> buffer) override;
    void shutdown() noexcept;

private:
    int fd_ = -1;
};

/// Threaded TCP annotation server: one thread per connected session.
class TcpServer {
public:
    explicit TcpServer(const OracleLabels& oracle) : oracle_(oracle) {}
    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;
    ~TcpServer();

    /// Binds "host:port" (port 0 picks a free port) and starts accepting in the background.
    /// Returns the bound port.
    std::uint16_t start(const std::string& address);
    /// Blocks until stop() is called from another thread.
    void wait();
    void stop();

    std::size_t sessions_served() const noexcept { return sessions_.load(); }

private:
    void accept_loop();
    void serve_connection(int fd);

    const OracleLabels& oracle_;
    int listen_fd_ = -1;
    std::atomic<bool> running_{false};
    std::atomic<std::size_t> sessions_{0};
    std::thread acceptor_;
    std::mutex workers_mu_;
    std::vector<std::thread> workers_;
    std::vector<int> open_fds_;
};

std::pair<std::string, std::uint16_t> split_address(const std::string& address);

}  // namespace dsbad
