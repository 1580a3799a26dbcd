#include "dsbad/transport.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace dsbad {

namespace {

std::string errno_text(const char* what) {
    return std::string(what) + ": " + std::strerror(errno);
}

void read_exact(ByteStream& stream, std::span<std::uint8_t> out) {
    std::size_t got = 0;
    while (got < out.size()) {
        const auto n = stream.read_some(out.subspan(got));
        if (n == 0) {
            throw TransportError("connection closed mid-frame (" + std::to_string(got) + " of " +
                                 std::to_string(out.size()) + " bytes)");
        }
        got += n;
    }
}

}  // namespace

std::pair<std::string, std::uint16_t> split_address(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos || colon + 1 == address.size()) {
        throw Error("address must be host:port, got '" + address + "'");
    }
    const auto host = address.substr(0, colon);
    unsigned long port = 0;
    try {
        std::size_t used = 0;
        port = std::stoul(address.substr(colon + 1), &used);
        if (used != address.size() - colon - 1) {
            throw std::invalid_argument("trailing characters");
        }
    } catch (const std::exception&) {
        throw Error("invalid port in address '" + address + "'");
    }
    if (port > 65535) {
        throw Error("port out of range in address '" + address + "'");
    }
    return {host.empty() ? "127.0.0.1" : host, static_cast<std::uint16_t>(port)};
}

void send_message(ByteStream& stream, const Message& m) {
    const auto bytes = encode_message(m);
    stream.write_all(bytes);
}

Message receive_message(ByteStream& stream, std::uint64_t max_body) {
    std::vector<std::uint8_t> frame(kFrameHeaderBytes);
    read_exact(stream, frame);
    const std::uint64_t n = (std::uint64_t{frame[0]} << 24) | (std::uint64_t{frame[1]} << 16) |
                            (std::uint64_t{frame[2]} << 8) | std::uint64_t{frame[3]};
    if (n > max_body) {
        throw ProtocolError("oversize frame: body of " + std::to_string(n) + " bytes exceeds limit of " +
                            std::to_string(max_body));
    }
    frame.resize(kFrameHeaderBytes + n);
    read_exact(stream, std::span(frame).subspan(kFrameHeaderBytes));
    return decode_message(frame, nullptr, max_body);
}

// ---------------------------------------------------------------------------
// ServerSession

Message ServerSession::handle(const Message& m) {
    switch (m.type()) {
        case MessageType::Hello:
            if (greeted_) {
                return Message{m.round_id, ErrorBody{"duplicate HELLO"}};
            }
            greeted_ = true;
            return Message{m.round_id, AckBody{}};
        case MessageType::SubmitBatch: {
            if (!greeted_) {
                return Message{m.round_id, ErrorBody{"SUBMIT_BATCH before HELLO"}};
            }
            if (m.round_id <= last_round_) {
                return Message{m.round_id, ErrorBody{"round_id " + std::to_string(m.round_id) +
                                                     " does not increase (last " +
                                                     std::to_string(last_round_) + ")"}};
            }
            last_round_ = m.round_id;
            return teacher_annotate(std::get<SubmitBatchBody>(m.payload), m.round_id, *oracle_);
        }
        default:
            return Message{m.round_id, ErrorBody{"unexpected " + std::string(to_string(m.type())) +
                                                 " from client"}};
    }
}

std::vector<std::uint8_t> ServerSession::consume(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> out;
    if (closed_) {
        return out;
    }
    decoder_.feed(bytes);
    try {
        while (auto m = decoder_.next()) {
            const auto reply = encode_message(handle(*m));
            out.insert(out.end(), reply.begin(), reply.end());
        }
    } catch (const ProtocolError& e) {
        const auto reply = encode_message(Message{0, ErrorBody{e.what()}});
        out.insert(out.end(), reply.begin(), reply.end());
        closed_ = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// LoopbackStream

void LoopbackStream::write_all(std::span<const std::uint8_t> bytes) {
    if (session_.closed()) {
        throw TransportError("loopback session closed");
    }
    if (read_pos_ == inbound_.size()) {
        inbound_.clear();
        read_pos_ = 0;
    }
    const auto replies = session_.consume(bytes);
    inbound_.insert(inbound_.end(), replies.begin(), replies.end());
}

std::size_t LoopbackStream::read_some(std::span<std::uint8_t> buffer) {
    const auto n = std::min(buffer.size(), inbound_.size() - read_pos_);
    std::copy_n(inbound_.begin() + static_cast<std::ptrdiff_t>(read_pos_), n, buffer.begin());
    read_pos_ += n;
    return n;
}

// ---------------------------------------------------------------------------
// TcpStream

TcpStream TcpStream::connect(const std::string& address) {
    const auto [host, port] = split_address(address);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const auto service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
        throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    int fd = -1;
    for (auto* p = res; p != nullptr; p = p->ai_next) {
        fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
        if (fd < 0) {
            continue;
        }
        if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) {
            break;
        }
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) {
        throw TransportError("cannot connect to " + address);
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return TcpStream(fd);
}

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) {
            ::close(fd_);
        }
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

TcpStream::~TcpStream() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

void TcpStream::write_all(std::span<const std::uint8_t> bytes) {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        const auto n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw TransportError(errno_text("send"));
        }
        sent += static_cast<std::size_t>(n);
    }
}

std::size_t TcpStream::read_some(std::span<std::uint8_t> buffer) {
    for (;;) {
        const auto n = ::recv(fd_, buffer.data(), buffer.size(), 0);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw TransportError(errno_text("recv"));
        }
        return static_cast<std::size_t>(n);
    }
}

void TcpStream::shutdown() noexcept {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
    }
}

// ---------------------------------------------------------------------------
// TcpServer

TcpServer::~TcpServer() {
    stop();
}

std::uint16_t TcpServer::start(const std::string& address) {
    if (running_) {
        throw Error("server already running");
    }
    const auto [host, port] = split_address(address);
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) {
        throw TransportError(errno_text("socket"));
    }
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw TransportError("listen address must be an IPv4 literal, got '" + host + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 64) != 0) {
        const auto msg = errno_text("bind/listen");
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw TransportError(msg);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
    return ntohs(addr.sin_port);
}

void TcpServer::accept_loop() {
    while (running_) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, 50);
        if (rc <= 0) {
            continue;
        }
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            continue;
        }
        std::lock_guard lock(workers_mu_);
        if (!running_) {
            ::close(fd);
            break;
        }
        open_fds_.push_back(fd);
        workers_.emplace_back([this, fd] { serve_connection(fd); });
    }
}

void TcpServer::serve_connection(int fd) {
    ServerSession session(oracle_);
    std::vector<std::uint8_t> buf(64 * 1024);
    for (;;) {
        const auto n = ::recv(fd, buf.data(), buf.size(), 0);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            break;
        }
        const auto reply = session.consume(std::span(buf.data(), static_cast<std::size_t>(n)));
        std::size_t sent = 0;
        bool failed = false;
        while (sent < reply.size()) {
            const auto m = ::send(fd, reply.data() + sent, reply.size() - sent, MSG_NOSIGNAL);
            if (m < 0) {
                if (errno == EINTR) {
                    continue;
                }
                failed = true;
                break;
            }
            sent += static_cast<std::size_t>(m);
        }
        if (failed || session.closed()) {
            break;
        }
    }
    ++sessions_;
    std::lock_guard lock(workers_mu_);
    if (auto it = std::find(open_fds_.begin(), open_fds_.end(), fd); it != open_fds_.end()) {
        open_fds_.erase(it);
        ::close(fd);
    }
}

void TcpServer::wait() {
    while (running_) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
}

void TcpServer::stop() {
    if (!running_.exchange(false)) {
        return;
    }
    if (acceptor_.joinable()) {
        acceptor_.join();
    }
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(workers_mu_);
        for (int fd : open_fds_) {
            ::shutdown(fd, SHUT_RDWR);
        }
        workers.swap(workers_);
    }
    for (auto& t : workers) {
        t.join();
    }
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
}

}  // namespace dsbad
