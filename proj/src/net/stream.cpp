#include "magshape/net/stream.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <ostream>

#include "magshape/core/error.hpp"
#include "magshape/io/dataset_io.hpp"
#include "magshape/io/frames.hpp"

namespace magshape::net {

namespace {

using Clock = std::chrono::steady_clock;

sockaddr_in make_addr(const std::string& address, int port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (::inet_pton(AF_INET, address.c_str(), &addr.sin_addr) != 1)
        throw_usage("invalid IPv4 address: " + address);
    return addr;
}

bool send_all(int fd, const char* data, size_t len) {
    size_t sent = 0;
    while (sent < len) {
        ssize_t n = ::send(fd, data + sent, len - sent, MSG_NOSIGNAL);
        if (n <= 0) return false;
        sent += static_cast<size_t>(n);
    }
    return true;
}

}  // namespace

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("cannot open frames file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

ReplayServer::ReplayServer(std::string address, int port, std::vector<std::string> lines,
                           double rate_hz)
    : address_(std::move(address)), port_(port), lines_(std::move(lines)), rate_hz_(rate_hz) {
    if (rate_hz_ <= 0.0) throw_usage("replay rate must be positive");
}

ReplayServer::~ReplayServer() { stop(); }

void ReplayServer::start() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw_data("socket() failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = make_addr(address_, port_);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw_data("cannot bind " + address_ + ":" + std::to_string(port_) + ": " +
                   std::strerror(errno));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    if (::listen(listen_fd_, 8) != 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw_data("listen() failed");
    }
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void ReplayServer::stop() {
    if (!running_.exchange(false)) {
        if (accept_thread_.joinable()) accept_thread_.join();
        return;
    }
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> conns;
    {
        std::lock_guard lock(conn_mutex_);
        conns.swap(conn_threads_);
    }
    for (auto& t : conns)
        if (t.joinable()) t.join();
}

void ReplayServer::accept_loop() {
    while (running_) {
        int client = ::accept(listen_fd_, nullptr, nullptr);
        if (client < 0) {
            if (!running_) break;
            continue;
        }
        std::lock_guard lock(conn_mutex_);
        conn_threads_.emplace_back([this, client] { serve(client); });
    }
}

void ReplayServer::serve(int client_fd) {
    int one = 1;
    ::setsockopt(client_fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    const auto start = Clock::now();
    const auto period = std::chrono::duration<double>(1.0 / rate_hz_);
    for (size_t k = 0; k < lines_.size() && running_; ++k) {
        std::this_thread::sleep_until(
            start + std::chrono::duration_cast<Clock::duration>(period * static_cast<double>(k)));
        std::string payload = lines_[k];
        payload += '\n';
        if (!send_all(client_fd, payload.data(), payload.size())) break;
    }
    ::close(client_fd);
}

StreamClientStats run_stream_client(const std::string& address, int port,
                                    const ReconstructOptions& opts, std::ostream& out,
                                    int max_retries) {
    StreamClientStats stats;
    io::write_recon_csv_header(out);

    int attempts_left = max_retries;
    bool wrote_any = false;
    for (;;) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw_data("socket() failed");
        sockaddr_in addr = make_addr(address, port);
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            ::close(fd);
            if (attempts_left-- <= 0) {
                if (!wrote_any)
                    throw_data("cannot connect to " + address + ":" + std::to_string(port));
                return stats;  // stream broke and the server never came back
            }
            ++stats.reconnects;
            std::this_thread::sleep_for(std::chrono::milliseconds(200));
            continue;
        }

        std::string buffer;
        char chunk[4096];
        bool clean_eof = false;
        for (;;) {
            ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
            if (n == 0) {
                clean_eof = true;
                break;
            }
            if (n < 0) break;  // reset mid-stream: reconnect below
            buffer.append(chunk, static_cast<size_t>(n));
            size_t pos;
            while ((pos = buffer.find('\n')) != std::string::npos) {
                std::string line = buffer.substr(0, pos);
                buffer.erase(0, pos + 1);
                if (line.empty()) continue;
                auto frame =
                    io::parse_frame_line(line, opts.geometry.n_gratings, opts.geometry.n_cores());
                if (!frame || !frame->values.allFinite()) {
                    ++stats.skipped;
                    continue;
                }
                FrameResult res = reconstruct_frame(*frame, opts);
                io::write_recon_csv_row(out, stats.frames_ok, frame->timestamp_s, res.fit.curve,
                                        res.fit.rmse_mm);
                ++stats.frames_ok;
                wrote_any = true;
            }
        }
        ::close(fd);
        if (clean_eof) {
            stats.completed = true;
            return stats;
        }
        if (attempts_left-- <= 0) return stats;
        ++stats.reconnects;
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
}

}  // namespace magshape::net
