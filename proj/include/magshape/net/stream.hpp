#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "magshape/pipeline.hpp"

namespace magshape::net {

// Replays a frames file (raw lines, verbatim) over TCP at a fixed rate.
// Pacing uses the monotonic clock with absolute deadlines, so no drift
// accumulates: line k is sent no earlier than start + k/rate. Each accepted
// connection gets its own pacing loop over the whole file, then the socket
// closes.
class ReplayServer {
public:
    ReplayServer(std::string address, int port, std::vector<std::string> lines, double rate_hz);
    ~ReplayServer();

    ReplayServer(const ReplayServer&) = delete;
    ReplayServer& operator=(const ReplayServer&) = delete;

    void start();  // bind + listen + accept loop; throws Error(Data) on bind failure
    void stop();
    int port() const { return port_; }  // actual port (useful with port 0)

private:
    void accept_loop();
    void serve(int client_fd);

    std::string address_;
    int port_;
    std::vector<std::string> lines_;
    double rate_hz_;
    int listen_fd_ = -1;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::mutex conn_mutex_;
    std::vector<std::thread> conn_threads_;
};

std::vector<std::string> read_lines(const std::filesystem::path& path);

struct StreamClientStats {
    size_t frames_ok = 0;
    size_t skipped = 0;     // malformed or non-finite lines
    int reconnects = 0;
    bool completed = false; // saw a clean end of stream
};

// Connects, consumes newline-delimited frames, runs the reconstruction
// pipeline per frame and writes recon CSV rows to `out` (identical to the
// batch path). Connection failures and mid-stream drops are retried up to
// max_retries with a short backoff; a clean server close ends the run.
StreamClientStats run_stream_client(const std::string& address, int port,
                                    const ReconstructOptions& opts, std::ostream& out,
                                    int max_retries);

}  // namespace magshape::net
