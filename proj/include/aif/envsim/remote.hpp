#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "aif/envsim/env.hpp"

namespace aif::envsim {

// Wire protocol: newline-delimited JSON objects over a byte stream, field
// `type` in {hello, spec, reset, state, step, result, error}. Numbers are
// decimal text with round-trip precision.
//   hello            -> spec{d_s, d_a, bounds{low, high}, max_steps}
//   reset{seed}      -> state{s}
//   step{a}          -> result{s, r, terminal, truncated}
// A protocol violation yields error{message} and closes the session.

/// Client for an environment hosted behind the wire protocol. The spec is
/// negotiated at handshake; step/reset round-trip over the socket.
class RemoteEnv final : public Env {
public:
    /// endpoint "host:port"; timeout applies to connect and each round-trip.
    explicit RemoteEnv(const std::string& endpoint, double timeout_seconds = 10.0);
    ~RemoteEnv() override;

    RemoteEnv(const RemoteEnv&) = delete;
    RemoteEnv& operator=(const RemoteEnv&) = delete;

    const EnvSpec& spec() const override { return spec_; }
    std::vector<double> reset(std::uint64_t seed) override;
    StepResult step(const std::vector<double>& action) override;

private:
    std::string request(const std::string& line);
    std::string read_line();

    int fd_ = -1;
    EnvSpec spec_;
    std::string buffer_;
};

std::unique_ptr<Env> remote_env(const std::string& endpoint,
                                double timeout_seconds = 10.0);

/// Hosts environments behind the wire protocol. Each connection owns a
/// fresh environment instance; connections are served one at a time.
class EnvServer {
public:
    EnvServer(std::function<std::unique_ptr<Env>()> factory, std::uint16_t port);
    ~EnvServer();

    std::uint16_t port() const { return port_; }
    /// Serve until stop() (or process exit). Blocking.
    void serve_forever();
    /// Serve on a background thread.
    void start();
    void stop();

private:
    void handle_connection(int client_fd);

    std::function<std::unique_ptr<Env>()> factory_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::atomic<int> client_fd_{-1};
    std::thread thread_;
};

}  // namespace aif::envsim
