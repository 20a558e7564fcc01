#include "aif/envsim/remote.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <json.hpp>

#include "aif/common/check.hpp"

namespace aif::envsim {

using nlohmann::json;

namespace {

void set_timeout(int fd, double seconds) {
    timeval tv;
    tv.tv_sec = static_cast<long>(seconds);
    tv.tv_usec = static_cast<long>((seconds - static_cast<double>(tv.tv_sec)) * 1e6);
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

void send_all(int fd, const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) fail_runtime("remote env: send failed");
        sent += static_cast<std::size_t>(n);
    }
}

void send_json(int fd, const json& j) { send_all(fd, j.dump() + "\n"); }

// Reads one newline-terminated line using the caller's carry buffer.
// Empty optional-style: returns false on orderly shutdown.
bool recv_line(int fd, std::string& carry, std::string& line, bool timeout_is_error) {
    for (;;) {
        auto pos = carry.find('\n');
        if (pos != std::string::npos) {
            line = carry.substr(0, pos);
            carry.erase(0, pos + 1);
            return true;
        }
        char chunk[4096];
        ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n == 0) return false;
        if (n < 0) {
            if ((errno == EAGAIN || errno == EWOULDBLOCK) && timeout_is_error)
                fail_runtime("remote env: timeout waiting for reply");
            return false;
        }
        carry.append(chunk, static_cast<std::size_t>(n));
    }
}

json spec_to_json(const EnvSpec& spec) {
    return json{{"type", "spec"},
                {"d_s", spec.d_s},
                {"d_a", spec.d_a},
                {"bounds", {{"low", spec.action_low}, {"high", spec.action_high}}},
                {"max_steps", spec.max_steps}};
}

}  // namespace

// ------------------------------------------------------------------ client

RemoteEnv::RemoteEnv(const std::string& endpoint, double timeout_seconds) {
    auto colon = endpoint.rfind(':');
    check_arg(colon != std::string::npos, "RemoteEnv: endpoint must be host:port");
    std::string host = endpoint.substr(0, colon);
    int port = std::stoi(endpoint.substr(colon + 1));
    if (host == "localhost") host = "127.0.0.1";

    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    check_runtime(fd_ >= 0, "RemoteEnv: socket() failed");
    set_timeout(fd_, timeout_seconds);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    check_arg(inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1,
              "RemoteEnv: bad host address " + host);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd_);
        fd_ = -1;
        fail_runtime("RemoteEnv: cannot connect to " + endpoint);
    }
    int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

    json reply = json::parse(request(json{{"type", "hello"}}.dump()), nullptr, false);
    check_runtime(!reply.is_discarded() && reply.value("type", "") == "spec",
                  "RemoteEnv: handshake did not return a spec message");
    spec_.d_s = reply.at("d_s").get<std::size_t>();
    spec_.d_a = reply.at("d_a").get<std::size_t>();
    spec_.action_low = reply.at("bounds").at("low").get<std::vector<double>>();
    spec_.action_high = reply.at("bounds").at("high").get<std::vector<double>>();
    spec_.max_steps = reply.at("max_steps").get<std::size_t>();
    check_runtime(spec_.action_low.size() == spec_.d_a &&
                      spec_.action_high.size() == spec_.d_a,
                  "RemoteEnv: negotiated bounds do not match d_a");
}

RemoteEnv::~RemoteEnv() {
    if (fd_ >= 0) ::close(fd_);
}

std::string RemoteEnv::request(const std::string& line) {
    send_all(fd_, line + "\n");
    std::string reply;
    if (!recv_line(fd_, buffer_, reply, /*timeout_is_error=*/true))
        fail_runtime("RemoteEnv: connection closed by server");
    return reply;
}

std::vector<double> RemoteEnv::reset(std::uint64_t seed) {
    json reply = json::parse(request(json{{"type", "reset"}, {"seed", seed}}.dump()),
                             nullptr, false);
    check_runtime(!reply.is_discarded(), "RemoteEnv: malformed reset reply");
    if (reply.value("type", "") == "error")
        fail_runtime("RemoteEnv: server error: " + reply.value("message", ""));
    check_runtime(reply.value("type", "") == "state", "RemoteEnv: expected state message");
    auto s = reply.at("s").get<std::vector<double>>();
    check_runtime(s.size() == spec_.d_s, "RemoteEnv: state dimension mismatch");
    return s;
}

StepResult RemoteEnv::step(const std::vector<double>& action) {
    check_arg(action.size() == spec_.d_a, "RemoteEnv::step: action dimension mismatch");
    json reply = json::parse(request(json{{"type", "step"}, {"a", action}}.dump()),
                             nullptr, false);
    check_runtime(!reply.is_discarded(), "RemoteEnv: malformed step reply");
    if (reply.value("type", "") == "error")
        fail_runtime("RemoteEnv: server error: " + reply.value("message", ""));
    check_runtime(reply.value("type", "") == "result", "RemoteEnv: expected result message");
    StepResult r;
    r.next_state = reply.at("s").get<std::vector<double>>();
    r.reward = reply.at("r").get<double>();
    r.terminal = reply.at("terminal").get<bool>();
    r.truncated = reply.at("truncated").get<bool>();
    check_runtime(r.next_state.size() == spec_.d_s, "RemoteEnv: state dimension mismatch");
    return r;
}

std::unique_ptr<Env> remote_env(const std::string& endpoint, double timeout_seconds) {
    return std::make_unique<RemoteEnv>(endpoint, timeout_seconds);
}

// ------------------------------------------------------------------ server

EnvServer::EnvServer(std::function<std::unique_ptr<Env>()> factory, std::uint16_t port)
    : factory_(std::move(factory)) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    check_runtime(listen_fd_ >= 0, "EnvServer: socket() failed");
    int one = 1;
    setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    check_runtime(::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0,
                  "EnvServer: bind failed (port in use?)");
    check_runtime(::listen(listen_fd_, 4) == 0, "EnvServer: listen failed");

    socklen_t len = sizeof addr;
    getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

EnvServer::~EnvServer() { stop(); }

void EnvServer::serve_forever() {
    while (!stopping_.load()) {
        int client = ::accept(listen_fd_, nullptr, nullptr);
        if (client < 0) {
            if (stopping_.load()) break;
            continue;
        }
        client_fd_.store(client);
        handle_connection(client);
        client_fd_.store(-1);
        ::close(client);
    }
}

void EnvServer::start() {
    thread_ = std::thread([this] { serve_forever(); });
}

void EnvServer::stop() {
    if (stopping_.exchange(true)) {
        if (thread_.joinable()) thread_.join();
        return;
    }
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    int client = client_fd_.load();
    if (client >= 0) ::shutdown(client, SHUT_RDWR);
    if (thread_.joinable()) thread_.join();
}

void EnvServer::handle_connection(int client_fd) {
    std::unique_ptr<Env> env = factory_();
    std::string carry, line;
    int one = 1;
    setsockopt(client_fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

    while (recv_line(client_fd, carry, line, /*timeout_is_error=*/false)) {
        json msg = json::parse(line, nullptr, false);
        if (msg.is_discarded() || !msg.contains("type")) {
            send_json(client_fd, {{"type", "error"}, {"message", "malformed message"}});
            return;  // session closed
        }
        const std::string type = msg["type"].get<std::string>();
        try {
            if (type == "hello") {
                send_json(client_fd, spec_to_json(env->spec()));
            } else if (type == "reset") {
                auto s = env->reset(msg.at("seed").get<std::uint64_t>());
                send_json(client_fd, {{"type", "state"}, {"s", s}});
            } else if (type == "step") {
                auto a = msg.at("a").get<std::vector<double>>();
                if (a.size() != env->spec().d_a) {
                    send_json(client_fd, {{"type", "error"},
                                          {"message", "action dimension mismatch"}});
                    return;
                }
                StepResult r = env->step(a);
                send_json(client_fd, {{"type", "result"},
                                      {"s", r.next_state},
                                      {"r", r.reward},
                                      {"terminal", r.terminal},
                                      {"truncated", r.truncated}});
            } else {
                send_json(client_fd,
                          {{"type", "error"}, {"message", "unknown message type: " + type}});
                return;
            }
        } catch (const std::exception& e) {
            send_json(client_fd, {{"type", "error"}, {"message", e.what()}});
            return;
        }
    }
}

}  // namespace aif::envsim
