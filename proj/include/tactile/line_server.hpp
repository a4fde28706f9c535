#pragma once

// Line-delimited JSON over TCP: one gateway Session per connection.

#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <charconv>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>

#include "tactile/gateway.hpp"

namespace tactile {

struct HostPort {
    std::string host;
    std::uint16_t port = 0;
};

/// Parses "HOST:PORT" (port 0 picks an ephemeral port). nullopt when malformed.
inline std::optional<HostPort> parse_host_port(std::string_view s)
{
    const auto colon = s.rfind(':');
    if (colon == std::string_view::npos || colon == 0) return std::nullopt;
    const std::string_view port_text = s.substr(colon + 1);
    unsigned value = 0;
    const auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
    if (ec != std::errc{} || end != port_text.data() + port_text.size() || port_text.empty() || value > 65535) {
        return std::nullopt;
    }
    return HostPort{std::string(s.substr(0, colon)), static_cast<std::uint16_t>(value)};
}

class LineServer {
public:
    static constexpr std::size_t kMaxLineBytes = 1 << 20;

    explicit LineServer(std::shared_ptr<const GatewayConfig> config) : config_(std::move(config)) {}
    LineServer(const LineServer&) = delete;
    LineServer& operator=(const LineServer&) = delete;
    ~LineServer()
    {
        stop();
        // stop() has fenced off serve(), so the list no longer changes.
        for (auto& c : connections_) {
            if (c.thread.joinable()) c.thread.join();
        }
    }

    /// Binds and listens. Throws std::system_error (e.g. address in use).
    void listen(const HostPort& addr)
    {
        addrinfo hints{};
        hints.ai_family = AF_INET;
        hints.ai_socktype = SOCK_STREAM;
        hints.ai_flags = AI_PASSIVE;
        addrinfo* res = nullptr;
        const std::string port = std::to_string(addr.port);
        if (int rc = ::getaddrinfo(addr.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
            throw std::runtime_error("cannot resolve " + addr.host + ": " + ::gai_strerror(rc));
        }
        std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);

        const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
        if (fd < 0) throw std::system_error(errno, std::generic_category(), "socket");
        const int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, res->ai_addr, res->ai_addrlen) < 0 || ::listen(fd, 16) < 0) {
            const int err = errno;
            ::close(fd);
            throw std::system_error(err, std::generic_category(), "bind " + addr.host + ":" + port);
        }
        sockaddr_in bound{};
        socklen_t len = sizeof bound;
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
        port_ = ntohs(bound.sin_port);
        listen_fd_ = fd;
    }

    std::uint16_t port() const { return port_; }

    /// Accepts connections until stop(); each one runs on its own thread.
    void serve()
    {
        while (!stopping_) {
            const int client = ::accept(listen_fd_, nullptr, nullptr);
            if (client < 0) {
                if (errno == EINTR) continue;
                break;
            }
            std::lock_guard lock(mutex_);
            if (stopping_) {
                ::close(client);
                break;
            }
            auto& conn = connections_.emplace_back();
            conn.fd = client;
            conn.thread = std::thread([this, &conn] { run_connection(conn); });
        }
    }

    void stop()
    {
        if (stopping_.exchange(true)) return;
        if (listen_fd_ >= 0) {
            ::shutdown(listen_fd_, SHUT_RDWR);
            ::close(listen_fd_);
        }
        std::lock_guard lock(mutex_);
        for (auto& c : connections_) {
            if (c.fd >= 0) ::shutdown(c.fd, SHUT_RDWR);
        }
    }

private:
    struct Connection {
        int fd = -1;
        std::thread thread;
    };

    static bool write_all(int fd, std::string_view data)
    {
        while (!data.empty()) {
            const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                return false;
            }
            data.remove_prefix(static_cast<std::size_t>(n));
        }
        return true;
    }

    void run_connection(Connection& conn)
    {
        Session session(config_);
        std::string buffer;
        char chunk[4096];
        bool open = true;
        while (open) {
            const ssize_t n = ::recv(conn.fd, chunk, sizeof chunk, 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) break;
            buffer.append(chunk, static_cast<std::size_t>(n));
            std::size_t start = 0;
            for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
                std::string_view line(buffer.data() + start, nl - start);
                if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
                if (line.empty()) continue;
                std::string out;
                for (const auto& reply : session.handle_line(line)) out += reply.dump() + "\n";
                if (!write_all(conn.fd, out)) {
                    open = false;
                    break;
                }
            }
            buffer.erase(0, start);
            if (buffer.size() > kMaxLineBytes) {
                write_all(conn.fd, error_message("line too long").dump() + "\n");
                break;
            }
        }
        std::lock_guard lock(mutex_);
        ::close(conn.fd);
        conn.fd = -1;
    }

    std::shared_ptr<const GatewayConfig> config_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::mutex mutex_;
    std::list<Connection> connections_;
};

}  // namespace tactile
