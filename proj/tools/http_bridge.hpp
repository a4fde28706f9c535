#pragma once

// HTTP transport for browser clients. Same line-delimited messages as the
// TCP gateway, batched per request:
//
//   POST /api/session        body: hello line (+ more)  -> replies, X-Session-Id header
//   POST /api/session/<id>   body: message lines       -> replies
//
// Optionally serves a static UI bundle from "/".

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>

#include <httplib.h>

#include "tactile/gateway.hpp"
#include "tactile/line_server.hpp"

namespace tactile::cli {

class HttpBridge {
public:
    HttpBridge(std::shared_ptr<const GatewayConfig> config, const std::optional<std::filesystem::path>& static_dir)
        : config_(std::move(config))
    {
        if (static_dir && !server_.set_mount_point("/", static_dir->string())) {
            throw std::runtime_error("cannot serve static files from " + static_dir->string());
        }
        server_.Post("/api/session", [this](const httplib::Request& req, httplib::Response& res) {
            auto entry = std::make_shared<Entry>(config_);
            std::string id;
            {
                std::lock_guard lock(map_mutex_);
                id = "s" + std::to_string(++next_id_);
                sessions_[id] = entry;
            }
            res.set_header("X-Session-Id", id);
            res.set_content(run_lines(*entry, req.body), "application/x-ndjson");
        });
        server_.Post("/api/session/:id", [this](const httplib::Request& req, httplib::Response& res) {
            std::shared_ptr<Entry> entry;
            {
                std::lock_guard lock(map_mutex_);
                auto it = sessions_.find(req.path_params.at("id"));
                if (it != sessions_.end()) entry = it->second;
            }
            if (!entry) {
                res.status = 404;
                res.set_content(error_message("unknown session").dump() + "\n", "application/x-ndjson");
                return;
            }
            res.set_content(run_lines(*entry, req.body), "application/x-ndjson");
        });
    }

    /// Binds without serving yet. Returns the bound port, or throws.
    int bind(const HostPort& addr)
    {
        if (addr.port == 0) {
            port_ = server_.bind_to_any_port(addr.host);
        } else {
            port_ = server_.bind_to_port(addr.host, addr.port) ? addr.port : -1;
        }
        if (port_ < 0) throw std::runtime_error("cannot bind HTTP bridge to " + addr.host);
        return port_;
    }

    void serve() { server_.listen_after_bind(); }
    void stop() { server_.stop(); }
    void wait_until_ready() { server_.wait_until_ready(); }

private:
    struct Entry {
        explicit Entry(std::shared_ptr<const GatewayConfig> cfg) : session(std::move(cfg)) {}
        std::mutex mutex;
        Session session;
    };

    static std::string run_lines(Entry& entry, const std::string& body)
    {
        std::lock_guard lock(entry.mutex);
        std::istringstream in(body);
        std::string line;
        std::string out;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            for (const auto& reply : entry.session.handle_line(line)) out += reply.dump() + "\n";
        }
        return out;
    }

    std::shared_ptr<const GatewayConfig> config_;
    httplib::Server server_;
    int port_ = -1;
    std::mutex map_mutex_;
    std::uint64_t next_id_ = 0;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace tactile::cli
