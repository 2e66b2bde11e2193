#pragma once

#include <ixt/advisor.hpp>

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace ixt {

struct ServiceOptions
{
    std::string host = "127.0.0.1";
    int port = 7911;                            ///< 0 picks a free port
    std::optional<std::string> state_dir;       ///< snapshot directory; defaults to $ADVISOR_STATE_DIR
    std::optional<std::string> ui_dir;          ///< static assets served under /ui
};

/// Parses "host:port" (or ":port", or "port").  Throws InvalidListen.
std::pair<std::string, int> parse_listen(const std::string &text);

/// Error body shared by every 4xx response: {"error": {origin, code, message, line}}.
nlohmann::json error_body(const Error &error);

/// One tuning session as exposed over HTTP.
struct ApiSession
{
    std::unique_ptr<Session> session;
    std::chrono::system_clock::time_point created_at;
    std::atomic<bool> busy{false};
    std::atomic<bool> stop{false};
};

/// HTTP facade over advisor sessions.
class Service
{
public:
    explicit Service(ServiceOptions options = {});
    ~Service();
    Service(const Service &) = delete;
    Service & operator=(const Service &) = delete;

    /// Binds the listening socket and returns the bound port.  Throws BindFailed.
    int bind();
    /// Serves until `shutdown`.  Calls `bind` first when needed.
    void listen();
    void shutdown();

    int port() const { return port_; }
    std::size_t session_count() const;

private:
    void routes();
    void restore();
    void persist(const ApiSession &api) const;
    void forget(const std::string &id) const;
    std::shared_ptr<ApiSession> find(const std::string &id) const;

    ServiceOptions options_;
    std::unique_ptr<httplib::Server> server_;
    int port_ = -1;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<ApiSession>> sessions_;
    std::condition_variable workers_cv_;
    std::size_t workers_ = 0;
};

}
