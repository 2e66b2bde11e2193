#include <ixt/service.hpp>

#include <ixt/pareto.hpp>

#include <httplib.h>

#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <thread>

namespace ixt {

namespace {

constexpr const char *kOrigin = "service";
constexpr const char *kJson = "application/json";

namespace fs = std::filesystem;

/// Hands progress records from a solver thread to the streaming response.
class EventChannel
{
public:
    void push(std::string record)
    {
        {
            std::lock_guard lock(mutex_);
            queue_.push_back(std::move(record));
        }
        cv_.notify_all();
    }

    void close()
    {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    /// Blocks until a record is available; empty once closed and drained.
    std::optional<std::string> pop()
    {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return closed_ || !queue_.empty(); });
        if (queue_.empty())
            return std::nullopt;
        auto record = std::move(queue_.front());
        queue_.pop_front();
        return record;
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::string> queue_;
    bool closed_ = false;
};

/// Claims the busy flag of an API session for the lifetime of the object.
class Claim
{
public:
    explicit Claim(std::shared_ptr<ApiSession> api) : api_(std::move(api))
    {
        bool expected = false;
        if (!api_->busy.compare_exchange_strong(expected, true))
            throw Error("advisor", "SessionBusy", "solve in progress for session " + api_->session->id());
        api_->stop.store(false);
    }
    ~Claim()
    {
        if (api_)
            api_->busy.store(false);
    }
    Claim(Claim &&other) noexcept : api_(std::move(other.api_)) { }
    Claim(const Claim &) = delete;

private:
    std::shared_ptr<ApiSession> api_;
};

nlohmann::json parse_body(const httplib::Request &req)
{
    if (req.body.empty())
        return nlohmann::json::object();
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception &e) {
        throw Error(kOrigin, "InvalidJson", e.what());
    }
}

SolverOptions solver_options(const nlohmann::json &body, double default_gap)
{
    SolverOptions opts;
    opts.gap_threshold = default_gap;
    try {
        if (body.contains("gap") && !body["gap"].is_null())
            opts.gap_threshold = body["gap"].get<double>();
        if (body.contains("time_limit") && !body["time_limit"].is_null())
            opts.time_limit = body["time_limit"].get<double>();
        if (body.contains("threads"))
            opts.threads = body["threads"].get<unsigned>();
    } catch (const nlohmann::json::exception &e) {
        throw Error(kOrigin, "InvalidOptions", e.what());
    }
    if (!(opts.gap_threshold >= 0 && opts.gap_threshold <= 1))
        throw Error(kOrigin, "InvalidOptions", "gap must lie in [0, 1]");
    if (opts.time_limit && !(*opts.time_limit > 0))
        throw Error(kOrigin, "InvalidOptions", "time_limit must be positive");
    if (opts.threads == 0)
        opts.threads = 1;
    return opts;
}

nlohmann::json progress_record(const ProgressEvent &e)
{
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"type", "progress"},
            {"elapsed_ms", e.elapsed_ms},
            {"incumbent", num(e.incumbent)},
            {"lower_bound", num(e.lower_bound)},
            {"gap", num(e.gap)},
            {"nodes_explored", e.nodes_explored}};
}

nlohmann::json infeasible_body(const std::vector<std::string> &conflicting)
{
    InfeasibleProblem err(conflicting);
    auto body = error_body(err);
    body["conflicting_constraints"] = conflicting;
    return body;
}

void reply(httplib::Response &res, int status, const nlohmann::json &body)
{
    res.status = status;
    res.set_content(body.dump(), kJson);
}

std::string sse(const nlohmann::json &record)
{
    return "data: " + record.dump() + "\n\n";
}

nlohmann::json describe(const Session &s)
{
    nlohmann::json j;
    j["session_id"] = s.id();
    j["stats"] = to_json(s.stats());
    j["candidates"] = nlohmann::json::array();
    auto &cands = s.candidates().candidates();
    for (std::size_t i = 0; i != cands.size(); ++i) {
        auto c = to_json(cands[i]);
        c["provenance"] = s.candidates().provenance()[i];
        j["candidates"].push_back(c);
    }
    j["constraints"] = nlohmann::json::array();
    for (auto &c : s.constraints())
        j["constraints"].push_back({{"name", c.name}, {"text", c.text}, {"soft", c.ast.soft}});
    j["statements"] = nlohmann::json::array();
    for (auto &st : s.workload().statements())
        j["statements"].push_back({{"id", st.query.id}, {"weight", st.weight}, {"sql", to_sql(st.query)}});
    j["busy"] = s.busy();
    return j;
}

const char *kPlaceholderUi = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>Index tuning</title></head>
<body><h1>Index tuning service</h1>
<p>The web console assets are not installed. Start the service with <code>--ui-dir</code>
pointing at a built console, or use the JSON API under <code>/sessions</code>.</p>
</body></html>
)";

}

std::pair<std::string, int> parse_listen(const std::string &text)
{
    std::string host = "127.0.0.1";
    std::string port = text;
    if (auto colon = text.rfind(':'); colon != std::string::npos) {
        if (colon > 0)
            host = text.substr(0, colon);
        port = text.substr(colon + 1);
    }
    try {
        std::size_t used = 0;
        int p = std::stoi(port, &used);
        if (used != port.size() || p < 0 || p > 65535)
            throw std::out_of_range(port);
        return {host, p};
    } catch (const std::exception &) {
        throw Error(kOrigin, "InvalidListen", "expected host:port, got `" + text + "`");
    }
}

nlohmann::json error_body(const Error &error)
{
    nlohmann::json e{{"origin", error.origin()}, {"code", error.code()}, {"message", error.detail()}};
    e["line"] = error.line() ? nlohmann::json(*error.line()) : nlohmann::json(nullptr);
    return {{"error", e}};
}

Service::Service(ServiceOptions options) : options_(std::move(options)), server_(std::make_unique<httplib::Server>())
{
    if (!options_.state_dir)
        if (const char *env = std::getenv("ADVISOR_STATE_DIR"); env && *env)
            options_.state_dir = env;
    restore();
    routes();
}

Service::~Service()
{
    shutdown();
    std::unique_lock lock(mutex_);
    for (auto &[id, api] : sessions_) {
        (void)id;
        api->stop.store(true);
    }
    workers_cv_.wait(lock, [&] { return workers_ == 0; });
}

int Service::bind()
{
    if (port_ >= 0)
        return port_;
    if (options_.port == 0)
        port_ = server_->bind_to_any_port(options_.host);
    else if (server_->bind_to_port(options_.host, options_.port))
        port_ = options_.port;
    if (port_ < 0)
        throw Error(kOrigin, "BindFailed", "cannot listen on " + options_.host + ":" + std::to_string(options_.port));
    return port_;
}

void Service::listen()
{
    bind();
    server_->listen_after_bind();
}

void Service::shutdown()
{
    server_->stop();
}

std::size_t Service::session_count() const
{
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::shared_ptr<ApiSession> Service::find(const std::string &id) const
{
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end())
        throw Error(kOrigin, "UnknownSession", "no session `" + id + "`");
    return it->second;
}

void Service::persist(const ApiSession &api) const
{
    if (!options_.state_dir)
        return;
    std::error_code ec;
    fs::create_directories(*options_.state_dir, ec);
    auto path = fs::path(*options_.state_dir) / (api.session->id() + ".json");
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        out << export_snapshot(*api.session).dump();
    }
    fs::rename(tmp, path, ec);
}

void Service::forget(const std::string &id) const
{
    if (!options_.state_dir)
        return;
    std::error_code ec;
    fs::remove(fs::path(*options_.state_dir) / (id + ".json"), ec);
}

void Service::restore()
{
    if (!options_.state_dir || !fs::is_directory(*options_.state_dir))
        return;
    for (auto &entry : fs::directory_iterator(*options_.state_dir)) {
        if (entry.path().extension() != ".json")
            continue;
        try {
            std::ifstream in(entry.path());
            auto api = std::make_shared<ApiSession>();
            api->session = import_snapshot(nlohmann::json::parse(in));
            api->created_at = std::chrono::system_clock::now();
            sessions_[api->session->id()] = api;
        } catch (const std::exception &) {
            // Unreadable snapshots are left on disk untouched.
        }
    }
}

void Service::routes()
{
    auto &srv = *server_;

    srv.set_exception_handler([](const httplib::Request &, httplib::Response &res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const InfeasibleProblem &e) {
            reply(res, 422, infeasible_body(e.conflicting()));
        } catch (const Error &e) {
            int status = 400;
            if (e.code() == "UnknownSession" || e.code() == "NoRecommendation")
                status = 404;
            else if (e.code() == "SessionBusy")
                status = 409;
            reply(res, status, error_body(e));
        } catch (const std::exception &e) {
            reply(res, 500, error_body(Error(kOrigin, "Internal", e.what())));
        }
    });

    srv.set_post_routing_handler([](const httplib::Request &, httplib::Response &res) {
        res.set_header("Access-Control-Allow-Origin", "*");
    });
    srv.Options(R"(/.*)", [](const httplib::Request &, httplib::Response &res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    srv.Get("/health", [](const httplib::Request &, httplib::Response &res) {
        reply(res, 200, {{"status", "ok"}});
    });

    srv.Get("/sessions", [this](const httplib::Request &, httplib::Response &res) {
        auto list = nlohmann::json::array();
        std::lock_guard lock(mutex_);
        for (auto &[id, api] : sessions_)
            list.push_back({{"session_id", id}, {"busy", api->busy.load()}});
        reply(res, 200, list);
    });

    srv.Post("/sessions", [this](const httplib::Request &req, httplib::Response &res) {
        auto body = parse_body(req);
        SessionInput input;
        try {
            if (!body.contains("catalog"))
                throw Error(kOrigin, "InvalidRequest", "`catalog` is required");
            input.catalog = body["catalog"].is_string() ? nlohmann::json::parse(body["catalog"].get<std::string>())
                                                        : body["catalog"];
            if (!body.contains("workload") || !body["workload"].is_string())
                throw Error(kOrigin, "InvalidRequest", "`workload` must be a string");
            input.workload = body["workload"].get<std::string>();
            input.constraints = body.value("constraints", "");
            if (body.contains("candidates"))
                input.dba_candidates = body["candidates"];
        } catch (const nlohmann::json::exception &e) {
            throw Error(kOrigin, "InvalidRequest", e.what());
        }
        auto api = std::make_shared<ApiSession>();
        api->session = create_session(input);
        api->created_at = std::chrono::system_clock::now();
        auto warnings = api->session->bip().warnings();
        {
            std::lock_guard lock(mutex_);
            sessions_[api->session->id()] = api;
        }
        persist(*api);
        reply(res, 201, {{"session_id", api->session->id()}, {"stats", to_json(api->session->stats())},
                         {"warnings", warnings}});
    });

    srv.Get(R"(/sessions/([^/]+))", [this](const httplib::Request &req, httplib::Response &res) {
        auto api = find(req.matches[1]);
        reply(res, 200, describe(*api->session));
    });

    srv.Delete(R"(/sessions/([^/]+))", [this](const httplib::Request &req, httplib::Response &res) {
        auto api = find(req.matches[1]);
        if (api->busy.load())
            throw Error("advisor", "SessionBusy", "solve in progress");
        {
            std::lock_guard lock(mutex_);
            sessions_.erase(api->session->id());
        }
        forget(api->session->id());
        reply(res, 200, {{"deleted", api->session->id()}});
    });

    srv.Post(R"(/sessions/([^/]+)/solve)", [this](const httplib::Request &req, httplib::Response &res) {
        auto api = find(req.matches[1]);
        auto opts = solver_options(parse_body(req), 0.05);
        auto claim = std::make_shared<Claim>(api);

        auto report = check_feasibility(api->session->bip());
        if (!report.feasible)
            throw InfeasibleProblem(report.conflicting);

        auto channel = std::make_shared<EventChannel>();
        opts.progress = [channel](const ProgressEvent &e) { channel->push(sse(progress_record(e))); };
        opts.stop = &api->stop;
        {
            std::lock_guard lock(mutex_);
            ++workers_;
        }
        std::thread([this, api, claim, channel, opts]() mutable {
            try {
                auto rec = recommend(*api->session, opts);
                auto record = to_json(rec);
                record["type"] = "recommendation";
                channel->push(sse(record));
                persist(*api);
            } catch (const InfeasibleProblem &e) {
                auto body = infeasible_body(e.conflicting());
                body["type"] = "error";
                channel->push(sse(body));
            } catch (const Error &e) {
                auto body = error_body(e);
                body["type"] = "error";
                channel->push(sse(body));
            } catch (const std::exception &e) {
                auto body = error_body(Error(kOrigin, "Internal", e.what()));
                body["type"] = "error";
                channel->push(sse(body));
            }
            claim.reset();
            channel->close();
            std::lock_guard lock(mutex_);
            --workers_;
            workers_cv_.notify_all();
        }).detach();

        res.status = 200;
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [channel](std::size_t, httplib::DataSink &sink) {
            auto record = channel->pop();
            if (!record) {
                sink.done();
                return true;
            }
            return sink.write(record->data(), record->size());
        });
    });

    srv.Post(R"(/sessions/([^/]+)/stop)", [this](const httplib::Request &req, httplib::Response &res) {
        auto api = find(req.matches[1]);
        bool running = api->busy.load();
        api->stop.store(true);
        reply(res, 202, {{"stopping", running}});
    });

    srv.Post(R"(/sessions/([^/]+)/delta)", [this](const httplib::Request &req, httplib::Response &res) {
        auto api = find(req.matches[1]);
        auto body = parse_body(req);
        nlohmann::json options = nlohmann::json::object();
        if (body.contains("options")) {
            options = body["options"];
            body.erase("options");
        }
        auto opts = solver_options(options, 0.05);
        auto delta = delta_from_json(body.contains("delta") ? body["delta"] : body, api->session->catalog());
        Claim claim(api);
        opts.stop = &api->stop;
        auto before = api->session->last_recommendation();
        auto rec = apply_delta(*api->session, delta, opts);
        persist(*api);
        auto out = to_json(rec);
        out["previous_objective"] = before ? nlohmann::json(before->objective) : nlohmann::json(nullptr);
        reply(res, 200, out);
    });

    srv.Post(R"(/sessions/([^/]+)/pareto)", [this](const httplib::Request &req, httplib::Response &res) {
        auto api = find(req.matches[1]);
        auto body = parse_body(req);
        ChordOptions opts;
        try {
            opts.epsilon = body.value("epsilon", opts.epsilon);
            opts.max_points = body.value("max_points", opts.max_points);
        } catch (const nlohmann::json::exception &e) {
            throw Error(kOrigin, "InvalidOptions", e.what());
        }
        opts.solver = solver_options(body, 0.0);
        Claim claim(api);
        opts.solver.stop = &api->stop;
        reply(res, 200, to_json(chord(*api->session, opts)));
    });

    srv.Get(R"(/sessions/([^/]+)/recommendation)", [this](const httplib::Request &req, httplib::Response &res) {
        auto api = find(req.matches[1]);
        auto &last = api->session->last_recommendation();
        if (!last)
            throw Error(kOrigin, "NoRecommendation", "session has not been solved yet");
        reply(res, 200, to_json(*last));
    });

    srv.Post(R"(/sessions/([^/]+)/whatif)", [this](const httplib::Request &req, httplib::Response &res) {
        auto api = find(req.matches[1]);
        auto body = parse_body(req);
        std::vector<std::string> ids;
        try {
            ids = body.at("indexes").get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception &e) {
            throw Error(kOrigin, "InvalidRequest", "`indexes` must be a list of candidate ids");
        }
        reply(res, 200, to_json(whatif_report(*api->session, ids)));
    });

    srv.Get(R"(/sessions/([^/]+)/snapshot)", [this](const httplib::Request &req, httplib::Response &res) {
        auto api = find(req.matches[1]);
        reply(res, 200, export_snapshot(*api->session));
    });

    bool mounted = options_.ui_dir && fs::is_directory(*options_.ui_dir) && srv.set_mount_point("/ui", *options_.ui_dir);
    if (!mounted)
        srv.Get(R"(/ui/?)", [](const httplib::Request &, httplib::Response &res) {
            res.set_content(kPlaceholderUi, "text/html");
        });
}

}
