#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <thread>

#include <iparego/experiment.hpp>
#include <iparego/json_io.hpp>

// After Eigen: <resolv.h> defines a `_res` macro that clashes with Eigen internals.
#include <httplib.h>

namespace iparego::service {

using nlohmann::json;

/// One hosted session. `mu` serializes mutation; readers only touch the
/// published snapshot, which is swapped under the short `pub_mu` lock.
struct HostedSession {
    std::string id;
    std::string created;
    std::unique_ptr<Session> session;
    std::mutex mu;
    std::thread worker;

    std::mutex pub_mu;
    std::shared_ptr<const SessionState> published;

    std::shared_ptr<const SessionState> view()
    {
        std::lock_guard lk(pub_mu);
        return published;
    }
};

struct Response {
    int status = 200;
    json body;
};

class Host {
public:
    explicit Host(std::filesystem::path data_dir) : _dir(std::move(data_dir))
    {
        if (!_dir.empty()) {
            std::filesystem::create_directories(_dir);
            restore_all();
        }
    }

    ~Host()
    {
        std::vector<std::shared_ptr<HostedSession>> all;
        {
            std::shared_lock lk(_map_mu);
            for (auto& [_, s] : _sessions)
                all.push_back(s);
        }
        for (auto& s : all)
            join(*s);
    }

    Host(const Host&) = delete;
    Host& operator=(const Host&) = delete;

    Response create(const std::string& body)
    {
        json doc;
        try {
            doc = json::parse(body);
        } catch (const json::parse_error& e) {
            return {400, {{"error", std::string("malformed body: ") + e.what()}}};
        }
        SessionConfig cfg;
        try {
            cfg = json_io::config_from(doc);
            validate(cfg);
        } catch (const Error& e) {
            return bad_config(e.message());
        } catch (const json::exception& e) {
            return bad_config(std::string("body: ") + e.what());
        }

        auto hs = std::make_shared<HostedSession>();
        hs->session = std::make_unique<Session>(cfg);
        hs->created = timestamp();
        {
            std::unique_lock lk(_map_mu);
            do
                hs->id = new_id();
            while (_sessions.count(hs->id));
            _sessions[hs->id] = hs;
        }
        {
            std::lock_guard lk(hs->mu);
            publish(*hs);
            hs->worker = std::thread([this, hs] { run_locked(*hs, [](Session& s) { s.run_initialization(); }); });
        }
        return {201, {{"id", hs->id}, {"phase", to_string(Phase::Initializing)}}};
    }

    Response front(const std::string& id)
    {
        auto hs = find(id);
        if (!hs)
            return not_found(id);
        json o = json_io::front_view(*hs->view());
        o["id"] = id;
        return {200, o};
    }

    Response log(const std::string& id)
    {
        auto hs = find(id);
        if (!hs)
            return not_found(id);
        const auto st = hs->view();
        const Session tmp(hs->session->config(), *st);
        json o = json_io::log_view(make_run_log(tmp, nullptr, 0));
        o["id"] = id;
        return {200, o};
    }

    /// Applies the choice and starts the next exploration step. With `wait`
    /// the response is sent once the step has finished.
    Response preference(const std::string& id, const std::string& body, bool wait)
    {
        auto hs = find(id);
        if (!hs)
            return not_found(id);
        int choice = -1;
        try {
            const json doc = json::parse(body);
            const json& c = doc.contains("eval_index") ? doc["eval_index"] : doc.at("choice");
            if (!c.is_number_integer())
                return {400, {{"error", "eval_index: expected an integer"}, {"field", "eval_index"}}};
            choice = c.get<int>();
        } catch (const json::exception& e) {
            return {400, {{"error", std::string("malformed body: ") + e.what()}}};
        }

        std::unique_lock lk(hs->mu, std::try_to_lock);
        if (!lk.owns_lock())
            return {409, {{"error", "session is busy"}, {"phase", to_string(hs->view()->phase)}}};
        Session& s = *hs->session;
        if (s.state().phase != Phase::AwaitingPreference)
            return {409, {{"error", "session is not awaiting a preference"}, {"phase", to_string(s.state().phase)}}};
        try {
            s.apply_preference(choice);
        } catch (const Error& e) {
            if (e.code() == Errc::InvalidChoice)
                return {422, {{"error", e.message()}, {"phase", to_string(s.state().phase)}}};
            throw;
        }
        publish(*hs);
        if (hs->worker.joinable())
            hs->worker.join();
        if (s.state().phase == Phase::Exploring)
            hs->worker = std::thread([this, hs] { run_locked(*hs, [](Session& x) { step(x); }); });
        lk.unlock();

        if (wait)
            join(*hs);
        const auto st = hs->view();
        return {200, {{"id", id}, {"phase", to_string(st->phase)}, {"ledger", json_io::ledger(st->ledger)}}};
    }

    /// Blocks until the session has no step in flight.
    void join(HostedSession& hs)
    {
        std::thread t;
        {
            std::lock_guard lk(hs.mu);
            t = std::move(hs.worker);
        }
        if (t.joinable())
            t.join();
    }

    std::vector<std::string> ids() const
    {
        std::shared_lock lk(_map_mu);
        std::vector<std::string> out;
        for (const auto& [k, _] : _sessions)
            out.push_back(k);
        return out;
    }

    void bind(httplib::Server& srv)
    {
        auto send = [](httplib::Response& res, const Response& r) {
            res.status = r.status;
            res.set_content(r.body.dump(), "application/json");
        };
        srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"status":"ok"})", "application/json");
        });
        srv.Post("/sessions", [this, send](const httplib::Request& req, httplib::Response& res) { send(res, create(req.body)); });
        srv.Get(R"(/sessions/([^/]+)/front)",
            [this, send](const httplib::Request& req, httplib::Response& res) { send(res, front(req.matches[1])); });
        srv.Get(R"(/sessions/([^/]+)/log)",
            [this, send](const httplib::Request& req, httplib::Response& res) { send(res, log(req.matches[1])); });
        srv.Post(R"(/sessions/([^/]+)/preference)", [this, send](const httplib::Request& req, httplib::Response& res) {
            const bool wait = req.has_param("wait") && req.get_param_value("wait") != "0";
            send(res, preference(req.matches[1], req.body, wait));
        });
        srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            res.status = 500;
            res.set_content(json{{"error", what}}.dump(), "application/json");
        });
    }

private:
    static void step(Session& s)
    {
        const int n = s.explore_step();
        if (n == 0 && s.config().cost_dm == 0)
            s.finish("no candidates left to evaluate");
    }

    template <class F>
    void run_locked(HostedSession& hs, F&& f)
    {
        std::lock_guard lk(hs.mu);
        f(*hs.session);
        publish(hs);
    }

    // Caller holds hs.mu.
    void publish(HostedSession& hs)
    {
        auto snap = std::make_shared<const SessionState>(hs.session->state());
        {
            std::lock_guard lk(hs.pub_mu);
            hs.published = snap;
        }
        if (_dir.empty())
            return;
        json doc = {{"id", hs.id}, {"created", hs.created}, {"config", json_io::config(hs.session->config())},
            {"state", json_io::state(*snap)}};
        const std::string text = doc.dump(1);
        detail::write_atomically(_dir / (hs.id + ".json"), [&](std::ostream& os) { os << text; });
    }

    void restore_all()
    {
        for (const auto& entry : std::filesystem::directory_iterator(_dir)) {
            if (entry.path().extension() != ".json")
                continue;
            json doc;
            {
                std::ifstream is(entry.path());
                try {
                    doc = json::parse(is);
                } catch (const json::exception&) {
                    continue; // unreadable snapshot; leave it on disk
                }
            }
            auto hs = std::make_shared<HostedSession>();
            try {
                hs->id = doc.at("id").get<std::string>();
                hs->created = doc.value("created", "");
                const SessionConfig cfg = json_io::config_from(doc.at("config"));
                SessionState st = json_io::state_from(doc.at("state"));
                // An interrupted step is replayed from the snapshot taken before it.
                if (st.phase == Phase::Initializing)
                    hs->session = std::make_unique<Session>(cfg);
                else
                    hs->session = std::make_unique<Session>(cfg, std::move(st));
            } catch (const std::exception&) {
                continue;
            }
            const Phase phase = hs->session->state().phase;
            {
                std::lock_guard lk(hs->mu);
                std::lock_guard plk(hs->pub_mu);
                hs->published = std::make_shared<const SessionState>(hs->session->state());
            }
            if (phase == Phase::Initializing)
                hs->worker = std::thread([this, hs] { run_locked(*hs, [](Session& s) { s.run_initialization(); }); });
            else if (phase == Phase::Exploring)
                hs->worker = std::thread([this, hs] { run_locked(*hs, [](Session& s) { step(s); }); });
            std::unique_lock lk(_map_mu);
            _sessions[hs->id] = hs;
        }
    }

    std::shared_ptr<HostedSession> find(const std::string& id) const
    {
        std::shared_lock lk(_map_mu);
        auto it = _sessions.find(id);
        return it == _sessions.end() ? nullptr : it->second;
    }

    static Response not_found(const std::string& id) { return {404, {{"error", "unknown session '" + id + "'"}}}; }

    static Response bad_config(const std::string& what)
    {
        json body = {{"error", what}};
        const auto colon = what.find(':');
        body["field"] = what.rfind("d_in exceeds", 0) == 0 ? "d_in" : what.substr(0, colon);
        return {400, body};
    }

    std::string new_id()
    {
        std::uint64_t v = SeededRng::splitmix(_id_seed ^ ++_counter);
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
        return buf;
    }

    static std::string timestamp()
    {
        const auto now = std::chrono::system_clock::now();
        return std::to_string(std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count());
    }

    std::filesystem::path _dir;
    mutable std::shared_mutex _map_mu;
    std::map<std::string, std::shared_ptr<HostedSession>> _sessions;
    std::uint64_t _id_seed = std::random_device{}() ^ static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
    std::uint64_t _counter = 0;
};

} // namespace iparego::service
