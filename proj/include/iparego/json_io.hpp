#pragma once

#include <charconv>
#include <string>

#include <json.hpp>

#include <iparego/run.hpp>

namespace iparego::json_io {

using nlohmann::json;

// Vectors travel as decimal strings so that every double round-trips exactly.
inline json vec(const Eigen::VectorXd& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(format_double(v[i]));
    return a;
}

inline double number(const json& j, const std::string& field)
{
    if (j.is_number())
        return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size())
            return v;
    }
    throw Error(Errc::InvalidConfig, field + ": expected a number");
}

inline Eigen::VectorXd vec_from(const json& j, const std::string& field)
{
    if (!j.is_array())
        throw Error(Errc::InvalidConfig, field + ": expected an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = number(j[i], field);
    return v;
}

inline json ledger(const BudgetLedger& l)
{
    return {{"total_budget", l.total_budget}, {"spent_evaluations", l.spent_evaluations},
        {"spent_interactions", l.spent_interactions}, {"cost_dm", l.cost_dm}, {"spent", l.spent()},
        {"remaining", l.remaining()}};
}

inline json config(const SessionConfig& c)
{
    return {{"problem", c.problem}, {"d_in", c.d_in}, {"d_out", c.d_out}, {"method", to_string(c.method)},
        {"total_budget", c.total_budget}, {"p_space", c.p_space}, {"p_init", c.p_init}, {"rho", format_double(c.rho)},
        {"wape_n", c.wape_n}, {"wape_eta", format_double(c.wape_eta)}, {"cost_dm", c.cost_dm},
        {"seed", std::to_string(c.seed)}, {"gp_restarts", c.gp.restarts},
        {"n_random_starts", c.acquisition.n_random_starts}};
}

/// Parses a config document. Missing fields keep their defaults; a field of
/// the wrong type throws InvalidConfig naming it.
inline SessionConfig config_from(const json& j)
{
    if (!j.is_object())
        throw Error(Errc::InvalidConfig, "body: expected a JSON object");
    SessionConfig c;
    c.dm_mode = DmMode::Interactive;
    auto integer = [&](const char* key, int& out) {
        if (!j.contains(key))
            return;
        if (!j[key].is_number_integer())
            throw Error(Errc::InvalidConfig, std::string(key) + ": expected an integer");
        out = j[key].get<int>();
    };
    auto real = [&](const char* key, double& out) {
        if (j.contains(key))
            out = number(j[key], key);
    };
    if (j.contains("problem")) {
        if (!j["problem"].is_string())
            throw Error(Errc::InvalidConfig, "problem: expected a string");
        c.problem = j["problem"].get<std::string>();
    }
    if (j.contains("method")) {
        if (!j["method"].is_string())
            throw Error(Errc::InvalidConfig, "method: expected a string");
        c.method = method_from_string(j["method"].get<std::string>());
    }
    integer("d_in", c.d_in);
    integer("d_out", c.d_out);
    integer("total_budget", c.total_budget);
    integer("p_space", c.p_space);
    integer("p_init", c.p_init);
    integer("wape_n", c.wape_n);
    integer("cost_dm", c.cost_dm);
    integer("gp_restarts", c.gp.restarts);
    integer("n_random_starts", c.acquisition.n_random_starts);
    real("rho", c.rho);
    real("wape_eta", c.wape_eta);
    if (j.contains("seed")) {
        const auto& s = j["seed"];
        if (s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0))
            c.seed = s.get<std::uint64_t>();
        else if (s.is_string())
            try {
                c.seed = std::stoull(s.get<std::string>());
            } catch (const std::exception&) {
                throw Error(Errc::InvalidConfig, "seed: expected a non-negative integer");
            }
        else
            throw Error(Errc::InvalidConfig, "seed: expected a non-negative integer");
    }
    return c;
}

inline json point(const EvaluatedPoint& p)
{
    json o = {{"eval_index", p.eval_index}, {"x", vec(p.x)}, {"y", vec(p.y)}};
    o["w"] = p.generating_weight ? vec(*p.generating_weight) : json(nullptr);
    o["theta"] = p.theta ? vec(*p.theta) : json(nullptr);
    return o;
}

inline json state(const SessionState& s)
{
    json o;
    o["phase"] = to_string(s.phase);
    o["ledger"] = ledger(s.ledger);
    o["rng"] = s.rng.state();
    o["diagnostic"] = s.diagnostic;
    o["dataset"] = json::array();
    for (const auto& p : s.dataset)
        o["dataset"].push_back(point(p));
    o["front"] = json::array();
    for (const auto& e : s.front.entries)
        o["front"].push_back(e.eval_index);
    if (s.preferred)
        o["preferred"] = {{"eval_index", s.preferred->eval_index}, {"x", vec(s.preferred->x)}, {"y", vec(s.preferred->y)},
            {"w", vec(s.preferred->w)}};
    else
        o["preferred"] = nullptr;
    o["history"] = json::array();
    for (const auto& r : s.history)
        o["history"].push_back({{"interaction_index", r.interaction_index}, {"front_snapshot", r.front_snapshot},
            {"chosen", r.chosen}, {"budget_spent", r.budget_spent}, {"preferred_weight", vec(r.preferred_weight)}});
    return o;
}

inline SessionState state_from(const json& o)
{
    SessionState s;
    s.phase = phase_from_string(o.at("phase").get<std::string>());
    const auto& l = o.at("ledger");
    s.ledger = {l.at("total_budget").get<int>(), l.at("spent_evaluations").get<int>(),
        l.at("spent_interactions").get<int>(), l.at("cost_dm").get<int>()};
    s.rng.restore(o.at("rng").get<std::string>());
    s.diagnostic = o.value("diagnostic", "");
    for (const auto& p : o.at("dataset")) {
        EvaluatedPoint e;
        e.eval_index = p.at("eval_index").get<int>();
        e.x = vec_from(p.at("x"), "x");
        e.y = vec_from(p.at("y"), "y");
        if (!p.at("w").is_null())
            e.generating_weight = vec_from(p.at("w"), "w");
        if (!p.at("theta").is_null())
            e.theta = vec_from(p.at("theta"), "theta");
        s.dataset.push_back(std::move(e));
    }
    if (!s.dataset.empty())
        s.front = non_dominated_filter(s.dataset);
    if (const auto& p = o.at("preferred"); !p.is_null())
        s.preferred = Preferred{p.at("eval_index").get<int>(), vec_from(p.at("y"), "y"), vec_from(p.at("x"), "x"),
            vec_from(p.at("w"), "w")};
    for (const auto& r : o.at("history"))
        s.history.push_back({r.at("interaction_index").get<int>(), r.at("front_snapshot").get<std::vector<int>>(),
            r.at("chosen").get<int>(), r.at("budget_spent").get<int>(), vec_from(r.at("preferred_weight"), "w")});
    return s;
}

/// Front view: phase, ledger and the front ordered by eval_index.
inline json front_view(const SessionState& s)
{
    json o = {{"phase", to_string(s.phase)}, {"ledger", ledger(s.ledger)}, {"front", json::array()}};
    for (const auto& e : s.front.entries) {
        const auto& p = s.dataset[static_cast<std::size_t>(e.eval_index)];
        o["front"].push_back({{"eval_index", p.eval_index}, {"x", vec(p.x)}, {"y", vec(p.y)}});
    }
    if (!s.diagnostic.empty())
        o["diagnostic"] = s.diagnostic;
    return o;
}

/// Same content as the CLI CSV, plus the interaction history.
inline json log_view(const RunLog& log)
{
    json o = {{"d_in", log.d_in}, {"d_out", log.d_out}, {"phase", to_string(log.final_phase)},
        {"ledger", ledger(log.ledger)}, {"entries", json::array()}, {"interactions", json::array()}};
    for (const auto& e : log.entries) {
        json r = {{"eval_index", e.eval_index}, {"x", vec(e.x)}, {"y", vec(e.y)}};
        r["w"] = e.weight ? vec(*e.weight) : json(nullptr);
        if (e.best_oc)
            r["best_oc"] = format_double(*e.best_oc);
        o["entries"].push_back(std::move(r));
    }
    for (const auto& r : log.interactions)
        o["interactions"].push_back({{"interaction_index", r.interaction_index}, {"front_snapshot", r.front_snapshot},
            {"chosen", r.chosen}, {"budget_spent", r.budget_spent}, {"preferred_weight", vec(r.preferred_weight)}});
    if (!log.diagnostic.empty())
        o["diagnostic"] = log.diagnostic;
    return o;
}

} // namespace iparego::json_io
