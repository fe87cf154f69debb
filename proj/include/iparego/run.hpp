#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <iparego/benchmark.hpp>
#include <iparego/engine.hpp>

namespace iparego {

struct RunLogEntry {
    int eval_index = 0;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    std::optional<WeightVector> weight;
    std::optional<double> best_oc;
};

struct RunLog {
    int d_in = 0;
    int d_out = 0;
    std::vector<RunLogEntry> entries;
    std::vector<InteractionRecord> interactions;
    BudgetLedger ledger;
    Phase final_phase = Phase::Finished;
    std::string diagnostic;
    int init_evaluations = 0; // dataset size when initialization ended
};

/// Builds the log from a session; best_oc is filled when a ground truth is given.
inline RunLog make_run_log(const Session& session, const GroundTruth* gt, int init_evaluations)
{
    const auto& st = session.state();
    RunLog log;
    log.d_in = session.config().d_in;
    log.d_out = session.config().d_out;
    log.interactions = st.history;
    log.ledger = st.ledger;
    log.final_phase = st.phase;
    log.diagnostic = st.diagnostic;
    log.init_evaluations = init_evaluations;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : st.dataset) {
        RunLogEntry e{p.eval_index, p.x, p.y, p.generating_weight, std::nullopt};
        if (gt) {
            best = std::min(best, opportunity_cost(p.y, *gt));
            e.best_oc = best;
        }
        log.entries.push_back(std::move(e));
    }
    return log;
}

/// Initialization followed by alternating preference and exploration until
/// the budget runs out. Deterministic for a given seed.
inline RunLog run_session(const SessionConfig& cfg, const SimulatedDm& dm, const GroundTruth* gt = nullptr)
{
    Session session(cfg);
    session.run_initialization();
    const int init_evaluations = static_cast<int>(session.state().dataset.size());
    while (session.state().phase == Phase::AwaitingPreference) {
        session.apply_preference(dm.choose(session.state().front));
        if (session.state().phase != Phase::Exploring)
            break;
        const int n = session.explore_step();
        // Free interactions with an empty step would never terminate.
        if (n == 0 && session.config().cost_dm == 0)
            session.finish("no candidates left to evaluate");
    }
    return make_run_log(session, gt, init_evaluations);
}

/// Shortest round-trip decimal, independent of the global locale.
inline std::string format_double(double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline void write_run_log_csv(std::ostream& os, const RunLog& log)
{
    os << "eval_index";
    for (int i = 0; i < log.d_in; ++i)
        os << ",x" << i + 1;
    for (int j = 0; j < log.d_out; ++j)
        os << ",y" << j + 1;
    for (int j = 0; j < log.d_out; ++j)
        os << ",w" << j + 1;
    os << ",best_oc\n";
    for (const auto& e : log.entries) {
        os << e.eval_index;
        for (Eigen::Index i = 0; i < e.x.size(); ++i)
            os << ',' << format_double(e.x[i]);
        for (Eigen::Index j = 0; j < e.y.size(); ++j)
            os << ',' << format_double(e.y[j]);
        for (int j = 0; j < log.d_out; ++j) {
            os << ',';
            if (e.weight)
                os << format_double((*e.weight)[j]);
        }
        os << ',';
        if (e.best_oc)
            os << format_double(*e.best_oc);
        os << '\n';
    }
}

} // namespace iparego
