#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <iparego/acquisition.hpp>
#include <iparego/archive.hpp>
#include <iparego/error.hpp>
#include <iparego/problem.hpp>
#include <iparego/sampling.hpp>
#include <iparego/scalarize.hpp>
#include <iparego/surrogate.hpp>
#include <iparego/tricand.hpp>

namespace iparego {

enum class Method { Tripe, Wape };
enum class Phase { Initializing, AwaitingPreference, Exploring, Finished };
enum class DmMode { Simulated, Interactive };

inline std::string to_string(Method m) { return m == Method::Tripe ? "tripe" : "wape"; }

inline std::string to_string(Phase p)
{
    switch (p) {
    case Phase::Initializing: return "initializing";
    case Phase::AwaitingPreference: return "awaiting_preference";
    case Phase::Exploring: return "exploring";
    case Phase::Finished: return "finished";
    }
    return "unknown";
}

inline Method method_from_string(const std::string& s)
{
    if (s == "tripe" || s == "TRIPE")
        return Method::Tripe;
    if (s == "wape" || s == "WAPE")
        return Method::Wape;
    throw Error(Errc::InvalidConfig, "method: expected 'tripe' or 'wape', got '" + s + "'");
}

inline Phase phase_from_string(const std::string& s)
{
    for (Phase p : {Phase::Initializing, Phase::AwaitingPreference, Phase::Exploring, Phase::Finished})
        if (to_string(p) == s)
            return p;
    throw Error(Errc::InvalidConfig, "unknown phase '" + s + "'");
}

struct SessionConfig {
    std::string problem = "dtlz2";
    int d_in = 3;
    int d_out = 2;
    Method method = Method::Wape;
    int total_budget = 100;
    int p_space = -1; // -1 selects 10 * d_in
    int p_init = -1;  // -1 selects 10 * d_out
    double rho = kDefaultRho;
    int wape_n = 5;
    double wape_eta = 0.05;
    int cost_dm = 1;
    std::uint64_t seed = 0;
    DmMode dm_mode = DmMode::Simulated;
    GpConfig gp;
    AcquisitionConfig acquisition;

    /// Copy with the dimension-dependent defaults filled in.
    SessionConfig resolved() const
    {
        SessionConfig c = *this;
        if (c.p_space < 0)
            c.p_space = 10 * c.d_in;
        if (c.p_init < 0)
            c.p_init = 10 * c.d_out;
        return c;
    }
};

/// Throws InvalidConfig naming the offending field.
inline void validate(const SessionConfig& raw)
{
    const SessionConfig c = raw.resolved();
    auto fail = [](const std::string& msg) { throw Error(Errc::InvalidConfig, msg); };
    if (c.problem != "dtlz2")
        fail("problem: unknown problem '" + c.problem + "'");
    if (c.d_out < 2)
        fail("d_out: need at least two objectives");
    if (c.d_in < c.d_out)
        fail("d_in: must be at least d_out");
    if (c.method == Method::Tripe && c.d_in > kMaxTriangulationDim)
        fail("d_in exceeds TRIPE limit");
    if (c.p_space < c.d_in + 1)
        fail("p_space: must be at least d_in + 1");
    if (c.p_init < 0)
        fail("p_init: must be non-negative");
    if (c.total_budget < c.p_space + c.p_init)
        fail("total_budget: must cover p_space + p_init");
    if (!(c.rho > 0.0 && c.rho <= 0.1))
        fail("rho: must lie in (0, 0.1]");
    if (c.wape_n < 1)
        fail("wape_n: must be at least 1");
    if (!(c.wape_eta >= 0.0 && c.wape_eta < 1.0))
        fail("wape_eta: must lie in [0, 1)");
    if (c.cost_dm < 0)
        fail("cost_dm: must be non-negative");
    if (c.gp.restarts < 1)
        fail("gp.restarts: must be at least 1");
    if (c.acquisition.n_local_refines < 1)
        fail("acquisition.n_local_refines: must be at least 1");
}

struct Preferred {
    int eval_index = -1;
    Eigen::VectorXd y;
    Eigen::VectorXd x;
    WeightVector w;
};

struct InteractionRecord {
    int interaction_index = 0;
    std::vector<int> front_snapshot; // eval indices presented
    int chosen = -1;
    int budget_spent = 0; // ledger.spent() when the choice was made
    WeightVector preferred_weight; // w_P resulting from the choice
};

struct SessionState {
    Phase phase = Phase::Initializing;
    Dataset dataset;
    ParetoFront front;
    std::optional<Preferred> preferred;
    BudgetLedger ledger;
    SeededRng rng;
    std::vector<InteractionRecord> history;
    std::string diagnostic;
};

/// One optimization run. Owns its problem, configuration, and state; the only
/// suspension point is Phase::AwaitingPreference.
class Session {
public:
    explicit Session(const SessionConfig& cfg) : _cfg(cfg.resolved())
    {
        validate(_cfg);
        _problem = make_problem(_cfg.problem, _cfg.d_in, _cfg.d_out);
        _state.ledger.total_budget = _cfg.total_budget;
        _state.ledger.cost_dm = _cfg.cost_dm;
        _state.rng = SeededRng(_cfg.seed);
    }

    Session(const SessionConfig& cfg, SessionState state) : Session(cfg) { _state = std::move(state); }

    const SessionConfig& config() const { return _cfg; }
    const BoundedProblem& problem() const { return _problem; }
    const SessionState& state() const { return _state; }

    /// Space-filling design, then one ParEGO round per simplex-uniform weight.
    void run_initialization()
    {
        require_phase(Phase::Initializing);
        try {
            for (const auto& x : halton_design(_cfg.p_space, _cfg.d_in, _problem.lower, _problem.upper))
                _state.dataset.push_back(evaluate(_problem, _state.ledger, x));

            std::vector<WeightVector> weights;
            for (int j = 0; j < _cfg.p_init; ++j)
                weights.push_back(sample_simplex_uniform(_cfg.d_out, _state.rng));
            for (const auto& w : weights)
                propose_and_evaluate(w, std::nullopt);
        } catch (const Error& e) {
            abort_with(e);
            return;
        }
        refresh_front();
        await_preference_or_finish();
    }

    /// Records the DM's pick (an eval_index on the current front) and charges
    /// the interaction. InvalidChoice leaves the state untouched.
    void apply_preference(int eval_index)
    {
        require_phase(Phase::AwaitingPreference);
        auto it = std::find_if(_state.dataset.begin(), _state.dataset.end(),
            [&](const EvaluatedPoint& p) { return p.eval_index == eval_index; });
        if (!_state.front.contains(eval_index) || it == _state.dataset.end())
            throw Error(Errc::InvalidChoice, "eval_index " + std::to_string(eval_index) + " is not on the current front");
        charge_interaction(_state.ledger);

        Preferred pref;
        pref.eval_index = eval_index;
        pref.x = it->x;
        pref.y = it->y;
        if (it->generating_weight)
            pref.w = *it->generating_weight;
        else
            pref.w = infer_weight_for_point(normalize(it->y, normalization_bounds(_state.dataset)));
        _state.preferred = std::move(pref);

        InteractionRecord rec;
        rec.interaction_index = static_cast<int>(_state.history.size());
        for (const auto& e : _state.front.entries)
            rec.front_snapshot.push_back(e.eval_index);
        rec.chosen = eval_index;
        rec.budget_spent = _state.ledger.spent();
        rec.preferred_weight = _state.preferred->w;
        _state.history.push_back(std::move(rec));

        _state.phase = _state.ledger.remaining() > 0 ? Phase::Exploring : Phase::Finished;
    }

    /// Runs one exploration batch for the configured method. Returns the
    /// number of evaluations performed.
    int explore_step() { return _cfg.method == Method::Tripe ? tripe_step() : wape_step(); }

    /// Evaluates the triangulation candidates adjacent to x_P, nearest first.
    int tripe_step()
    {
        require_phase(Phase::Exploring);
        const Eigen::VectorXd& x_p = _state.preferred->x;
        int evaluated = 0;
        try {
            std::vector<Eigen::VectorXd> inputs;
            for (const auto& p : _state.dataset)
                inputs.push_back(p.x);
            const Triangulation tri = delaunay(inputs, _problem.lower, _problem.upper);
            const CandidateSet near = neighbors_of_preferred(tri, all_candidates(tri), x_p);

            struct Ranked {
                double dist;
                int kind; // interior before fringe on ties
                const Eigen::VectorXd* x;
            };
            std::vector<Ranked> order;
            for (const auto& c : near.interior)
                order.push_back({(c - x_p).norm(), 0, &c});
            for (const auto& c : near.fringe)
                order.push_back({(c - x_p).norm(), 1, &c});
            std::stable_sort(order.begin(), order.end(),
                [](const Ranked& a, const Ranked& b) { return a.dist != b.dist ? a.dist < b.dist : a.kind < b.kind; });

            for (const auto& r : order) {
                if (_state.ledger.remaining() < 1)
                    break;
                _state.dataset.push_back(evaluate(_problem, _state.ledger, *r.x));
                ++evaluated;
            }
        } catch (const Error& e) {
            abort_with(e);
            return evaluated;
        }
        refresh_front();
        await_preference_or_finish();
        return evaluated;
    }

    /// N ParEGO rounds with weights jittered around w_P.
    int wape_step()
    {
        require_phase(Phase::Exploring);
        const WeightVector w_p = _state.preferred->w;
        int evaluated = 0;
        try {
            std::vector<PerturbedWeight> weights;
            for (int i = 0; i < _cfg.wape_n; ++i)
                weights.push_back(perturb_weight(w_p, _cfg.wape_eta, _state.rng));
            for (const auto& pw : weights) {
                if (_state.ledger.remaining() < 1)
                    break;
                propose_and_evaluate(pw.w, pw.theta);
                ++evaluated;
            }
        } catch (const Error& e) {
            abort_with(e);
            return evaluated;
        }
        refresh_front();
        await_preference_or_finish();
        return evaluated;
    }

    void finish(const std::string& why)
    {
        _state.phase = Phase::Finished;
        if (_state.diagnostic.empty())
            _state.diagnostic = why;
    }

private:
    void require_phase(Phase p) const
    {
        if (_state.phase != p)
            throw Error(Errc::InvalidPhase, "expected phase " + to_string(p) + ", session is " + to_string(_state.phase));
    }

    void propose_and_evaluate(const WeightVector& w, const std::optional<Eigen::VectorXd>& theta)
    {
        // Bounds are refreshed before every fit because the observed range grows.
        const NormalizationBounds bounds = normalization_bounds(_state.dataset);
        const auto pairs = scalarize_dataset(_state.dataset, w, bounds, _cfg.rho);
        const GaussianProcessModel model = fit_gp(pairs, _problem.lower, _problem.upper, _state.rng, _cfg.gp);
        const Eigen::VectorXd c = maximize_acquisition(model, pairs, _problem.lower, _problem.upper, _cfg.acquisition, _state.rng);
        EvaluatedPoint p = evaluate(_problem, _state.ledger, c);
        p.generating_weight = w;
        p.theta = theta;
        _state.dataset.push_back(std::move(p));
    }

    void refresh_front()
    {
        if (!_state.dataset.empty())
            _state.front = non_dominated_filter(_state.dataset);
    }

    // Another interaction is only worthwhile if an evaluation can follow it.
    void await_preference_or_finish()
    {
        if (_state.front.entries.empty() || _state.ledger.remaining() <= _state.ledger.cost_dm)
            finish("budget exhausted");
        else
            _state.phase = Phase::AwaitingPreference;
    }

    void abort_with(const Error& e)
    {
        refresh_front();
        _state.phase = Phase::Finished;
        _state.diagnostic = e.what();
    }

    SessionConfig _cfg;
    BoundedProblem _problem;
    SessionState _state;
};

} // namespace iparego
