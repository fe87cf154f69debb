#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <iparego/error.hpp>

namespace iparego {

/// Box-bounded vector objective. All objectives are minimized.
struct BoundedProblem {
    std::string name;
    int d_in = 0;
    int d_out = 0;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> evaluator;

    bool in_bounds(const Eigen::VectorXd& x) const
    {
        if (x.size() != d_in)
            return false;
        for (int i = 0; i < d_in; ++i)
            if (!(x[i] >= lower[i] && x[i] <= upper[i]))
                return false;
        return true;
    }
};

/// Evaluation budget in units of one expensive evaluation. Each DM interaction
/// costs `cost_dm` units.
struct BudgetLedger {
    int total_budget = 0;
    int spent_evaluations = 0;
    int spent_interactions = 0;
    int cost_dm = 1;

    int spent() const { return spent_evaluations + cost_dm * spent_interactions; }
    int remaining() const { return total_budget - spent(); }
};

struct EvaluatedPoint {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    std::optional<Eigen::VectorXd> generating_weight;
    // Multiplicative perturbation that produced generating_weight (WAPE only).
    std::optional<Eigen::VectorXd> theta;
    int eval_index = 0;
};

inline EvaluatedPoint evaluate(const BoundedProblem& problem, BudgetLedger& ledger, const Eigen::VectorXd& x)
{
    if (!problem.in_bounds(x))
        throw Error(Errc::OutOfBounds, "input outside the problem box");
    if (ledger.remaining() < 1)
        throw Error(Errc::BudgetExhausted, "no evaluations remain");
    EvaluatedPoint p;
    p.x = x;
    p.y = problem.evaluator(x);
    if (p.y.size() != problem.d_out)
        throw Error(Errc::DimensionMismatch, "evaluator returned wrong number of objectives");
    p.eval_index = ledger.spent_evaluations;
    ++ledger.spent_evaluations;
    return p;
}

inline void charge_interaction(BudgetLedger& ledger)
{
    if (ledger.remaining() < ledger.cost_dm)
        throw Error(Errc::BudgetExhausted, "budget cannot cover a DM interaction");
    ++ledger.spent_interactions;
}

namespace detail {
    // DTLZ2 with M = y.size() objectives; the last n - M + 1 inputs are distance variables.
    inline Eigen::VectorXd dtlz2(const Eigen::VectorXd& x, int m)
    {
        const int n = static_cast<int>(x.size());
        double g = 0.0;
        for (int i = m - 1; i < n; ++i)
            g += (x[i] - 0.5) * (x[i] - 0.5);
        constexpr double half_pi = std::numbers::pi / 2.0;
        Eigen::VectorXd f(m);
        for (int j = 0; j < m; ++j) {
            double v = 1.0 + g;
            for (int i = 0; i < m - 1 - j; ++i)
                v *= std::cos(x[i] * half_pi);
            if (j > 0)
                v *= std::sin(x[m - 1 - j] * half_pi);
            f[j] = v;
        }
        return f;
    }
} // namespace detail

inline BoundedProblem make_dtlz2(int d_in, int d_out)
{
    if (d_out < 2 || d_in < d_out)
        throw Error(Errc::InvalidDimensions, "DTLZ2 needs d_in >= d_out >= 2");
    BoundedProblem p;
    p.name = "dtlz2";
    p.d_in = d_in;
    p.d_out = d_out;
    p.lower = Eigen::VectorXd::Zero(d_in);
    p.upper = Eigen::VectorXd::Ones(d_in);
    p.evaluator = [d_out](const Eigen::VectorXd& x) { return detail::dtlz2(x, d_out); };
    return p;
}

/// Problem lookup by registered name.
inline BoundedProblem make_problem(const std::string& name, int d_in, int d_out)
{
    if (name == "dtlz2")
        return make_dtlz2(d_in, d_out);
    throw Error(Errc::UnknownProblem, "unknown problem '" + name + "'");
}

} // namespace iparego
