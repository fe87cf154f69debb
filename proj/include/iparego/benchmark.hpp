#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Core>

#include <iparego/archive.hpp>
#include <iparego/error.hpp>
#include <iparego/sampling.hpp>
#include <iparego/scalarize.hpp>

namespace iparego {

/// Hidden utility of a simulated decision maker and the Pareto-optimal point
/// that minimizes it.
struct GroundTruth {
    WeightVector w_star;
    double rho = kDefaultRho;
    NormalizationBounds reference; // fixed, independent of the run's data
    Eigen::VectorXd x_star;
    Eigen::VectorXd y_star;
    double u_star = 0.0;

    double utility(const Eigen::VectorXd& y) const { return augmented_tchebycheff(w_star, normalize(y, reference), rho); }
};

/// Ground truth on the analytic bi-objective DTLZ2 front {(cos t, sin t)},
/// sampled at `samples` evenly spaced angles on [0, pi/2].
inline GroundTruth ground_truth_dtlz2(int d_in, int d_out, const WeightVector& w_star, double rho, int samples = 100000)
{
    if (d_out != 2)
        throw Error(Errc::UnsupportedObjectiveCount, "analytic ground truth is only available for two objectives");
    if (w_star.size() != 2)
        throw Error(Errc::DimensionMismatch, "w_star must have two components");
    if (samples < 2)
        throw Error(Errc::InvalidConfig, "need at least two front samples");
    GroundTruth gt;
    gt.w_star = w_star;
    gt.rho = rho;
    gt.reference = {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
    gt.u_star = std::numeric_limits<double>::infinity();
    double best_t = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
        const double angle = t * std::numbers::pi / 2.0;
        const Eigen::Vector2d y(std::cos(angle), std::sin(angle));
        const double u = gt.utility(y);
        if (u < gt.u_star) {
            gt.u_star = u;
            best_t = t;
        }
    }
    // The optimum sits on a kink of the max, so a grid alone is only first-order
    // accurate. Golden-section search inside the bracket around the best sample.
    {
        const auto u_at = [&](double t) {
            const double a = t * std::numbers::pi / 2.0;
            return gt.utility(Eigen::Vector2d(std::cos(a), std::sin(a)));
        };
        const double h = 1.0 / static_cast<double>(samples - 1);
        double lo = std::max(0.0, best_t - h), hi = std::min(1.0, best_t + h);
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
        double fa = u_at(a), fb = u_at(b);
        for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
            if (fa < fb) {
                hi = b;
                b = a;
                fb = fa;
                a = hi - g * (hi - lo);
                fa = u_at(a);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + g * (hi - lo);
                fb = u_at(b);
            }
        }
        const double t = 0.5 * (lo + hi);
        if (const double u = u_at(t); u < gt.u_star) {
            gt.u_star = u;
            best_t = t;
        }
    }
    gt.x_star = Eigen::VectorXd::Constant(d_in, 0.5);
    gt.x_star[0] = best_t;
    gt.y_star = Eigen::Vector2d(std::cos(best_t * std::numbers::pi / 2.0), std::sin(best_t * std::numbers::pi / 2.0));
    return gt;
}

/// Regret form: U(y) - U(F(x*)), non-negative up to front discretization.
inline double opportunity_cost(const Eigen::VectorXd& y, const GroundTruth& gt) { return gt.utility(y) - gt.u_star; }

/// Picks the front member with the lowest hidden utility; ties go to the
/// lowest eval_index.
struct SimulatedDm {
    WeightVector w_star;
    double rho = kDefaultRho;
    NormalizationBounds reference;

    static SimulatedDm from(const GroundTruth& gt) { return {gt.w_star, gt.rho, gt.reference}; }

    int choose(const ParetoFront& front) const
    {
        if (front.entries.empty())
            throw Error(Errc::EmptyDataset, "cannot choose from an empty front");
        int best = -1;
        double best_u = std::numeric_limits<double>::infinity();
        for (const auto& e : front.entries) { // entries are in eval_index order
            const double u = augmented_tchebycheff(w_star, normalize(e.y, reference), rho);
            if (u < best_u) {
                best_u = u;
                best = e.eval_index;
            }
        }
        return best;
    }
};

} // namespace iparego
