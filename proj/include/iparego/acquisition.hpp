#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include <iparego/error.hpp>
#include <iparego/sampling.hpp>
#include <iparego/scalarize.hpp>
#include <iparego/surrogate.hpp>

namespace iparego {

struct AcquisitionConfig {
    int n_random_starts = 0; // 0 selects 1000 * d_in, capped at 20000
    int n_local_refines = 5;
    double local_step_tolerance = 1e-6;

    int random_starts_for(int d_in) const
    {
        return n_random_starts > 0 ? n_random_starts : std::min(1000 * d_in, 20000);
    }
};

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Expected improvement below f_min for a Gaussian prediction N(mu, s^2).
inline double expected_improvement(double mu, double s, double f_min)
{
    if (s < 0.0)
        throw Error(Errc::NegativeStddev, "predictive standard deviation is negative");
    const double diff = f_min - mu;
    if (s == 0.0)
        return std::max(diff, 0.0);
    const double z = diff / s;
    return std::max(diff * normal_cdf(z) + s * normal_pdf(z), 0.0);
}

namespace detail {

    inline double ei_at(const GaussianProcessModel& model, const Eigen::VectorXd& x, double f_min)
    {
        const auto [mu, s] = model.predict(x);
        return expected_improvement(mu, s, f_min);
    }

    inline bool near_training_input(const GaussianProcessModel& model, const Eigen::VectorXd& x)
    {
        const auto& X = model.inputs();
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            if ((X.row(i).transpose() - x).cwiseAbs().maxCoeff() <= 1e-9)
                return true;
        return false;
    }

    /// Coordinate-wise pattern search; steps are fractions of the box width
    /// and halve until they fall below the tolerance.
    inline std::pair<Eigen::VectorXd, double> pattern_search(const GaussianProcessModel& model, Eigen::VectorXd x,
        double value, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, double f_min, double tolerance)
    {
        const Eigen::VectorXd width = upper - lower;
        double step = 0.05;
        while (step >= tolerance) {
            bool improved = false;
            for (Eigen::Index k = 0; k < x.size(); ++k) {
                for (double sign : {1.0, -1.0}) {
                    Eigen::VectorXd cand = x;
                    cand[k] = std::clamp(cand[k] + sign * step * width[k], lower[k], upper[k]);
                    if (cand[k] == x[k])
                        continue;
                    const double v = ei_at(model, cand, f_min);
                    if (v > value) {
                        x = std::move(cand);
                        value = v;
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved)
                step *= 0.5;
        }
        return {x, value};
    }

} // namespace detail

/// Approximate argmax of EI over the box: uniform random screening, then
/// pattern-search refinement of the best few screening points.
inline Eigen::VectorXd maximize_acquisition(const GaussianProcessModel& model, const std::vector<ScalarizedPoint>& data,
    const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, const AcquisitionConfig& cfg, SeededRng& rng)
{
    if (data.empty())
        throw Error(Errc::EmptyDataset, "EI needs an incumbent");
    const double f_min = std::min_element(data.begin(), data.end(),
        [](const ScalarizedPoint& a, const ScalarizedPoint& b) { return a.u < b.u; })->u;
    const int d = static_cast<int>(lower.size());
    const int n = cfg.random_starts_for(d);

    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    pts.reserve(static_cast<std::size_t>(n));
    vals.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd x(d);
        for (int k = 0; k < d; ++k)
            x[k] = rng.uniform(lower[k], upper[k]);
        vals.push_back(detail::ei_at(model, x, f_min));
        pts.push_back(std::move(x));
    }

    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });

    Eigen::VectorXd best = pts[order.front()];
    double best_value = vals[order.front()];
    const int refines = std::min<int>(std::max(cfg.n_local_refines, 1), n);
    for (int r = 0; r < refines; ++r) {
        const std::size_t i = order[static_cast<std::size_t>(r)];
        auto [x, v] = detail::pattern_search(model, pts[i], vals[i], lower, upper, f_min, cfg.local_step_tolerance);
        if (v > best_value) {
            best = std::move(x);
            best_value = v;
        }
    }

    // A repeated training input would make the next covariance singular.
    const Eigen::VectorXd width = upper - lower;
    for (int guard = 0; guard < 64 && detail::near_training_input(model, best); ++guard) {
        const Eigen::Index k = guard % d;
        const double nudge = cfg.local_step_tolerance * width[k];
        best[k] = best[k] + nudge <= upper[k] ? best[k] + nudge : best[k] - nudge;
        best[k] = std::clamp(best[k], lower[k], upper[k]);
    }
    return best;
}

} // namespace iparego
