#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <iparego/error.hpp>
#include <iparego/sampling.hpp>
#include <iparego/scalarize.hpp>

namespace iparego {

enum class KernelKind { Matern52, SquaredExponential };

struct GpConfig {
    KernelKind kernel = KernelKind::Matern52;
    int restarts = 10;
    int max_iterations = 100;
    double jitter = 1e-6;
    double max_jitter = 1e-2;
};

namespace gp {

    /// Per-dimension squared differences, so covariance rebuilds for new
    /// lengthscales cost O(n^2 d) without touching the raw inputs.
    struct PairwiseSquares {
        std::vector<Eigen::MatrixXd> per_dim;

        explicit PairwiseSquares(const Eigen::MatrixXd& X)
        {
            const Eigen::Index n = X.rows();
            per_dim.resize(static_cast<std::size_t>(X.cols()));
            for (Eigen::Index k = 0; k < X.cols(); ++k) {
                Eigen::MatrixXd& D = per_dim[static_cast<std::size_t>(k)];
                D.resize(n, n);
                for (Eigen::Index i = 0; i < n; ++i)
                    for (Eigen::Index j = 0; j < n; ++j) {
                        const double diff = X(i, k) - X(j, k);
                        D(i, j) = diff * diff;
                    }
            }
        }
    };

    inline double kernel_of_r2(KernelKind kind, double signal_variance, double r2)
    {
        if (kind == KernelKind::SquaredExponential)
            return signal_variance * std::exp(-0.5 * r2);
        const double s5r = std::sqrt(5.0 * r2);
        return signal_variance * (1.0 + s5r + 5.0 * r2 / 3.0) * std::exp(-s5r);
    }

    // dk/dr2 * (-2): multiplying by D_k / l_k^2 gives dk/dlog(l_k).
    inline double lengthscale_factor(KernelKind kind, double signal_variance, double r2)
    {
        if (kind == KernelKind::SquaredExponential)
            return signal_variance * std::exp(-0.5 * r2);
        const double s5r = std::sqrt(5.0 * r2);
        return signal_variance * (5.0 / 3.0) * (1.0 + s5r) * std::exp(-s5r);
    }

    /// log_params = (log l_1, ..., log l_d, log sigma_f^2).
    inline Eigen::MatrixXd scaled_r2(const PairwiseSquares& sq, const Eigen::VectorXd& log_params)
    {
        const Eigen::Index n = sq.per_dim.front().rows();
        Eigen::MatrixXd R2 = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t k = 0; k < sq.per_dim.size(); ++k)
            R2 += sq.per_dim[k] * std::exp(-2.0 * log_params[static_cast<Eigen::Index>(k)]);
        return R2;
    }

    struct Likelihood {
        double value = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd gradient;
        bool ok = false;
    };

    /// Log marginal likelihood of zero-mean targets y and, optionally, its
    /// analytic gradient w.r.t. log_params.
    inline Likelihood log_marginal_likelihood(const PairwiseSquares& sq, const Eigen::VectorXd& y,
        const Eigen::VectorXd& log_params, double jitter, KernelKind kind, bool with_gradient)
    {
        const Eigen::Index n = y.size();
        const Eigen::Index d = static_cast<Eigen::Index>(sq.per_dim.size());
        const double sf2 = std::exp(log_params[d]);
        const Eigen::MatrixXd R2 = scaled_r2(sq, log_params);
        Eigen::MatrixXd K = R2.unaryExpr([&](double r2) { return kernel_of_r2(kind, sf2, r2); });
        K.diagonal().array() += jitter;

        Likelihood out;
        Eigen::LLT<Eigen::MatrixXd> llt(K);
        if (llt.info() != Eigen::Success)
            return out;
        const Eigen::VectorXd alpha = llt.solve(y);
        double log_det_half = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            log_det_half += std::log(llt.matrixLLT()(i, i));
        out.value = -0.5 * y.dot(alpha) - log_det_half - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
        out.ok = std::isfinite(out.value);
        if (!with_gradient || !out.ok)
            return out;

        // dL/dtheta = 0.5 tr((alpha alpha^T - K^-1) dK/dtheta)
        Eigen::MatrixXd W = alpha * alpha.transpose() - llt.solve(Eigen::MatrixXd::Identity(n, n));
        out.gradient.resize(d + 1);
        const Eigen::MatrixXd G = R2.unaryExpr([&](double r2) { return lengthscale_factor(kind, sf2, r2); });
        const Eigen::MatrixXd WG = W.cwiseProduct(G);
        for (Eigen::Index k = 0; k < d; ++k)
            out.gradient[k] = 0.5 * WG.cwiseProduct(sq.per_dim[static_cast<std::size_t>(k)]).sum() * std::exp(-2.0 * log_params[k]);
        K.diagonal().array() -= jitter;
        out.gradient[d] = 0.5 * W.cwiseProduct(K).sum();
        return out;
    }

} // namespace gp

/// GP regression on scalarized values with a constant mean and targets
/// standardized internally. Immutable once fitted.
class GaussianProcessModel {
public:
    GaussianProcessModel() = default;

    /// Builds the posterior for fixed hyperparameters. Escalates jitter by x10
    /// up to cfg.max_jitter if the covariance is not positive definite.
    static GaussianProcessModel with_hyperparameters(const std::vector<ScalarizedPoint>& pairs,
        const Eigen::VectorXd& log_params, const GpConfig& cfg = {})
    {
        GaussianProcessModel m;
        m.load_data(pairs);
        m._cfg = cfg;
        if (m._degenerate)
            return m;
        m.condition(log_params);
        return m;
    }

    std::pair<double, double> predict(const Eigen::VectorXd& x) const
    {
        if (x.size() != _X.cols())
            throw Error(Errc::DimensionMismatch, "query dimension differs from training inputs");
        if (_degenerate)
            return {_mean, 0.0};
        const Eigen::Index d = _X.cols();
        const double sf2 = std::exp(_log_params[d]);
        Eigen::VectorXd kstar(_X.rows());
        for (Eigen::Index i = 0; i < _X.rows(); ++i) {
            double r2 = 0.0;
            for (Eigen::Index k = 0; k < d; ++k) {
                const double diff = (_X(i, k) - x[k]) * _inv_lengthscale[k];
                r2 += diff * diff;
            }
            kstar[i] = gp::kernel_of_r2(_cfg.kernel, sf2, r2);
        }
        const double mu = _mean + _scale * kstar.dot(_weights);
        const Eigen::VectorXd v = _llt.matrixL().solve(kstar);
        const double var = std::max(sf2 - v.squaredNorm(), 0.0);
        return {mu, _scale * std::sqrt(var)};
    }

    bool degenerate() const { return _degenerate; }
    double jitter() const { return _jitter; }
    double mean() const { return _mean; }
    int dim_in() const { return static_cast<int>(_X.cols()); }
    int size() const { return static_cast<int>(_X.rows()); }
    const Eigen::VectorXd& log_params() const { return _log_params; }
    const Eigen::MatrixXd& inputs() const { return _X; }
    const Eigen::VectorXd& standardized_targets() const { return _y; }
    KernelKind kernel() const { return _cfg.kernel; }

    Eigen::VectorXd lengthscales() const { return _log_params.head(_X.cols()).array().exp(); }
    double signal_variance() const { return std::exp(_log_params[_X.cols()]); }

    /// Prior standard deviation in target units.
    double prior_stddev() const { return _degenerate ? 0.0 : _scale * std::sqrt(signal_variance()); }

    double log_marginal_likelihood() const { return _lml; }

    friend GaussianProcessModel fit_gp(const std::vector<ScalarizedPoint>&, const Eigen::VectorXd&,
        const Eigen::VectorXd&, SeededRng&, const GpConfig&);

private:
    void load_data(const std::vector<ScalarizedPoint>& pairs)
    {
        if (pairs.size() < 2)
            throw Error(Errc::DegenerateData, "a GP needs at least two training points");
        const Eigen::Index n = static_cast<Eigen::Index>(pairs.size());
        const Eigen::Index d = pairs.front().x.size();
        _X.resize(n, d);
        Eigen::VectorXd u(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            _X.row(i) = pairs[static_cast<std::size_t>(i)].x.transpose();
            u[i] = pairs[static_cast<std::size_t>(i)].u;
        }
        bool distinct = false;
        for (Eigen::Index i = 1; i < n && !distinct; ++i)
            distinct = (_X.row(i) != _X.row(0));
        if (!distinct)
            throw Error(Errc::DegenerateData, "a GP needs at least two distinct inputs");

        _mean = u.mean();
        const double sd = std::sqrt((u.array() - _mean).square().sum() / static_cast<double>(n));
        _degenerate = !(sd > 1e-12 * std::max(1.0, std::abs(_mean)));
        _scale = _degenerate ? 1.0 : sd;
        _y = (u.array() - _mean) / _scale;
    }

    void condition(const Eigen::VectorXd& log_params)
    {
        _log_params = log_params;
        const Eigen::Index d = _X.cols();
        _inv_lengthscale = (-log_params.head(d)).array().exp();
        const double sf2 = std::exp(log_params[d]);
        const gp::PairwiseSquares sq(_X);
        const Eigen::MatrixXd R2 = gp::scaled_r2(sq, log_params);
        const Eigen::MatrixXd K = R2.unaryExpr([&](double r2) { return gp::kernel_of_r2(_cfg.kernel, sf2, r2); });
        for (double j = _cfg.jitter; j <= _cfg.max_jitter * (1.0 + 1e-9); j *= 10.0) {
            Eigen::MatrixXd Kj = K;
            Kj.diagonal().array() += j;
            _llt.compute(Kj);
            if (_llt.info() == Eigen::Success) {
                _jitter = j;
                _alpha = _llt.solve(_y);
                double log_det_half = 0.0;
                for (Eigen::Index i = 0; i < _y.size(); ++i)
                    log_det_half += std::log(_llt.matrixLLT()(i, i));
                _lml = -0.5 * _y.dot(_alpha) - log_det_half
                    - 0.5 * static_cast<double>(_y.size()) * std::log(2.0 * std::numbers::pi);
                // The jitter is numerical only, so the mean should interpolate.
                // Refine toward K^-1 y with the jittered factor as preconditioner.
                _weights = _alpha;
                double resid = (_y - K * _weights).norm();
                for (int it = 0; it < 8 && resid > 1e-13 * _y.norm(); ++it) {
                    const Eigen::VectorXd next = _weights + _llt.solve(_y - K * _weights);
                    const double r = (_y - K * next).norm();
                    if (!(r < resid))
                        break;
                    _weights = next;
                    resid = r;
                }
                // Refinement crawls on badly conditioned kernels; a pivoted
                // factorization of K itself is backward stable there.
                if (resid > 1e-10 * _y.norm()) {
                    const Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
                    if (ldlt.info() == Eigen::Success) {
                        const Eigen::VectorXd direct = ldlt.solve(_y);
                        const double r = (_y - K * direct).norm();
                        if (direct.allFinite() && r < resid)
                            _weights = direct;
                    }
                }
                return;
            }
        }
        throw Error(Errc::SingularCovariance, "covariance not positive definite at maximum jitter");
    }

    GpConfig _cfg;
    Eigen::MatrixXd _X;
    Eigen::VectorXd _y;
    double _mean = 0.0;
    double _scale = 1.0;
    bool _degenerate = false;
    Eigen::VectorXd _log_params;
    Eigen::VectorXd _inv_lengthscale;
    double _jitter = 0.0;
    double _lml = -std::numeric_limits<double>::infinity();
    Eigen::LLT<Eigen::MatrixXd> _llt;
    Eigen::VectorXd _alpha;
    Eigen::VectorXd _weights; // predictive-mean weights
};

namespace gp {

    struct SearchBox {
        Eigen::VectorXd start_lo, start_hi; // restarts are drawn here
        Eigen::VectorXd lo, hi;             // ascent is clamped here
    };

    inline SearchBox hyperparameter_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper)
    {
        const Eigen::Index d = lower.size();
        SearchBox b;
        b.start_lo.resize(d + 1);
        b.start_hi.resize(d + 1);
        b.lo.resize(d + 1);
        b.hi.resize(d + 1);
        for (Eigen::Index k = 0; k < d; ++k) {
            const double lr = std::log(upper[k] - lower[k]);
            b.start_lo[k] = lr + std::log(1e-2);
            b.start_hi[k] = lr + std::log(10.0);
            b.lo[k] = lr + std::log(1e-3);
            b.hi[k] = lr + std::log(1e2);
        }
        b.start_lo[d] = std::log(1e-2);
        b.start_hi[d] = std::log(1e2);
        b.lo[d] = std::log(1e-3);
        b.hi[d] = std::log(1e3);
        return b;
    }

    /// Ascent on log-parameters with Armijo backtracking. The direction is the
    /// gradient preconditioned by a BFGS inverse-Hessian estimate, reset to the
    /// plain gradient whenever the projected step stops being an ascent step.
    inline std::pair<Eigen::VectorXd, double> ascend(const PairwiseSquares& sq, const Eigen::VectorXd& y,
        Eigen::VectorXd theta, const SearchBox& box, const GpConfig& cfg)
    {
        const Eigen::Index p = theta.size();
        auto clamp = [&](Eigen::VectorXd v) { return v.cwiseMax(box.lo).cwiseMin(box.hi); };
        theta = clamp(theta);
        Likelihood cur = log_marginal_likelihood(sq, y, theta, cfg.jitter, cfg.kernel, true);
        if (!cur.ok)
            return {theta, cur.value};
        Eigen::MatrixXd H = Eigen::MatrixXd::Identity(p, p);
        bool scaled = false;
        for (int it = 0; it < cfg.max_iterations; ++it) {
            Eigen::VectorXd dir = H * cur.gradient;
            if (dir.dot(cur.gradient) <= 0.0) {
                H.setIdentity();
                dir = cur.gradient;
            }
            double step = 1.0;
            bool accepted = false;
            Eigen::VectorXd cand;
            Likelihood next;
            for (int bt = 0; bt < 40; ++bt, step *= 0.5) {
                cand = clamp(theta + step * dir);
                const double gain = cur.gradient.dot(cand - theta);
                if (gain <= 0.0)
                    break;
                next = log_marginal_likelihood(sq, y, cand, cfg.jitter, cfg.kernel, true);
                if (next.ok && next.value >= cur.value + 1e-4 * gain) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (H.isIdentity())
                    break;
                H.setIdentity(); // retry once along the raw gradient
                continue;
            }
            const Eigen::VectorXd s = cand - theta;
            const Eigen::VectorXd yk = cur.gradient - next.gradient; // gradient change of -L
            const double improvement = next.value - cur.value;
            theta = cand;
            cur = std::move(next);
            const double sy = s.dot(yk);
            if (sy > 1e-12) {
                if (!scaled) {
                    H *= sy / yk.squaredNorm();
                    scaled = true;
                }
                const double r = 1.0 / sy;
                const Eigen::MatrixXd V = Eigen::MatrixXd::Identity(p, p) - r * s * yk.transpose();
                H = V * H * V.transpose() + r * s * s.transpose();
            }
            if (improvement < 1e-9 * (1.0 + std::abs(cur.value)))
                break;
        }
        return {theta, cur.value};
    }

} // namespace gp

/// Maximum-likelihood GP fit with multi-start gradient ascent. Deterministic
/// for a given rng state.
inline GaussianProcessModel fit_gp(const std::vector<ScalarizedPoint>& pairs, const Eigen::VectorXd& lower,
    const Eigen::VectorXd& upper, SeededRng& rng, const GpConfig& cfg = {})
{
    GaussianProcessModel model;
    model.load_data(pairs);
    model._cfg = cfg;
    const Eigen::Index d = model._X.cols();
    if (lower.size() != d || upper.size() != d)
        throw Error(Errc::DimensionMismatch, "bounds do not match input dimension");
    const gp::SearchBox box = gp::hyperparameter_box(lower, upper);

    // Draw every start up front so the rng advances by the same amount
    // whether or not the data are degenerate.
    std::vector<Eigen::VectorXd> starts;
    for (int r = 0; r < std::max(cfg.restarts, 1); ++r) {
        Eigen::VectorXd s(d + 1);
        for (Eigen::Index k = 0; k <= d; ++k)
            s[k] = rng.uniform(box.start_lo[k], box.start_hi[k]);
        starts.push_back(std::move(s));
    }
    if (model._degenerate)
        return model;

    const gp::PairwiseSquares sq(model._X);
    Eigen::VectorXd best;
    double best_value = -std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        auto [theta, value] = gp::ascend(sq, model._y, s, box, cfg);
        if (value > best_value) {
            best_value = value;
            best = theta;
        }
    }
    if (best.size() == 0) // every start failed to factorize at base jitter
        best = starts.front();
    model.condition(best);
    return model;
}

} // namespace iparego
