#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// O(n^2) pairwise dominance: indices of points dominated by nobody, with
/// identical vectors resolved to the earliest.
inline std::vector<int> brute_force_front(const std::vector<Eigen::VectorXd>& ys)
{
    std::vector<int> keep;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        bool out = false;
        for (std::size_t j = 0; j < ys.size() && !out; ++j) {
            if (i == j)
                continue;
            const bool le = (ys[j].array() <= ys[i].array()).all();
            const bool lt = (ys[j].array() < ys[i].array()).any();
            if (le && lt)
                out = true;
            if (ys[j] == ys[i] && j < i)
                out = true;
        }
        if (!out)
            keep.push_back(static_cast<int>(i));
    }
    return keep;
}

/// Radical inverse computed digit-by-digit with exact rationals.
inline double radical_inverse(long index, long base)
{
    long num = 0, den = 1;
    while (index > 0) {
        num = num * base + index % base;
        den *= base;
        index /= base;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

/// Circumcenter and squared radius of a d-simplex from the linear system
/// 2 (v_i - v_0) . c = |v_i|^2 - |v_0|^2.
inline std::pair<Eigen::VectorXd, double> circumsphere(const std::vector<Eigen::VectorXd>& verts)
{
    const Eigen::Index d = verts[0].size();
    Eigen::MatrixXd A(d, d);
    Eigen::VectorXd b(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        A.row(i) = 2.0 * (verts[static_cast<std::size_t>(i + 1)] - verts[0]).transpose();
        b[i] = verts[static_cast<std::size_t>(i + 1)].squaredNorm() - verts[0].squaredNorm();
    }
    const Eigen::VectorXd c = A.fullPivLu().solve(b);
    return {c, (verts[0] - c).squaredNorm()};
}

inline double simplex_volume(const std::vector<Eigen::VectorXd>& verts)
{
    const Eigen::Index d = verts[0].size();
    Eigen::MatrixXd M(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        M.col(i) = verts[static_cast<std::size_t>(i + 1)] - verts[0];
    return std::abs(M.determinant()) / std::tgamma(static_cast<double>(d) + 1.0);
}

/// Convex hull volume in 2-D or 3-D by brute-force facet enumeration: a
/// d-subset is a facet when every other point lies on one side of its plane.
/// Assumes general position.
inline double hull_volume(const std::vector<Eigen::VectorXd>& pts)
{
    const int n = static_cast<int>(pts.size());
    const Eigen::Index d = pts[0].size();
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (const auto& p : pts)
        centroid += p;
    centroid /= n;

    auto try_facet = [&](const std::vector<int>& idx) -> double {
        Eigen::VectorXd normal(d);
        if (d == 2) {
            const Eigen::VectorXd e = pts[idx[1]] - pts[idx[0]];
            normal << -e[1], e[0];
        } else {
            const Eigen::Vector3d a = pts[idx[1]] - pts[idx[0]];
            const Eigen::Vector3d b = pts[idx[2]] - pts[idx[0]];
            normal = a.cross(b);
        }
        int pos = 0, neg = 0;
        for (int k = 0; k < n; ++k) {
            const double s = normal.dot(pts[k] - pts[idx[0]]);
            if (s > 1e-12)
                ++pos;
            else if (s < -1e-12)
                ++neg;
        }
        if (pos > 0 && neg > 0)
            return 0.0;
        std::vector<Eigen::VectorXd> cone{centroid};
        for (int i : idx)
            cone.push_back(pts[i]);
        return simplex_volume(cone);
    };

    double vol = 0.0;
    if (d == 2) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                vol += try_facet({i, j});
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int k = j + 1; k < n; ++k)
                    vol += try_facet({i, j, k});
    }
    return vol;
}

/// Is p inside the convex hull of pts (2-D/3-D)? Checked against the
/// half-spaces of every brute-force facet.
inline bool in_hull(const std::vector<Eigen::VectorXd>& pts, const Eigen::VectorXd& p, double tol = 1e-12)
{
    const int n = static_cast<int>(pts.size());
    const Eigen::Index d = pts[0].size();
    auto outside_of = [&](const std::vector<int>& idx) {
        Eigen::VectorXd normal(d);
        if (d == 2) {
            const Eigen::VectorXd e = pts[idx[1]] - pts[idx[0]];
            normal << -e[1], e[0];
        } else {
            const Eigen::Vector3d a = pts[idx[1]] - pts[idx[0]];
            const Eigen::Vector3d b = pts[idx[2]] - pts[idx[0]];
            normal = a.cross(b);
        }
        int pos = 0, neg = 0;
        for (int k = 0; k < n; ++k) {
            const double s = normal.dot(pts[k] - pts[idx[0]]);
            pos += s > 1e-12;
            neg += s < -1e-12;
        }
        if (pos > 0 && neg > 0)
            return false;
        const double sp = normal.normalized().dot(p - pts[idx[0]]);
        return pos > 0 ? sp < -tol : sp > tol;
    };
    if (d == 2) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (outside_of({i, j}))
                    return false;
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int k = j + 1; k < n; ++k)
                    if (outside_of({i, j, k}))
                        return false;
    }
    return true;
}

/// Monte-Carlo estimate of E[max(f_min - Y, 0)], Y ~ N(mu, s^2), with its
/// standard error.
inline std::pair<double, double> monte_carlo_ei(double mu, double s, double f_min, long draws, unsigned long seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double sum = 0.0, sum2 = 0.0;
    for (long i = 0; i < draws; ++i) {
        const double v = std::max(f_min - (mu + s * normal(gen)), 0.0);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(draws);
    const double var = sum2 / static_cast<double>(draws) - mean * mean;
    return {mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(draws))};
}

/// Augmented Tchebycheff with long double accumulation.
inline double tchebycheff_reference(const Eigen::VectorXd& w, const Eigen::VectorXd& f, double rho)
{
    long double mx = -1e300L, sum = 0.0L;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const long double t = static_cast<long double>(w[i]) * static_cast<long double>(f[i]);
        mx = std::max(mx, t);
        sum += t;
    }
    return static_cast<double>(mx + static_cast<long double>(rho) * sum);
}

} // namespace oracle
