#pragma once

#include <algorithm>
#include <vector>

#include <Eigen/Core>

#include <iparego/archive.hpp>
#include <iparego/error.hpp>
#include <iparego/sampling.hpp>

namespace iparego {

inline constexpr double kDefaultRho = 0.05;

/// U = max_i w_i f_i + rho * sum_j w_j f_j, on normalized objectives.
inline double augmented_tchebycheff(const WeightVector& w, const Eigen::VectorXd& f, double rho)
{
    if (w.size() != f.size() || w.size() == 0)
        throw Error(Errc::DimensionMismatch, "weight and objective vectors differ in size");
    const Eigen::VectorXd wf = w.cwiseProduct(f);
    return wf.maxCoeff() + rho * wf.sum();
}

struct ScalarizedPoint {
    Eigen::VectorXd x;
    double u = 0.0;
};

inline std::vector<ScalarizedPoint> scalarize_dataset(const Dataset& dataset, const WeightVector& w,
    const NormalizationBounds& bounds, double rho)
{
    if (dataset.empty())
        throw Error(Errc::EmptyDataset, "nothing to scalarize");
    std::vector<ScalarizedPoint> out;
    out.reserve(dataset.size());
    for (const auto& p : dataset)
        out.push_back({p.x, augmented_tchebycheff(w, normalize(p.y, bounds), rho)});
    return out;
}

/// Weight under which f is balanced for the pure Tchebycheff term:
/// w_i proportional to 1 / max(f_i, epsilon).
inline WeightVector infer_weight_for_point(const Eigen::VectorXd& f, double epsilon = 1e-6)
{
    WeightVector w(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i)
        w[i] = 1.0 / std::max(f[i], epsilon);
    return w / w.sum();
}

} // namespace iparego
