#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include <iparego/error.hpp>
#include <iparego/problem.hpp>

namespace iparego {

using Dataset = std::vector<EvaluatedPoint>;

struct FrontEntry {
    int eval_index = 0;
    Eigen::VectorXd y;
};

/// Mutually non-dominated entries, ordered by eval_index.
struct ParetoFront {
    std::vector<FrontEntry> entries;

    bool contains(int eval_index) const
    {
        return std::any_of(entries.begin(), entries.end(), [&](const FrontEntry& e) { return e.eval_index == eval_index; });
    }
};

struct NormalizationBounds {
    Eigen::VectorXd y_min;
    Eigen::VectorXd y_max;
};

inline constexpr double kDegenerateRange = 1e-12;

/// a <= b componentwise and a < b somewhere.
inline bool dominates(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    bool strict = false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] > b[i])
            return false;
        if (a[i] < b[i])
            strict = true;
    }
    return strict;
}

inline ParetoFront non_dominated_filter(const Dataset& dataset)
{
    if (dataset.empty())
        throw Error(Errc::EmptyDataset, "cannot extract a front from an empty dataset");

    // Any dominator precedes its victim in lexicographic order, so one forward
    // sweep against the accepted set suffices. Identical vectors resolve to the
    // earliest eval_index because it sorts first.
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ya = dataset[a].y;
        const auto& yb = dataset[b].y;
        for (Eigen::Index i = 0; i < ya.size(); ++i) {
            if (ya[i] != yb[i])
                return ya[i] < yb[i];
        }
        return dataset[a].eval_index < dataset[b].eval_index;
    });

    std::vector<std::size_t> kept;
    for (std::size_t idx : order) {
        const auto& y = dataset[idx].y;
        bool covered = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
            return (dataset[k].y.array() <= y.array()).all();
        });
        if (!covered)
            kept.push_back(idx);
    }

    ParetoFront front;
    for (std::size_t k : kept)
        front.entries.push_back({dataset[k].eval_index, dataset[k].y});
    std::sort(front.entries.begin(), front.entries.end(),
        [](const FrontEntry& a, const FrontEntry& b) { return a.eval_index < b.eval_index; });
    return front;
}

inline NormalizationBounds normalization_bounds(const Dataset& dataset)
{
    if (dataset.empty())
        throw Error(Errc::EmptyDataset, "cannot compute bounds of an empty dataset");
    NormalizationBounds b{dataset.front().y, dataset.front().y};
    for (const auto& p : dataset) {
        b.y_min = b.y_min.cwiseMin(p.y);
        b.y_max = b.y_max.cwiseMax(p.y);
    }
    return b;
}

/// Objectives whose observed range is below 1e-12 use a unit range.
inline bool degenerate_range(const NormalizationBounds& bounds, Eigen::Index j)
{
    return bounds.y_max[j] - bounds.y_min[j] < kDegenerateRange;
}

inline Eigen::VectorXd normalize(const Eigen::VectorXd& y, const NormalizationBounds& bounds)
{
    Eigen::VectorXd out(y.size());
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        const double range = degenerate_range(bounds, j) ? 1.0 : bounds.y_max[j] - bounds.y_min[j];
        out[j] = (y[j] - bounds.y_min[j]) / range;
    }
    return out;
}

} // namespace iparego
