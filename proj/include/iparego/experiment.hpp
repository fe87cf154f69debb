#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <iparego/benchmark.hpp>
#include <iparego/error.hpp>
#include <iparego/run.hpp>

namespace iparego {

/// Linear-interpolation percentile, rank = q/100 * (n - 1).
inline double percentile(std::vector<double> values, double q)
{
    if (values.empty())
        throw Error(Errc::EmptyInput, "percentile of an empty list");
    if (!(q >= 0.0 && q <= 100.0))
        throw Error(Errc::InvalidConfig, "percentile q must lie in [0, 100]");
    std::sort(values.begin(), values.end());
    const double rank = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

struct ExperimentSpec {
    SessionConfig session;
    int repetitions = 10;
    std::uint64_t seed_base = 0;
    std::string output_dir; // empty: nothing is written
};

struct AggregateRow {
    int eval_index = 0;
    double median = 0.0;
    double p20 = 0.0;
    double p80 = 0.0;
};

struct ExperimentResult {
    std::vector<RunLog> runs;
    std::vector<GroundTruth> ground_truths;
    std::vector<AggregateRow> aggregate;
};

/// Hidden DM weight for repetition r, from a stream separate from the optimizer's.
inline WeightVector ground_truth_weight(std::uint64_t seed, int d_out)
{
    SeededRng rng(SeededRng::splitmix(seed ^ 0x6a09e667f3bcc909ULL));
    return sample_simplex_uniform(d_out, rng);
}

/// Best-so-far OC for evaluation counts 1..budget, carried forward past the
/// last evaluation of the run.
inline std::vector<double> best_oc_series(const RunLog& log, int budget)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(budget));
    double last = std::numeric_limits<double>::quiet_NaN();
    for (int e = 0; e < budget; ++e) {
        if (e < static_cast<int>(log.entries.size()) && log.entries[static_cast<std::size_t>(e)].best_oc)
            last = *log.entries[static_cast<std::size_t>(e)].best_oc;
        out.push_back(last);
    }
    return out;
}

inline std::vector<AggregateRow> aggregate_runs(const std::vector<RunLog>& runs, int budget)
{
    std::vector<std::vector<double>> series;
    for (const auto& r : runs)
        series.push_back(best_oc_series(r, budget));
    std::vector<AggregateRow> rows;
    for (int e = 0; e < budget; ++e) {
        std::vector<double> col;
        for (const auto& s : series)
            col.push_back(s[static_cast<std::size_t>(e)]);
        rows.push_back({e, percentile(col, 50.0), percentile(col, 20.0), percentile(col, 80.0)});
    }
    return rows;
}

inline void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows)
{
    os << "eval_index,median_oc,p20_oc,p80_oc\n";
    for (const auto& r : rows)
        os << r.eval_index << ',' << format_double(r.median) << ',' << format_double(r.p20) << ','
           << format_double(r.p80) << '\n';
}

namespace detail {
    // Write to a sibling temp file, then rename over the target.
    template <typename Writer>
    void write_atomically(const std::filesystem::path& path, Writer&& write)
    {
        const std::filesystem::path tmp = path.string() + ".tmp";
        {
            std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
            if (!os)
                throw Error(Errc::Io, "cannot open " + tmp.string());
            write(os);
            if (!os)
                throw Error(Errc::Io, "write failed for " + tmp.string());
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec)
            throw Error(Errc::Io, "cannot rename " + tmp.string() + ": " + ec.message());
    }
} // namespace detail

/// Repetition r runs with seed seed_base + r against a simulated DM whose
/// weight is drawn from a dedicated stream.
inline ExperimentResult run_experiment(const ExperimentSpec& spec)
{
    if (spec.repetitions < 1)
        throw Error(Errc::InvalidConfig, "reps: must be at least 1");
    validate(spec.session);
    const SessionConfig base = spec.session.resolved();

    ExperimentResult result;
    for (int r = 0; r < spec.repetitions; ++r) {
        SessionConfig cfg = base;
        cfg.seed = spec.seed_base + static_cast<std::uint64_t>(r);
        const GroundTruth gt = ground_truth_dtlz2(cfg.d_in, cfg.d_out, ground_truth_weight(cfg.seed, cfg.d_out), cfg.rho);
        result.runs.push_back(run_session(cfg, SimulatedDm::from(gt), &gt));
        result.ground_truths.push_back(gt);
    }
    result.aggregate = aggregate_runs(result.runs, base.total_budget);

    if (!spec.output_dir.empty()) {
        const std::filesystem::path dir(spec.output_dir);
        std::filesystem::create_directories(dir);
        for (std::size_t r = 0; r < result.runs.size(); ++r) {
            const std::string name = "run_" + std::to_string(r) + ".csv";
            detail::write_atomically(dir / name, [&](std::ostream& os) { write_run_log_csv(os, result.runs[r]); });
        }
        detail::write_atomically(dir / "aggregate.csv", [&](std::ostream& os) { write_aggregate_csv(os, result.aggregate); });
    }
    return result;
}

} // namespace iparego
