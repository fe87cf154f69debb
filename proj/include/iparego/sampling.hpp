#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <iparego/error.hpp>

namespace iparego {

using WeightVector = Eigen::VectorXd;

inline bool on_simplex(const WeightVector& w, double tol = 1e-9)
{
    return w.size() > 0 && (w.array() >= 0.0).all() && std::abs(w.sum() - 1.0) <= tol;
}

/// Reproducible random stream. Only the raw 64-bit engine output is used, so
/// draws are identical across standard library implementations.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed = 0) : _seed(seed), _engine(seed) {}

    std::uint64_t seed() const { return _seed; }

    std::uint64_t next_u64() { return _engine(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(_engine() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard exponential via inversion; 1 - u lies in (0, 1].
    double exponential() { return -std::log(1.0 - uniform()); }

    /// Seed for an independent child stream.
    std::uint64_t derive_seed() { return splitmix(_engine()); }

    std::string state() const
    {
        std::ostringstream os;
        os << _seed << ' ' << _engine;
        return os.str();
    }

    void restore(const std::string& s)
    {
        std::istringstream is(s);
        is >> _seed >> _engine;
        if (!is)
            throw Error(Errc::InvalidConfig, "corrupt RNG state");
    }

    static std::uint64_t splitmix(std::uint64_t z)
    {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t _seed;
    std::mt19937_64 _engine;
};

inline std::vector<int> first_primes(int count)
{
    std::vector<int> primes;
    for (int c = 2; static_cast<int>(primes.size()) < count; ++c) {
        bool prime = true;
        for (int p : primes) {
            if (p * p > c)
                break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime)
            primes.push_back(c);
    }
    return primes;
}

inline double radical_inverse(std::uint64_t index, int base)
{
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

/// First n Halton points (index 0 skipped) scaled into [lower, upper].
inline std::vector<Eigen::VectorXd> halton_design(int n, int d, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper)
{
    if (lower.size() != d || upper.size() != d)
        throw Error(Errc::DimensionMismatch, "bounds do not match design dimension");
    const auto bases = first_primes(d);
    std::vector<Eigen::VectorXd> out;
    out.reserve(n > 0 ? n : 0);
    for (int i = 1; i <= n; ++i) {
        Eigen::VectorXd x(d);
        for (int k = 0; k < d; ++k)
            x[k] = lower[k] + (upper[k] - lower[k]) * radical_inverse(static_cast<std::uint64_t>(i), bases[k]);
        out.push_back(std::move(x));
    }
    return out;
}

/// Uniform draw from the probability simplex: normalized i.i.d. exponentials.
inline WeightVector sample_simplex_uniform(int d, SeededRng& rng)
{
    WeightVector w(d);
    for (int i = 0; i < d; ++i)
        w[i] = rng.exponential();
    const double s = w.sum();
    if (s <= 0.0) // every draw was exactly zero
        return WeightVector::Constant(d, 1.0 / d);
    return w / s;
}

struct PerturbedWeight {
    WeightVector w;
    Eigen::VectorXd theta;
};

/// w_new = (w_P * theta) / sum(w_P * theta) for a given theta.
inline WeightVector apply_perturbation(const WeightVector& w_p, const Eigen::VectorXd& theta)
{
    if (theta.size() != w_p.size())
        throw Error(Errc::DimensionMismatch, "theta and weight differ in size");
    Eigen::VectorXd prod = w_p.cwiseProduct(theta);
    return prod / prod.sum();
}

/// Multiplicative jitter of the preferred weight with theta ~ U(1 - eta, 1 + eta)^d.
inline PerturbedWeight perturb_weight(const WeightVector& w_p, double eta, SeededRng& rng)
{
    if (!(eta >= 0.0 && eta < 1.0))
        throw Error(Errc::InvalidEta, "eta must lie in [0, 1)");
    Eigen::VectorXd theta(w_p.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i)
        theta[i] = rng.uniform(1.0 - eta, 1.0 + eta);
    if (eta == 0.0)
        return {w_p, theta};
    return {apply_perturbation(w_p, theta), theta};
}

} // namespace iparego
