#include <gtest/gtest.h>

#include <iparego/acquisition.hpp>

#include "oracles.hpp"

using namespace iparego;

TEST(Ei, Examples)
{
    EXPECT_NEAR(expected_improvement(0.7, 1.0, 0.7), 0.3989422804014327, 1e-15);
    EXPECT_NEAR(expected_improvement(0.7, 1.0, 0.7), 0.39894, 1e-5);
    EXPECT_EQ(expected_improvement(-1.0, 0.0, 1.0), 2.0);
    EXPECT_EQ(expected_improvement(3.0, 0.0, 1.0), 0.0);
    try {
        expected_improvement(0.0, -1e-3, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NegativeStddev);
    }
}

TEST(Ei, MatchesMonteCarlo)
{
    const long draws = 10000000;
    auto [mean, se] = oracle::monte_carlo_ei(1.0 + 1.0, 0.25, 1.0, draws, 77);
    EXPECT_LE(std::abs(expected_improvement(2.0, 0.25, 1.0) - mean), 3 * se + 1e-12);
    auto [m2, se2] = oracle::monte_carlo_ei(0.3, 0.8, 0.5, draws, 78);
    EXPECT_LE(std::abs(expected_improvement(0.3, 0.8, 0.5) - m2), 3 * se2);
}

TEST(Ei, Properties)
{
    for (double mu = -2; mu <= 2; mu += 0.1)
        for (double s = 0; s <= 2; s += 0.05)
            ASSERT_GE(expected_improvement(mu, s, 0.0), 0.0);
    // vanishes with s when mu >= f_min
    EXPECT_LT(expected_improvement(0.0, 1e-12, 0.0), 1e-12);
    EXPECT_LT(expected_improvement(0.5, 1e-3, 0.0), 1e-12);
    // increasing in s at mu = f_min
    double prev = -1.0;
    for (double s = 0.0; s <= 5.0; s += 0.01) {
        const double v = expected_improvement(1.0, s, 1.0);
        EXPECT_GT(v, prev);
        prev = v;
    }
}

namespace {

GaussianProcessModel toy_model(std::vector<ScalarizedPoint>& data)
{
    data = {{Eigen::VectorXd::Constant(1, 0.0), 1.0}, {Eigen::VectorXd::Constant(1, 1.0), 0.0}};
    Eigen::VectorXd theta(2);
    theta << std::log(0.1), 0.0;
    return GaussianProcessModel::with_hyperparameters(data, theta);
}

} // namespace

TEST(Maximize, BeatsDenseGrid)
{
    std::vector<ScalarizedPoint> data;
    const auto model = toy_model(data);
    SeededRng rng(1);
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(1), hi = Eigen::VectorXd::Ones(1);
    const Eigen::VectorXd x = maximize_acquisition(model, data, lo, hi, {}, rng);
    auto ei = [&](double t) {
        auto [mu, s] = model.predict(Eigen::VectorXd::Constant(1, t));
        return expected_improvement(mu, s, 0.0);
    };
    const double found = ei(x[0]);
    double grid_best = 0.0;
    for (int i = 0; i <= 10000; ++i)
        grid_best = std::max(grid_best, ei(i / 10000.0));
    EXPECT_GE(found, grid_best - 1e-9);
    EXPECT_GE(x[0], 0.0);
    EXPECT_LE(x[0], 1.0);
}

TEST(Maximize, DeterministicAndAvoidsTrainingInputs)
{
    std::vector<ScalarizedPoint> data;
    const auto model = toy_model(data);
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(1), hi = Eigen::VectorXd::Ones(1);
    SeededRng a(5), b(5);
    const auto xa = maximize_acquisition(model, data, lo, hi, {}, a);
    const auto xb = maximize_acquisition(model, data, lo, hi, {}, b);
    EXPECT_EQ(xa, xb);
    for (const auto& p : data)
        EXPECT_GT((xa - p.x).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Maximize, DegenerateModelStillReturnsPoint)
{
    std::vector<ScalarizedPoint> data;
    for (int i = 0; i < 5; ++i)
        data.push_back({Eigen::Vector2d(0.2 * i, 0.1), 4.0});
    SeededRng rng(2);
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(2), hi = Eigen::VectorXd::Ones(2);
    auto model = fit_gp(data, lo, hi, rng);
    ASSERT_TRUE(model.degenerate());
    AcquisitionConfig cfg;
    cfg.n_random_starts = 200;
    const auto x = maximize_acquisition(model, data, lo, hi, cfg, rng);
    EXPECT_TRUE((x.array() >= 0).all() && (x.array() <= 1).all());
    auto [mu, s] = model.predict(x);
    EXPECT_EQ(expected_improvement(mu, s, 4.0), 0.0);
}

TEST(Maximize, DefaultStartCount)
{
    AcquisitionConfig cfg;
    EXPECT_EQ(cfg.random_starts_for(3), 3000);
    EXPECT_EQ(cfg.random_starts_for(30), 20000);
}
