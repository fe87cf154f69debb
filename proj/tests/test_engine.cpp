#include <gtest/gtest.h>

#include <sstream>

#include <iparego/experiment.hpp>

using namespace iparego;

namespace {

SessionConfig small_config(Method m = Method::Wape)
{
    SessionConfig c;
    c.d_in = 2;
    c.d_out = 2;
    c.method = m;
    c.total_budget = 40;
    c.p_space = 12;
    c.p_init = 4;
    c.seed = 3;
    c.acquisition.n_random_starts = 500;
    return c;
}

EvaluatedPoint point(const BoundedProblem& p, const Eigen::VectorXd& x, int index)
{
    return {x, p.evaluator(x), std::nullopt, std::nullopt, index};
}

/// Session whose dataset is exactly `xs`, waiting for a preference.
Session session_with(const SessionConfig& cfg, const std::vector<Eigen::VectorXd>& xs)
{
    Session probe(cfg);
    SessionState st;
    st.ledger = {cfg.total_budget, static_cast<int>(xs.size()), 0, cfg.cost_dm};
    st.rng = SeededRng(cfg.seed);
    for (std::size_t i = 0; i < xs.size(); ++i)
        st.dataset.push_back(point(probe.problem(), xs[i], static_cast<int>(i)));
    st.front = non_dominated_filter(st.dataset);
    st.phase = Phase::AwaitingPreference;
    return Session(cfg, std::move(st));
}

void prefer_input(Session& s, const Eigen::VectorXd& x)
{
    for (const auto& p : s.state().dataset)
        if (p.x == x) {
            s.apply_preference(p.eval_index);
            return;
        }
    FAIL() << "input not in dataset";
}

} // namespace

TEST(Config, Validation)
{
    SessionConfig c;
    EXPECT_NO_THROW(validate(c));
    EXPECT_EQ(c.resolved().p_space, 30);
    EXPECT_EQ(c.resolved().p_init, 20);

    c.method = Method::Tripe;
    c.d_in = 9;
    try {
        validate(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidConfig);
        EXPECT_NE(std::string(e.what()).find("d_in exceeds TRIPE limit"), std::string::npos);
    }
    c.method = Method::Wape;
    c.total_budget = 100;
    EXPECT_THROW(validate(c), Error); // 90 + 20 > 100
    c.total_budget = 200;
    EXPECT_NO_THROW(validate(c));

    SessionConfig bad;
    bad.p_space = 3; // < d_in + 1
    EXPECT_THROW(validate(bad), Error);
    bad = SessionConfig{};
    bad.rho = 0.0;
    EXPECT_THROW(validate(bad), Error);
    bad = SessionConfig{};
    bad.wape_eta = 1.0;
    EXPECT_THROW(validate(bad), Error);
}

TEST(Initialization, ProtocolCountsAndWeights)
{
    SessionConfig c;
    c.seed = 11;
    c.acquisition.n_random_starts = 1000;
    Session s(c);
    s.run_initialization();
    const auto& st = s.state();
    EXPECT_EQ(st.phase, Phase::AwaitingPreference);
    ASSERT_EQ(st.dataset.size(), 50u);
    EXPECT_EQ(st.ledger.spent_evaluations, 50);
    const auto halton = halton_design(30, 3, s.problem().lower, s.problem().upper);
    for (int i = 0; i < 30; ++i) {
        EXPECT_EQ(st.dataset[static_cast<std::size_t>(i)].x, halton[static_cast<std::size_t>(i)]);
        EXPECT_FALSE(st.dataset[static_cast<std::size_t>(i)].generating_weight);
    }
    for (int i = 30; i < 50; ++i) {
        ASSERT_TRUE(st.dataset[static_cast<std::size_t>(i)].generating_weight);
        EXPECT_TRUE(on_simplex(*st.dataset[static_cast<std::size_t>(i)].generating_weight));
    }
    for (const auto& a : st.front.entries)
        for (const auto& b : st.front.entries)
            EXPECT_FALSE(dominates(a.y, b.y));
}

TEST(Initialization, NoWeightedRoundsMeansPureDesign)
{
    auto c = small_config();
    c.p_init = 0;
    Session s(c);
    s.run_initialization();
    const auto halton = halton_design(12, 2, s.problem().lower, s.problem().upper);
    ASSERT_EQ(s.state().dataset.size(), 12u);
    for (int i = 0; i < 12; ++i)
        EXPECT_EQ(s.state().dataset[static_cast<std::size_t>(i)].x, halton[static_cast<std::size_t>(i)]);
}

TEST(Initialization, Deterministic)
{
    Session a(small_config()), b(small_config());
    a.run_initialization();
    b.run_initialization();
    ASSERT_EQ(a.state().dataset.size(), b.state().dataset.size());
    for (std::size_t i = 0; i < a.state().dataset.size(); ++i)
        EXPECT_EQ(a.state().dataset[i].x, b.state().dataset[i].x);
}

TEST(Initialization, WrongPhase)
{
    Session s(small_config());
    s.run_initialization();
    EXPECT_THROW(s.run_initialization(), Error);
}

TEST(SimulatedDm, ChoosesArgminOnCircle)
{
    SimulatedDm dm{Eigen::Vector2d(0.5, 0.5), 0.05, {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)}};
    ParetoFront f;
    f.entries = {{0, Eigen::Vector2d(1, 0)}, {1, Eigen::Vector2d(0.7071, 0.7071)}, {2, Eigen::Vector2d(0, 1)}};
    EXPECT_EQ(dm.choose(f), 1);

    ParetoFront single;
    single.entries = {{7, Eigen::Vector2d(3, 4)}};
    EXPECT_EQ(dm.choose(single), 7);

    ParetoFront tie; // (1,0) and (0,1) are equally good under equal weights
    tie.entries = {{4, Eigen::Vector2d(1, 0)}, {9, Eigen::Vector2d(0, 1)}};
    EXPECT_EQ(dm.choose(tie), 4);
}

TEST(Preference, InvalidChoiceLeavesStateUnchanged)
{
    Session s(small_config());
    s.run_initialization();
    const auto before = s.state().ledger;
    int off_front = -1;
    for (const auto& p : s.state().dataset)
        if (!s.state().front.contains(p.eval_index))
            off_front = p.eval_index;
    ASSERT_GE(off_front, 0);
    for (int bad : {off_front, 9999}) {
        try {
            s.apply_preference(bad);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::InvalidChoice);
        }
    }
    EXPECT_EQ(s.state().ledger.spent(), before.spent());
    EXPECT_EQ(s.state().phase, Phase::AwaitingPreference);
    EXPECT_TRUE(s.state().history.empty());
}

TEST(Preference, BackfillsWeightForDesignPoints)
{
    auto c = small_config();
    c.p_init = 0;
    Session s(c);
    s.run_initialization();
    const auto& e = s.state().front.entries.front();
    s.apply_preference(e.eval_index);
    const auto& st = s.state();
    ASSERT_TRUE(st.preferred);
    const auto expect = infer_weight_for_point(normalize(e.y, normalization_bounds(st.dataset)));
    EXPECT_TRUE(st.preferred->w.isApprox(expect));
    EXPECT_EQ(st.ledger.spent_interactions, 1);
    EXPECT_EQ(st.phase, Phase::Exploring);
    ASSERT_EQ(st.history.size(), 1u);
    EXPECT_EQ(st.history[0].chosen, e.eval_index);
}

TEST(Tripe, InteriorVertexEvaluatesIncidentSimplices)
{
    auto c = small_config(Method::Tripe);
    c.p_space = 5;
    c.p_init = 0;
    const std::vector<Eigen::VectorXd> xs{Eigen::Vector2d(0.2, 0.2), Eigen::Vector2d(0.8, 0.2), Eigen::Vector2d(0.8, 0.8),
        Eigen::Vector2d(0.2, 0.8), Eigen::Vector2d(0.5, 0.5)};
    Session s = session_with(c, xs);
    if (!s.state().front.contains(4))
        GTEST_SKIP() << "centre point is dominated for this problem";
    prefer_input(s, xs[4]);
    EXPECT_EQ(s.tripe_step(), 4);
    EXPECT_EQ(s.state().dataset.size(), 9u);
    EXPECT_EQ(s.state().phase, Phase::AwaitingPreference);
}

TEST(Tripe, TruncatesToBudgetNearestFirst)
{
    auto c = small_config(Method::Tripe);
    c.p_space = 3;
    c.p_init = 0;
    const std::vector<Eigen::VectorXd> xs{Eigen::Vector2d(0.25, 0.25), Eigen::Vector2d(0.75, 0.25), Eigen::Vector2d(0.5, 0.75)};
    c.total_budget = 6; // 3 used, 1 interaction, 2 left
    Session s = session_with(c, xs);
    // pick a front member and count its candidates
    const int chosen = s.state().front.entries.front().eval_index;
    const Eigen::VectorXd x_p = s.state().dataset[static_cast<std::size_t>(chosen)].x;
    const auto tri = delaunay(xs, s.problem().lower, s.problem().upper);
    const auto near = neighbors_of_preferred(tri, all_candidates(tri), x_p);
    std::vector<double> dists;
    for (const auto& v : near.interior)
        dists.push_back((v - x_p).norm());
    for (const auto& v : near.fringe)
        dists.push_back((v - x_p).norm());
    ASSERT_GT(dists.size(), 2u);
    std::sort(dists.begin(), dists.end());

    s.apply_preference(chosen);
    EXPECT_EQ(s.tripe_step(), 2);
    EXPECT_EQ(s.state().phase, Phase::Finished);
    EXPECT_EQ(s.state().ledger.remaining(), 0);
    EXPECT_NEAR((s.state().dataset[3].x - x_p).norm(), dists[0], 1e-12);
    EXPECT_NEAR((s.state().dataset[4].x - x_p).norm(), dists[1], 1e-12);
}

TEST(Wape, StepEvaluatesNWeightedCandidates)
{
    auto c = small_config();
    Session s(c);
    s.run_initialization();
    s.apply_preference(s.state().front.entries.back().eval_index);
    const WeightVector w_p = s.state().preferred->w;
    const auto before = s.state().dataset.size();
    EXPECT_EQ(s.wape_step(), 5);
    ASSERT_EQ(s.state().dataset.size(), before + 5);
    for (std::size_t i = before; i < before + 5; ++i) {
        const auto& p = s.state().dataset[i];
        ASSERT_TRUE(p.generating_weight && p.theta);
        EXPECT_TRUE(on_simplex(*p.generating_weight));
        EXPECT_TRUE((p.theta->array() >= 0.95).all() && (p.theta->array() <= 1.05).all());
        EXPECT_TRUE(p.generating_weight->isApprox(apply_perturbation(w_p, *p.theta), 1e-12));
    }
}

TEST(Wape, ZeroEtaReusesPreferredWeight)
{
    auto c = small_config();
    c.wape_eta = 0.0;
    Session s(c);
    s.run_initialization();
    s.apply_preference(s.state().front.entries.front().eval_index);
    const WeightVector w_p = s.state().preferred->w;
    const auto before = s.state().dataset.size();
    s.wape_step();
    for (std::size_t i = before; i < s.state().dataset.size(); ++i)
        EXPECT_EQ(*s.state().dataset[i].generating_weight, w_p);
}

TEST(Wape, StepDeterministic)
{
    auto run = [] {
        Session s(small_config());
        s.run_initialization();
        s.apply_preference(s.state().front.entries.front().eval_index);
        s.wape_step();
        std::vector<Eigen::VectorXd> xs;
        for (const auto& p : s.state().dataset)
            xs.push_back(p.x);
        return xs;
    };
    EXPECT_EQ(run(), run());
}

TEST(GroundTruth, Dtlz2)
{
    auto gt = ground_truth_dtlz2(3, 2, Eigen::Vector2d(0.5, 0.5), 0.05);
    EXPECT_NEAR(gt.y_star[0], 0.70711, 1e-4);
    EXPECT_NEAR(gt.y_star[1], 0.70711, 1e-4);
    EXPECT_NEAR(opportunity_cost(gt.y_star, gt), 0.0, 1e-15);
    EXPECT_NEAR(gt.x_star[1], 0.5, 0.0);
    auto prob = make_dtlz2(3, 2);
    EXPECT_TRUE(prob.evaluator(gt.x_star).isApprox(gt.y_star, 1e-12));

    const double oc = opportunity_cost(Eigen::Vector2d(1, 0), gt);
    const double expect = (0.5 + 0.05 * 0.5) - (0.5 * std::sqrt(0.5) + 0.05 * std::sqrt(0.5));
    EXPECT_NEAR(oc, expect, 1e-6);

    auto corner = ground_truth_dtlz2(3, 2, Eigen::Vector2d(1, 0), 0.0);
    EXPECT_NEAR(corner.y_star[0], 0.0, 1e-12);
    EXPECT_NEAR(corner.y_star[1], 1.0, 1e-12);

    // regret is non-negative on a denser front
    for (int k = 0; k <= 200000; ++k) {
        const double a = k / 200000.0 * M_PI / 2;
        ASSERT_GE(opportunity_cost(Eigen::Vector2d(std::cos(a), std::sin(a)), gt), -1e-6);
    }

    try {
        ground_truth_dtlz2(4, 3, Eigen::Vector3d(0.3, 0.3, 0.4), 0.05);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnsupportedObjectiveCount);
    }
}

TEST(GroundTruth, RefinementStable)
{
    SeededRng rng(21);
    for (int t = 0; t < 5; ++t) {
        const auto w = sample_simplex_uniform(2, rng);
        const double coarse = ground_truth_dtlz2(3, 2, w, 0.05, 100000).u_star;
        const double fine = ground_truth_dtlz2(3, 2, w, 0.05, 1000000).u_star;
        EXPECT_LT(std::abs(coarse - fine), 1e-6);
    }
}

TEST(RunSession, InvariantsAndDeterminism)
{
    for (Method m : {Method::Wape, Method::Tripe}) {
        auto c = small_config(m);
        const auto gt = ground_truth_dtlz2(c.d_in, c.d_out, ground_truth_weight(c.seed, 2), c.rho);
        const auto log = run_session(c, SimulatedDm::from(gt), &gt);

        EXPECT_LE(log.ledger.spent(), c.total_budget);
        EXPECT_GE(log.ledger.spent(), c.total_budget - c.cost_dm);
        EXPECT_EQ(log.final_phase, Phase::Finished);
        EXPECT_EQ(static_cast<int>(log.entries.size()), log.ledger.spent_evaluations);
        EXPECT_EQ(log.init_evaluations, c.p_space + c.p_init);
        EXPECT_FALSE(log.interactions.empty());

        double prev = 1e300;
        for (const auto& e : log.entries) {
            ASSERT_TRUE(e.best_oc);
            EXPECT_LE(*e.best_oc, prev);
            EXPECT_GE(*e.best_oc, -1e-6);
            prev = *e.best_oc;
        }

        // every choice is the argmin of the hidden utility over the snapshot
        for (const auto& rec : log.interactions) {
            double best = 1e300;
            int arg = -1;
            for (int idx : rec.front_snapshot) {
                const double u = gt.utility(log.entries[static_cast<std::size_t>(idx)].y);
                if (u < best) {
                    best = u;
                    arg = idx;
                }
            }
            EXPECT_EQ(rec.chosen, arg);
        }

        std::ostringstream a, b;
        write_run_log_csv(a, log);
        write_run_log_csv(b, run_session(c, SimulatedDm::from(gt), &gt));
        EXPECT_EQ(a.str(), b.str());
    }
}

TEST(RunSession, RejectsTripeAboveFiveDimensions)
{
    SessionConfig c;
    c.method = Method::Tripe;
    c.d_in = 9;
    c.total_budget = 200;
    SimulatedDm dm{Eigen::Vector2d(0.5, 0.5), 0.05, {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)}};
    EXPECT_THROW(run_session(c, dm), Error);
}

TEST(RunLog, CsvLayout)
{
    auto c = small_config();
    c.total_budget = 18;
    const auto gt = ground_truth_dtlz2(c.d_in, c.d_out, Eigen::Vector2d(0.3, 0.7), c.rho);
    const auto log = run_session(c, SimulatedDm::from(gt), &gt);
    std::ostringstream os;
    write_run_log_csv(os, log);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "eval_index,x1,x2,y1,y2,w1,w2,best_oc");
    std::string row;
    std::getline(is, row); // design point: empty weight columns
    EXPECT_NE(row.find(",,,"), std::string::npos);
    int rows = 1;
    while (std::getline(is, row))
        ++rows;
    EXPECT_EQ(rows, static_cast<int>(log.entries.size()));
}
