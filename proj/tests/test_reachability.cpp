#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hkn/core.hpp"
#include "hkn/metrics.hpp"
#include "hkn/reachability.hpp"
#include "oracles.hpp"

using namespace hkn;

namespace {

LawSpec law_of(LawKind kind, double z = 0.5, double alpha = 0.02)
{
    LawSpec s;
    s.kind = kind;
    s.z = z;
    s.alpha = alpha;
    return s;
}

ReachTask make_task(Population pop, Variant v, double eta, LawSpec law, std::size_t random_states,
                    std::size_t random_adversaries)
{
    ReachTask task{std::move(pop), v, eta, law, {}, standard_adversaries(random_adversaries, 11), std::nullopt, false};
    const std::size_t n = task.pop.size();
    task.initial_states = random_initial_states(n, random_states, 42);
    task.initial_states.push_back(std::vector<double>(n, 0.0));
    task.initial_states.push_back(std::vector<double>(n, 1.0));
    std::vector<double> ends(n, 0.0);
    ends.back() = 1.0;
    task.initial_states.push_back(ends);
    return task;
}

// Three-branch law written out directly against the oracle tilde.
double ball_control_oracle(double tilde, double z, double alpha, double eta)
{
    if (tilde > z + eta - alpha) {
        return -eta + alpha;
    }
    if (tilde < z - eta + alpha) {
        return eta - alpha;
    }
    return z - tilde;
}

} // namespace

TEST(Target, BallIsStrict)
{
    const TargetSet b = TargetSet::ball(0.5, 0.1);
    EXPECT_TRUE(b.contains(std::vector<double>{0.45, 0.55, 0.5}));
    EXPECT_FALSE(b.contains(std::vector<double>{0.375, 0.5, 0.5}));
    EXPECT_FALSE(TargetSet::ball(0.5, 0.125).contains(std::vector<double>{0.375, 0.5, 0.5}));
    EXPECT_THROW(TargetSet::ball(0.5, 0.0), std::invalid_argument);
}

TEST(Target, SpreadAndBand)
{
    const std::vector<double> x{0.125, 0.5, 0.25};
    EXPECT_TRUE(TargetSet::spread(0.375).contains(x));
    EXPECT_FALSE(TargetSet::spread(0.376).contains(x));
    EXPECT_TRUE(TargetSet::band(0.25, 0.375).contains(x));
    EXPECT_FALSE(TargetSet::band(0.25, 0.374).contains(x));
}

TEST(DriveToBall, WorkedControls)
{
    const Population pop({0.2, 0.2, 0.2});
    const ControlInput far = law_drive_to_ball(std::vector<double>{1.0, 1.0, 1.0}, pop, Variant::EnvNoise, 0.5, 0.02, 0.1);
    for (double u : far.u) {
        EXPECT_NEAR(u, -0.08, 1e-15);
    }
    const ControlInput at = law_drive_to_ball(std::vector<double>{0.5, 0.5, 0.5}, pop, Variant::EnvNoise, 0.5, 0.02, 0.1);
    for (double u : at.u) {
        EXPECT_EQ(u, 0.0);
    }
    for (double d : at.delta) {
        EXPECT_EQ(d, 0.02);
    }
}

TEST(DriveToBall, MatchesOracleOnRandomStates)
{
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<double> r{0.1, 0.25, 0.4, 0.6, 0.9};
    const Population pop(r);
    for (int k = 0; k < 500; ++k) {
        std::vector<double> x(5);
        for (double& v : x) {
            v = u(gen);
        }
        const double z = u(gen), eta = 0.05 + 0.3 * u(gen), alpha = eta * 0.45 * u(gen) + 1e-6;
        const ControlInput c = law_drive_to_ball(x, pop, Variant::EnvNoise, z, alpha, eta);
        const auto t = oracle::tilde(x, r, {}, false);
        for (std::size_t i = 0; i < 5; ++i) {
            EXPECT_NEAR(c.u[i], ball_control_oracle(t[i], z, alpha, eta), 1e-12);
            EXPECT_LE(std::abs(c.u[i]), eta - alpha);
        }
    }
}

TEST(DriveToBall, RejectsAlphaOutsideRange)
{
    const Population pop({0.2, 0.2, 0.2});
    const std::vector<double> x{0.1, 0.2, 0.3};
    EXPECT_THROW(law_drive_to_ball(x, pop, Variant::EnvNoise, 0.5, 0.05, 0.1), std::invalid_argument);
    EXPECT_THROW(law_drive_to_ball(x, pop, Variant::EnvNoise, 0.5, 0.0, 0.1), std::invalid_argument);
    EXPECT_THROW(law_drive_to_ball(x, pop, Variant::CommNoise, 0.5, 0.02, 0.1), std::invalid_argument);
}

TEST(DriveToBall, CertifiedWithinBoundAgainstAllAdversaries)
{
    const LawSpec law = law_of(LawKind::DriveToBall, 0.7, 0.02);
    for (Variant v : {Variant::EnvNoise, Variant::EnvNoiseGlobal}) {
        const ReachTask task =
            make_task(Population({0.1, 0.2, 0.3, 0.4, 0.5}, {0.2, 0.4, 0.5, 0.6, 0.8}), v, 0.1, law, 20, 100);
        const ReachReport rep = certify(task);
        EXPECT_TRUE(rep.reached) << to_string(v);
        ASSERT_TRUE(rep.hit_time.has_value());
        EXPECT_LE(*rep.hit_time, 18u);
        EXPECT_LE(*rep.hit_time, rep.bound);
        EXPECT_EQ(rep.runs.size(), task.initial_states.size() * 103);
    }
}

TEST(DriveToBall, DistanceToCenterContracts)
{
    const LawSpec law = law_of(LawKind::DriveToBall, 0.3, 0.04);
    ReachTask task = make_task(Population({0.05, 0.15, 0.3, 0.5}), Variant::EnvNoise, 0.15, law, 10, 5);
    task.keep_traces = true;
    const double a = std::min(law.alpha / 2.0, 0.15 / 4.0);
    for (const ReachRun& run : certify(task).runs) {
        for (std::size_t t = 0; t + 1 < run.trace.size(); ++t) {
            auto dist = [&](const std::vector<double>& x) {
                double m = 0.0;
                for (double v : x) {
                    m = std::max(m, std::abs(v - law.z));
                }
                return m;
            };
            EXPECT_LE(dist(run.trace[t + 1]), std::max(dist(run.trace[t]) - (0.15 - 2.0 * a), a) + 1e-12);
        }
    }
}

TEST(Certify, AlreadyInsideHitsAtZero)
{
    ReachTask task = make_task(Population({0.2, 0.2, 0.2}), Variant::EnvNoise, 0.1,
                               law_of(LawKind::DriveToBall, 0.5, 0.02), 0, 0);
    task.initial_states = {{0.5, 0.51, 0.49}};
    const ReachReport rep = certify(task);
    EXPECT_TRUE(rep.reached);
    EXPECT_EQ(rep.hit_time, 0u);
}

TEST(Certify, ReportsFailureWhenHorizonTooShort)
{
    ReachTask task = make_task(Population({0.2, 0.2, 0.2}), Variant::EnvNoise, 0.1,
                               law_of(LawKind::DriveToBall, 0.9, 0.02), 0, 0);
    task.initial_states = {{0.0, 0.0, 0.0}};
    task.horizon = 3;
    const ReachReport rep = certify(task);
    EXPECT_FALSE(rep.reached);
    EXPECT_EQ(rep.failures, 3u);
    EXPECT_FALSE(rep.hit_time.has_value());
}

TEST(Certify, BudgetNeverExceeded)
{
    const Population pop({0.05, 0.3, 0.3, 0.45});
    const ReachTask task = make_task(pop, Variant::EnvNoise, 0.12, law_of(LawKind::SplitExtreme), 10, 10);
    for (const ReachRun& run : certify(task).runs) {
        EXPECT_LE(run.max_budget_use, 0.12 + 1e-15);
    }
}

TEST(SplitExtreme, ReachesFullSpread)
{
    const Population pop({0.05, 0.3, 0.3, 0.45});
    ReachTask task = make_task(pop, Variant::EnvNoise, 0.12, law_of(LawKind::SplitExtreme), 20, 30);
    task.keep_traces = true;
    const ReachReport rep = certify(task);
    EXPECT_TRUE(rep.reached);
    EXPECT_LE(*rep.hit_time, rep.bound);
    for (const ReachRun& run : rep.runs) {
        EXPECT_DOUBLE_EQ(run.final_spread, 1.0);
        if (run.hit_time == 0u) {
            continue;
        }
        EXPECT_EQ(run.trace.back()[0], 1.0);
        for (std::size_t i = 1; i < 4; ++i) {
            EXPECT_EQ(run.trace.back()[i], 0.0);
        }
    }
}

TEST(SplitExtreme, PreconditionsEnforced)
{
    const Population pop({0.05, 0.3, 0.3, 0.45});
    const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
    const double kb = split_extreme_k_bound(pop, 0.12);
    EXPECT_NO_THROW(law_split_extreme(x, pop, 0.12, kb));
    EXPECT_THROW(law_split_extreme(x, pop, 0.12, kb * 0.99), std::invalid_argument);
    EXPECT_THROW(law_split_extreme(x, pop, 0.02, 100.0), std::invalid_argument);
    LawSpec spec = law_of(LawKind::SplitExtreme);
    spec.K = kb * 0.5;
    EXPECT_THROW(make_law(spec, pop, Variant::EnvNoise, 0.12), std::invalid_argument);
    EXPECT_THROW(make_law(law_of(LawKind::SplitExtreme), pop, Variant::EnvNoise, 0.02), std::invalid_argument);
}

TEST(SpreadOnce, ReachesTwiceEtaMinusSlack)
{
    for (Variant v : {Variant::EnvNoise, Variant::EnvNoiseGlobal}) {
        LawSpec spec = law_of(LawKind::SpreadOnce);
        spec.epsilon = 0.01;
        const ReachTask task =
            make_task(Population({0.1, 0.2, 0.3, 0.5, 0.7}, {0.3, 0.3, 0.5, 0.6, 0.9}), v, 0.2, spec, 10, 30);
        const ReachReport rep = certify(task);
        EXPECT_TRUE(rep.reached) << to_string(v);
        EXPECT_DOUBLE_EQ(rep.target.lo, 0.38);
        EXPECT_GE(rep.min_final_spread, 0.38);
    }
}

TEST(SpreadGlobal, ReachesPredictedSpread)
{
    const Population pop({0.1, 0.3, 0.5, 0.6}, {0.5, 0.2, 0.6, 0.7});
    LawSpec spec = law_of(LawKind::SpreadGlobal);
    spec.epsilon = 0.02;
    const ReachTask task = make_task(pop, Variant::EnvNoiseGlobal, 0.1, spec, 5, 10);
    const ReachReport rep = certify(task);
    // lead agent is index 0 (the only r_i < 2 eta): min{4*0.1/(3*0.5) - eps, 0.4 - eps, 1}
    EXPECT_NEAR(rep.target.lo, 0.4 / 1.5 - 0.02, 1e-12);
    EXPECT_TRUE(rep.reached);
}

TEST(CommCenter, HomogeneousReachesBall)
{
    const ReachTask task = make_task(Population({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}), Variant::CommNoise,
                                     0.1, law_of(LawKind::CommCenter, 0.5, 0.02), 20, 30);
    const ReachReport rep = certify(task);
    EXPECT_TRUE(rep.reached);
    EXPECT_LE(*rep.hit_time, rep.bound);
}

TEST(CommCenter, GlobalReachesBall)
{
    const ReachTask task = make_task(Population({0.2, 0.3, 0.4, 0.5}, {0.2, 0.3, 0.4, 0.5}),
                                     Variant::CommNoiseGlobal, 0.1, law_of(LawKind::CommCenter, 0.3, 0.02), 20, 30);
    const ReachReport rep = certify(task);
    EXPECT_TRUE(rep.reached);
    EXPECT_LE(*rep.hit_time, rep.bound);
}

TEST(CommCenter, RejectsHeterogeneousCommNoise)
{
    EXPECT_THROW(make_law(law_of(LawKind::CommCenter), Population({0.4, 0.5, 0.6}), Variant::CommNoise, 0.1),
                 std::invalid_argument);
}

TEST(CommPairSpread, ReachesLargestPairSum)
{
    const Population pop({0.3, 0.3, 0.3}, {0.1, 0.2, 0.3});
    LawSpec spec = law_of(LawKind::CommPairSpread);
    spec.epsilon = 0.01;
    const ReachTask task = make_task(pop, Variant::CommNoiseGlobal, 0.3, spec, 10, 30);
    const ReachReport rep = certify(task);
    const double a1 = oracle::a_i(0.3, 3, 0.1), a2 = oracle::a_i(0.3, 3, 0.2);
    EXPECT_NEAR(rep.target.lo, a1 + a2 - 0.02, 1e-12);
    EXPECT_TRUE(rep.reached);
}

TEST(CommHSpread, ReachesPairConstant)
{
    for (const Population& pop : {Population({0.05, 0.05, 0.05, 0.05}, {0.1, 0.2, 0.3, 0.4}),
                                  Population({0.3, 0.4, 0.5}, {0.1, 0.5, 0.3}),
                                  Population({0.08, 0.2, 0.3, 0.6, 0.9}, {0.3, 0.15, 0.5, 0.2, 0.6})}) {
        LawSpec spec = law_of(LawKind::CommHSpread);
        const double eta = 0.1;
        const ReachTask task = make_task(pop, Variant::CommNoiseGlobal, eta, spec, 5, 20);
        const ReachReport rep = certify(task);
        double cmax = 0.0;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            for (std::size_t j = 0; j < pop.size(); ++j) {
                if (i != j) {
                    cmax = std::max(cmax, oracle::c(eta, pop.size(), pop.r(i), pop.r(j), pop.omega(i), pop.omega(j)));
                }
            }
        }
        EXPECT_NEAR(rep.target.lo, cmax - 0.01, 1e-12);
        EXPECT_TRUE(rep.reached) << "n=" << pop.size();
        EXPECT_GE(rep.min_final_spread, cmax - 0.01);
    }
}

TEST(CommSplitExtreme, ReachesZeroOneOneOne)
{
    const double r = 1.0 / 3.0;
    ReachTask task = make_task(Population({r, r, r, r}), Variant::CommNoise, 0.25,
                               law_of(LawKind::CommSplitExtreme), 10, 20);
    task.keep_traces = true;
    const ReachReport rep = certify(task);
    EXPECT_TRUE(rep.reached);
    for (const ReachRun& run : rep.runs) {
        if (run.hit_time == 0u) {
            continue;
        }
        const std::vector<double> expected{0.0, 1.0, 1.0, 1.0};
        EXPECT_EQ(run.trace.back(), expected);
    }
}

TEST(CommSplitExtreme, RejectsBelowThreshold)
{
    const double r = 1.0 / 3.0;
    const Population pop({r, r, r, r});
    EXPECT_THROW(make_law(law_of(LawKind::CommSplitExtreme), pop, Variant::CommNoise, 0.2), std::invalid_argument);
    EXPECT_THROW(law_comm_spread(std::vector<double>{0.1, 0.2, 0.3, 0.4}, pop, Variant::CommNoise, 0.2, 100.0),
                 std::invalid_argument);
}

TEST(CommBand, LandsInsideBand)
{
    const double r = 1.0 / 3.0;
    LawSpec spec = law_of(LawKind::CommBand);
    spec.epsilon = 0.01;
    const ReachTask task = make_task(Population({r, r, r, r}), Variant::CommNoise, 0.2, spec, 10, 30);
    const ReachReport rep = certify(task);
    EXPECT_NEAR(rep.target.hi, 2.0 * 0.2 * 3.0 / 4.0, 1e-15);
    EXPECT_TRUE(rep.reached);
}

TEST(ControlStep, BudgetViolationsThrow)
{
    const Population pop({0.3, 0.3, 0.3});
    const std::vector<double> x{0.2, 0.3, 0.4};
    ControlInput c{{0.02, 0.02, 0.02}, {0.08, 0.0, -0.08}, {}};
    Disturbance d{{0.02, -0.02, 0.0}, {}};
    EXPECT_NO_THROW(control_step(x, pop, Variant::EnvNoise, c, d, 0.1));
    c.u[0] = 0.081;
    EXPECT_THROW(control_step(x, pop, Variant::EnvNoise, c, d, 0.1), std::invalid_argument);
    c.u[0] = 0.0;
    d.b[1] = -0.021;
    EXPECT_THROW(control_step(x, pop, Variant::EnvNoise, c, d, 0.1), std::invalid_argument);
    d.b[1] = 0.0;
    c.delta[2] = 0.1;
    EXPECT_THROW(control_step(x, pop, Variant::EnvNoise, c, d, 0.1), std::invalid_argument);
}

TEST(ControlStep, ZeroControlIsPlainUpdate)
{
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<double> r{0.1, 0.3, 0.5, 0.7};
    const std::vector<double> w{0.2, 0.4, 0.6, 0.8};
    const Population pop(r, w);
    for (int k = 0; k < 200; ++k) {
        std::vector<double> x(4);
        for (double& v : x) {
            v = u(gen);
        }
        for (Variant v : kAllVariants) {
            ControlInput c{std::vector<double>(4, 1e-9), std::vector<double>(4, 0.0), EdgeField(4)};
            Disturbance d{std::vector<double>(4, 0.0), EdgeField(4)};
            for (const Edge& e : communication_edges(x, pop)) {
                c.u_edge.set(e.from, e.to, 0.0);
                d.b_edge.set(e.from, e.to, 0.0);
            }
            const auto next = control_step(x, pop, v, c, d, 0.1);
            const auto plain = oracle::tilde(x, r, w, is_global(v));
            for (std::size_t i = 0; i < 4; ++i) {
                EXPECT_NEAR(next[i], plain[i], 1e-12);
            }
        }
    }
}

TEST(ControlStep, MissingEdgeControlThrows)
{
    const Population pop({0.3, 0.3, 0.3});
    const std::vector<double> x{0.2, 0.3, 0.4};
    ControlInput c{{0.02, 0.02, 0.02}, {}, EdgeField(3)};
    Disturbance d{{}, EdgeField(3)};
    EXPECT_THROW(control_step(x, pop, Variant::CommNoise, c, d, 0.1), std::invalid_argument);
}

TEST(Adversary, RandomIsBoundedAndReproducible)
{
    const Population pop({0.3, 0.3, 0.3});
    const std::vector<double> x{0.2, 0.3, 0.4};
    const ControlInput c{{0.02, 0.03, 0.04}, {0.0, 0.0, 0.0}, {}};
    const Adversary adv{AdversaryKind::Random, 7};
    for (std::uint64_t t = 0; t < 100; ++t) {
        const Disturbance a = adversary_disturbance(adv, c, x, pop, Variant::EnvNoise, t);
        const Disturbance b = adversary_disturbance(adv, c, x, pop, Variant::EnvNoise, t);
        EXPECT_EQ(a.b, b.b);
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_LE(std::abs(a.b[i]), c.delta[i]);
        }
    }
}

TEST(Adversary, OpposingSignConvention)
{
    const Population pop({0.3, 0.3, 0.3});
    const std::vector<double> x{0.2, 0.3, 0.4};
    const ControlInput c{{0.02, 0.02, 0.02}, {0.05, 0.0, -0.05}, {}};
    const Disturbance d = adversary_disturbance({AdversaryKind::Opposing, 0}, c, x, pop, Variant::EnvNoise, 0);
    EXPECT_EQ(d.b, (std::vector<double>{-0.02, -0.02, 0.02}));
}

TEST(LawKindNames, RoundTrip)
{
    for (LawKind k : kAllLawKinds) {
        EXPECT_EQ(parse_law_kind(to_string(k)), k);
    }
    EXPECT_THROW(parse_law_kind("teleport"), std::invalid_argument);
}

TEST(LawVariantMismatch, Rejected)
{
    const Population pop({0.05, 0.3, 0.3, 0.45}, {0.2, 0.2, 0.2, 0.2});
    EXPECT_THROW(make_law(law_of(LawKind::SplitExtreme), pop, Variant::EnvNoiseGlobal, 0.12), std::invalid_argument);
    EXPECT_THROW(make_law(law_of(LawKind::DriveToBall), pop, Variant::CommNoise, 0.12), std::invalid_argument);
    EXPECT_THROW(make_law(law_of(LawKind::CommPairSpread), pop, Variant::EnvNoise, 0.12), std::invalid_argument);
}
