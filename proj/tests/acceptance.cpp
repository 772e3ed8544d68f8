// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Tolerances are pinned here; see README for the reading of each criterion.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hkn/config.hpp"
#include "hkn/core.hpp"
#include "hkn/experiments.hpp"
#include "hkn/metrics.hpp"
#include "hkn/noise.hpp"
#include "hkn/reachability.hpp"
#include "hkn/simulate.hpp"
#include "oracles.hpp"

using namespace hkn;

namespace {

constexpr std::uint64_t kSeeds = 10;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<double> run_d(const ExperimentConfig& c, std::uint64_t seed, std::uint64_t horizon)
{
    ExperimentConfig k = c;
    k.seed = seed;
    const Population pop = build_population(k);
    return simulate(pop, k.variant, k.noise, build_initial_state(k, 0), {horizon, 1, false}, RngContext{seed, 0}).d;
}

double max_from(const std::vector<double>& d, std::size_t from)
{
    double m = 0.0;
    for (std::size_t t = from; t < d.size(); ++t) {
        m = std::max(m, d[t]);
    }
    return m;
}

// Hard bound after the first entry to [0, entry] plus the tail-window max.
struct EntryCheck {
    bool entered = false;
    double max_after = 0.0;
    double tail_max = 0.0;
};

EntryCheck entry_check(const std::vector<double>& d, double entry)
{
    EntryCheck e;
    const auto t0 = first_at_or_below(d, entry);
    e.entered = t0.has_value();
    if (t0) {
        e.max_after = max_from(d, *t0 + 1);
    }
    e.tail_max = estimate_limits(d).dbar_hat;
    return e;
}

Outcome sub_critical(const ExperimentConfig& c, std::uint64_t horizon)
{
    Outcome o;
    const double eta = c.noise.eta;
    double lo = 1.0, hi = 0.0, worst_after = 0.0;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        ExperimentConfig k = c;
        k.seed = s;
        const double rmin = build_population(k).r_min();
        const EntryCheck e = entry_check(run_d(c, s, horizon), rmin);
        o.require(e.entered, "seed " + std::to_string(s) + " never entered d <= r_min");
        o.require(e.max_after <= 2.0 * eta, "seed " + std::to_string(s) + " exceeded 2 eta after entry");
        worst_after = std::max(worst_after, e.max_after);
        lo = std::min(lo, e.tail_max);
        hi = std::max(hi, e.tail_max);
    }
    o.require(lo >= 0.045 && hi <= 0.05, "tail max outside [0.045, 0.05]");
    o.note("max after entry " + num(worst_after) + ", tail max range [" + num(lo) + ", " + num(hi) + "]");
    return o;
}

Outcome criterion1() { return sub_critical(figure_configs("1")[0], 100'000); }

Outcome criterion2()
{
    Outcome o;
    const ExperimentConfig c = figure_configs("2")[0];
    int good = 0;
    double lo = 1.0;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        const double m = estimate_limits(run_d(c, s, 1'000'000)).dbar_hat;
        good += m >= 0.9 ? 1 : 0;
        lo = std::min(lo, m);
    }
    o.require(good >= 8, "fewer than 8/10 seeds with tail max >= 0.9");
    o.note(std::to_string(good) + "/10 seeds >= 0.9, lowest " + num(lo));
    return o;
}

Outcome criterion3()
{
    Outcome o;
    ExperimentConfig c = figure_configs("1")[0];
    c.x0.kind = InitialSpec::Kind::Uniform;
    c.horizon = 100'000;
    c.replicates = 200;
    c.threads = 0;
    c.output.svg = false;
    const RunResult res = run_experiment(c, false);
    std::vector<std::size_t> taus;
    std::size_t censored = 0;
    for (const RunRow& r : res.rows) {
        if (r.tau_hit) {
            taus.push_back(*r.tau_hit);
        } else {
            ++censored;
        }
    }
    if (taus.size() < 2) {
        o.require(false, "fewer than 2 uncensored hitting times");
        return o;
    }
    const TailEstimate te = tail_estimate_from_gaps(taus, censored);
    o.require(te.slope < 0.0, "log-survival slope not negative");
    o.require(te.r_squared >= 0.8, "fit R^2 below 0.8");
    bool monotone = true;
    for (std::size_t t = 1; t < te.survival.size(); ++t) {
        monotone = monotone && te.survival[t] <= te.survival[t - 1];
    }
    o.require(monotone, "survival not nonincreasing");
    o.note("slope " + num(te.slope) + ", R^2 " + num(te.r_squared) + ", censored " + std::to_string(censored) +
           "/200");
    return o;
}

Outcome criterion4()
{
    Outcome o;
    const Outcome low = sub_critical(figure_configs("4")[0], 100'000);
    o.require(low.pass, "eta = 0.025 band check");
    o.note("eta=0.025: " + low.detail);
    const ExperimentConfig c = figure_configs("5")[0];
    std::vector<double> tails;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        tails.push_back(estimate_limits(run_d(c, s, 1'000'000)).dbar_hat);
    }
    const double lo = *std::min_element(tails.begin(), tails.end());
    const double med = *median(tails);
    o.require(lo > 0.2, "eta = 0.1 tail max not above 2 eta in every seed");
    o.require(med >= 0.5, "eta = 0.1 median tail max below 0.5");
    o.note("eta=0.1: tail max median " + num(med) + ", lowest " + num(lo));
    return o;
}

Outcome criterion5()
{
    Outcome o;
    ExperimentConfig c = figure_configs("example1")[1];
    c.x0 = InitialSpec{InitialSpec::Kind::Explicit, 0.5, {0.0, 0.5, 0.5, 1.0}};
    const double bound = comm_homogeneous_bound(0.1, 4);
    double pooled = 0.0, lo = 1.0, worst_after = 0.0;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        const EntryCheck e = entry_check(run_d(c, s, 100'000), 1.0 / 3.0);
        o.require(e.entered, "seed " + std::to_string(s) + " never entered d <= r");
        o.require(e.max_after <= bound, "seed " + std::to_string(s) + " exceeded 2 eta (n-1)/n after entry");
        worst_after = std::max(worst_after, e.max_after);
        pooled = std::max(pooled, e.tail_max);
        lo = std::min(lo, e.tail_max);
    }
    o.require(pooled >= 0.135 && pooled <= 0.15, "pooled tail max outside [0.135, 0.15]");
    o.note("max after entry " + num(worst_after) + ", pooled tail max " + num(pooled) + ", per-seed lowest " +
           num(lo));
    return o;
}

Outcome criterion6()
{
    Outcome o;
    const auto cfgs = figure_configs("example1");
    const ExperimentConfig& het = cfgs[0];
    const ExperimentConfig& hom = cfgs[1];
    const Population pop = build_population(het);
    double inner_lo = 1.0, inner_hi = 0.0;
    bool ends_fixed = true;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        simulate(pop, het.variant, het.noise, build_initial_state(het, 0), {100'000, 1, false}, RngContext{s, 0},
                 [&](std::uint64_t t, std::span<const double> x) {
                     if (t >= 1) {
                         ends_fixed = ends_fixed && x[0] == 0.0 && x[3] == 1.0;
                     }
                     inner_lo = std::min({inner_lo, x[1], x[2]});
                     inner_hi = std::max({inner_hi, x[1], x[2]});
                 });
    }
    o.require(ends_fixed, "x_1 = 0 and x_4 = 1 not held exactly");
    o.require(inner_lo > 0.35 && inner_hi < 0.65, "middle agents left (0.35, 0.65)");
    int synced = 0;
    const Population hpop = build_population(hom);
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        const auto d = run_d(hom, s, 100'000);
        synced += quasi_sync_verdict(estimate_limits(d), d, hpop, hom.noise.eta).reached ? 1 : 0;
    }
    o.require(synced == static_cast<int>(kSeeds), "homogeneous run not quasi-synchronized in every seed");
    o.note("middle range [" + num(inner_lo) + ", " + num(inner_hi) + "], homogeneous synced " +
           std::to_string(synced) + "/10");
    return o;
}

Outcome criterion7()
{
    Outcome o;
    ExperimentConfig c;
    c.n = 3;
    c.r = ThresholdSpec{ThresholdSpec::Kind::Uniform, 0.2, {}, 0.05, 0.45};
    c.noise = NoiseModel::uniform(0.2);
    c.x0 = InitialSpec{InitialSpec::Kind::Constant, 0.5, {}};
    int good = 0;
    double worst = 0.0;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        const auto d = run_d(c, s, 1'000'000);
        const double m = *std::min_element(d.begin() + 1, d.end());
        good += m <= 0.1 ? 1 : 0;
        worst = std::max(worst, m);
    }
    o.require(good >= 8, "fewer than 8/10 seeds with min d_V <= 0.1");
    o.note(std::to_string(good) + "/10 seeds, largest run minimum " + num(worst));
    return o;
}

Outcome criterion8()
{
    Outcome o;
    ExperimentConfig c;
    c.n = 4;
    c.r = ThresholdSpec{ThresholdSpec::Kind::Uniform, 0.3, {}, 0.2, 0.4};
    c.noise = NoiseModel::uniform(0.15);
    c.alpha = 0.05;
    c.x0 = InitialSpec{InitialSpec::Kind::Constant, 0.5, {}};
    std::vector<std::size_t> gaps;
    std::size_t cycles = 0, censored = 0;
    std::string per_seed;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        ExperimentConfig k = c;
        k.seed = s;
        const Population pop = build_population(k);
        const double level = *switching_level(Variant::EnvNoise, 0.15, 0.05, pop);
        const StoppingTimes st = stopping_times(run_d(c, s, 1'000'000), 0.05, level);
        for (std::size_t i = 1; i < st.taus.size(); ++i) {
            gaps.push_back(st.taus[i] - st.taus[i - 1]);
        }
        censored += st.censored ? 1 : 0;
        cycles += st.n_gaps() / 2;
        per_seed += (per_seed.empty() ? "" : ",") + std::to_string(st.n_gaps() / 2);
    }
    o.require(cycles >= 50, "fewer than 50 completed cycles");
    if (gaps.size() >= 2) {
        const TailEstimate te = tail_estimate_from_gaps(gaps, censored);
        bool monotone = true;
        for (std::size_t t = 1; t < te.survival.size(); ++t) {
            monotone = monotone && te.survival[t] <= te.survival[t - 1];
        }
        o.require(monotone, "gap survival not nonincreasing");
        o.require(te.slope < 0.0, "fitted log-slope not negative");
        o.note("slope " + num(te.slope));
    } else {
        o.require(false, "fewer than 2 gaps");
    }
    o.note(std::to_string(cycles) + " cycles pooled over 10 seeds (per seed " + per_seed + ")");
    return o;
}

Outcome criterion9()
{
    Outcome o;
    std::mt19937_64 gen(20240613);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> un(3, 30);
    double worst = 0.0;
    int branch_seen[3] = {0, 0, 0};
    auto rel = [&](double a, double b) {
        const double e = std::abs(a - b) / std::max(1.0, std::abs(b));
        worst = std::max(worst, e);
    };
    for (int k = 0; k < 1000; ++k) {
        const std::size_t n = static_cast<std::size_t>(un(gen));
        std::vector<double> r(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = 0.005 + 0.995 * u(gen) * u(gen);
            w[i] = 0.01 + 0.98 * u(gen);
        }
        const Population pop(r, w);
        const double eta = 0.005 + 0.5 * u(gen);
        const double alpha = 0.001 + 0.05 * u(gen);
        rel(c_alpha1(eta, alpha, pop), oracle::c1(eta, alpha, n, pop.r_min(), pop.r_max()));
        if (eta > pop.r_min() / 2.0) {
            rel(c_eta2(eta, pop), oracle::c2(eta, r, w));
        }
        rel(c_alpha3(eta, alpha, pop), oracle::c3(eta, alpha, r, w));
        const PairConstants pc = h_matrix(eta, pop);
        for (std::size_t i = 0; i < n; ++i) {
            rel(pc.a[i], oracle::a_i(eta, n, w[i]));
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) {
                    continue;
                }
                rel(pc.A[i][j], oracle::a_i(eta, n, w[i]) + oracle::a_i(eta, n, w[j]));
                rel(pc.H[i][j], oracle::h(eta, n, r[i], w[i], w[j]));
                rel(pc.C[i][j], oracle::c(eta, n, r[i], r[j], w[i], w[j]));
                ++branch_seen[pc.branch[i][j]];
            }
        }
        const double rh = r[0];
        const Population hom(std::vector<double>(n, rh));
        const double nn = static_cast<double>(n);
        const double expect6 = eta <= nn * rh / (2.0 * (nn - 1.0)) ? 2.0 * eta * (nn - 1.0) / nn : 1.0;
        const double got6 = eta <= comm_homogeneous_threshold(hom) ? comm_homogeneous_bound(eta, n) : 1.0;
        rel(got6, expect6);
    }
    o.require(worst <= 1e-12, "relative error above 1e-12");
    o.require(branch_seen[0] > 0 && branch_seen[1] > 0 && branch_seen[2] > 0, "not all h branches exercised");
    o.note("worst relative error " + num(worst) + ", branches " + std::to_string(branch_seen[0]) + "/" +
           std::to_string(branch_seen[1]) + "/" + std::to_string(branch_seen[2]));
    return o;
}

Outcome certify_case(const Population& pop, Variant v, double eta, LawKind kind, double z, double alpha,
                     std::size_t states, std::size_t max_hit, const std::string& label, Outcome& o)
{
    LawSpec law;
    law.kind = kind;
    law.z = z;
    law.alpha = alpha;
    ReachTask task{pop, v, eta, law, random_initial_states(pop.size(), states, 17), standard_adversaries(100, 1),
                   std::nullopt, false};
    const std::size_t n = pop.size();
    std::vector<double> last_up(n, 0.0);
    last_up.back() = 1.0;
    task.initial_states.push_back(std::vector<double>(n, 0.0));
    task.initial_states.push_back(std::vector<double>(n, 1.0));
    task.initial_states.push_back(last_up);
    const ReachReport rep = certify(task);
    double budget = 0.0;
    for (const ReachRun& run : rep.runs) {
        budget = std::max(budget, run.max_budget_use);
    }
    o.require(rep.reached, label + " not certified");
    o.require(rep.hit_time && *rep.hit_time <= std::min(max_hit, rep.horizon), label + " hit after horizon");
    o.require(budget <= eta, label + " budget exceeded");
    o.note(label + " worst hit " + (rep.hit_time ? std::to_string(*rep.hit_time) : std::string("NA")) + "/" +
           std::to_string(rep.horizon) + " over " + std::to_string(rep.runs.size()) + " runs");
    return o;
}

Outcome criterion10()
{
    Outcome o;
    const double inf = 1e9;
    certify_case(Population({0.1, 0.2, 0.3, 0.4, 0.5}), Variant::EnvNoise, 0.1, LawKind::DriveToBall, 0.7, 0.02, 20,
                 static_cast<std::size_t>(std::ceil(1.0 / (0.1 - 2 * 0.02))) + 1, "ball", o);
    certify_case(Population({0.05, 0.3, 0.3, 0.45}), Variant::EnvNoise, 0.12, LawKind::SplitExtreme, 0.5, 0.02, 20,
                 static_cast<std::size_t>(inf), "split", o);
    const double r = 1.0 / 3.0;
    certify_case(Population({r, r, r, r}), Variant::CommNoise, 0.25, LawKind::CommSplitExtreme, 0.5, 0.02, 20,
                 static_cast<std::size_t>(inf), "comm split", o);
    return o;
}

Outcome criterion11()
{
    Outcome o;
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> un(3, 50);
    int bad_bound = 0, bad_convex = 0, bad_perm = 0, bad_absorb = 0, bad_det = 0;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t n = static_cast<std::size_t>(un(gen));
        std::vector<double> r(n), w(n), x(n);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = 0.01 + 0.99 * u(gen);
            w[i] = 0.01 + 0.98 * u(gen);
            x[i] = u(gen);
        }
        const Population pop(r, w);
        const Variant v = kAllVariants[k % 4];
        const NoiseModel noise = NoiseModel::uniform(0.01 + 0.4 * u(gen));
        const RngContext ctx{static_cast<std::uint64_t>(k), 0};

        // boundedness and determinism over a short run
        const auto a = simulate(pop, v, noise, x, {20, 1, true}, ctx);
        const auto b = simulate(pop, v, noise, x, {20, 1, true}, ctx);
        for (const auto& s : a.states) {
            for (double xi : s) {
                bad_bound += (xi >= 0.0 && xi <= 1.0) ? 0 : 1;
            }
        }
        bad_det += (a.states == b.states && a.d == b.d) ? 0 : 1;

        // tilde_x lies in the hull of the neighbor opinions (and the mean for global variants)
        const std::vector<double> t = tilde_x(x, pop, v);
        const double ave = population_mean(x);
        for (std::size_t i = 0; i < n; ++i) {
            const auto nb = oracle::neighbors(x, i, r[i]);
            double lo = 1.0, hi = 0.0;
            for (std::size_t j : nb) {
                lo = std::min(lo, x[j]);
                hi = std::max(hi, x[j]);
            }
            if (is_global(v)) {
                lo = std::min(lo, ave);
                hi = std::max(hi, ave);
            }
            bad_convex += (t[i] >= lo && t[i] <= hi) ? 0 : 1;
        }

        // permutation equivariance of the noiseless update
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), gen);
        std::vector<double> rp(n), wp(n), xp(n);
        for (std::size_t i = 0; i < n; ++i) {
            rp[i] = r[perm[i]];
            wp[i] = w[perm[i]];
            xp[i] = x[perm[i]];
        }
        const std::vector<double> tp = tilde_x(xp, Population(rp, wp), v);
        for (std::size_t i = 0; i < n; ++i) {
            bad_perm += std::abs(tp[i] - t[perm[i]]) <= 1e-12 ? 0 : 1;
        }

        // consensus is absorbing without noise
        const std::vector<double> c(n, u(gen));
        const std::vector<double> tc = tilde_x(c, pop, v);
        bad_absorb += tc == c ? 0 : 1;
    }
    o.require(bad_bound == 0, "state left [0,1]");
    o.require(bad_convex == 0, "tilde_x outside neighbor hull");
    o.require(bad_perm == 0, "permutation equivariance broken");
    o.require(bad_absorb == 0, "consensus not absorbing");
    o.require(bad_det == 0, "reruns not bit-identical");
    o.note("1000 cases each, n in [3, 50]");
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"sub-critical band (eta = r_min/2)", criterion1},
        {"super-critical spread reaches 1", criterion2},
        {"hitting-time geometric tail", criterion3},
        {"global-information model, eta = 0.025 and 0.1", criterion4},
        {"homogeneous communication noise bound", criterion5},
        {"communication-noise example regression", criterion6},
        {"liminf reaches near-consensus, n = 3", criterion7},
        {"switching recurrence", criterion8},
        {"constants vs independent oracle", criterion9},
        {"reachability certification", criterion10},
        {"core property suite", criterion11},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += o.pass ? 0 : 1;
        std::printf("criterion %2zu %s  %s  [%s]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
