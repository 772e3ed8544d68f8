#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hkn/core.hpp"

namespace hkn {

/// Tail-window bracket of limsup / liminf of d_V.
struct LimitEstimate {
    double dbar_hat = 0.0;
    double dunder_hat = 0.0;
    std::size_t window_start = 0;
    std::size_t window_end = 0; // inclusive
};

/// Max and min of d over [burn_in, d.size() - 1].
inline LimitEstimate estimate_limits(std::span<const double> d, std::size_t burn_in)
{
    if (burn_in >= d.size()) {
        throw std::invalid_argument("tail window is empty");
    }
    const auto [lo, hi] = std::minmax_element(d.begin() + static_cast<std::ptrdiff_t>(burn_in), d.end());
    return {*hi, *lo, burn_in, d.size() - 1};
}

inline LimitEstimate estimate_limits(std::span<const double> d)
{
    return estimate_limits(d, d.empty() ? 0 : (d.size() - 1) / 2);
}

struct StoppingTimes {
    std::vector<std::size_t> taus{0};
    double alpha = 0.0;
    double c = 0.0;
    bool censored = false;

    /// Number of closed gaps tau_{k+1} - tau_k.
    std::size_t n_gaps() const noexcept { return taus.size() - 1; }
};

/// Alternating first passages: odd k waits for d <= alpha, even k for d >= c.
inline StoppingTimes stopping_times(std::span<const double> d, double alpha, double c)
{
    if (!(alpha > 0.0) || !(alpha < c)) {
        throw std::invalid_argument("stopping times need 0 < alpha < c");
    }
    StoppingTimes st;
    st.alpha = alpha;
    st.c = c;
    bool want_low = true;
    for (std::size_t s = 1; s < d.size(); ++s) {
        if (want_low ? d[s] <= alpha : d[s] >= c) {
            st.taus.push_back(s);
            want_low = !want_low;
        }
    }
    st.censored = st.taus.back() + 1 < d.size();
    return st;
}

struct TailEstimate {
    std::vector<double> survival; // survival[t] = P(gap > t), t = 0..max gap
    double geo_rate_hat = std::numeric_limits<double>::quiet_NaN();
    double slope = std::numeric_limits<double>::quiet_NaN();
    double r_squared = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_gaps = 0;
    std::size_t n_censored = 0;
    std::size_t fit_points = 0;
};

namespace detail {

struct LineFit {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    double r_squared = std::numeric_limits<double>::quiet_NaN();
};

inline LineFit least_squares(std::span<const double> xs, std::span<const double> ys)
{
    LineFit fit;
    const std::size_t m = xs.size();
    if (m < 2) {
        return fit;
    }
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < m; ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= m;
    my /= m;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < m; ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    if (sxx == 0.0) {
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

} // namespace detail

/// Empirical survival of observed gaps plus a log-linear fit over the points
/// where survival >= 5 / n_gaps. geo_rate_hat is the negated slope, an
/// estimate of -log(1 - p) for geometric(p) gaps.
inline TailEstimate tail_estimate_from_gaps(std::span<const std::size_t> gaps, std::size_t n_censored = 0)
{
    if (gaps.size() < 2) {
        throw std::invalid_argument("tail estimate needs at least 2 uncensored gaps");
    }
    TailEstimate est;
    est.n_gaps = gaps.size();
    est.n_censored = n_censored;
    const std::size_t longest = *std::max_element(gaps.begin(), gaps.end());
    std::vector<std::size_t> hist(longest + 1, 0);
    for (std::size_t g : gaps) {
        ++hist[g];
    }
    est.survival.resize(longest + 1);
    std::size_t above = gaps.size();
    for (std::size_t t = 0; t <= longest; ++t) {
        above -= hist[t];
        est.survival[t] = static_cast<double>(above) / static_cast<double>(gaps.size());
    }

    const double floor = 5.0 / static_cast<double>(gaps.size());
    std::vector<double> ts, logs;
    for (std::size_t t = 0; t <= longest; ++t) {
        if (est.survival[t] >= floor && est.survival[t] > 0.0) {
            ts.push_back(static_cast<double>(t));
            logs.push_back(std::log(est.survival[t]));
        }
    }
    est.fit_points = ts.size();
    const detail::LineFit fit = detail::least_squares(ts, logs);
    est.slope = fit.slope;
    est.r_squared = fit.r_squared;
    est.geo_rate_hat = -fit.slope;
    return est;
}

inline TailEstimate tail_estimate(const StoppingTimes& st)
{
    std::vector<std::size_t> gaps;
    gaps.reserve(st.n_gaps());
    for (std::size_t k = 1; k < st.taus.size(); ++k) {
        gaps.push_back(st.taus[k] - st.taus[k - 1]);
    }
    return tail_estimate_from_gaps(gaps, st.censored ? 1 : 0);
}

struct QuasiSyncVerdict {
    bool reached = false;
    std::optional<std::size_t> tau; // first t with d_V(t) <= 2 eta; empty if censored
};

inline std::optional<std::size_t> first_at_or_below(std::span<const double> d, double level)
{
    for (std::size_t t = 0; t < d.size(); ++t) {
        if (d[t] <= level) {
            return t;
        }
    }
    return std::nullopt;
}

/// reached = dbar_hat <= r_min; tau = first step with d_V <= 2 eta.
inline QuasiSyncVerdict quasi_sync_verdict(const LimitEstimate& est, std::span<const double> d, const Population& pop,
                                           double eta)
{
    if (est.window_start > est.window_end) {
        throw std::invalid_argument("tail window is empty");
    }
    return {est.dbar_hat <= pop.r_min(), first_at_or_below(d, 2.0 * eta)};
}

/// First t after the first visit to [0, entry] with d(t) > bound.
inline std::optional<std::size_t> first_escape_after_entry(std::span<const double> d, double entry, double bound)
{
    const auto start = first_at_or_below(d, entry);
    if (!start) {
        return std::nullopt;
    }
    for (std::size_t t = *start; t < d.size(); ++t) {
        if (d[t] > bound) {
            return t;
        }
    }
    return std::nullopt;
}

// ---- closed-form thresholds ------------------------------------------------

inline double c_alpha1(double eta, double alpha, const Population& pop)
{
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("alpha must be positive");
    }
    const double edge = std::max(pop.r_min() / 2.0, pop.r_max() / static_cast<double>(pop.size()));
    return eta > edge ? 1.0 : 2.0 * eta - alpha;
}

/// min{omega_i : r_i < 2 eta}; empty when no agent qualifies.
inline std::optional<double> w_underline(double eta, const Population& pop)
{
    std::optional<double> w;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (pop.r(i) < 2.0 * eta) {
            w = w ? std::min(*w, pop.omega(i)) : pop.omega(i);
        }
    }
    return w;
}

inline double c_eta2(double eta, const Population& pop)
{
    if (!pop.has_belief_factors()) {
        throw std::invalid_argument("c_eta2 needs belief factors");
    }
    if (eta <= pop.r_min() / 2.0) {
        throw std::domain_error("c_eta2 is undefined for eta <= r_min / 2");
    }
    const double n = static_cast<double>(pop.size());
    const double w = *w_underline(eta, pop);
    return std::max(2.0 * eta, std::min(n * eta / ((n - 1.0) * w), n * eta));
}

inline double c_alpha3(double eta, double alpha, const Population& pop)
{
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("alpha must be positive");
    }
    if (eta <= pop.r_min() / 2.0) {
        return 2.0 * eta - alpha;
    }
    return std::min(c_eta2(eta, pop) - alpha, 1.0);
}

template <class T>
using Matrix = std::vector<std::vector<T>>;

/// Pairwise constants for the global communication-noise model. Diagonal
/// entries of the matrices are unused and left at zero.
struct PairConstants {
    std::vector<double> a;
    Matrix<double> A;
    Matrix<double> H;
    Matrix<double> C;
    Matrix<int> branch; // 0: r_i < a_i, 1: r_i in [a_i, a_ij), 2: r_i >= a_ij
};

inline PairConstants h_matrix(double eta, const Population& pop)
{
    if (!pop.has_belief_factors()) {
        throw std::invalid_argument("pair constants need belief factors");
    }
    const std::size_t n = pop.size();
    const double nn = static_cast<double>(n);
    PairConstants pc;
    pc.a.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        pc.a[i] = (nn - 1.0) * (1.0 - pop.omega(i)) * eta / nn;
    }
    pc.A.assign(n, std::vector<double>(n, 0.0));
    pc.H = pc.A;
    pc.C = pc.A;
    pc.branch.assign(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double wi = pop.omega(i), wj = pop.omega(j);
            const double aij = pc.a[i] + pc.a[j];
            pc.A[i][j] = aij;
            const double ri = pop.r(i);
            if (ri < pc.a[i]) {
                pc.branch[i][j] = 0;
                pc.H[i][j] = (nn - 1.0) * eta / nn * ((1.0 - wi) * (1.0 - wi) + wi * (wj - wi) / nn);
            } else if (ri < aij) {
                pc.branch[i][j] = 1;
                pc.H[i][j] = (1.0 - wi) * eta * ((1.0 - wi) / nn + (nn - 2.0) / (nn - 1.0)) +
                             wi * (nn - 1.0) * (wj - wi) * eta / (nn * nn);
            } else {
                pc.branch[i][j] = 2;
                pc.H[i][j] = (nn - 1.0) * eta / nn * (1.0 - wi + (wj - wi) / nn);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double hij = pc.H[i][j], hji = pc.H[j][i];
            const double slack_i = pc.a[i] > hij ? pc.a[i] - hij : 0.0;
            const double slack_j = pc.a[j] > hji ? pc.a[j] - hji : 0.0;
            pc.C[i][j] = std::min(hij + hji, 1.0 - slack_i - slack_j);
        }
    }
    return pc;
}

/// Global communication-noise model: the exact limsup max a_ij holds when eta
/// is at most min_{i!=j} n r_i / ((n-1)(2 - omega_i - omega_j)).
inline double comm_global_threshold(const Population& pop)
{
    const std::size_t n = pop.size();
    const double nn = static_cast<double>(n);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) {
                best = std::min(best, nn * pop.r(i) / ((nn - 1.0) * (2.0 - pop.omega(i) - pop.omega(j))));
            }
        }
    }
    return best;
}

inline double max_offdiag(const Matrix<double>& m)
{
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (i != j) {
                best = std::max(best, m[i][j]);
            }
        }
    }
    return best;
}

/// Homogeneous communication-noise model: limsup of d_V is 2 eta (n-1)/n at or
/// below the threshold n r / (2(n-1)) and 1 above it.
inline double comm_homogeneous_bound(double eta, std::size_t n)
{
    const double nn = static_cast<double>(n);
    return 2.0 * eta * (nn - 1.0) / nn;
}

/// Uses r_min, which is the common threshold for homogeneous populations.
inline double comm_homogeneous_threshold(const Population& pop)
{
    const double nn = static_cast<double>(pop.size());
    return nn * pop.r_min() / (2.0 * (nn - 1.0));
}

inline double comm_homogeneous_c_alpha(double eta, double alpha, const Population& pop)
{
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("alpha must be positive");
    }
    return eta <= comm_homogeneous_threshold(pop) ? comm_homogeneous_bound(eta, pop.size()) - alpha : 1.0;
}

/// What the theory says about limsup d_V: a value and whether it is exact or
/// only a lower bound.
struct UpperLimitPrediction {
    double value = 0.0;
    bool exact = false;
};

inline std::optional<UpperLimitPrediction> predicted_upper_limit(Variant v, double eta, const Population& pop)
{
    const double n = static_cast<double>(pop.size());
    switch (v) {
    case Variant::EnvNoise:
        if (eta <= pop.r_min() / 2.0) {
            return UpperLimitPrediction{2.0 * eta, true};
        }
        if (eta > std::max(pop.r_min() / 2.0, pop.r_max() / n)) {
            return UpperLimitPrediction{1.0, true};
        }
        return UpperLimitPrediction{std::min(2.0 * eta, 1.0), false};
    case Variant::EnvNoiseGlobal:
        if (eta <= pop.r_min() / 2.0) {
            return UpperLimitPrediction{2.0 * eta, true};
        }
        return UpperLimitPrediction{std::min(c_eta2(eta, pop), 1.0), false};
    case Variant::CommNoiseGlobal: {
        const PairConstants pc = h_matrix(eta, pop);
        if (eta <= comm_global_threshold(pop)) {
            return UpperLimitPrediction{max_offdiag(pc.A), true};
        }
        return UpperLimitPrediction{std::min(std::max(max_offdiag(pc.A), max_offdiag(pc.C)), 1.0), false};
    }
    case Variant::CommNoise:
        if (!pop.homogeneous() || pop.r_min() < 1.0 / (n - 1.0) || pop.r_min() >= 1.0) {
            return std::nullopt;
        }
        if (eta <= comm_homogeneous_threshold(pop)) {
            return UpperLimitPrediction{comm_homogeneous_bound(eta, pop.size()), true};
        }
        return UpperLimitPrediction{1.0, true};
    }
    return std::nullopt;
}

/// Upper switching level c for the stopping-time construction, where the
/// theory defines one.
inline std::optional<double> switching_level(Variant v, double eta, double alpha, const Population& pop)
{
    switch (v) {
    case Variant::EnvNoise: return c_alpha1(eta, alpha, pop);
    case Variant::EnvNoiseGlobal: return c_alpha3(eta, alpha, pop);
    case Variant::CommNoise:
        if (!pop.homogeneous()) {
            return std::nullopt;
        }
        return comm_homogeneous_c_alpha(eta, alpha, pop);
    case Variant::CommNoiseGlobal: return std::nullopt;
    }
    return std::nullopt;
}

/// All constants for one (eta, alpha, population), with empty entries where a
/// formula is undefined.
struct ThresholdConstants {
    double r_min = 0.0;
    double r_max = 0.0;
    std::optional<double> w_underline_eta;
    double c_alpha1 = 0.0;
    std::optional<double> c_eta2;
    std::optional<double> c_alpha3;
    std::optional<PairConstants> pairs;
    double comm_homogeneous_bound = 0.0;
    double comm_homogeneous_threshold = 0.0;
};

inline ThresholdConstants threshold_constants(double eta, double alpha, const Population& pop)
{
    ThresholdConstants tc;
    tc.r_min = pop.r_min();
    tc.r_max = pop.r_max();
    tc.c_alpha1 = c_alpha1(eta, alpha, pop);
    if (pop.has_belief_factors()) {
        tc.w_underline_eta = w_underline(eta, pop);
        if (eta > pop.r_min() / 2.0) {
            tc.c_eta2 = c_eta2(eta, pop);
        }
        tc.c_alpha3 = c_alpha3(eta, alpha, pop);
        tc.pairs = h_matrix(eta, pop);
    }
    tc.comm_homogeneous_bound = comm_homogeneous_bound(eta, pop.size());
    tc.comm_homogeneous_threshold = comm_homogeneous_threshold(pop);
    return tc;
}

} // namespace hkn
