#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hkn/core.hpp"
#include "hkn/metrics.hpp"
#include "hkn/rng.hpp"

namespace hkn {

/// S_{z,alpha} = { x : max_i |x_i - z| < alpha } (Ball), E_beta = { x : d_V >= beta }
/// (Spread), or { x : lo <= d_V <= hi } (Band).
struct TargetSet {
    enum class Kind { Ball, Spread, Band };

    Kind kind = Kind::Spread;
    double z = 0.0;
    double alpha = 0.0;
    double lo = 0.0;
    double hi = 1.0;

    static TargetSet ball(double z, double alpha)
    {
        if (!(z >= 0.0 && z <= 1.0) || !(alpha > 0.0)) {
            throw std::invalid_argument("ball target needs z in [0,1] and alpha > 0");
        }
        return {Kind::Ball, z, alpha, 0.0, 1.0};
    }

    static TargetSet spread(double beta)
    {
        if (!(beta >= 0.0 && beta <= 1.0)) {
            throw std::invalid_argument("spread target needs beta in [0,1]");
        }
        return {Kind::Spread, 0.0, 0.0, beta, 1.0};
    }

    static TargetSet band(double lo, double hi)
    {
        if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) {
            throw std::invalid_argument("band target needs 0 <= lo <= hi <= 1");
        }
        return {Kind::Band, 0.0, 0.0, lo, hi};
    }

    bool contains(std::span<const double> x) const
    {
        switch (kind) {
        case Kind::Ball:
            return std::all_of(x.begin(), x.end(), [&](double v) { return std::abs(v - z) < alpha; });
        case Kind::Spread: return max_diff(x) >= lo;
        case Kind::Band: {
            const double d = max_diff(x);
            return d >= lo && d <= hi;
        }
        }
        return false;
    }

    std::string describe() const
    {
        switch (kind) {
        case Kind::Ball: return "ball(z=" + std::to_string(z) + ",alpha=" + std::to_string(alpha) + ")";
        case Kind::Spread: return "spread(" + std::to_string(lo) + ")";
        case Kind::Band: return "band(" + std::to_string(lo) + "," + std::to_string(hi) + ")";
        }
        return "?";
    }
};

/// One step of controls. delta[i] is the uncertainty radius for receiver i;
/// env variants read u[i], comm variants read u_edge(j, i).
struct ControlInput {
    std::vector<double> delta;
    std::vector<double> u;
    EdgeField u_edge;
};

struct Disturbance {
    std::vector<double> b;
    EdgeField b_edge;
};

namespace detail {

inline double clamp_control(double v, double eta, double delta) noexcept
{
    return std::clamp(v, -(eta - delta), eta - delta);
}

inline void check_delta(std::span<const double> delta, double eta, std::size_t n)
{
    if (delta.size() != n) {
        throw std::invalid_argument("uncertainty radius count does not match population size");
    }
    for (double d : delta) {
        if (!(d > 0.0 && d < eta)) {
            throw std::invalid_argument("control budget violated: delta outside (0, eta)");
        }
    }
}

inline void check_pair(double u, double b, double eta, double delta)
{
    if (!(std::abs(u) <= eta - delta)) {
        throw std::invalid_argument("control budget violated: |u| > eta - delta");
    }
    if (!(std::abs(b) <= delta)) {
        throw std::invalid_argument("control budget violated: |b| > delta");
    }
}

} // namespace detail

/// One step of the controlled system. Env variants: x_i' = Pi(tilde_i + u_i + b_i).
/// Comm variants: x_i' = Pi(tilde_i + kappa_i |N_i|^-1 sum_{j != i} (u_ji + b_ji)),
/// kappa_i = 1 or 1 - omega_i. Throws if any (u, b) pair breaks the budget.
inline std::vector<double> control_step(std::span<const double> x, const Population& pop, Variant variant,
                                        const ControlInput& c, const Disturbance& d, double eta)
{
    validate_state(x, pop.size());
    require_variant_supported(pop, variant);
    const std::size_t n = pop.size();
    detail::check_delta(c.delta, eta, n);
    std::vector<double> out(n);
    if (!is_comm(variant)) {
        if (c.u.size() != n || d.b.size() != n) {
            throw std::invalid_argument("control or disturbance size does not match population size");
        }
        for (std::size_t i = 0; i < n; ++i) {
            detail::check_pair(c.u[i], d.b[i], eta, c.delta[i]);
        }
        detail::tilde_x_into(x, pop, variant, out);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = project_unit(out[i] + (c.u[i] + d.b[i]));
        }
        return out;
    }
    for (const Edge& e : communication_edges(x, pop)) {
        if (!c.u_edge.contains(e.from, e.to) || !d.b_edge.contains(e.from, e.to)) {
            throw std::invalid_argument("control or disturbance missing for a communication edge");
        }
        detail::check_pair(c.u_edge.at(e.from, e.to), d.b_edge.at(e.from, e.to), eta, c.delta[e.to]);
    }
    detail::comm_update_into(
        x, pop, variant, [&](std::size_t j, std::size_t i) { return c.u_edge.at(j, i) + d.b_edge.at(j, i); }, out);
    return out;
}

// ---- adversaries -------------------------------------------------------------

enum class AdversaryKind { Plus, Minus, Opposing, Random };

/// Plus / Minus push every uncertainty to +delta / -delta; Opposing sets
/// b = -sign(u) delta with sign(0) = +1; Random draws uniformly from
/// [-delta, delta] on a counter stream keyed by seed.
struct Adversary {
    AdversaryKind kind = AdversaryKind::Plus;
    std::uint64_t seed = 0;

    std::string id() const
    {
        switch (kind) {
        case AdversaryKind::Plus: return "plus";
        case AdversaryKind::Minus: return "minus";
        case AdversaryKind::Opposing: return "opposing";
        case AdversaryKind::Random: return "random:" + std::to_string(seed);
        }
        return "?";
    }
};

inline std::vector<Adversary> standard_adversaries(std::size_t random_count, std::uint64_t first_seed = 1)
{
    std::vector<Adversary> out{{AdversaryKind::Plus, 0}, {AdversaryKind::Minus, 0}, {AdversaryKind::Opposing, 0}};
    for (std::size_t k = 0; k < random_count; ++k) {
        out.push_back({AdversaryKind::Random, first_seed + k});
    }
    return out;
}

namespace detail {

inline double adversary_value(const Adversary& adv, double u, double delta, const CounterRng& rng, std::uint64_t t,
                              std::uint32_t slot)
{
    switch (adv.kind) {
    case AdversaryKind::Plus: return delta;
    case AdversaryKind::Minus: return -delta;
    case AdversaryKind::Opposing: return u >= 0.0 ? -delta : delta;
    case AdversaryKind::Random: return delta * (2.0 * rng.uniform(t, slot, Purpose::Adversary) - 1.0);
    }
    return 0.0;
}

} // namespace detail

inline Disturbance adversary_disturbance(const Adversary& adv, const ControlInput& c, std::span<const double> x,
                                         const Population& pop, Variant variant, std::uint64_t t)
{
    const CounterRng rng(RngContext{adv.seed, 0});
    const std::size_t n = pop.size();
    Disturbance d;
    if (!is_comm(variant)) {
        d.b.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            d.b[i] = detail::adversary_value(adv, c.u[i], c.delta[i], rng, t, static_cast<std::uint32_t>(i));
        }
        return d;
    }
    d.b_edge = EdgeField(n);
    for (const Edge& e : communication_edges(x, pop)) {
        d.b_edge.set(e.from, e.to,
                     detail::adversary_value(adv, c.u_edge.at(e.from, e.to), c.delta[e.to], rng, t,
                                             edge_slot(e.from, e.to)));
    }
    return d;
}

// ---- single-step laws ----------------------------------------------------------

namespace detail {

inline void require_env(Variant v, std::string_view law)
{
    if (is_comm(v)) {
        throw std::invalid_argument(std::string(law) + " applies to environment-noise variants only");
    }
}

inline void require_comm(Variant v, std::string_view law)
{
    if (!is_comm(v)) {
        throw std::invalid_argument(std::string(law) + " applies to communication-noise variants only");
    }
}

/// Fills u_edge for every edge of E(t) with per-receiver values.
template <class PerReceiver>
EdgeField edge_controls(std::span<const double> x, const Population& pop, PerReceiver&& value)
{
    EdgeField f(pop.size());
    for (const Edge& e : communication_edges(x, pop)) {
        f.set(e.from, e.to, value(e.to));
    }
    return f;
}

inline std::vector<std::size_t> neighbor_counts(std::span<const double> x, const Population& pop)
{
    std::vector<std::size_t> counts(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        counts[i] = neighbor_mean(x, i, pop.r(i)).count;
    }
    return counts;
}

} // namespace detail

/// Three-branch ball law: delta_i = alpha, u_i pushes tilde_i toward z by at
/// most eta - alpha and lands exactly on z when it can.
inline ControlInput law_drive_to_ball(std::span<const double> x, const Population& pop, Variant variant, double z,
                                      double alpha, double eta)
{
    detail::require_env(variant, "drive-to-ball law");
    if (!(alpha > 0.0 && alpha < eta / 2.0)) {
        throw std::invalid_argument("drive-to-ball law needs alpha in (0, eta/2)");
    }
    const std::vector<double> t = tilde_x(x, pop, variant);
    ControlInput c;
    c.delta.assign(pop.size(), alpha);
    c.u.resize(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (t[i] > z + eta - alpha) {
            c.u[i] = -eta + alpha;
        } else if (t[i] < z - eta + alpha) {
            c.u[i] = eta - alpha;
        } else {
            c.u[i] = detail::clamp_control(z - t[i], eta, alpha);
        }
    }
    return c;
}

/// Lower bound on K for the split law on the plain environment-noise model.
inline double split_extreme_k_bound(const Population& pop, double eta)
{
    const double n = static_cast<double>(pop.size());
    const double rmin = pop.r_min();
    return std::max(4.0 * (rmin + eta) / (2.0 * eta - rmin), 2.0 * n * eta / (n * eta - pop.r_max()));
}

inline void require_split_extreme(const Population& pop, double eta, double K)
{
    const double n = static_cast<double>(pop.size());
    if (!(pop.r_min() < 1.0)) {
        throw std::invalid_argument("split law needs r_min < 1");
    }
    if (!(eta > std::max(pop.r_min() / 2.0, pop.r_max() / n))) {
        throw std::invalid_argument("split law needs eta > max{r_min/2, r_max/n}");
    }
    if (!(K >= split_extreme_k_bound(pop, eta))) {
        throw std::invalid_argument("split law constant K is below its lower bound");
    }
}

/// delta_i = eta/K; the agent with the smallest threshold is pushed up by
/// eta - eta/K, every other agent down by the same amount.
inline ControlInput law_split_extreme(std::span<const double> x, const Population& pop, double eta, double K)
{
    validate_state(x, pop.size());
    require_split_extreme(pop, eta, K);
    const std::size_t lead = pop.argmin_r();
    ControlInput c;
    c.delta.assign(pop.size(), eta / K);
    c.u.assign(pop.size(), -(eta - eta / K));
    c.u[lead] = eta - eta / K;
    return c;
}

/// Pushes agent `up` by eta - eps/4 and agent `down` by -(eta - eps/4); the
/// rest get zero control. delta_i = eps/4.
inline ControlInput law_spread_once(std::span<const double> x, const Population& pop, Variant variant, double eps,
                                    double eta, std::size_t up = 0, std::size_t down = 1)
{
    detail::require_env(variant, "spread law");
    validate_state(x, pop.size());
    if (!(eps > 0.0 && eps < eta)) {
        throw std::invalid_argument("spread law needs epsilon in (0, eta)");
    }
    if (up == down || up >= pop.size() || down >= pop.size()) {
        throw std::invalid_argument("spread law needs two distinct agents");
    }
    ControlInput c;
    c.delta.assign(pop.size(), eps / 4.0);
    c.u.assign(pop.size(), 0.0);
    c.u[up] = eta - eps / 4.0;
    c.u[down] = -(eta - eps / 4.0);
    return c;
}

/// The agent that the global spread construction isolates: smallest omega
/// among agents with r_i < 2 eta, ties to the lowest index.
inline std::size_t spread_global_lead(const Population& pop, double eta)
{
    std::optional<std::size_t> lead;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (pop.r(i) < 2.0 * eta && (!lead || pop.omega(i) < pop.omega(*lead))) {
            lead = i;
        }
    }
    if (!lead) {
        throw std::invalid_argument("global spread law needs eta > r_min/2");
    }
    return *lead;
}

inline double spread_global_k_bound(const Population& pop, double eta, double eps)
{
    const std::size_t lead = spread_global_lead(pop, eta);
    const double n = static_cast<double>(pop.size());
    const double r1 = pop.r(lead), w1 = pop.omega(lead);
    return std::max({4.0 * (r1 + eta) / (2.0 * eta - r1), 4.0 * eta * n / ((n - 1.0) * w1 * eps), 2.0 * eta * n / eps});
}

/// Split law for the global environment-noise model: the lead agent goes up
/// by eta - eta/K, everyone else down.
inline ControlInput law_spread_global(std::span<const double> x, const Population& pop, double eps, double eta,
                                      double K)
{
    validate_state(x, pop.size());
    if (!pop.has_belief_factors()) {
        throw std::invalid_argument("global spread law needs belief factors");
    }
    if (!(pop.r_min() < 1.0 && eta > pop.r_min() / 2.0)) {
        throw std::invalid_argument("global spread law needs r_min < 1 and eta > r_min/2");
    }
    if (!(eps > 0.0)) {
        throw std::invalid_argument("global spread law needs epsilon > 0");
    }
    if (!(K >= spread_global_k_bound(pop, eta, eps))) {
        throw std::invalid_argument("global spread law constant K is below its lower bound");
    }
    const std::size_t lead = spread_global_lead(pop, eta);
    ControlInput c;
    c.delta.assign(pop.size(), eta / K);
    c.u.assign(pop.size(), -(eta - eta / K));
    c.u[lead] = eta - eta / K;
    return c;
}

/// Centering law for the communication models, delta = eta/K.
///
/// CommNoise (homogeneous, r >= 1/(n-1)): while d_V > 2 eta/K, contract by
/// pulling every non-isolated agent toward x_max (if the minimum agent has a
/// neighbor) or toward x_min (if the maximum agent does), otherwise toward
/// x_max again; then shift the midpoint toward z in steps of
/// (n-1)/n (eta - 2 eta/K) and land on z.
///
/// CommNoiseGlobal: each agent with a neighbor is driven toward z through the
/// gain (1 - omega_i)(|N_i| - 1)/|N_i|; isolated agents drift with the mean.
inline ControlInput law_comm_center(std::span<const double> x, const Population& pop, Variant variant, double z,
                                    double eta, double K, std::string* phase = nullptr)
{
    detail::require_comm(variant, "communication centering law");
    validate_state(x, pop.size());
    require_variant_supported(pop, variant);
    if (!(K > 2.0)) {
        throw std::invalid_argument("communication centering law needs K > 2");
    }
    const std::size_t n = pop.size();
    const double nn = static_cast<double>(n);
    const double delta = eta / K;
    const std::vector<double> t = tilde_x(x, pop, variant);
    const std::vector<std::size_t> counts = detail::neighbor_counts(x, pop);
    ControlInput c;
    c.delta.assign(n, delta);
    auto scale = [&](std::size_t i) {
        const double ci = static_cast<double>(counts[i]);
        return ci / (ci - 1.0);
    };

    if (is_global(variant)) {
        if (phase) {
            *phase = "drive";
        }
        c.u_edge = detail::edge_controls(x, pop, [&](std::size_t i) {
            const double gain = (1.0 - pop.omega(i)) / scale(i);
            return detail::clamp_control((z - t[i]) / gain, eta, delta);
        });
        return c;
    }

    if (!pop.homogeneous() || pop.r_min() < 1.0 / (nn - 1.0)) {
        throw std::invalid_argument("communication centering needs equal thresholds r >= 1/(n-1)");
    }
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double xmin = *lo_it, xmax = *hi_it;
    const std::size_t imin = static_cast<std::size_t>(lo_it - x.begin());
    const std::size_t imax = static_cast<std::size_t>(hi_it - x.begin());

    if (xmax - xmin > 2.0 * eta / K) {
        const bool min_free = counts[imin] > 1;
        const bool max_free = counts[imax] > 1;
        const bool toward_max = min_free || !max_free;
        if (phase) {
            *phase = min_free ? "contract:I" : (max_free ? "contract:II" : "contract:III");
        }
        c.u_edge = detail::edge_controls(x, pop, [&](std::size_t i) {
            const double v = toward_max ? std::min(eta, (xmax - t[i]) * scale(i)) - delta
                                        : std::max(-eta, (xmin - t[i]) * scale(i)) + delta;
            return detail::clamp_control(v, eta, delta);
        });
        return c;
    }

    const double mid = 0.5 * (xmin + xmax);
    const double band = (nn - 1.0) / nn * (eta - 2.0 * delta);
    if (phase) {
        *phase = "shift";
    }
    c.u_edge = detail::edge_controls(x, pop, [&](std::size_t i) {
        double v = 0.0;
        if (mid > z + band) {
            v = (mid - t[i]) * scale(i) - eta + 2.0 * delta;
        } else if (mid < z - band) {
            v = (mid - t[i]) * scale(i) + eta - 2.0 * delta;
        } else {
            v = (z - t[i]) * scale(i);
        }
        return detail::clamp_control(v, eta, delta);
    });
    return c;
}

/// Communication push: receivers in `up` get u = +magnitude on every incoming
/// edge, receivers in `down` get -magnitude, the rest zero.
inline ControlInput law_comm_push(std::span<const double> x, const Population& pop, Variant variant,
                                  std::span<const int> direction, std::span<const double> delta,
                                  std::span<const double> magnitude, double eta)
{
    detail::require_comm(variant, "communication push law");
    validate_state(x, pop.size());
    ControlInput c;
    c.delta.assign(delta.begin(), delta.end());
    c.u_edge = detail::edge_controls(x, pop, [&](std::size_t i) {
        return detail::clamp_control(direction[i] * magnitude[i], eta, delta[i]);
    });
    return c;
}

inline void require_comm_homogeneous(const Population& pop)
{
    const double n = static_cast<double>(pop.size());
    if (!pop.homogeneous() || pop.r_min() < 1.0 / (n - 1.0) || pop.r_min() >= 1.0) {
        throw std::invalid_argument("law needs equal thresholds r in [1/(n-1), 1)");
    }
}

inline double comm_split_k_bound(const Population& pop, double eta)
{
    const double n = static_cast<double>(pop.size());
    const double r = pop.r_min();
    const double g = (n - 1.0) / n * eta;
    return std::max(4.0, (r + 2.0 * g) / (g - r / 2.0));
}

/// Split law for homogeneous CommNoise above the threshold: agent 0's
/// incoming edges carry -(eta - eta/K), every other receiver +(eta - eta/K).
inline ControlInput law_comm_spread(std::span<const double> x, const Population& pop, Variant variant, double eta,
                                    double K)
{
    if (variant != Variant::CommNoise) {
        throw std::invalid_argument("communication split law applies to CommNoise only");
    }
    require_comm_homogeneous(pop);
    if (!(eta > comm_homogeneous_threshold(pop))) {
        throw std::invalid_argument("communication split law needs eta > n r / (2(n-1))");
    }
    if (!(K >= comm_split_k_bound(pop, eta))) {
        throw std::invalid_argument("communication split law constant K is below its lower bound");
    }
    const std::size_t n = pop.size();
    std::vector<int> dir(n, 1);
    dir[0] = -1;
    const std::vector<double> delta(n, eta / K), mag(n, eta - eta / K);
    return law_comm_push(x, pop, variant, dir, delta, mag, eta);
}

// ---- phased controllers -------------------------------------------------------

/// A stateful control law. next(x) is called once per step with the current
/// state and returns that step's controls; phase() names the stage it acted
/// in.
class ControlLaw {
public:
    virtual ~ControlLaw() = default;
    virtual ControlInput next(std::span<const double> x) = 0;
    virtual std::string phase() const = 0;
    virtual TargetSet target() const = 0;
    /// Steps after which the target is reached under every admissible
    /// disturbance, from the per-phase counts of the construction.
    virtual std::size_t horizon_bound() const = 0;
};

namespace detail {

inline std::size_t ceil_steps(double v)
{
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("step bound is not finite");
    }
    return static_cast<std::size_t>(std::ceil(v));
}

/// Reaches the strict ball S_{z, radius} with the law matching the variant.
class Centering {
public:
    Centering(const Population& pop, Variant variant, double eta, double z, double radius)
        : pop_(pop), variant_(variant), eta_(eta), ball_(TargetSet::ball(z, radius))
    {
        if (!is_comm(variant)) {
            alpha_ = std::min(radius / 2.0, eta / 4.0);
            bound_ = ceil_steps(1.0 / (eta - 2.0 * alpha_)) + 1;
            return;
        }
        const double nn = static_cast<double>(pop.size());
        K_ = std::max({8.0, std::ceil(2.0 * eta / radius) + 1.0, std::ceil(4.0 * eta / pop.r_min()) + 1.0});
        const double delta = eta / K_;
        if (is_global(variant)) {
            const auto& w = pop.belief_factors();
            const double wmin = *std::min_element(w.begin(), w.end());
            const double wmax = *std::max_element(w.begin(), w.end());
            const double move = (1.0 - wmax) / 2.0 * (eta - delta);
            bound_ = ceil_steps(1.0 / move) + ceil_steps(std::log(radius / 2.0) / std::log(1.0 - wmin)) + 2;
        } else {
            const double step = eta / 2.0 - 2.0 * delta;
            const std::size_t rounds = ceil_steps(1.0 / std::min(step, pop.r_min()));
            const std::size_t per_round = ceil_steps(1.0 / step) + 1;
            bound_ = rounds * per_round + ceil_steps(1.0 / ((nn - 1.0) / nn * (eta - 3.0 * delta))) + 3;
        }
    }

    bool done(std::span<const double> x) const { return ball_.contains(x); }
    std::size_t bound() const noexcept { return bound_; }
    const TargetSet& ball() const noexcept { return ball_; }

    ControlInput next(std::span<const double> x, std::string& phase) const
    {
        if (!is_comm(variant_)) {
            phase = "drive";
            return law_drive_to_ball(x, pop_, variant_, ball_.z, alpha_, eta_);
        }
        return law_comm_center(x, pop_, variant_, ball_.z, eta_, K_, &phase);
    }

private:
    Population pop_;
    Variant variant_;
    double eta_;
    TargetSet ball_;
    double alpha_ = 0.0;
    double K_ = 0.0;
    std::size_t bound_ = 0;
};

/// Centre first, then hand over to a push stage.
class CenterThenPush : public ControlLaw {
public:
    CenterThenPush(Population pop, Variant variant, double eta, Centering centering, TargetSet target,
                   std::size_t push_bound)
        : pop_(std::move(pop)), variant_(variant), eta_(eta), centering_(std::move(centering)), target_(target),
          push_bound_(push_bound)
    {
    }

    ControlInput next(std::span<const double> x) override
    {
        if (!pushing_ && centering_.done(x)) {
            pushing_ = true;
            enter_push(x);
        }
        if (!pushing_) {
            std::string stage;
            ControlInput c = centering_.next(x, stage);
            phase_ = "center:" + stage;
            return c;
        }
        phase_ = push_phase_name();
        ++push_steps_;
        return push(x);
    }

    std::string phase() const override { return phase_; }
    TargetSet target() const override { return target_; }
    std::size_t horizon_bound() const override { return centering_.bound() + push_bound_; }

protected:
    virtual void enter_push(std::span<const double>) {}
    virtual ControlInput push(std::span<const double> x) = 0;
    virtual std::string push_phase_name() const { return "push"; }

    Population pop_;
    Variant variant_;
    double eta_;
    Centering centering_;
    TargetSet target_;
    std::size_t push_bound_;
    bool pushing_ = false;
    std::size_t push_steps_ = 0;
    std::string phase_ = "init";
};

} // namespace detail

class DriveToBallLaw : public ControlLaw {
public:
    /// The law runs at half the target radius so the strict ball is entered
    /// even when every disturbance sits on its bound.
    DriveToBallLaw(Population pop, Variant variant, double eta, double z, double alpha)
        : pop_(std::move(pop)), variant_(variant), eta_(eta), target_(TargetSet::ball(z, alpha)),
          alpha_law_(std::min(alpha / 2.0, eta / 4.0))
    {
        detail::require_env(variant, "drive-to-ball law");
    }

    ControlInput next(std::span<const double> x) override
    {
        return law_drive_to_ball(x, pop_, variant_, target_.z, alpha_law_, eta_);
    }

    std::string phase() const override { return "drive"; }
    TargetSet target() const override { return target_; }
    std::size_t horizon_bound() const override { return detail::ceil_steps(1.0 / (eta_ - 2.0 * alpha_law_)) + 1; }
    double law_alpha() const noexcept { return alpha_law_; }

private:
    Population pop_;
    Variant variant_;
    double eta_;
    TargetSet target_;
    double alpha_law_;
};

inline double default_split_k(const Population& pop, double eta)
{
    return std::ceil(4.0 * split_extreme_k_bound(pop, eta));
}

class SplitExtremeLaw : public detail::CenterThenPush {
public:
    SplitExtremeLaw(const Population& pop, Variant variant, double eta, double K)
        : CenterThenPush(pop, variant, eta, make_centering(pop, variant, eta, K), TargetSet::spread(1.0),
                         detail::ceil_steps((1.0 - pop.r_min() / 2.0) / (eta - 2.0 * eta / K)) + 1),
          K_(K)
    {
    }

protected:
    static detail::Centering make_centering(const Population& pop, Variant variant, double eta, double K)
    {
        if (variant != Variant::EnvNoise) {
            throw std::invalid_argument("split law applies to EnvNoise only");
        }
        require_split_extreme(pop, eta, K);
        const double r = pop.r_min();
        return detail::Centering(pop, variant, eta, r / 2.0 + r / K, r / K);
    }

    void enter_push(std::span<const double> x) override
    {
        const double r = pop_.r_min();
        for (double v : x) {
            if (!(v >= r / 2.0 && v <= r / 2.0 + 2.0 * r / K_)) {
                throw std::logic_error("split law entered its push phase off position");
            }
        }
    }

    ControlInput push(std::span<const double> x) override { return law_split_extreme(x, pop_, eta_, K_); }

private:
    double K_;
};

class SpreadOnceLaw : public detail::CenterThenPush {
public:
    SpreadOnceLaw(const Population& pop, Variant variant, double eta, double eps)
        : CenterThenPush(pop, variant, eta, make_centering(pop, variant, eta, eps),
                         TargetSet::spread(std::min(2.0 * eta - 2.0 * eps, 1.0)), 1),
          eps_(eps)
    {
    }

    static detail::Centering make_centering(const Population& pop, Variant variant, double eta, double eps)
    {
        detail::require_env(variant, "spread law");
        if (!(eps > 0.0 && eps < eta)) {
            throw std::invalid_argument("spread law needs epsilon in (0, eta)");
        }
        return detail::Centering(pop, variant, eta, 0.5, std::min(eps, pop.r_min()) / 2.0);
    }

protected:
    ControlInput push(std::span<const double> x) override { return law_spread_once(x, pop_, variant_, eps_, eta_); }

private:
    double eps_;
};

inline double default_spread_global_k(const Population& pop, double eta, double eps)
{
    return std::ceil(4.0 * spread_global_k_bound(pop, eta, eps));
}

inline double spread_global_target(const Population& pop, double eta, double eps)
{
    const double n = static_cast<double>(pop.size());
    const double w = pop.omega(spread_global_lead(pop, eta));
    return std::min({n * eta / ((n - 1.0) * w) - eps, n * eta - eps, 1.0});
}

class SpreadGlobalLaw : public detail::CenterThenPush {
public:
    SpreadGlobalLaw(const Population& pop, Variant variant, double eta, double eps, double K)
        : CenterThenPush(pop, variant, eta, make_centering(pop, variant, eta, eps, K),
                         TargetSet::spread(std::max(0.0, spread_global_target(pop, eta, eps))),
                         push_steps(pop, eta, eps)),
          eps_(eps), K_(K)
    {
    }

protected:
    static detail::Centering make_centering(const Population& pop, Variant variant, double eta, double eps, double K)
    {
        if (variant != Variant::EnvNoiseGlobal) {
            throw std::invalid_argument("global spread law applies to EnvNoiseGlobal only");
        }
        if (!(K >= spread_global_k_bound(pop, eta, eps))) {
            throw std::invalid_argument("global spread law constant K is below its lower bound");
        }
        const double r1 = pop.r(spread_global_lead(pop, eta));
        const double w = std::min(r1, pop.r_min()) / K;
        return detail::Centering(pop, variant, eta, r1 / 2.0 + w, w);
    }

    static std::size_t push_steps(const Population& pop, double eta, double eps)
    {
        const double n = static_cast<double>(pop.size());
        const double w = pop.omega(spread_global_lead(pop, eta));
        return detail::ceil_steps(1.0 / ((n - 1.0) * w * eps / (2.0 * n))) + 2;
    }

    ControlInput push(std::span<const double> x) override { return law_spread_global(x, pop_, eps_, eta_, K_); }

private:
    double eps_;
    double K_;
};

class CommCenterLaw : public ControlLaw {
public:
    CommCenterLaw(const Population& pop, Variant variant, double eta, double z, double alpha)
        : centering_(make(pop, variant, eta, z, alpha))
    {
    }

    ControlInput next(std::span<const double> x) override { return centering_.next(x, phase_); }
    std::string phase() const override { return phase_; }
    TargetSet target() const override { return centering_.ball(); }
    std::size_t horizon_bound() const override { return centering_.bound(); }

private:
    static detail::Centering make(const Population& pop, Variant variant, double eta, double z, double alpha)
    {
        detail::require_comm(variant, "communication centering law");
        if (variant == Variant::CommNoise) {
            const double n = static_cast<double>(pop.size());
            if (!pop.homogeneous() || pop.r_min() < 1.0 / (n - 1.0)) {
                throw std::invalid_argument("communication centering needs equal thresholds r >= 1/(n-1)");
            }
        }
        require_variant_supported(pop, variant);
        return detail::Centering(pop, variant, eta, z, alpha);
    }

    detail::Centering centering_;
    std::string phase_ = "init";
};

/// Pair with the largest a_ij, oriented so the first agent is pushed up.
struct PushPair {
    std::size_t up = 0;
    std::size_t down = 1;
};

inline PushPair largest_a_pair(const Population& pop)
{
    PushPair best;
    double w = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pop.size(); ++i) {
        for (std::size_t j = i + 1; j < pop.size(); ++j) {
            if (pop.omega(i) + pop.omega(j) < w) {
                w = pop.omega(i) + pop.omega(j);
                best = {i, j};
            }
        }
    }
    return best;
}

class CommPairSpreadLaw : public detail::CenterThenPush {
public:
    CommPairSpreadLaw(const Population& pop, Variant variant, double eta, double eps)
        : CenterThenPush(pop, variant, eta, make_centering(pop, variant, eta, eps), make_target(pop, eta, eps), 1),
          eps_(eps), pair_(largest_a_pair(pop))
    {
    }

    static double radius_for(const Population& pop, std::size_t i, double eps)
    {
        const double n = static_cast<double>(pop.size());
        return n * eps / ((1.0 - pop.omega(i)) * (n - 1.0));
    }

protected:
    static detail::Centering make_centering(const Population& pop, Variant variant, double eta, double eps)
    {
        if (variant != Variant::CommNoiseGlobal) {
            throw std::invalid_argument("pair spread law applies to CommNoiseGlobal only");
        }
        require_variant_supported(pop, variant);
        if (!(eps > 0.0 && eps < eta)) {
            throw std::invalid_argument("pair spread law needs epsilon in (0, eta)");
        }
        const PushPair p = largest_a_pair(pop);
        if (!(radius_for(pop, p.up, eps) / 4.0 < eta && radius_for(pop, p.down, eps) / 4.0 < eta)) {
            throw std::invalid_argument("pair spread law needs n eps / (4 (1 - omega_i)(n-1)) < eta");
        }
        const PairConstants pc = h_matrix(eta, pop);
        const double z = project_unit(0.5 + (pc.a[p.down] - pc.a[p.up]) / 2.0);
        return detail::Centering(pop, variant, eta, z, std::min(eps, pop.r_min()) / 2.0);
    }

    static TargetSet make_target(const Population& pop, double eta, double eps)
    {
        const PairConstants pc = h_matrix(eta, pop);
        return TargetSet::spread(std::clamp(max_offdiag(pc.A) - 2.0 * eps, 0.0, 1.0));
    }

    ControlInput push(std::span<const double> x) override
    {
        const std::size_t n = pop_.size();
        const double eu = radius_for(pop_, pair_.up, eps_) / 4.0;
        const double ed = radius_for(pop_, pair_.down, eps_) / 4.0;
        std::vector<int> dir(n, 0);
        std::vector<double> delta(n, std::min(eu, ed)), mag(n, 0.0);
        dir[pair_.up] = 1;
        dir[pair_.down] = -1;
        delta[pair_.up] = eu;
        delta[pair_.down] = ed;
        mag[pair_.up] = eta_ - eu;
        mag[pair_.down] = eta_ - ed;
        return law_comm_push(x, pop_, variant_, dir, delta, mag, eta_);
    }

private:
    double eps_;
    PushPair pair_;
};

/// Pair with the largest c_ij (first index pushed up).
inline PushPair largest_c_pair(const PairConstants& pc)
{
    PushPair best;
    double c = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pc.C.size(); ++i) {
        for (std::size_t j = i + 1; j < pc.C.size(); ++j) {
            if (pc.C[i][j] > c) {
                c = pc.C[i][j];
                best = {i, j};
            }
        }
    }
    return best;
}

/// Centre point for the two-kick construction, chosen from how a_i compares
/// with h_ij for the pair.
inline double h_spread_center(const PairConstants& pc, PushPair p)
{
    const double a1 = pc.a[p.up], a2 = pc.a[p.down];
    const double h12 = pc.H[p.up][p.down], h21 = pc.H[p.down][p.up];
    if (a1 + a2 >= 1.0 || (a1 > h12 && a2 > h21)) {
        return project_unit(0.5 + (a2 - a1) / 2.0);
    }
    if (a1 > h12) {
        return 1.0 - a1;
    }
    if (a2 > h21) {
        return a2;
    }
    const double lo = std::max(a2, std::min(h21, 1.0 - h12));
    const double hi = std::min(1.0 - a1, std::max(h21, 1.0 - h12));
    return 0.5 * (lo + hi);
}

/// Two-kick spread for CommNoiseGlobal: centre at x*, then kick the pair
/// apart at t1 (others held with delta = eta/(MK)) and again at t1 + 1.
class CommHSpreadLaw : public detail::CenterThenPush {
public:
    CommHSpreadLaw(const Population& pop, Variant variant, double eta, double eps, double K, double M)
        : CenterThenPush(pop, variant, eta, make_centering(pop, variant, eta, K), make_target(pop, eta, eps), 2),
          K_(K), M_(M), pair_(largest_c_pair(h_matrix(eta, pop)))
    {
        if (!(M >= 1.0)) {
            throw std::invalid_argument("spread law constant M must be at least 1");
        }
    }

protected:
    static detail::Centering make_centering(const Population& pop, Variant variant, double eta, double K)
    {
        if (variant != Variant::CommNoiseGlobal) {
            throw std::invalid_argument("two-kick spread law applies to CommNoiseGlobal only");
        }
        require_variant_supported(pop, variant);
        if (!(K > 4.0)) {
            throw std::invalid_argument("two-kick spread law needs K > 4");
        }
        const PairConstants pc = h_matrix(eta, pop);
        return detail::Centering(pop, variant, eta, h_spread_center(pc, largest_c_pair(pc)), eta / K);
    }

    static TargetSet make_target(const Population& pop, double eta, double eps)
    {
        if (!(eps > 0.0)) {
            throw std::invalid_argument("two-kick spread law needs epsilon > 0");
        }
        const PairConstants pc = h_matrix(eta, pop);
        const PushPair p = largest_c_pair(pc);
        return TargetSet::spread(std::clamp(pc.C[p.up][p.down] - eps, 0.0, 1.0));
    }

    std::string push_phase_name() const override
    {
        return push_steps_ == 0 ? "kick" : (push_steps_ == 1 ? "follow" : "hold");
    }

    ControlInput push(std::span<const double> x) override
    {
        const std::size_t n = pop_.size();
        const double big = eta_ / K_;
        std::vector<int> dir(n, 0);
        std::vector<double> delta(n, eta_ / (M_ * K_)), mag(n, 0.0);
        if (push_steps_ <= 2) {
            const double m = push_steps_ == 1 ? eta_ - 2.0 * big : eta_ - big;
            dir[pair_.up] = 1;
            dir[pair_.down] = -1;
            delta[pair_.up] = delta[pair_.down] = big;
            mag[pair_.up] = mag[pair_.down] = m;
        }
        return law_comm_push(x, pop_, variant_, dir, delta, mag, eta_);
    }

private:
    double K_;
    double M_;
    PushPair pair_;
};

/// Homogeneous CommNoise at or below the threshold: centre at 1/2, then push
/// agent 0 down and the rest up by eta - 2 eta/K so d_V lands in
/// [c_eta - eps, c_eta] with c_eta = 2 eta (n-1)/n.
class CommBandLaw : public detail::CenterThenPush {
public:
    CommBandLaw(const Population& pop, Variant variant, double eta, double eps, double K)
        : CenterThenPush(pop, variant, eta, make_centering(pop, variant, eta, eps, K), make_target(pop, eta, eps), 1),
          K_(K)
    {
    }

    static double k_bound(const Population& pop, double eta, double eps)
    {
        const double n = static_cast<double>(pop.size());
        return std::max(4.0, 6.0 * (n - 1.0) * eta / (n * eps));
    }

protected:
    static detail::Centering make_centering(const Population& pop, Variant variant, double eta, double eps, double K)
    {
        if (variant != Variant::CommNoise) {
            throw std::invalid_argument("band law applies to CommNoise only");
        }
        require_comm_homogeneous(pop);
        if (!(eta <= comm_homogeneous_threshold(pop))) {
            throw std::invalid_argument("band law needs eta <= n r / (2(n-1))");
        }
        if (!(eps > 0.0) || !(K >= k_bound(pop, eta, eps))) {
            throw std::invalid_argument("band law needs epsilon > 0 and K above its lower bound");
        }
        return detail::Centering(pop, variant, eta, 0.5, pop.r_min() / K);
    }

    static TargetSet make_target(const Population& pop, double eta, double eps)
    {
        const double c = comm_homogeneous_bound(eta, pop.size());
        return TargetSet::band(std::max(0.0, c - eps), std::min(c, 1.0));
    }

    ControlInput push(std::span<const double> x) override
    {
        const std::size_t n = pop_.size();
        std::vector<int> dir(n, 1);
        dir[0] = -1;
        const std::vector<double> delta(n, eta_ / K_), mag(n, eta_ - 2.0 * eta_ / K_);
        return law_comm_push(x, pop_, variant_, dir, delta, mag, eta_);
    }

private:
    double K_;
};

inline double default_comm_split_k(const Population& pop, double eta)
{
    return std::ceil(4.0 * comm_split_k_bound(pop, eta));
}

class CommSplitExtremeLaw : public detail::CenterThenPush {
public:
    CommSplitExtremeLaw(const Population& pop, Variant variant, double eta, double K)
        : CenterThenPush(pop, variant, eta, make_centering(pop, variant, eta, K), TargetSet::spread(1.0),
                         push_steps(pop, eta, K)),
          K_(K)
    {
    }

protected:
    static detail::Centering make_centering(const Population& pop, Variant variant, double eta, double K)
    {
        if (variant != Variant::CommNoise) {
            throw std::invalid_argument("communication split law applies to CommNoise only");
        }
        require_comm_homogeneous(pop);
        if (!(eta > comm_homogeneous_threshold(pop))) {
            throw std::invalid_argument("communication split law needs eta > n r / (2(n-1))");
        }
        if (!(K >= comm_split_k_bound(pop, eta))) {
            throw std::invalid_argument("communication split law constant K is below its lower bound");
        }
        const double r = pop.r_min();
        return detail::Centering(pop, variant, eta, r / 2.0, r / K);
    }

    static std::size_t push_steps(const Population& pop, double eta, double K)
    {
        const double n = static_cast<double>(pop.size());
        return detail::ceil_steps(1.0 / ((n - 2.0) / (n - 1.0) * (eta - 2.0 * eta / K))) + 2;
    }

    ControlInput push(std::span<const double> x) override { return law_comm_spread(x, pop_, variant_, eta_, K_); }

private:
    double K_;
};

// ---- law selection ------------------------------------------------------------

enum class LawKind {
    DriveToBall,
    SplitExtreme,
    SpreadOnce,
    SpreadGlobal,
    CommCenter,
    CommPairSpread,
    CommHSpread,
    CommBand,
    CommSplitExtreme,
};

inline constexpr LawKind kAllLawKinds[] = {LawKind::DriveToBall,    LawKind::SplitExtreme, LawKind::SpreadOnce,
                                           LawKind::SpreadGlobal,   LawKind::CommCenter,   LawKind::CommPairSpread,
                                           LawKind::CommHSpread,    LawKind::CommBand,     LawKind::CommSplitExtreme};

inline std::string_view to_string(LawKind k) noexcept
{
    switch (k) {
    case LawKind::DriveToBall: return "drive_to_ball";
    case LawKind::SplitExtreme: return "split_extreme";
    case LawKind::SpreadOnce: return "spread_once";
    case LawKind::SpreadGlobal: return "spread_global";
    case LawKind::CommCenter: return "comm_center";
    case LawKind::CommPairSpread: return "comm_pair_spread";
    case LawKind::CommHSpread: return "comm_h_spread";
    case LawKind::CommBand: return "comm_band";
    case LawKind::CommSplitExtreme: return "comm_split_extreme";
    }
    return "?";
}

inline LawKind parse_law_kind(std::string_view s)
{
    for (LawKind k : kAllLawKinds) {
        if (s == to_string(k)) {
            return k;
        }
    }
    throw std::invalid_argument("unknown control law: " + std::string(s));
}

/// Law choice plus its parameters. Unset K / M fall back to per-law defaults.
struct LawSpec {
    LawKind kind = LawKind::DriveToBall;
    double z = 0.5;
    double alpha = 0.02;
    double epsilon = 0.01;
    std::optional<double> K;
    std::optional<double> M;

    bool operator==(const LawSpec&) const = default;
};

inline std::unique_ptr<ControlLaw> make_law(const LawSpec& spec, const Population& pop, Variant variant, double eta)
{
    if (!(eta > 0.0)) {
        throw std::invalid_argument("noise amplitude must be positive");
    }
    switch (spec.kind) {
    case LawKind::DriveToBall: return std::make_unique<DriveToBallLaw>(pop, variant, eta, spec.z, spec.alpha);
    case LawKind::SplitExtreme:
        if (!(pop.r_min() < 1.0 && eta > std::max(pop.r_min() / 2.0, pop.r_max() / pop.size()))) {
            throw std::invalid_argument("split law needs r_min < 1 and eta > max{r_min/2, r_max/n}");
        }
        return std::make_unique<SplitExtremeLaw>(pop, variant, eta, spec.K.value_or(default_split_k(pop, eta)));
    case LawKind::SpreadOnce: return std::make_unique<SpreadOnceLaw>(pop, variant, eta, spec.epsilon);
    case LawKind::SpreadGlobal:
        if (!pop.has_belief_factors() || !(pop.r_min() < 1.0 && eta > pop.r_min() / 2.0)) {
            throw std::invalid_argument("global spread law needs belief factors, r_min < 1 and eta > r_min/2");
        }
        return std::make_unique<SpreadGlobalLaw>(pop, variant, eta, spec.epsilon,
                                                 spec.K.value_or(default_spread_global_k(pop, eta, spec.epsilon)));
    case LawKind::CommCenter: return std::make_unique<CommCenterLaw>(pop, variant, eta, spec.z, spec.alpha);
    case LawKind::CommPairSpread: return std::make_unique<CommPairSpreadLaw>(pop, variant, eta, spec.epsilon);
    case LawKind::CommHSpread:
        return std::make_unique<CommHSpreadLaw>(pop, variant, eta, spec.epsilon, spec.K.value_or(200.0),
                                                spec.M.value_or(1000.0));
    case LawKind::CommBand:
        require_comm_homogeneous(pop);
        return std::make_unique<CommBandLaw>(
            pop, variant, eta, spec.epsilon,
            spec.K.value_or(std::ceil(CommBandLaw::k_bound(pop, eta, spec.epsilon)) + 1.0));
    case LawKind::CommSplitExtreme:
        require_comm_homogeneous(pop);
        if (!(eta > comm_homogeneous_threshold(pop))) {
            throw std::invalid_argument("communication split law needs eta > n r / (2(n-1))");
        }
        return std::make_unique<CommSplitExtremeLaw>(pop, variant, eta,
                                                     spec.K.value_or(default_comm_split_k(pop, eta)));
    }
    throw std::invalid_argument("unsupported control law");
}

// ---- certification ------------------------------------------------------------

struct ReachTask {
    Population pop;
    Variant variant = Variant::EnvNoise;
    double eta = 0.1;
    LawSpec law;
    std::vector<std::vector<double>> initial_states;
    std::vector<Adversary> adversaries;
    std::optional<std::size_t> horizon; // default: 2 x the law's bound
    bool keep_traces = false;
};

struct ReachRun {
    std::size_t initial_index = 0;
    Adversary adversary;
    bool reached = false;
    std::optional<std::size_t> hit_time;
    double final_spread = 0.0;
    /// Largest |u| + delta seen along the run; never above eta.
    double max_budget_use = 0.0;
    std::vector<std::string> phases;          // phase used at each step
    std::vector<std::vector<double>> trace;   // x(0), x(1), ... (if kept)
};

struct ReachReport {
    bool reached = false;
    std::optional<std::size_t> hit_time; // worst case over runs when all reached
    std::size_t horizon = 0;
    std::size_t bound = 0;
    TargetSet target;
    std::size_t failures = 0;
    double min_final_spread = 1.0;
    std::vector<ReachRun> runs;
};

namespace detail {

inline double budget_use(const ControlInput& c, std::span<const double> x, const Population& pop, Variant variant)
{
    double worst = 0.0;
    if (!is_comm(variant)) {
        for (std::size_t i = 0; i < c.u.size(); ++i) {
            worst = std::max(worst, std::abs(c.u[i]) + c.delta[i]);
        }
        return worst;
    }
    for (const Edge& e : communication_edges(x, pop)) {
        worst = std::max(worst, std::abs(c.u_edge.at(e.from, e.to)) + c.delta[e.to]);
    }
    return worst;
}

} // namespace detail

/// Rolls a fresh instance of the law forward from one initial state against
/// one adversary for up to `horizon` steps.
inline ReachRun run_law(const ReachTask& task, std::size_t initial_index, const Adversary& adv, std::size_t horizon)
{
    const auto law = make_law(task.law, task.pop, task.variant, task.eta);
    const TargetSet target = law->target();
    ReachRun run;
    run.initial_index = initial_index;
    run.adversary = adv;
    std::vector<double> x = task.initial_states.at(initial_index);
    validate_state(x, task.pop.size());
    if (task.keep_traces) {
        run.trace.push_back(x);
    }
    if (target.contains(x)) {
        run.reached = true;
        run.hit_time = 0;
        run.final_spread = max_diff(x);
        return run;
    }
    for (std::size_t t = 0; t < horizon; ++t) {
        const ControlInput c = law->next(x);
        run.phases.push_back(law->phase());
        run.max_budget_use = std::max(run.max_budget_use, detail::budget_use(c, x, task.pop, task.variant));
        const Disturbance d = adversary_disturbance(adv, c, x, task.pop, task.variant, t);
        x = control_step(x, task.pop, task.variant, c, d, task.eta);
        if (task.keep_traces) {
            run.trace.push_back(x);
        }
        if (target.contains(x)) {
            run.reached = true;
            run.hit_time = t + 1;
            break;
        }
    }
    run.final_spread = max_diff(x);
    return run;
}

/// Checks the law against every (initial state, adversary) pair. reached is
/// true only when all runs hit the target within the horizon.
inline ReachReport certify(const ReachTask& task)
{
    if (task.initial_states.empty() || task.adversaries.empty()) {
        throw std::invalid_argument("certification needs initial states and adversaries");
    }
    const auto law = make_law(task.law, task.pop, task.variant, task.eta);
    ReachReport rep;
    rep.target = law->target();
    rep.bound = law->horizon_bound();
    rep.horizon = task.horizon.value_or(2 * rep.bound);
    rep.reached = true;
    std::size_t worst = 0;
    for (std::size_t k = 0; k < task.initial_states.size(); ++k) {
        for (const Adversary& adv : task.adversaries) {
            ReachRun run = run_law(task, k, adv, rep.horizon);
            rep.min_final_spread = std::min(rep.min_final_spread, run.final_spread);
            if (run.reached) {
                worst = std::max(worst, *run.hit_time);
            } else {
                rep.reached = false;
                ++rep.failures;
            }
            rep.runs.push_back(std::move(run));
        }
    }
    if (rep.reached) {
        rep.hit_time = worst;
    }
    return rep;
}

/// Uniform initial states on a counter stream, one per index.
inline std::vector<std::vector<double>> random_initial_states(std::size_t n, std::size_t count, std::uint64_t seed)
{
    const CounterRng rng(RngContext{seed, 0});
    std::vector<std::vector<double>> out(count, std::vector<double>(n));
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            out[k][i] = rng.uniform(k, static_cast<std::uint32_t>(i), Purpose::InitialState);
        }
    }
    return out;
}

} // namespace hkn
