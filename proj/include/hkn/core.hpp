#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hkn {

/// The four noisy update rules. Environment noise is added after averaging;
/// communication noise perturbs each received opinion. The *Global variants
/// blend the population mean with weight omega_i.
enum class Variant { EnvNoise, EnvNoiseGlobal, CommNoise, CommNoiseGlobal };

inline constexpr Variant kAllVariants[] = {Variant::EnvNoise, Variant::EnvNoiseGlobal, Variant::CommNoise,
                                           Variant::CommNoiseGlobal};

constexpr bool is_global(Variant v) noexcept
{
    return v == Variant::EnvNoiseGlobal || v == Variant::CommNoiseGlobal;
}

constexpr bool is_comm(Variant v) noexcept
{
    return v == Variant::CommNoise || v == Variant::CommNoiseGlobal;
}

inline std::string_view to_string(Variant v) noexcept
{
    switch (v) {
    case Variant::EnvNoise: return "EnvNoise";
    case Variant::EnvNoiseGlobal: return "EnvNoiseGlobal";
    case Variant::CommNoise: return "CommNoise";
    case Variant::CommNoiseGlobal: return "CommNoiseGlobal";
    }
    return "?";
}

inline Variant parse_variant(std::string_view s)
{
    for (Variant v : kAllVariants) {
        if (s == to_string(v)) {
            return v;
        }
    }
    throw std::invalid_argument("unknown model variant: " + std::string(s));
}

/// Agents with per-agent confidence thresholds r_i in (0,1] and belief factors
/// omega_i in (0,1). The omega vector may be empty, in which case only the
/// non-global variants can be used.
class Population {
public:
    Population(std::vector<double> r, std::vector<double> omega = {})
        : r_(std::move(r)), omega_(std::move(omega))
    {
        if (r_.size() < 3) {
            throw std::invalid_argument("population needs at least 3 agents");
        }
        for (double ri : r_) {
            if (!(ri > 0.0 && ri <= 1.0)) {
                throw std::invalid_argument("confidence threshold outside (0,1]");
            }
        }
        if (!omega_.empty()) {
            if (omega_.size() != r_.size()) {
                throw std::invalid_argument("belief factor count does not match agent count");
            }
            for (double w : omega_) {
                if (!(w > 0.0 && w < 1.0)) {
                    throw std::invalid_argument("belief factor outside (0,1)");
                }
            }
        }
        const auto [lo, hi] = std::minmax_element(r_.begin(), r_.end());
        r_min_ = *lo;
        r_max_ = *hi;
    }

    std::size_t size() const noexcept { return r_.size(); }
    double r(std::size_t i) const { return r_.at(i); }
    double omega(std::size_t i) const
    {
        if (omega_.empty()) {
            throw std::logic_error("population has no belief factors");
        }
        return omega_.at(i);
    }
    const std::vector<double>& thresholds() const noexcept { return r_; }
    const std::vector<double>& belief_factors() const noexcept { return omega_; }
    bool has_belief_factors() const noexcept { return !omega_.empty(); }
    double r_min() const noexcept { return r_min_; }
    double r_max() const noexcept { return r_max_; }
    bool homogeneous() const noexcept { return r_min_ == r_max_; }

    std::size_t argmin_r() const noexcept
    {
        return static_cast<std::size_t>(std::min_element(r_.begin(), r_.end()) - r_.begin());
    }

    bool operator==(const Population&) const = default;

private:
    std::vector<double> r_;
    std::vector<double> omega_;
    double r_min_ = 0.0;
    double r_max_ = 0.0;
};

inline void require_variant_supported(const Population& pop, Variant v)
{
    if (is_global(v) && !pop.has_belief_factors()) {
        throw std::invalid_argument(std::string(to_string(v)) + " requires belief factors");
    }
}

/// Clamp to [0,1]; rejects NaN and infinities.
inline double project_unit(double v)
{
    if (!std::isfinite(v)) {
        throw std::domain_error("projection of a non-finite value");
    }
    if (v > 1.0) {
        return 1.0;
    }
    if (v < 0.0) {
        return 0.0;
    }
    return v;
}

inline void validate_state(std::span<const double> x, std::size_t n)
{
    if (x.size() != n) {
        throw std::invalid_argument("state size does not match population size");
    }
    for (double v : x) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("opinion outside [0,1]");
        }
    }
}

/// N_i = { j : |x_j - x_i| <= r_i }, zero-based and ascending. The closed
/// inequality is evaluated exactly on doubles.
inline std::vector<std::size_t> neighbor_set(std::span<const double> x, std::size_t i, double r_i)
{
    if (i >= x.size()) {
        throw std::out_of_range("agent index out of range");
    }
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (std::abs(x[j] - x[i]) <= r_i) {
            out.push_back(j);
        }
    }
    return out;
}

inline bool is_neighbor(std::span<const double> x, std::size_t i, std::size_t j, double r_i) noexcept
{
    return std::abs(x[j] - x[i]) <= r_i;
}

/// Arithmetic mean, clamped to [min x, max x] so that a constant vector maps
/// to its value exactly.
inline double population_mean(std::span<const double> x) noexcept
{
    double s = 0.0;
    double lo = x[0];
    double hi = x[0];
    for (double v : x) {
        s += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return std::clamp(s / static_cast<double>(x.size()), lo, hi);
}

struct NeighborMean {
    double mean = 0.0;
    std::size_t count = 0;
};

/// Mean over N_i, summed in ascending index order and clamped to the hull of
/// the neighbor opinions.
inline NeighborMean neighbor_mean(std::span<const double> x, std::size_t i, double r_i) noexcept
{
    double s = 0.0;
    double lo = x[i];
    double hi = x[i];
    std::size_t c = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (std::abs(x[j] - x[i]) <= r_i) {
            s += x[j];
            lo = std::min(lo, x[j]);
            hi = std::max(hi, x[j]);
            ++c;
        }
    }
    return {std::clamp(s / static_cast<double>(c), lo, hi), c};
}

namespace detail {

/// omega * ave + (1 - omega) * local, evaluated so the result stays between
/// the two inputs and equals them when they coincide.
inline double blend(double local, double ave, double omega) noexcept
{
    const auto [lo, hi] = std::minmax(local, ave);
    return std::clamp(local + omega * (ave - local), lo, hi);
}

inline void tilde_x_into(std::span<const double> x, const Population& pop, Variant variant,
                         std::span<double> out, std::span<std::size_t> counts = {}) noexcept
{
    const std::size_t n = x.size();
    const bool global = is_global(variant);
    const double ave = global ? population_mean(x) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const NeighborMean nm = neighbor_mean(x, i, pop.thresholds()[i]);
        if (!counts.empty()) {
            counts[i] = nm.count;
        }
        out[i] = global ? blend(nm.mean, ave, pop.belief_factors()[i]) : nm.mean;
    }
}

/// Gain applied to the averaged incoming perturbation: 1 for CommNoise,
/// 1 - omega_i for CommNoiseGlobal.
inline double comm_gain(const Population& pop, Variant variant, std::size_t i) noexcept
{
    return is_global(variant) ? 1.0 - pop.belief_factors()[i] : 1.0;
}

} // namespace detail

/// Neighbor mean for the plain variants, omega_i * x_ave + (1-omega_i) *
/// neighbor mean for the global ones. Always a convex combination of x.
inline std::vector<double> tilde_x(std::span<const double> x, const Population& pop, Variant variant)
{
    validate_state(x, pop.size());
    require_variant_supported(pop, variant);
    std::vector<double> out(x.size());
    detail::tilde_x_into(x, pop, variant, out);
    return out;
}

/// One synchronous step of an environment-noise model.
inline std::vector<double> step_env(std::span<const double> x, const Population& pop, Variant variant,
                                    std::span<const double> xi, double eta)
{
    if (is_comm(variant)) {
        throw std::invalid_argument("step_env called with a communication-noise variant");
    }
    validate_state(x, pop.size());
    require_variant_supported(pop, variant);
    if (xi.size() != x.size()) {
        throw std::invalid_argument("noise vector size does not match population size");
    }
    for (double v : xi) {
        if (!(std::abs(v) <= eta)) {
            throw std::invalid_argument("environment noise outside [-eta, eta]");
        }
    }
    std::vector<double> out(x.size());
    detail::tilde_x_into(x, pop, variant, out);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = project_unit(out[i] + xi[i]);
    }
    return out;
}

struct Edge {
    std::size_t from = 0; // j: sender
    std::size_t to = 0;   // i: receiver
    bool operator==(const Edge&) const = default;
};

/// Values attached to ordered agent pairs (j -> i). Self-pairs are never
/// stored; communication noise on a self-loop is identically zero.
class EdgeField {
public:
    EdgeField() = default;
    explicit EdgeField(std::size_t n) : n_(n), values_(n * n, 0.0), present_(n * n, 0) {}

    std::size_t agents() const noexcept { return n_; }

    void set(std::size_t from, std::size_t to, double v)
    {
        check(from, to);
        if (from == to) {
            throw std::invalid_argument("self-pair in edge field");
        }
        values_[from * n_ + to] = v;
        if (!present_[from * n_ + to]) {
            present_[from * n_ + to] = 1;
            ++count_;
        }
    }

    bool contains(std::size_t from, std::size_t to) const noexcept
    {
        return from < n_ && to < n_ && present_[from * n_ + to] != 0;
    }

    double at(std::size_t from, std::size_t to) const
    {
        if (!contains(from, to)) {
            throw std::out_of_range("edge not present in field");
        }
        return values_[from * n_ + to];
    }

    std::size_t size() const noexcept { return count_; }

    std::vector<Edge> edges() const
    {
        std::vector<Edge> out;
        for (std::size_t j = 0; j < n_; ++j) {
            for (std::size_t i = 0; i < n_; ++i) {
                if (present_[j * n_ + i]) {
                    out.push_back({j, i});
                }
            }
        }
        return out;
    }

    bool operator==(const EdgeField&) const = default;

private:
    void check(std::size_t from, std::size_t to) const
    {
        if (from >= n_ || to >= n_) {
            throw std::out_of_range("edge endpoint out of range");
        }
    }

    std::size_t n_ = 0;
    std::vector<double> values_;
    std::vector<char> present_;
    std::size_t count_ = 0;
};

/// E(t): every (j -> i) with j in N_i(t) \ {i}, ordered by receiver then sender.
inline std::vector<Edge> communication_edges(std::span<const double> x, const Population& pop)
{
    std::vector<Edge> out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (j != i && is_neighbor(x, i, j, pop.thresholds()[i])) {
                out.push_back({j, i});
            }
        }
    }
    return out;
}

namespace detail {

/// Shared arithmetic of the communication-noise update:
/// x_i' = Pi(tilde_i + gain_i * |N_i|^-1 * sum_{j in N_i, j != i} zeta_ji),
/// which equals the averaged-received-opinion form. noise(j, i) is visited in
/// ascending j.
template <class NoiseFn>
void comm_update_into(std::span<const double> x, const Population& pop, Variant variant, NoiseFn&& noise,
                      std::span<double> out)
{
    const std::size_t n = x.size();
    const bool global = is_global(variant);
    const double ave = global ? population_mean(x) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ri = pop.thresholds()[i];
        const NeighborMean nm = neighbor_mean(x, i, ri);
        const double tilde = global ? blend(nm.mean, ave, pop.belief_factors()[i]) : nm.mean;
        double zsum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && is_neighbor(x, i, j, ri)) {
                zsum += noise(j, i);
            }
        }
        out[i] = project_unit(tilde + comm_gain(pop, variant, i) * zsum / static_cast<double>(nm.count));
    }
}

} // namespace detail

/// One synchronous step of a communication-noise model. zeta must hold
/// exactly one value per edge of E(t).
inline std::vector<double> step_comm(std::span<const double> x, const Population& pop, Variant variant,
                                     const EdgeField& zeta, double eta)
{
    if (!is_comm(variant)) {
        throw std::invalid_argument("step_comm called with an environment-noise variant");
    }
    validate_state(x, pop.size());
    require_variant_supported(pop, variant);
    const std::size_t n = x.size();
    if (zeta.agents() != n) {
        throw std::invalid_argument("edge field size does not match population size");
    }
    std::size_t used = 0;
    auto lookup = [&](std::size_t j, std::size_t i) {
        if (!zeta.contains(j, i)) {
            throw std::invalid_argument("missing communication noise for an edge");
        }
        const double z = zeta.at(j, i);
        if (!(std::abs(z) <= eta)) {
            throw std::invalid_argument("communication noise outside [-eta, eta]");
        }
        ++used;
        return z;
    };
    std::vector<double> out(n);
    detail::comm_update_into(x, pop, variant, lookup, out);
    if (used != zeta.size()) {
        throw std::invalid_argument("communication noise supplied for a non-edge");
    }
    return out;
}

/// max_i x_i - min_i x_i.
inline double max_diff(std::span<const double> x) noexcept
{
    if (x.empty()) {
        return 0.0;
    }
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
}

} // namespace hkn
