#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hkn/core.hpp"
#include "hkn/rng.hpp"

namespace hkn {

enum class NoiseKind { UniformIID, TruncatedGaussian, CommonShockMixture };

inline std::string_view to_string(NoiseKind k) noexcept
{
    switch (k) {
    case NoiseKind::UniformIID: return "uniform";
    case NoiseKind::TruncatedGaussian: return "truncated_gaussian";
    case NoiseKind::CommonShockMixture: return "common_shock";
    }
    return "?";
}

inline NoiseKind parse_noise_kind(std::string_view s)
{
    for (NoiseKind k : {NoiseKind::UniformIID, NoiseKind::TruncatedGaussian, NoiseKind::CommonShockMixture}) {
        if (s == to_string(k)) {
            return k;
        }
    }
    throw std::invalid_argument("unknown noise kind: " + std::string(s));
}

/// A bounded noise family on [-eta, eta].
///
/// UniformIID: independent uniforms.
/// TruncatedGaussian: independent N(0, sigma^2) conditioned on [-eta, eta].
/// CommonShockMixture: each step, with probability beta every coordinate takes
/// one shared uniform draw Z; otherwise coordinates are independent uniforms.
/// The absolutely continuous part keeps a joint density of at least
/// (1-beta) / (2 eta)^n, and each coordinate is marginally uniform.
struct NoiseModel {
    double eta = 0.1;
    NoiseKind kind = NoiseKind::UniformIID;
    double sigma = 0.0; // TruncatedGaussian only
    double beta = 0.0;  // CommonShockMixture only

    static NoiseModel uniform(double eta) { return validated({eta, NoiseKind::UniformIID, 0.0, 0.0}); }
    static NoiseModel truncated_gaussian(double eta, double sigma)
    {
        return validated({eta, NoiseKind::TruncatedGaussian, sigma, 0.0});
    }
    static NoiseModel common_shock(double eta, double beta)
    {
        return validated({eta, NoiseKind::CommonShockMixture, 0.0, beta});
    }

    void validate() const
    {
        if (!(eta > 0.0 && std::isfinite(eta))) {
            throw std::invalid_argument("noise amplitude must be positive and finite");
        }
        if (kind == NoiseKind::TruncatedGaussian && !(sigma > 0.0 && std::isfinite(sigma))) {
            throw std::invalid_argument("truncated gaussian needs sigma > 0");
        }
        if (kind == NoiseKind::CommonShockMixture && !(beta >= 0.0 && beta < 1.0)) {
            throw std::invalid_argument("common shock weight must lie in [0, 1)");
        }
    }

    bool operator==(const NoiseModel&) const = default;

private:
    static NoiseModel validated(NoiseModel m)
    {
        m.validate();
        return m;
    }
};

inline double standard_normal_pdf(double x) noexcept
{
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double standard_normal_cdf(double x) noexcept
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Per-coordinate density lower bound on [-eta, eta].
///
/// For the common-shock mixture this is the bound carried by the independent
/// component, (1 - beta) / (2 eta); the shared-shock component only adds mass.
inline double density_lower_bound(const NoiseModel& m)
{
    m.validate();
    switch (m.kind) {
    case NoiseKind::UniformIID: return 1.0 / (2.0 * m.eta);
    case NoiseKind::TruncatedGaussian: {
        const double k = m.eta / m.sigma;
        return standard_normal_pdf(k) / (m.sigma * (standard_normal_cdf(k) - standard_normal_cdf(-k)));
    }
    case NoiseKind::CommonShockMixture: return (1.0 - m.beta) / (2.0 * m.eta);
    }
    throw std::invalid_argument("unsupported noise kind");
}

namespace detail {

constexpr std::uint32_t kSharedSlot = 0xFFFFFFFFu;
constexpr std::uint32_t kMaxRejections = 1u << 20;

inline double scaled_uniform(double eta, double u) noexcept
{
    return eta * (2.0 * u - 1.0);
}

inline double draw_one(const NoiseModel& m, const CounterRng& rng, std::uint64_t step, std::uint32_t slot,
                       Purpose purpose)
{
    if (m.kind != NoiseKind::TruncatedGaussian) {
        return scaled_uniform(m.eta, rng.uniform(step, slot, purpose));
    }
    for (std::uint32_t attempt = 0; attempt < kMaxRejections; ++attempt) {
        const auto [u1, u2] = rng.uniform_pair(step, slot, purpose, attempt);
        const double z = std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
        const double v = m.sigma * z;
        if (std::abs(v) <= m.eta) {
            return v;
        }
    }
    throw std::runtime_error("truncated gaussian rejection sampler did not accept");
}

/// Shared shock for this step, if the mixture coin selects it.
inline bool common_shock(const NoiseModel& m, const CounterRng& rng, std::uint64_t step, double& shock)
{
    if (m.kind != NoiseKind::CommonShockMixture || m.beta == 0.0) {
        return false;
    }
    const auto [coin, u] = rng.uniform_pair(step, kSharedSlot, Purpose::CommonShock);
    if (coin < m.beta) {
        shock = scaled_uniform(m.eta, u);
        return true;
    }
    return false;
}

inline void sample_env_into(const NoiseModel& m, const CounterRng& rng, std::uint64_t step,
                            std::span<double> out)
{
    double shock = 0.0;
    if (common_shock(m, rng, step, shock)) {
        for (double& v : out) {
            v = shock;
        }
        return;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = draw_one(m, rng, step, static_cast<std::uint32_t>(i), Purpose::EnvNoise);
    }
}

} // namespace detail

/// Environment noise for every agent at one step; a pure function of
/// (model, context, step).
inline std::vector<double> sample_env(const NoiseModel& m, std::size_t n, RngContext ctx, std::uint64_t step)
{
    m.validate();
    std::vector<double> out(n);
    detail::sample_env_into(m, CounterRng(ctx), step, out);
    return out;
}

/// Communication noise for the given edges. Each edge's value depends only on
/// (context, step, edge), never on enumeration order.
inline EdgeField sample_comm(const NoiseModel& m, std::size_t n, std::span<const Edge> edges, RngContext ctx,
                             std::uint64_t step)
{
    m.validate();
    const CounterRng rng(ctx);
    EdgeField out(n);
    double shock = 0.0;
    const bool shared = detail::common_shock(m, rng, step, shock);
    for (const Edge& e : edges) {
        if (e.from == e.to) {
            throw std::invalid_argument("self-pair in communication edge set");
        }
        const double v = shared ? shock : detail::draw_one(m, rng, step, edge_slot(e.from, e.to), Purpose::CommNoise);
        out.set(e.from, e.to, v);
    }
    return out;
}

} // namespace hkn
