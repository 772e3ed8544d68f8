#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hkn/core.hpp"
#include "hkn/noise.hpp"
#include "hkn/rng.hpp"

namespace hkn {

struct SimulationOptions {
    std::uint64_t horizon = 1;
    // Keep x(t) for t % downsample == 0 and for the final step; d_V is kept
    // for every step regardless.
    std::uint64_t downsample = 1;
    bool keep_states = true;
};

struct TrajectoryRecord {
    std::vector<double> d; // d_V(t) for t = 0..horizon
    std::vector<std::uint64_t> times;
    std::vector<std::vector<double>> states;
    std::vector<double> final_state;
};

struct NoObserver {
    void operator()(std::uint64_t, std::span<const double>) const noexcept {}
};

namespace detail {

inline void advance(const Population& pop, Variant variant, const NoiseModel& noise, const CounterRng& rng,
                    std::uint64_t t, std::span<const double> x, std::span<double> next, std::span<double> scratch)
{
    if (!is_comm(variant)) {
        tilde_x_into(x, pop, variant, next);
        sample_env_into(noise, rng, t, scratch);
        for (std::size_t i = 0; i < next.size(); ++i) {
            next[i] = project_unit(next[i] + scratch[i]);
        }
        return;
    }
    double shock = 0.0;
    const bool shared = common_shock(noise, rng, t, shock);
    auto draw = [&](std::size_t j, std::size_t i) {
        return shared ? shock : draw_one(noise, rng, t, edge_slot(j, i), Purpose::CommNoise);
    };
    comm_update_into(x, pop, variant, draw, next);
}

} // namespace detail

/// Advances x0 for options.horizon synchronous steps. The noise applied at step
/// t (mapping x(t) to x(t+1)) is keyed by (ctx, t), so runs are bit-identical
/// for a fixed context. observer(t, x(t)) is called for t = 0..horizon.
template <class Observer = NoObserver>
TrajectoryRecord simulate(const Population& pop, Variant variant, const NoiseModel& noise,
                          std::span<const double> x0, const SimulationOptions& options, RngContext ctx,
                          Observer&& observer = {})
{
    if (options.horizon < 1) {
        throw std::invalid_argument("horizon must be at least 1");
    }
    if (options.downsample < 1) {
        throw std::invalid_argument("downsample factor must be at least 1");
    }
    validate_state(x0, pop.size());
    require_variant_supported(pop, variant);
    noise.validate();

    const CounterRng rng(ctx);
    const std::size_t n = pop.size();
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> next(n);
    std::vector<double> scratch(n);

    TrajectoryRecord rec;
    rec.d.reserve(options.horizon + 1);
    auto record = [&](std::uint64_t t) {
        rec.d.push_back(max_diff(x));
        if (options.keep_states && (t % options.downsample == 0 || t == options.horizon)) {
            rec.times.push_back(t);
            rec.states.push_back(x);
        }
        observer(t, std::span<const double>(x));
    };

    record(0);
    for (std::uint64_t t = 0; t < options.horizon; ++t) {
        detail::advance(pop, variant, noise, rng, t, x, next, scratch);
        x.swap(next);
        record(t + 1);
    }
    rec.final_state = x;
    return rec;
}

/// The exact step simulate() takes at time t, via the public step functions.
inline std::vector<double> reference_step(const Population& pop, Variant variant, const NoiseModel& noise,
                                          std::span<const double> x, RngContext ctx, std::uint64_t t)
{
    if (is_comm(variant)) {
        const auto edges = communication_edges(x, pop);
        return step_comm(x, pop, variant, sample_comm(noise, pop.size(), edges, ctx, t), noise.eta);
    }
    return step_env(x, pop, variant, sample_env(noise, pop.size(), ctx, t), noise.eta);
}

} // namespace hkn
