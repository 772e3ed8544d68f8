#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "hkn/core.hpp"
#include "hkn/noise.hpp"
#include "hkn/reachability.hpp"
#include "hkn/rng.hpp"

namespace hkn {

/// Confidence thresholds. Uniform draws the interior agents from [lo, hi]
/// and pins agent 0 at lo and agent n-1 at hi, so r_min and r_max are exact.
struct ThresholdSpec {
    enum class Kind { Constant, Explicit, Uniform };
    Kind kind = Kind::Uniform;
    double value = 0.2;
    std::vector<double> values;
    double lo = 0.05;
    double hi = 0.45;

    bool operator==(const ThresholdSpec&) const = default;
};

struct BeliefSpec {
    enum class Kind { None, Constant, Explicit, Uniform };
    Kind kind = Kind::None;
    double value = 0.1;
    std::vector<double> values;
    double lo = 0.05;
    double hi = 0.95;

    bool operator==(const BeliefSpec&) const = default;
};

/// Initial opinions. Uniform states are drawn per replicate.
struct InitialSpec {
    enum class Kind { Constant, Explicit, Uniform };
    Kind kind = Kind::Constant;
    double value = 0.5;
    std::vector<double> values;

    bool operator==(const InitialSpec&) const = default;
};

struct OutputSpec {
    std::string dir = "out";
    bool trajectory = false;
    bool svg = false;
    std::uint64_t downsample = 0; // 0: 100 for horizons >= 1e5, else 1

    bool operator==(const OutputSpec&) const = default;
};

struct ExperimentConfig {
    std::string name = "run";
    std::size_t n = 20;
    ThresholdSpec r;
    BeliefSpec omega;
    Variant variant = Variant::EnvNoise;
    NoiseModel noise = NoiseModel::uniform(0.025);
    InitialSpec x0;
    std::uint64_t horizon = 1'000'000;
    std::size_t replicates = 1;
    std::uint64_t seed = 1;
    double alpha = 0.01;
    std::optional<std::uint64_t> burn_in; // default: half the run
    std::size_t threads = 0;              // 0: hardware concurrency
    OutputSpec output;

    bool operator==(const ExperimentConfig&) const = default;

    std::uint64_t effective_downsample() const
    {
        if (output.downsample > 0) {
            return output.downsample;
        }
        return horizon >= 100'000 ? 100 : 1;
    }
};

namespace detail {

inline const char* threshold_kind_name(ThresholdSpec::Kind k)
{
    switch (k) {
    case ThresholdSpec::Kind::Constant: return "constant";
    case ThresholdSpec::Kind::Explicit: return "explicit";
    case ThresholdSpec::Kind::Uniform: return "uniform";
    }
    return "?";
}

inline const char* belief_kind_name(BeliefSpec::Kind k)
{
    switch (k) {
    case BeliefSpec::Kind::None: return "none";
    case BeliefSpec::Kind::Constant: return "constant";
    case BeliefSpec::Kind::Explicit: return "explicit";
    case BeliefSpec::Kind::Uniform: return "uniform";
    }
    return "?";
}

inline const char* initial_kind_name(InitialSpec::Kind k)
{
    switch (k) {
    case InitialSpec::Kind::Constant: return "constant";
    case InitialSpec::Kind::Explicit: return "explicit";
    case InitialSpec::Kind::Uniform: return "uniform";
    }
    return "?";
}

template <class Kind, std::size_t N>
Kind parse_kind(const std::string& s, const Kind (&kinds)[N], const char* (*name)(Kind), const char* what)
{
    for (Kind k : kinds) {
        if (s == name(k)) {
            return k;
        }
    }
    throw std::invalid_argument(std::string("unknown ") + what + " kind: " + s);
}

template <class T>
T get_or(const YAML::Node& node, const char* key, T fallback)
{
    const YAML::Node v = node[key];
    return v ? v.as<T>() : fallback;
}

inline void check_keys(const YAML::Node& node, std::initializer_list<const char*> allowed, const char* where)
{
    if (!node.IsMap()) {
        throw std::invalid_argument(std::string(where) + " must be a mapping");
    }
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        bool ok = false;
        for (const char* a : allowed) {
            ok = ok || key == a;
        }
        if (!ok) {
            throw std::invalid_argument("unknown key '" + key + "' in " + where);
        }
    }
}

inline ThresholdSpec parse_thresholds(const YAML::Node& node)
{
    ThresholdSpec s;
    if (!node) {
        return s;
    }
    check_keys(node, {"kind", "value", "values", "lo", "hi"}, "population.r");
    constexpr ThresholdSpec::Kind kinds[] = {ThresholdSpec::Kind::Constant, ThresholdSpec::Kind::Explicit,
                                             ThresholdSpec::Kind::Uniform};
    s.kind = parse_kind(get_or<std::string>(node, "kind", "uniform"), kinds, threshold_kind_name, "threshold");
    s.value = get_or(node, "value", s.value);
    s.values = get_or(node, "values", s.values);
    s.lo = get_or(node, "lo", s.lo);
    s.hi = get_or(node, "hi", s.hi);
    return s;
}

inline BeliefSpec parse_beliefs(const YAML::Node& node)
{
    BeliefSpec s;
    if (!node) {
        return s;
    }
    check_keys(node, {"kind", "value", "values", "lo", "hi"}, "population.omega");
    constexpr BeliefSpec::Kind kinds[] = {BeliefSpec::Kind::None, BeliefSpec::Kind::Constant,
                                          BeliefSpec::Kind::Explicit, BeliefSpec::Kind::Uniform};
    s.kind = parse_kind(get_or<std::string>(node, "kind", "none"), kinds, belief_kind_name, "belief factor");
    s.value = get_or(node, "value", s.value);
    s.values = get_or(node, "values", s.values);
    s.lo = get_or(node, "lo", s.lo);
    s.hi = get_or(node, "hi", s.hi);
    return s;
}

inline InitialSpec parse_initial(const YAML::Node& node)
{
    InitialSpec s;
    if (!node) {
        return s;
    }
    check_keys(node, {"kind", "value", "values"}, "x0");
    constexpr InitialSpec::Kind kinds[] = {InitialSpec::Kind::Constant, InitialSpec::Kind::Explicit,
                                           InitialSpec::Kind::Uniform};
    s.kind = parse_kind(get_or<std::string>(node, "kind", "constant"), kinds, initial_kind_name, "initial state");
    s.value = get_or(node, "value", s.value);
    s.values = get_or(node, "values", s.values);
    return s;
}

inline NoiseModel parse_noise(const YAML::Node& node)
{
    if (!node) {
        throw std::invalid_argument("config needs a noise section");
    }
    check_keys(node, {"kind", "eta", "sigma", "beta"}, "noise");
    NoiseModel m;
    m.kind = parse_noise_kind(get_or<std::string>(node, "kind", "uniform"));
    if (!node["eta"]) {
        throw std::invalid_argument("noise.eta is required");
    }
    m.eta = node["eta"].as<double>();
    m.sigma = get_or(node, "sigma", 0.0);
    m.beta = get_or(node, "beta", 0.0);
    m.validate();
    return m;
}

inline std::uint64_t fnv1a(const std::string& s) noexcept
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline void emit_seq(YAML::Emitter& out, const std::vector<double>& v)
{
    out << YAML::Flow << YAML::BeginSeq;
    for (double d : v) {
        out << d;
    }
    out << YAML::EndSeq;
}

} // namespace detail

inline void validate(const ExperimentConfig& c)
{
    if (c.n < 3) {
        throw std::invalid_argument("population needs at least 3 agents");
    }
    if (c.horizon < 1) {
        throw std::invalid_argument("horizon must be at least 1");
    }
    if (c.replicates < 1) {
        throw std::invalid_argument("replicates must be at least 1");
    }
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1)");
    }
    if (c.burn_in && *c.burn_in > c.horizon) {
        throw std::invalid_argument("burn-in exceeds horizon");
    }
    c.noise.validate();
    if (c.r.kind == ThresholdSpec::Kind::Explicit && c.r.values.size() != c.n) {
        throw std::invalid_argument("explicit thresholds do not match n");
    }
    if (c.r.kind == ThresholdSpec::Kind::Uniform && !(c.r.lo > 0.0 && c.r.lo <= c.r.hi && c.r.hi <= 1.0)) {
        throw std::invalid_argument("uniform thresholds need 0 < lo <= hi <= 1");
    }
    if (c.omega.kind == BeliefSpec::Kind::Explicit && c.omega.values.size() != c.n) {
        throw std::invalid_argument("explicit belief factors do not match n");
    }
    if (c.omega.kind == BeliefSpec::Kind::Uniform && !(c.omega.lo > 0.0 && c.omega.lo <= c.omega.hi && c.omega.hi < 1.0)) {
        throw std::invalid_argument("uniform belief factors need 0 < lo <= hi < 1");
    }
    if (c.x0.kind == InitialSpec::Kind::Explicit && c.x0.values.size() != c.n) {
        throw std::invalid_argument("explicit initial state does not match n");
    }
    if (c.x0.kind == InitialSpec::Kind::Constant && !(c.x0.value >= 0.0 && c.x0.value <= 1.0)) {
        throw std::invalid_argument("constant initial opinion outside [0,1]");
    }
}

/// Population drawn from the master seed; identical for every replicate.
inline Population build_population(const ExperimentConfig& c)
{
    const CounterRng rng(RngContext{c.seed, 0});
    std::vector<double> r(c.n);
    switch (c.r.kind) {
    case ThresholdSpec::Kind::Constant: r.assign(c.n, c.r.value); break;
    case ThresholdSpec::Kind::Explicit: r = c.r.values; break;
    case ThresholdSpec::Kind::Uniform:
        for (std::size_t i = 0; i < c.n; ++i) {
            r[i] = c.r.lo + (c.r.hi - c.r.lo) * rng.uniform(0, static_cast<std::uint32_t>(i), Purpose::Population);
        }
        r.front() = c.r.lo;
        r.back() = c.r.hi;
        break;
    }
    std::vector<double> w;
    switch (c.omega.kind) {
    case BeliefSpec::Kind::None: break;
    case BeliefSpec::Kind::Constant: w.assign(c.n, c.omega.value); break;
    case BeliefSpec::Kind::Explicit: w = c.omega.values; break;
    case BeliefSpec::Kind::Uniform:
        w.resize(c.n);
        for (std::size_t i = 0; i < c.n; ++i) {
            w[i] = c.omega.lo +
                   (c.omega.hi - c.omega.lo) * rng.uniform(1, static_cast<std::uint32_t>(i), Purpose::Population);
        }
        break;
    }
    return Population(std::move(r), std::move(w));
}

inline std::vector<double> build_initial_state(const ExperimentConfig& c, std::size_t replicate)
{
    switch (c.x0.kind) {
    case InitialSpec::Kind::Constant: return std::vector<double>(c.n, c.x0.value);
    case InitialSpec::Kind::Explicit: return c.x0.values;
    case InitialSpec::Kind::Uniform: {
        const CounterRng rng(RngContext{c.seed, replicate});
        std::vector<double> x(c.n);
        for (std::size_t i = 0; i < c.n; ++i) {
            x[i] = rng.uniform(0, static_cast<std::uint32_t>(i), Purpose::InitialState);
        }
        return x;
    }
    }
    return {};
}

inline ExperimentConfig parse_config(const YAML::Node& root)
{
    detail::check_keys(root,
                       {"name", "variant", "population", "noise", "x0", "horizon", "replicates", "seed", "alpha",
                        "burn_in", "threads", "output"},
                       "config");
    ExperimentConfig c;
    c.name = detail::get_or<std::string>(root, "name", c.name);
    c.variant = parse_variant(detail::get_or<std::string>(root, "variant", "EnvNoise"));
    const YAML::Node pop = root["population"];
    if (!pop) {
        throw std::invalid_argument("config needs a population section");
    }
    detail::check_keys(pop, {"n", "r", "omega"}, "population");
    c.n = detail::get_or<std::size_t>(pop, "n", c.n);
    c.r = detail::parse_thresholds(pop["r"]);
    c.omega = detail::parse_beliefs(pop["omega"]);
    c.noise = detail::parse_noise(root["noise"]);
    c.x0 = detail::parse_initial(root["x0"]);
    c.horizon = detail::get_or<std::uint64_t>(root, "horizon", c.horizon);
    c.replicates = detail::get_or<std::size_t>(root, "replicates", c.replicates);
    c.seed = detail::get_or<std::uint64_t>(root, "seed", c.seed);
    c.alpha = detail::get_or(root, "alpha", c.alpha);
    if (root["burn_in"]) {
        c.burn_in = root["burn_in"].as<std::uint64_t>();
    }
    c.threads = detail::get_or<std::size_t>(root, "threads", c.threads);
    if (const YAML::Node out = root["output"]) {
        detail::check_keys(out, {"dir", "trajectory", "svg", "downsample"}, "output");
        c.output.dir = detail::get_or(out, "dir", c.output.dir);
        c.output.trajectory = detail::get_or(out, "trajectory", c.output.trajectory);
        c.output.svg = detail::get_or(out, "svg", c.output.svg);
        c.output.downsample = detail::get_or<std::uint64_t>(out, "downsample", c.output.downsample);
    }
    validate(c);
    return c;
}

/// Reads a config file; HKN_SEED in the environment replaces the master seed.
inline ExperimentConfig load_config(const std::string& path)
{
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::Exception& e) {
        throw std::runtime_error("cannot read config " + path + ": " + e.what());
    }
    ExperimentConfig c = parse_config(root);
    if (const char* s = std::getenv("HKN_SEED")) {
        c.seed = std::stoull(s);
    }
    return c;
}

inline ExperimentConfig parse_config_string(const std::string& text)
{
    return parse_config(YAML::Load(text));
}

/// Canonical YAML: every field, fixed key order, shortest round-trip numbers.
inline std::string serialize(const ExperimentConfig& c)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << c.name;
    out << YAML::Key << "variant" << YAML::Value << std::string(to_string(c.variant));
    out << YAML::Key << "population" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n" << YAML::Value << c.n;
    out << YAML::Key << "r" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << detail::threshold_kind_name(c.r.kind);
    out << YAML::Key << "value" << YAML::Value << c.r.value;
    out << YAML::Key << "values" << YAML::Value;
    detail::emit_seq(out, c.r.values);
    out << YAML::Key << "lo" << YAML::Value << c.r.lo;
    out << YAML::Key << "hi" << YAML::Value << c.r.hi;
    out << YAML::EndMap;
    out << YAML::Key << "omega" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << detail::belief_kind_name(c.omega.kind);
    out << YAML::Key << "value" << YAML::Value << c.omega.value;
    out << YAML::Key << "values" << YAML::Value;
    detail::emit_seq(out, c.omega.values);
    out << YAML::Key << "lo" << YAML::Value << c.omega.lo;
    out << YAML::Key << "hi" << YAML::Value << c.omega.hi;
    out << YAML::EndMap;
    out << YAML::EndMap;
    out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << std::string(to_string(c.noise.kind));
    out << YAML::Key << "eta" << YAML::Value << c.noise.eta;
    out << YAML::Key << "sigma" << YAML::Value << c.noise.sigma;
    out << YAML::Key << "beta" << YAML::Value << c.noise.beta;
    out << YAML::EndMap;
    out << YAML::Key << "x0" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << detail::initial_kind_name(c.x0.kind);
    out << YAML::Key << "value" << YAML::Value << c.x0.value;
    out << YAML::Key << "values" << YAML::Value;
    detail::emit_seq(out, c.x0.values);
    out << YAML::EndMap;
    out << YAML::Key << "horizon" << YAML::Value << c.horizon;
    out << YAML::Key << "replicates" << YAML::Value << c.replicates;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "alpha" << YAML::Value << c.alpha;
    if (c.burn_in) {
        out << YAML::Key << "burn_in" << YAML::Value << *c.burn_in;
    }
    out << YAML::Key << "threads" << YAML::Value << c.threads;
    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dir" << YAML::Value << c.output.dir;
    out << YAML::Key << "trajectory" << YAML::Value << c.output.trajectory;
    out << YAML::Key << "svg" << YAML::Value << c.output.svg;
    out << YAML::Key << "downsample" << YAML::Value << c.output.downsample;
    out << YAML::EndMap;
    out << YAML::EndMap;
    return out.c_str();
}

/// Hash of the fields that affect results (output paths and thread count excluded).
inline std::uint64_t config_hash(const ExperimentConfig& c)
{
    ExperimentConfig k = c;
    k.output = OutputSpec{};
    k.threads = 0;
    return detail::fnv1a(serialize(k));
}

inline std::string hash_hex(std::uint64_t h)
{
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return s;
}

// ---- reach tasks ----------------------------------------------------------------

struct ReachConfig {
    std::string name = "reach";
    ExperimentConfig base; // population, variant, noise.eta, seed
    LawSpec law;
    std::size_t random_initial = 20;
    std::vector<std::vector<double>> initial_states;
    std::size_t random_adversaries = 100;
    std::optional<std::size_t> horizon;
    std::string output_dir = "out";
    bool trace = false;
};

inline ReachConfig parse_reach_config(const YAML::Node& root)
{
    detail::check_keys(root,
                       {"name", "variant", "population", "eta", "seed", "law", "initial", "adversaries", "horizon",
                        "output"},
                       "reach config");
    ReachConfig rc;
    rc.name = detail::get_or<std::string>(root, "name", rc.name);
    YAML::Node shim;
    shim["variant"] = detail::get_or<std::string>(root, "variant", "EnvNoise");
    shim["population"] = root["population"];
    if (!root["eta"]) {
        throw std::invalid_argument("reach config needs eta");
    }
    shim["noise"]["eta"] = root["eta"].as<double>();
    shim["seed"] = detail::get_or<std::uint64_t>(root, "seed", 1);
    shim["horizon"] = 1;
    rc.base = parse_config(shim);

    const YAML::Node law = root["law"];
    if (!law) {
        throw std::invalid_argument("reach config needs a law section");
    }
    detail::check_keys(law, {"kind", "z", "alpha", "epsilon", "K", "M"}, "law");
    rc.law.kind = parse_law_kind(detail::get_or<std::string>(law, "kind", "drive_to_ball"));
    rc.law.z = detail::get_or(law, "z", rc.law.z);
    rc.law.alpha = detail::get_or(law, "alpha", rc.law.alpha);
    rc.law.epsilon = detail::get_or(law, "epsilon", rc.law.epsilon);
    if (law["K"]) {
        rc.law.K = law["K"].as<double>();
    }
    if (law["M"]) {
        rc.law.M = law["M"].as<double>();
    }
    if (const YAML::Node init = root["initial"]) {
        detail::check_keys(init, {"random", "states"}, "initial");
        rc.random_initial = detail::get_or<std::size_t>(init, "random", rc.random_initial);
        rc.initial_states = detail::get_or(init, "states", rc.initial_states);
    }
    if (const YAML::Node adv = root["adversaries"]) {
        detail::check_keys(adv, {"random"}, "adversaries");
        rc.random_adversaries = detail::get_or<std::size_t>(adv, "random", rc.random_adversaries);
    }
    if (root["horizon"]) {
        rc.horizon = root["horizon"].as<std::size_t>();
    }
    if (const YAML::Node out = root["output"]) {
        detail::check_keys(out, {"dir", "trace"}, "output");
        rc.output_dir = detail::get_or(out, "dir", rc.output_dir);
        rc.trace = detail::get_or(out, "trace", rc.trace);
    }
    if (rc.random_initial == 0 && rc.initial_states.empty()) {
        throw std::invalid_argument("reach config needs at least one initial state");
    }
    return rc;
}

inline ReachConfig load_reach_config(const std::string& path)
{
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::Exception& e) {
        throw std::runtime_error("cannot read reach config " + path + ": " + e.what());
    }
    ReachConfig rc = parse_reach_config(root);
    if (const char* s = std::getenv("HKN_SEED")) {
        rc.base.seed = std::stoull(s);
    }
    return rc;
}

inline ReachTask make_reach_task(const ReachConfig& rc)
{
    ReachTask task{build_population(rc.base), rc.base.variant, rc.base.noise.eta, rc.law, {}, {}, std::nullopt, false};
    task.initial_states = random_initial_states(rc.base.n, rc.random_initial, rc.base.seed);
    for (const auto& x : rc.initial_states) {
        validate_state(x, rc.base.n);
        task.initial_states.push_back(x);
    }
    task.adversaries = standard_adversaries(rc.random_adversaries, rc.base.seed);
    task.horizon = rc.horizon;
    task.keep_traces = rc.trace;
    return task;
}

} // namespace hkn
