#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "hkn/config.hpp"
#include "hkn/core.hpp"
#include "hkn/metrics.hpp"
#include "hkn/noise.hpp"
#include "hkn/reachability.hpp"
#include "hkn/simulate.hpp"

namespace hkn {

/// One summary row per replicate. Empty optionals are written as NA.
struct RunRow {
    std::string config_hash;
    Variant variant = Variant::EnvNoise;
    std::size_t n = 0;
    double eta = 0.0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> dbar_hat;
    std::optional<double> dunder_hat;
    std::optional<std::size_t> tau_hit;
    std::optional<bool> quasi_sync;
    std::optional<std::size_t> n_taus;
    std::optional<double> geo_rate_hat;
    std::optional<std::size_t> n_censored;
    std::optional<double> c_alpha1;
    std::optional<double> c_eta2;
    std::optional<double> c_alpha3;
    std::optional<double> theorem6_bound;
    std::uint64_t steps = 0;
    double wall_ms = 0.0;
    std::string error; // not part of the CSV; reported separately
};

inline constexpr const char* kSummaryColumns[] = {
    "config_hash", "variant",    "n",        "eta",      "alpha",    "seed",           "dbar_hat",
    "dunder_hat",  "tau_hit",    "quasi_sync", "n_taus", "geo_rate_hat", "n_censored", "c_alpha1",
    "c_eta2",      "c_alpha3",   "theorem6_bound", "steps", "wall_ms"};

namespace detail {

inline std::string fmt_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
std::string fmt_opt(const std::optional<T>& v)
{
    if (!v) {
        return "NA";
    }
    if constexpr (std::is_same_v<T, double>) {
        return fmt_double(*v);
    } else if constexpr (std::is_same_v<T, bool>) {
        return *v ? "true" : "false";
    } else {
        return std::to_string(*v);
    }
}

template <class F>
auto try_constant(F&& f) -> std::optional<double>
{
    try {
        return f();
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace detail

inline std::string csv_header()
{
    std::string s;
    for (const char* c : kSummaryColumns) {
        if (!s.empty()) {
            s += ',';
        }
        s += c;
    }
    return s;
}

/// CSV line; with include_wall = false the wall-clock field is written as NA
/// so reruns compare byte for byte.
inline std::string csv_line(const RunRow& r, bool include_wall = true)
{
    std::ostringstream o;
    o << r.config_hash << ',' << to_string(r.variant) << ',' << r.n << ',' << detail::fmt_double(r.eta) << ','
      << detail::fmt_double(r.alpha) << ',' << r.seed << ',' << detail::fmt_opt(r.dbar_hat) << ','
      << detail::fmt_opt(r.dunder_hat) << ',' << detail::fmt_opt(r.tau_hit) << ',' << detail::fmt_opt(r.quasi_sync)
      << ',' << detail::fmt_opt(r.n_taus) << ',' << detail::fmt_opt(r.geo_rate_hat) << ','
      << detail::fmt_opt(r.n_censored) << ',' << detail::fmt_opt(r.c_alpha1) << ',' << detail::fmt_opt(r.c_eta2)
      << ',' << detail::fmt_opt(r.c_alpha3) << ',' << detail::fmt_opt(r.theorem6_bound) << ',' << r.steps << ','
      << (include_wall ? detail::fmt_double(r.wall_ms) : std::string("NA"));
    return o.str();
}

inline void write_summary_csv(std::ostream& out, const std::vector<RunRow>& rows, bool include_wall = true)
{
    out << csv_header() << '\n';
    for (const RunRow& r : rows) {
        out << csv_line(r, include_wall) << '\n';
    }
}

/// Constants reported alongside each run, NA where the formula does not apply.
inline void fill_constants(RunRow& row, const Population& pop, Variant variant, double eta, double alpha)
{
    row.c_alpha1 = detail::try_constant([&] { return c_alpha1(eta, alpha, pop); });
    if (pop.has_belief_factors()) {
        row.c_eta2 = detail::try_constant([&] { return c_eta2(eta, pop); });
        row.c_alpha3 = detail::try_constant([&] { return c_alpha3(eta, alpha, pop); });
    }
    const double n = static_cast<double>(pop.size());
    if (variant == Variant::CommNoise && pop.homogeneous() && pop.r_min() >= 1.0 / (n - 1.0) && pop.r_min() < 1.0) {
        row.theorem6_bound = eta <= comm_homogeneous_threshold(pop) ? comm_homogeneous_bound(eta, pop.size()) : 1.0;
    }
}

/// Statistics of one recorded d_V series.
inline void fill_statistics(RunRow& row, std::span<const double> d, const Population& pop, Variant variant,
                            double eta, double alpha, std::optional<std::uint64_t> burn_in)
{
    const LimitEstimate est = burn_in ? estimate_limits(d, *burn_in) : estimate_limits(d);
    row.dbar_hat = est.dbar_hat;
    row.dunder_hat = est.dunder_hat;
    const QuasiSyncVerdict qs = quasi_sync_verdict(est, d, pop, eta);
    row.quasi_sync = qs.reached;
    row.tau_hit = qs.tau;
    const std::optional<double> c = switching_level(variant, eta, alpha, pop);
    if (c && alpha < *c) {
        const StoppingTimes st = stopping_times(d, alpha, *c);
        row.n_taus = st.n_gaps();
        row.n_censored = st.censored ? 1 : 0;
        if (st.n_gaps() >= 2) {
            const TailEstimate te = tail_estimate(st);
            if (std::isfinite(te.geo_rate_hat)) {
                row.geo_rate_hat = te.geo_rate_hat;
            }
        }
    }
}

/// Recorded trajectory of one replicate, handed to writers.
struct ReplicateOutput {
    RunRow row;
    TrajectoryRecord record;
};

inline ReplicateOutput run_replicate(const ExperimentConfig& c, const Population& pop, std::size_t replicate,
                                     bool keep_states)
{
    const auto start = std::chrono::steady_clock::now();
    ReplicateOutput out;
    RunRow& row = out.row;
    row.config_hash = hash_hex(config_hash(c));
    row.variant = c.variant;
    row.n = c.n;
    row.eta = c.noise.eta;
    row.alpha = c.alpha;
    row.seed = c.seed + replicate;
    row.steps = c.horizon;
    try {
        fill_constants(row, pop, c.variant, c.noise.eta, c.alpha);
        const std::vector<double> x0 = build_initial_state(c, replicate);
        SimulationOptions opt{c.horizon, c.effective_downsample(), keep_states};
        out.record = simulate(pop, c.variant, c.noise, x0, opt, RngContext{c.seed, replicate});
        fill_statistics(row, out.record.d, pop, c.variant, c.noise.eta, c.alpha, c.burn_in);
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    row.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
}

inline std::size_t worker_count(std::size_t requested, std::size_t jobs)
{
    std::size_t w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(w, jobs));
}

/// Runs job(k) for k in [0, jobs) on a small thread pool.
inline void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& job)
{
    const std::size_t w = worker_count(threads, jobs);
    if (w == 1) {
        for (std::size_t k = 0; k < jobs; ++k) {
            job(k);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < jobs; k = next++) {
                job(k);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

// ---- writers ------------------------------------------------------------------

inline void write_jsonl(std::ostream& out, const TrajectoryRecord& rec)
{
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
        const std::uint64_t t = rec.times[k];
        out << "{\"t\":" << t << ",\"x\":[";
        for (std::size_t i = 0; i < rec.states[k].size(); ++i) {
            out << (i ? "," : "") << detail::fmt_double(rec.states[k][i]);
        }
        out << "],\"d\":" << detail::fmt_double(rec.d.at(t)) << "}\n";
    }
}

struct SvgSeries {
    std::vector<double> t;
    std::vector<double> y;
    std::string color = "#1f4e9a";
};

struct SvgGuide {
    double y = 0.0;
    std::string label;
    std::string color = "#b03030";
};

/// 800x400 plot with y in [0, 1]; each series is thinned to at most 4000
/// points by striding.
inline void write_svg(std::ostream& out, const std::vector<SvgSeries>& series, const std::vector<SvgGuide>& guides,
                      const std::string& title)
{
    constexpr double W = 800, H = 400, L = 60, R = 20, T = 30, B = 40;
    double tmax = 1.0;
    for (const auto& s : series) {
        if (!s.t.empty()) {
            tmax = std::max(tmax, s.t.back());
        }
    }
    auto px = [&](double t) { return L + (W - L - R) * t / tmax; };
    auto py = [&](double y) { return T + (H - T - B) * (1.0 - std::clamp(y, 0.0, 1.0)); };
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"400\" viewBox=\"0 0 800 400\">\n";
    out << "<rect width=\"800\" height=\"400\" fill=\"white\"/>\n";
    out << "<text x=\"" << L << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << W - R << "\" y2=\"" << py(0)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << L << "\" y2=\"" << py(1)
        << "\" stroke=\"black\"/>\n";
    for (double y : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        out << "<text x=\"" << L - 8 << "\" y=\"" << num(py(y) + 4) << "\" font-family=\"sans-serif\" font-size=\"11\" "
            << "text-anchor=\"end\">" << num(y) << "</text>\n";
    }
    out << "<text x=\"" << W - R << "\" y=\"" << H - 10 << "\" font-family=\"sans-serif\" font-size=\"11\" "
        << "text-anchor=\"end\">t = " << static_cast<std::uint64_t>(tmax) << "</text>\n";
    for (const auto& g : guides) {
        out << "<line x1=\"" << L << "\" y1=\"" << num(py(g.y)) << "\" x2=\"" << W - R << "\" y2=\"" << num(py(g.y))
            << "\" stroke=\"" << g.color << "\" stroke-dasharray=\"6,4\"/>\n";
        out << "<text x=\"" << W - R - 4 << "\" y=\"" << num(py(g.y) - 4) << "\" font-family=\"sans-serif\" "
            << "font-size=\"11\" text-anchor=\"end\" fill=\"" << g.color << "\">" << g.label << "</text>\n";
    }
    for (const auto& s : series) {
        const std::size_t stride = std::max<std::size_t>(1, (s.t.size() + 3999) / 4000);
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1\" points=\"";
        for (std::size_t k = 0; k < s.t.size(); k += stride) {
            out << num(px(s.t[k])) << ',' << num(py(s.y[k])) << ' ';
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
}

inline SvgSeries d_series(const TrajectoryRecord& rec)
{
    SvgSeries s;
    s.t.resize(rec.d.size());
    for (std::size_t t = 0; t < rec.d.size(); ++t) {
        s.t[t] = static_cast<double>(t);
    }
    s.y = rec.d;
    return s;
}

/// One series per agent from the recorded states.
inline std::vector<SvgSeries> opinion_series(const TrajectoryRecord& rec)
{
    static const char* palette[] = {"#1f4e9a", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#16a085"};
    std::vector<SvgSeries> out;
    if (rec.states.empty()) {
        return out;
    }
    const std::size_t n = rec.states.front().size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].color = palette[i % 6];
        for (std::size_t k = 0; k < rec.times.size(); ++k) {
            out[i].t.push_back(static_cast<double>(rec.times[k]));
            out[i].y.push_back(rec.states[k][i]);
        }
    }
    return out;
}

// ---- run / sweep ----------------------------------------------------------------

struct RunResult {
    std::vector<RunRow> rows;
    std::vector<std::string> files;
};

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p)
{
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream f(p);
    if (!f) {
        throw std::runtime_error("cannot write " + p.string());
    }
    return f;
}

inline void write_errors(const std::filesystem::path& p, const std::vector<RunRow>& rows, RunResult& res)
{
    std::vector<const RunRow*> bad;
    for (const RunRow& r : rows) {
        if (!r.error.empty()) {
            bad.push_back(&r);
        }
    }
    if (bad.empty()) {
        return;
    }
    auto f = open_out(p);
    for (const RunRow* r : bad) {
        f << to_string(r->variant) << ",eta=" << fmt_double(r->eta) << ",seed=" << r->seed << ": " << r->error << '\n';
    }
    res.files.push_back(p.string());
}

inline std::vector<SvgGuide> d_guides(double eta, const Population& pop)
{
    return {{std::min(2.0 * eta, 1.0), "2 eta", "#b03030"}, {pop.r_min(), "r_min", "#2c7a2c"}};
}

} // namespace detail

/// Runs every replicate of c. Writes <dir>/<name>.csv, and per replicate the
/// optional <name>.rep<k>.jsonl and <name>.rep<k>.svg.
inline RunResult run_experiment(const ExperimentConfig& c, bool write_files = true)
{
    validate(c);
    const Population pop = build_population(c);
    require_variant_supported(pop, c.variant);
    RunResult res;
    res.rows.resize(c.replicates);
    const std::filesystem::path dir(c.output.dir);
    std::mutex io;
    parallel_for(c.replicates, c.threads, [&](std::size_t k) {
        ReplicateOutput out = run_replicate(c, pop, k, write_files && c.output.trajectory);
        if (write_files && out.row.error.empty() && (c.output.trajectory || c.output.svg)) {
            const std::string stem = c.name + ".rep" + std::to_string(k);
            std::vector<std::string> made;
            if (c.output.trajectory) {
                auto f = detail::open_out(dir / (stem + ".jsonl"));
                write_jsonl(f, out.record);
                made.push_back((dir / (stem + ".jsonl")).string());
            }
            if (c.output.svg) {
                auto f = detail::open_out(dir / (stem + ".svg"));
                write_svg(f, {d_series(out.record)}, detail::d_guides(c.noise.eta, pop),
                          c.name + " d_V(t), " + std::string(to_string(c.variant)) + ", eta=" +
                              detail::fmt_double(c.noise.eta));
                made.push_back((dir / (stem + ".svg")).string());
            }
            std::lock_guard<std::mutex> lock(io);
            res.files.insert(res.files.end(), made.begin(), made.end());
        }
        res.rows[k] = std::move(out.row);
    });
    if (write_files) {
        auto f = detail::open_out(dir / (c.name + ".csv"));
        write_summary_csv(f, res.rows);
        res.files.push_back((dir / (c.name + ".csv")).string());
        detail::write_errors(dir / (c.name + ".errors.txt"), res.rows, res);
    }
    return res;
}

struct SweepPoint {
    Variant variant = Variant::EnvNoise;
    double eta = 0.0;
    std::size_t replicates = 0;
    std::size_t failures = 0;
    std::optional<double> median_dbar_hat;
};

struct SweepResult {
    std::vector<RunRow> rows;
    std::vector<SweepPoint> points;
    std::vector<std::string> files;
};

inline std::optional<double> median(std::vector<double> v)
{
    if (v.empty()) {
        return std::nullopt;
    }
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline std::string aggregate_header() { return "config_hash,variant,eta,replicates,failures,median_dbar_hat"; }

/// Grid of eta values x variants, `seeds` replicates per point. Rows land in
/// <name>.sweep.csv; per-point medians of dbar_hat in <name>.sweep.agg.csv.
/// A failing row is kept with NA statistics and the sweep carries on.
inline SweepResult sweep(const ExperimentConfig& base, const std::vector<double>& etas,
                         const std::vector<Variant>& variants, std::size_t seeds, bool write_files = true)
{
    if (etas.empty() || variants.empty() || seeds == 0) {
        throw std::invalid_argument("sweep grid is empty");
    }
    validate(base);
    const Population pop = build_population(base);
    struct Job {
        ExperimentConfig cfg;
        std::size_t point;
        std::size_t replicate;
    };
    std::vector<Job> jobs;
    SweepResult res;
    for (Variant v : variants) {
        for (double eta : etas) {
            ExperimentConfig c = base;
            c.variant = v;
            c.noise.eta = eta;
            c.replicates = seeds;
            res.points.push_back({v, eta, seeds, 0, std::nullopt});
            for (std::size_t k = 0; k < seeds; ++k) {
                jobs.push_back({c, res.points.size() - 1, k});
            }
        }
    }
    res.rows.resize(jobs.size());
    parallel_for(jobs.size(), base.threads, [&](std::size_t j) {
        const Job& job = jobs[j];
        try {
            job.cfg.noise.validate();
            require_variant_supported(pop, job.cfg.variant);
            res.rows[j] = run_replicate(job.cfg, pop, job.replicate, false).row;
        } catch (const std::exception& e) {
            RunRow row;
            row.config_hash = hash_hex(config_hash(job.cfg));
            row.variant = job.cfg.variant;
            row.n = job.cfg.n;
            row.eta = job.cfg.noise.eta;
            row.alpha = job.cfg.alpha;
            row.seed = job.cfg.seed + job.replicate;
            row.error = e.what();
            res.rows[j] = row;
        }
    });
    std::vector<std::vector<double>> per_point(res.points.size());
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const RunRow& r = res.rows[j];
        if (!r.error.empty() || !r.dbar_hat) {
            ++res.points[jobs[j].point].failures;
        } else {
            per_point[jobs[j].point].push_back(*r.dbar_hat);
        }
    }
    for (std::size_t p = 0; p < res.points.size(); ++p) {
        res.points[p].median_dbar_hat = median(per_point[p]);
    }
    if (write_files) {
        const std::filesystem::path dir(base.output.dir);
        {
            auto f = detail::open_out(dir / (base.name + ".sweep.csv"));
            write_summary_csv(f, res.rows);
        }
        {
            auto f = detail::open_out(dir / (base.name + ".sweep.agg.csv"));
            f << aggregate_header() << '\n';
            for (std::size_t p = 0; p < res.points.size(); ++p) {
                const SweepPoint& pt = res.points[p];
                ExperimentConfig c = base;
                c.variant = pt.variant;
                c.noise.eta = pt.eta;
                c.replicates = seeds;
                f << hash_hex(config_hash(c)) << ',' << to_string(pt.variant) << ',' << detail::fmt_double(pt.eta)
                  << ',' << pt.replicates << ',' << pt.failures << ',' << detail::fmt_opt(pt.median_dbar_hat) << '\n';
            }
        }
        res.files.push_back((dir / (base.name + ".sweep.csv")).string());
        res.files.push_back((dir / (base.name + ".sweep.agg.csv")).string());
        RunResult tmp;
        detail::write_errors(dir / (base.name + ".sweep.errors.txt"), res.rows, tmp);
        res.files.insert(res.files.end(), tmp.files.begin(), tmp.files.end());
    }
    return res;
}

// ---- figures --------------------------------------------------------------------

inline const std::vector<std::string>& figure_ids()
{
    static const std::vector<std::string> ids{"1", "2", "3", "4", "5", "example1"};
    return ids;
}

/// The published simulation setups. example1 yields two configs
/// (heterogeneous, then homogeneous thresholds).
inline std::vector<ExperimentConfig> figure_configs(const std::string& id)
{
    ExperimentConfig base;
    base.n = 20;
    base.r = ThresholdSpec{ThresholdSpec::Kind::Uniform, 0.2, {}, 0.05, 0.45};
    base.x0 = InitialSpec{InitialSpec::Kind::Constant, 0.5, {}};
    base.horizon = 1'000'000;
    base.replicates = 1;
    base.seed = 1;
    base.alpha = 0.01;
    base.output.dir = "out/figures";
    base.output.svg = true;
    if (id == "1" || id == "2") {
        base.name = "fig" + id;
        base.noise = NoiseModel::uniform(id == "1" ? 0.025 : 0.1);
        return {base};
    }
    if (id == "3") {
        base.name = "fig3";
        base.n = 4;
        base.noise = NoiseModel::uniform(0.1);
        return {base};
    }
    if (id == "4" || id == "5") {
        base.name = "fig" + id;
        base.variant = Variant::EnvNoiseGlobal;
        base.omega = BeliefSpec{BeliefSpec::Kind::Constant, 0.1, {}, 0.05, 0.95};
        base.noise = NoiseModel::uniform(id == "4" ? 0.025 : 0.1);
        return {base};
    }
    if (id == "example1") {
        base.n = 4;
        base.variant = Variant::CommNoise;
        base.noise = NoiseModel::uniform(0.1);
        base.x0 = InitialSpec{InitialSpec::Kind::Explicit, 0.5, {0.0, 0.5, 0.5, 1.0}};
        base.horizon = 10'000;
        base.output.downsample = 1;
        base.output.trajectory = true;
        ExperimentConfig het = base, hom = base;
        het.name = "example1_heterogeneous";
        het.r = ThresholdSpec{ThresholdSpec::Kind::Explicit, 0.2, {1.0 / 3.0, 1.0, 1.0, 1.0 / 3.0}, 0.05, 0.45};
        hom.name = "example1_homogeneous";
        hom.r = ThresholdSpec{ThresholdSpec::Kind::Constant, 1.0 / 3.0, {}, 0.05, 0.45};
        return {het, hom};
    }
    throw std::invalid_argument("unknown figure id: " + id + " (expected 1-5 or example1)");
}

/// Runs a figure: summary CSV plus a d_V(t) plot, and for example1 an
/// opinion-trace plot and JSONL trajectory per threshold setting.
inline RunResult run_figure(const std::string& id, const std::string& out_dir, std::optional<std::uint64_t> horizon)
{
    RunResult all;
    for (ExperimentConfig c : figure_configs(id)) {
        c.output.dir = out_dir;
        if (horizon) {
            c.horizon = *horizon;
        }
        RunResult r = run_experiment(c);
        if (id == "example1") {
            const Population pop = build_population(c);
            SimulationOptions opt{c.horizon, c.effective_downsample(), true};
            const TrajectoryRecord rec =
                simulate(pop, c.variant, c.noise, build_initial_state(c, 0), opt, RngContext{c.seed, 0});
            const auto path = std::filesystem::path(out_dir) / (c.name + ".opinions.svg");
            auto f = detail::open_out(path);
            write_svg(f, opinion_series(rec), {}, c.name + " opinions x_i(t)");
            r.files.push_back(path.string());
        }
        all.rows.insert(all.rows.end(), r.rows.begin(), r.rows.end());
        all.files.insert(all.files.end(), r.files.begin(), r.files.end());
    }
    return all;
}

// ---- reach reports --------------------------------------------------------------

inline std::string reach_csv_header()
{
    return "task,law,variant,eta,initial_index,adversary,reached,hit_time,final_spread,max_budget_use,final_phase";
}

inline void write_reach_csv(std::ostream& out, const std::string& task, const ReachConfig& rc, const ReachReport& rep)
{
    out << reach_csv_header() << '\n';
    for (const ReachRun& run : rep.runs) {
        out << task << ',' << to_string(rc.law.kind) << ',' << to_string(rc.base.variant) << ','
            << detail::fmt_double(rc.base.noise.eta) << ',' << run.initial_index << ',' << run.adversary.id() << ','
            << (run.reached ? "true" : "false") << ',' << detail::fmt_opt(run.hit_time) << ','
            << detail::fmt_double(run.final_spread) << ',' << detail::fmt_double(run.max_budget_use) << ','
            << (run.phases.empty() ? std::string("none") : run.phases.back()) << '\n';
    }
}

/// One JSON object per step of every kept trace: {run, t, phase, x, d}.
inline void write_reach_traces(std::ostream& out, const ReachReport& rep)
{
    for (std::size_t k = 0; k < rep.runs.size(); ++k) {
        const ReachRun& run = rep.runs[k];
        for (std::size_t t = 0; t < run.trace.size(); ++t) {
            out << "{\"run\":" << k << ",\"adversary\":\"" << run.adversary.id() << "\",\"t\":" << t
                << ",\"phase\":\"" << (t < run.phases.size() ? run.phases[t] : std::string("end")) << "\",\"x\":[";
            for (std::size_t i = 0; i < run.trace[t].size(); ++i) {
                out << (i ? "," : "") << detail::fmt_double(run.trace[t][i]);
            }
            out << "],\"d\":" << detail::fmt_double(max_diff(run.trace[t])) << "}\n";
        }
    }
}

} // namespace hkn
