// Command-line front end: simulate, sweep, reach, figures, constants.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hkn/config.hpp"
#include "hkn/experiments.hpp"
#include "hkn/metrics.hpp"
#include "hkn/reachability.hpp"

using namespace hkn;

namespace {

std::string fmt(double v) { return detail::fmt_double(v); }

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "NA"; }

void print_rows(const std::vector<RunRow>& rows)
{
    for (const RunRow& r : rows) {
        std::cout << to_string(r.variant) << " eta=" << fmt(r.eta) << " seed=" << r.seed;
        if (!r.error.empty()) {
            std::cout << " error: " << r.error << '\n';
            continue;
        }
        std::cout << " dbar_hat=" << fmt(r.dbar_hat) << " dunder_hat=" << fmt(r.dunder_hat)
                  << " quasi_sync=" << (r.quasi_sync.value_or(false) ? "true" : "false")
                  << " tau_hit=" << detail::fmt_opt(r.tau_hit) << " n_taus=" << detail::fmt_opt(r.n_taus) << '\n';
    }
}

void print_files(const std::vector<std::string>& files)
{
    for (const auto& f : files) {
        std::cout << "wrote " << f << '\n';
    }
}

int count_errors(const std::vector<RunRow>& rows)
{
    int bad = 0;
    for (const RunRow& r : rows) {
        bad += r.error.empty() ? 0 : 1;
    }
    return bad;
}

std::vector<double> parse_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) {
            continue;
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) {
            throw std::invalid_argument("bad number in list: " + item);
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw std::invalid_argument("empty list");
    }
    return out;
}

void print_constants(const ExperimentConfig& c, double eta, double alpha)
{
    const Population pop = build_population(c);
    const ThresholdConstants tc = threshold_constants(eta, alpha, pop);
    std::cout << "n " << pop.size() << "\neta " << fmt(eta) << "\nalpha " << fmt(alpha) << "\nr_min " << fmt(tc.r_min)
              << "\nr_max " << fmt(tc.r_max) << "\ncritical_eta " << fmt(pop.r_min() / 2.0)
              << "\nsuper_critical_eta " << fmt(std::max(pop.r_min() / 2.0, pop.r_max() / pop.size()))
              << "\nc_alpha1 " << fmt(tc.c_alpha1) << "\nw_underline " << fmt(tc.w_underline_eta) << "\nc_eta2 "
              << fmt(tc.c_eta2) << "\nc_alpha3 " << fmt(tc.c_alpha3) << "\ncomm_homogeneous_threshold "
              << fmt(tc.comm_homogeneous_threshold) << "\ncomm_homogeneous_bound " << fmt(tc.comm_homogeneous_bound)
              << '\n';
    if (const auto p = predicted_upper_limit(c.variant, eta, pop)) {
        std::cout << "predicted_dbar " << fmt(p->value) << (p->exact ? " (exact)" : " (lower bound)") << '\n';
    } else {
        std::cout << "predicted_dbar NA\n";
    }
    if (tc.pairs) {
        const PairConstants& pc = *tc.pairs;
        std::cout << "comm_global_threshold " << fmt(comm_global_threshold(pop)) << "\nmax_a_ij "
                  << fmt(max_offdiag(pc.A)) << "\nmax_c_ij " << fmt(max_offdiag(pc.C)) << "\na_i";
        for (double a : pc.a) {
            std::cout << ' ' << fmt(a);
        }
        std::cout << "\nh_ij\n";
        for (std::size_t i = 0; i < pc.H.size(); ++i) {
            for (std::size_t j = 0; j < pc.H.size(); ++j) {
                std::cout << (j ? " " : "  ") << (i == j ? std::string("-") : fmt(pc.H[i][j]));
            }
            std::cout << '\n';
        }
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Noisy heterogeneous Hegselmann-Krause dynamics"};
    app.require_subcommand(1);

    std::string config_path, out_dir, eta_list, variant_list, figure_id;
    std::optional<std::uint64_t> horizon;
    std::optional<std::size_t> replicates;
    std::optional<double> eta_override, alpha_override;
    std::size_t seeds = 1;
    bool trajectory = false, svg = false;

    auto* sim = app.add_subcommand("simulate", "Run every replicate of a config");
    sim->add_option("config", config_path, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out_dir, "Output directory (overrides config)");
    sim->add_option("--horizon", horizon, "Steps per run (overrides config)");
    sim->add_option("--replicates", replicates, "Replicate count (overrides config)");
    sim->add_flag("--trajectory", trajectory, "Write per-step JSONL");
    sim->add_flag("--svg", svg, "Write the d_V(t) plot");

    auto* sw = app.add_subcommand("sweep", "Grid over noise amplitude (and variants)");
    sw->add_option("config", config_path, "Base experiment config (YAML)")->required()->check(CLI::ExistingFile);
    sw->add_option("--eta", eta_list, "Comma-separated noise amplitudes")->required();
    sw->add_option("--seeds", seeds, "Replicates per grid point")->required()->check(CLI::PositiveNumber);
    sw->add_option("--variants", variant_list, "Comma-separated variants (default: the config's)");
    sw->add_option("--out", out_dir, "Output directory (overrides config)");
    sw->add_option("--horizon", horizon, "Steps per run (overrides config)");

    auto* reach = app.add_subcommand("reach", "Certify a control law against adversaries");
    reach->add_option("config", config_path, "Reach task config (YAML)")->required()->check(CLI::ExistingFile);
    reach->add_option("--out", out_dir, "Output directory (overrides config)");

    auto* fig = app.add_subcommand("figures", "Reproduce a published simulation setup");
    fig->add_option("id", figure_id, "1, 2, 3, 4, 5 or example1")->required();
    fig->add_option("--out", out_dir, "Output directory")->default_val("out/figures");
    fig->add_option("--horizon", horizon, "Steps per run (default: the published horizon)");

    auto* cst = app.add_subcommand("constants", "Print the threshold constants for a config");
    cst->add_option("config", config_path, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
    cst->add_option("--eta", eta_override, "Noise amplitude (default: the config's)");
    cst->add_option("--alpha", alpha_override, "Lower switching level (default: the config's)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            ExperimentConfig c = load_config(config_path);
            if (!out_dir.empty()) {
                c.output.dir = out_dir;
            }
            if (horizon) {
                c.horizon = *horizon;
            }
            if (replicates) {
                c.replicates = *replicates;
            }
            c.output.trajectory = c.output.trajectory || trajectory;
            c.output.svg = c.output.svg || svg;
            validate(c);
            const RunResult res = run_experiment(c);
            print_rows(res.rows);
            print_files(res.files);
            return count_errors(res.rows) ? 1 : 0;
        }
        if (*sw) {
            ExperimentConfig c = load_config(config_path);
            if (!out_dir.empty()) {
                c.output.dir = out_dir;
            }
            if (horizon) {
                c.horizon = *horizon;
            }
            std::vector<Variant> variants{c.variant};
            if (!variant_list.empty()) {
                variants.clear();
                std::stringstream in(variant_list);
                std::string v;
                while (std::getline(in, v, ',')) {
                    variants.push_back(parse_variant(v));
                }
            }
            const SweepResult res = sweep(c, parse_list(eta_list), variants, seeds);
            for (const SweepPoint& p : res.points) {
                std::cout << to_string(p.variant) << " eta=" << fmt(p.eta) << " median_dbar_hat="
                          << fmt(p.median_dbar_hat) << " failures=" << p.failures << '\n';
            }
            print_files(res.files);
            return 0;
        }
        if (*reach) {
            ReachConfig rc = load_reach_config(config_path);
            if (!out_dir.empty()) {
                rc.output_dir = out_dir;
            }
            const ReachReport rep = certify(make_reach_task(rc));
            std::cout << "law " << to_string(rc.law.kind) << "\nvariant " << to_string(rc.base.variant) << "\ntarget "
                      << rep.target.describe() << "\nruns " << rep.runs.size() << "\nhorizon " << rep.horizon
                      << "\nbound " << rep.bound << "\nreached " << (rep.reached ? "true" : "false")
                      << "\nworst_hit_time " << detail::fmt_opt(rep.hit_time) << "\nfailures " << rep.failures
                      << "\nmin_final_spread " << fmt(rep.min_final_spread) << '\n';
            const std::filesystem::path dir(rc.output_dir);
            std::filesystem::create_directories(dir);
            {
                std::ofstream f(dir / (rc.name + ".reach.csv"));
                if (!f) {
                    throw std::runtime_error("cannot write reach report");
                }
                write_reach_csv(f, rc.name, rc, rep);
            }
            std::cout << "wrote " << (dir / (rc.name + ".reach.csv")).string() << '\n';
            if (rc.trace) {
                std::ofstream f(dir / (rc.name + ".trace.jsonl"));
                write_reach_traces(f, rep);
                std::cout << "wrote " << (dir / (rc.name + ".trace.jsonl")).string() << '\n';
            }
            return 0;
        }
        if (*fig) {
            const RunResult res = run_figure(figure_id, out_dir, horizon);
            print_rows(res.rows);
            print_files(res.files);
            return count_errors(res.rows) ? 1 : 0;
        }
        if (*cst) {
            const ExperimentConfig c = load_config(config_path);
            print_constants(c, eta_override.value_or(c.noise.eta), alpha_override.value_or(c.alpha));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
