// Command-line front end for the trajectory simulator.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime/numerical error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qjt/config.hpp"
#include "qjt/experiment.hpp"
#include "qjt/io.hpp"

namespace {

struct CommonArgs {
    std::string preset;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> n_traj;
    std::optional<double> eta;
    unsigned threads = 0;
    bool retain_ledgers = false;
    bool full_scale = false;
    std::optional<std::int64_t> dump_states;
};

void add_common_options(CLI::App* cmd, CommonArgs& args, bool with_outputs) {
    cmd->add_option("--preset", args.preset, "start from a named preset scenario");
    cmd->add_option("--config", args.config_path, "scenario config file (key = value)");
    cmd->add_option("--set", args.overrides, "override a config key, key=value")
        ->take_all();
    cmd->add_option("--seed", args.seed, "override sim.seed");
    cmd->add_option("--n-traj", args.n_traj, "override sim.n_traj");
    cmd->add_option("--eta", args.eta, "override sim.eta");
    if (with_outputs) {
        cmd->add_option("--out", args.out_dir, "output directory")
            ->capture_default_str();
        cmd->add_option("--threads", args.threads,
                        "worker threads (0 = hardware concurrency; results do "
                        "not depend on this)");
        cmd->add_flag("--retain-ledgers", args.retain_ledgers,
                      "keep every per-trajectory ledger row even on full-scale runs");
        cmd->add_flag("--full-scale", args.full_scale,
                      "use the preset's full trajectory count instead of the "
                      "desk-scale default");
        cmd->add_option("--dump-states", args.dump_states,
                        "debug: write the per-step conditional state of the "
                        "given trajectory index to <name>_states.csv");
    }
}

qjt::Scenario resolve_scenario(const CommonArgs& args) {
    qjt::Scenario base;
    if (!args.preset.empty()) {
        const auto& table = qjt::presets();
        auto it = table.find(args.preset);
        if (it == table.end())
            throw qjt::ConfigError("unknown preset: " + args.preset);
        base = it->second.scenario;
        if (args.full_scale) base.n_traj = it->second.full_scale_n_traj;
    }
    qjt::ConfigMap cfg;
    if (!args.config_path.empty()) cfg = qjt::load_config_file(args.config_path);
    for (const auto& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw qjt::ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    qjt::Scenario s = qjt::scenario_from_config(cfg, base);
    if (args.seed) s.seed = *args.seed;
    if (args.n_traj) s.n_traj = *args.n_traj;
    if (args.eta) s.eta = *args.eta;
    qjt::validate(s);
    return s;
}

void print_summary(const qjt::ExperimentResult& r) {
    const std::string param = r.scenario.sweep ? r.scenario.sweep->param : "-";
    std::printf("scenario %s  (n_traj=%lld, seed=%llu)\n", r.scenario.name.c_str(),
                static_cast<long long>(r.scenario.n_traj),
                static_cast<unsigned long long>(r.scenario.seed));
    std::printf("%-14s %-10s %-24s %-24s %s\n", param.c_str(), "eta",
                "<e^-dis>", "<dis>", "corrected");
    for (const auto& pt : r.points) {
        const bool finite_eta = pt.sim.eta < 1.0;
        const auto& je = finite_eta ? pt.stats_measured : pt.stats;
        char corrected[64] = "-";
        if (finite_eta)
            std::snprintf(corrected, sizeof(corrected), "%.6f +- %.6f",
                          pt.stats_corrected.je_mean, pt.stats_corrected.je_stderr);
        std::printf("%-14.6g %-10.4g %.6f +- %.6f    %+.6f +- %.6f  %s\n",
                    pt.sweep_value, pt.sim.eta, je.je_mean, je.je_stderr,
                    je.mean_dis, je.dis_stderr, corrected);
        if (pt.low_ess_count > 0)
            std::fprintf(stderr,
                         "warning: %lld trajectories at sweep=%g had effective "
                         "sample size below 1%% of n_fictitious\n",
                         static_cast<long long>(pt.low_ess_count), pt.sweep_value);
    }
}

int run_command(const CommonArgs& args) {
    qjt::Scenario s;
    try {
        s = resolve_scenario(args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    }
    try {
        std::filesystem::create_directories(args.out_dir);
        qjt::RunOptions opt;
        opt.threads = args.threads;
        // Desk-scale runs keep everything; huge runs truncate the per-row CSVs
        // unless --retain-ledgers asks otherwise.
        opt.max_ledger_rows = args.retain_ledgers ? -1 : 100000;
        if (args.dump_states) opt.dump_states_for = *args.dump_states;
        qjt::ExperimentResult r = qjt::run_scenario(s, opt);
        qjt::write_all_outputs(args.out_dir, r);
        if (args.dump_states)
            qjt::write_states_csv(qjt::output_paths(args.out_dir, s.name).states_csv,
                                  r, *args.dump_states);
        print_summary(r);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-jump trajectory thermodynamics simulator"};
    app.require_subcommand(1);

    CommonArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run a preset or config scenario");
    add_common_options(run, run_args, true);

    CommonArgs sweep_args;
    std::string sweep_param;
    std::string sweep_grid;
    CLI::App* sweep =
        app.add_subcommand("sweep", "run a scenario over an explicit parameter grid");
    add_common_options(sweep, sweep_args, true);
    sweep->add_option("--param", sweep_param, "sweep parameter")->required();
    sweep->add_option("--grid", sweep_grid, "comma-separated grid values")->required();

    CommonArgs validate_args;
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "check a config without running it");
    add_common_options(validate_cmd, validate_args, false);

    CLI::App* presets_cmd = app.add_subcommand("presets", "list preset scenarios");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return run_command(run_args);

    if (sweep->parsed()) {
        sweep_args.overrides.push_back("sweep.param=" + sweep_param);
        sweep_args.overrides.push_back("sweep.grid=" + sweep_grid);
        return run_command(sweep_args);
    }

    if (validate_cmd->parsed()) {
        try {
            qjt::Scenario s = resolve_scenario(validate_args);
            std::printf("ok: scenario '%s' is valid\n", s.name.c_str());
            return 0;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return 1;
        }
    }

    if (presets_cmd->parsed()) {
        for (const auto& [name, preset] : qjt::presets())
            std::printf("%-8s %s\n", name.c_str(), preset.description.c_str());
        return 0;
    }
    return 0;
}
