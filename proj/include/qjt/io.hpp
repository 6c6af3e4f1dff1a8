#pragma once

// Result serialization: CSV tables and a JSON stats envelope.
//
// Floats are rounded to 12 significant digits before writing, so re-running
// an identical invocation reproduces files byte for byte.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qjt/config.hpp"
#include "qjt/experiment.hpp"

namespace qjt {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

/// Round to 12 significant digits (JSON payloads share the CSV formatting).
inline double round_sig12(double x) {
    if (!std::isfinite(x)) return x;
    return std::strtod(format_double(x).c_str(), nullptr);
}

inline constexpr const char* kLedgerHeader =
    "sweep_value,trajectory_index,u_i,u_f,W,Q_cl,Q_q,Q_cl_measured,dis,"
    "dis_measured,n_clicks1,n_clicks2";

inline constexpr const char* kSigmaHeader =
    "sweep_value,trajectory_index,sigma_eta,sigma_stderr,ess,n_fictitious";

inline constexpr const char* kHistHeader =
    "sweep_value,quantity,bin_index,bin_lo,bin_hi,count";

inline constexpr const char* kStatesHeader =
    "sweep_value,trajectory_index,step,t,outcome,rho_gg,rho_ee,re_rho_ge,"
    "im_rho_ge";

inline constexpr const char* kSweepHeader =
    "sweep_param,sweep_value,n_traj,dt,n_steps,eta,delta_f,je_mean,je_stderr,"
    "je_measured_mean,je_measured_stderr,je_corrected_mean,je_corrected_stderr,"
    "mean_dis,dis_stderr,mean_dis_measured,dis_measured_stderr";

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

inline void write_ledgers_csv(const std::string& path, const ExperimentResult& r) {
    std::ofstream out = open_output(path);
    out << kLedgerHeader << "\n";
    for (const auto& pt : r.points) {
        const std::string sv = format_double(pt.sweep_value);
        for (std::size_t i = 0; i < pt.ledgers.size(); ++i) {
            const EnergyLedger& l = pt.ledgers[i];
            out << sv << ',' << i << ',' << format_double(l.u_initial) << ','
                << format_double(l.u_final) << ',' << format_double(l.work) << ','
                << format_double(l.q_classical) << ','
                << format_double(l.q_quantum) << ','
                << format_double(l.q_classical_measured) << ','
                << format_double(l.entropy_production) << ','
                << format_double(l.entropy_production_measured) << ','
                << l.n_clicks1 << ',' << l.n_clicks2 << "\n";
        }
    }
}

inline void write_sigma_csv(const std::string& path, const ExperimentResult& r) {
    std::ofstream out = open_output(path);
    out << kSigmaHeader << "\n";
    for (const auto& pt : r.points) {
        const std::string sv = format_double(pt.sweep_value);
        for (std::size_t i = 0; i < pt.sigmas.size(); ++i) {
            const SigmaEstimate& s = pt.sigmas[i];
            out << sv << ',' << i << ',' << format_double(s.sigma) << ','
                << format_double(s.stderr_) << ','
                << format_double(s.effective_sample_size) << ',' << s.n_fictitious
                << "\n";
        }
    }
}

inline void write_histogram_rows(std::ofstream& out, const std::string& sweep_value,
                                 const std::string& quantity, const Histogram& h) {
    if (h.underflow > 0)
        out << sweep_value << ',' << quantity << ",-1,-inf,"
            << format_double(h.edges.front()) << ',' << h.underflow << "\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        out << sweep_value << ',' << quantity << ',' << b << ','
            << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1])
            << ',' << h.counts[b] << "\n";
    if (h.overflow > 0)
        out << sweep_value << ',' << quantity << ',' << h.counts.size() << ','
            << format_double(h.edges.back()) << ",inf," << h.overflow << "\n";
}

inline void write_hist_csv(const std::string& path, const ExperimentResult& r,
                           int n_bins = 61) {
    std::ofstream out = open_output(path);
    out << kHistHeader << "\n";
    for (const auto& pt : r.points) {
        const std::string sv = format_double(pt.sweep_value);
        write_histogram_rows(out, sv, "dis", pt.stats.hist);
        if (pt.sim.eta < 1.0)
            write_histogram_rows(out, sv, "dis_measured", pt.stats_measured.hist);
        write_histogram_rows(out, sv, "dqq", histogram(pt.qq_events, n_bins));
    }
}

inline void write_states_csv(const std::string& path, const ExperimentResult& r,
                             std::int64_t dumped_index) {
    std::ofstream out = open_output(path);
    out << kStatesHeader << "\n";
    for (const auto& pt : r.points) {
        const std::string sv = format_double(pt.sweep_value);
        for (const auto& row : pt.state_dump)
            out << sv << ',' << dumped_index << ',' << row.step << ','
                << format_double(row.t) << ',' << row.outcome << ','
                << format_double(row.rho_gg) << ',' << format_double(row.rho_ee)
                << ',' << format_double(std::real(row.rho_ge)) << ','
                << format_double(std::imag(row.rho_ge)) << "\n";
    }
}

inline void write_sweep_csv(const std::string& path, const ExperimentResult& r) {
    std::ofstream out = open_output(path);
    out << kSweepHeader << "\n";
    const std::string param = r.scenario.sweep ? r.scenario.sweep->param : "none";
    for (const auto& pt : r.points) {
        out << param << ',' << format_double(pt.sweep_value) << ','
            << pt.stats.n_traj << ',' << format_double(pt.sim.dt) << ','
            << pt.sim.n_steps << ',' << format_double(pt.sim.eta) << ','
            << format_double(pt.free_energy.delta_f) << ','
            << format_double(pt.stats.je_mean) << ','
            << format_double(pt.stats.je_stderr) << ','
            << format_double(pt.stats_measured.je_mean) << ','
            << format_double(pt.stats_measured.je_stderr) << ','
            << format_double(pt.stats_corrected.je_mean) << ','
            << format_double(pt.stats_corrected.je_stderr) << ','
            << format_double(pt.stats.mean_dis) << ','
            << format_double(pt.stats.dis_stderr) << ','
            << format_double(pt.stats_measured.mean_dis) << ','
            << format_double(pt.stats_measured.dis_stderr) << "\n";
    }
}

inline nlohmann::json stats_to_json(const EnsembleStats& st) {
    return {{"je_mean", round_sig12(st.je_mean)},
            {"je_stderr", round_sig12(st.je_stderr)},
            {"mean_dis", round_sig12(st.mean_dis)},
            {"dis_stderr", round_sig12(st.dis_stderr)},
            {"n_traj", st.n_traj}};
}

inline nlohmann::json result_to_json(const ExperimentResult& r) {
    const Scenario& s = r.scenario;
    nlohmann::json j;
    j["scenario"] = {
        {"name", s.name},
        {"drive.kind", drive_kind_name(s.kind)},
        {"drive.omega1_0", round_sig12(s.omega1_0)},
        {"drive.epsilon", round_sig12(s.epsilon_ratio)},
        {"drive.g", round_sig12(s.g_ratio)},
        {"drive.gamma_minus_tf", round_sig12(s.gamma_minus_tf)},
        {"drive.pulse_cycles", round_sig12(s.pulse_cycles)},
        {"bath.beta_omega1", round_sig12(s.beta_omega1)},
        {"bath.gamma_minus", round_sig12(s.gamma_minus)},
        {"sim.eta", round_sig12(s.eta)},
        {"sim.dt_rule", round_sig12(s.dt_budget)},
        {"sim.n_traj", s.n_traj},
        {"sim.n_fictitious", s.n_fictitious},
        {"sim.seed", s.seed},
    };
    if (s.sweep)
        j["sweep"] = {{"param", s.sweep->param}, {"grid", s.sweep->grid}};
    j["points"] = nlohmann::json::array();
    for (const auto& pt : r.points) {
        nlohmann::json p;
        p["sweep_value"] = round_sig12(pt.sweep_value);
        p["dt"] = round_sig12(pt.sim.dt);
        p["n_steps"] = pt.sim.n_steps;
        p["eta"] = round_sig12(pt.sim.eta);
        p["omega1_initial"] = round_sig12(pt.omega1_initial);
        p["omega1_final"] = round_sig12(pt.omega1_final);
        p["delta_f"] = round_sig12(pt.free_energy.delta_f);
        p["je"] = stats_to_json(pt.stats);
        p["je_measured"] = stats_to_json(pt.stats_measured);
        p["je_corrected"] = stats_to_json(pt.stats_corrected);
        p["low_ess_trajectories"] = pt.low_ess_count;
        j["points"].push_back(std::move(p));
    }
    return j;
}

inline void write_stats_json(const std::string& path, const ExperimentResult& r) {
    std::ofstream out = open_output(path);
    out << result_to_json(r).dump(2) << "\n";
}

struct OutputPaths {
    std::string stats_json;
    std::string ledgers_csv;
    std::string sigma_csv;
    std::string hist_csv;
    std::string sweep_csv;
    std::string states_csv;
};

inline OutputPaths output_paths(const std::string& out_dir, const std::string& name) {
    const std::string base = out_dir.empty() ? name : out_dir + "/" + name;
    return {base + "_stats.json", base + "_ledgers.csv", base + "_sigma.csv",
            base + "_hist.csv",   base + "_sweep.csv",   base + "_states.csv"};
}

inline void write_all_outputs(const std::string& out_dir, const ExperimentResult& r) {
    const OutputPaths paths = output_paths(out_dir, r.scenario.name);
    write_stats_json(paths.stats_json, r);
    write_ledgers_csv(paths.ledgers_csv, r);
    write_hist_csv(paths.hist_csv, r);
    write_sweep_csv(paths.sweep_csv, r);
    if (r.scenario.eta < 1.0 ||
        (r.scenario.sweep && r.scenario.sweep->param == "sim.eta"))
        write_sigma_csv(paths.sigma_csv, r);
}

} // namespace qjt
