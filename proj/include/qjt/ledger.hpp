#pragma once

// Per-trajectory thermodynamic bookkeeping.
//
// Increment conventions over one step [t_n, t_n + dt):
//   * no click: work <psi(t_n)| dH_d |psi(t_n)> from the drive's explicit time
//     dependence; no classical heat.
//   * click k: the jump fires at t_n, exchanging the classical quantum
//     -+ omega1(t_n); for the remainder of the step the post-jump state rides
//     the moving levels, which is work <psi_post| dH_d |psi_post>.
//   * quantum heat is the energy-balance remainder of the step. This closes
//     the first law exactly per trajectory and reduces to the analytic jump /
//     no-jump expressions (kept below as cross-checks) to first order in dt.
//
// The final projective energy measurement erases any leftover coherence; its
// energy kick is booked as quantum heat. A drive that quenches off at t_f
// (the resonant Rabi protocol) first returns <H_d> as work on the final state.
//
// All sums are compensated (Kahan) so 1e5-step trajectories accumulate at
// rounding level.

#include <cmath>
#include <cstdint>
#include <vector>

#include "qjt/drive.hpp"
#include "qjt/engine.hpp"
#include "qjt/qubit.hpp"

namespace qjt {

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// ---------------------------------------------------------------------------
// Ledger data

struct EnergyLedger {
    double u_initial = 0.0;
    double u_final = 0.0;
    double work = 0.0;
    double q_classical = 0.0;
    double q_quantum = 0.0;
    double q_classical_measured = 0.0;
    double entropy_production = 0.0;          // Delta_i s / k_B
    double entropy_production_measured = 0.0; // from detected clicks only
    std::int64_t n_clicks1 = 0;
    std::int64_t n_clicks2 = 0;
    double max_abs_qq_increment = 0.0;

    double first_law_residual() const {
        return u_final - u_initial - work - q_classical - q_quantum;
    }
};

struct FreeEnergyPair {
    double z_initial = 0.0;
    double z_final = 0.0;
    double delta_f = 0.0;
};

/// ln Z for H = (omega/2) sigma_z at inverse temperature beta, overflow-safe.
inline double log_partition(double beta, double omega) {
    const double x = beta * omega;
    return 0.5 * x + std::log1p(std::exp(-x));
}

inline FreeEnergyPair free_energy_change(double beta, double omega1_initial,
                                         double omega1_final) {
    FreeEnergyPair f;
    f.z_initial = 2.0 * std::cosh(0.5 * beta * omega1_initial);
    f.z_final = 2.0 * std::cosh(0.5 * beta * omega1_final);
    if (beta == 0.0) {
        f.delta_f = 0.0; // infinite-temperature limit
        return f;
    }
    f.delta_f =
        -(log_partition(beta, omega1_final) - log_partition(beta, omega1_initial)) /
        beta;
    return f;
}

// ---------------------------------------------------------------------------
// Increment primitives

inline double internal_energy(const PureState& psi, const Operator2& h_energy) {
    return expectation_real(h_energy, psi);
}

inline double internal_energy(const DensityMatrix& rho, const Operator2& h_energy) {
    return expectation_real(h_energy, rho);
}

/// <dH_d> on the pre-step state for a no-click step, zero otherwise.
inline double work_increment(const PureState& psi, const HamiltonianSample& hs,
                             StepOutcome outcome) {
    if (outcome != StepOutcome::NoClick) return 0.0;
    return expectation_real(hs.dh, psi);
}

inline double classical_heat_increment(double omega1_eff, StepOutcome outcome) {
    switch (outcome) {
    case StepOutcome::Click1:
        return -omega1_eff;
    case StepOutcome::Click2:
        return omega1_eff;
    default:
        return 0.0;
    }
}

/// Jump quantum heat for the general drive H_d = delta sigma_z + mu sigma + h.c.:
///   K=1:  omega1 P_g - 2 Re(mu <sigma>)
///   K=2: -omega1 P_e - 2 Re(mu <sigma>)
/// i.e. the jump-induced change of <H> minus the classical quantum.
inline double quantum_heat_jump(const PureState& psi_before, double omega1_eff,
                                cplx mu, StepOutcome outcome) {
    const cplx sig = expectation(Operator2::sigma(), psi_before);
    const double coh = -2.0 * std::real(mu * sig);
    if (outcome == StepOutcome::Click1)
        return omega1_eff * psi_before.pop_g() + coh;
    if (outcome == StepOutcome::Click2)
        return -omega1_eff * psi_before.pop_e() + coh;
    return 0.0;
}

/// No-jump quantum heat, exact anticommutator form:
/// -1/2 <{M1^dag M1 - p1, H}> - 1/2 <{M2^dag M2 - p2, H}>.
inline double quantum_heat_nojump(const PureState& psi_before, const JumpOps& ops,
                                  const Operator2& h_energy, double p1, double p2) {
    const Operator2 a1 = matmul(dagger(ops.m1), ops.m1);
    const Operator2 a2 = matmul(dagger(ops.m2), ops.m2);
    const double h_mean = expectation_real(h_energy, psi_before);
    const double t1 =
        0.5 * expectation_real(anticommutator(a1, h_energy), psi_before) -
        p1 * h_mean;
    const double t2 =
        0.5 * expectation_real(anticommutator(a2, h_energy), psi_before) -
        p2 * h_mean;
    return -(t1 + t2);
}

/// Same quantity in closed form:
/// -(Gamma- - Gamma+) dt [ omega1 P_e P_g + Re(mu <sigma>) (P_g - P_e) ].
inline double quantum_heat_nojump_closed_form(const PureState& psi, double omega1_eff,
                                              cplx mu, double gamma_minus,
                                              double gamma_plus, double dt) {
    const double pg = psi.pop_g();
    const double pe = psi.pop_e();
    const cplx sig = expectation(Operator2::sigma(), psi);
    return -(gamma_minus - gamma_plus) * dt *
           (omega1_eff * pe * pg + std::real(mu * sig) * (pg - pe));
}

/// Delta_i s / k_B = beta (Delta U - Q_cl - Delta F).
inline double entropy_production(const EnergyLedger& ledger, double delta_f,
                                 double beta) {
    return beta * (ledger.u_final - ledger.u_initial - ledger.q_classical - delta_f);
}

inline double entropy_production_measured(const EnergyLedger& ledger, double delta_f,
                                          double beta) {
    return beta *
           (ledger.u_final - ledger.u_initial - ledger.q_classical_measured - delta_f);
}

/// Residual of the split Delta_i s = beta (W - Delta F) + beta Q_q; a first-law
/// consequence, zero up to accumulation error.
inline double entropy_production_split_residual(const EnergyLedger& ledger,
                                                double delta_f, double beta) {
    return entropy_production(ledger, delta_f, beta) -
           beta * (ledger.work - delta_f) - beta * ledger.q_quantum;
}

// ---------------------------------------------------------------------------
// Streaming accumulation over one trajectory

class LedgerBuilder {
  public:
    /// `qq_events`, when given, collects the discrete quantum-heat increments
    /// (jump steps and the final projection) for histogramming.
    LedgerBuilder(const DriveProtocol& protocol, double dt,
                  std::vector<double>* qq_events = nullptr)
        : protocol_(protocol), dt_(dt), qq_events_(qq_events) {}

    /// `u_initial` is the projected eigenenergy of the prepared state.
    template <class State>
    void open(const State& state, double u_initial) {
        u_initial_ = u_initial;
        const double w_on =
            expectation_real(switch_on_operator(protocol_), state);
        work_.add(w_on);
        u_prev_ = u_initial + w_on;
    }

    void on(const PureStepEvent& ev) { on_event(ev); }
    void on(const DensityStepEvent& ev) { on_event(ev); }

    /// Finishes the trajectory: switch-off work on the final state, then the
    /// projective measurement kick. `u_final` is the projected eigenenergy.
    template <class State>
    EnergyLedger close(const State& final_state, double u_final) {
        const double w_off =
            -expectation_real(switch_off_operator(protocol_), final_state);
        work_.add(w_off);
        u_prev_ += w_off;
        add_qq(u_final - u_prev_);

        EnergyLedger ledger;
        ledger.u_initial = u_initial_;
        ledger.u_final = u_final;
        ledger.work = work_.value();
        ledger.q_classical = q_cl_.value();
        ledger.q_quantum = q_q_.value();
        ledger.q_classical_measured = q_cl_meas_.value();
        ledger.n_clicks1 = n1_;
        ledger.n_clicks2 = n2_;
        ledger.max_abs_qq_increment = max_qq_;
        return ledger;
    }

  private:
    template <class Event>
    void on_event(const Event& ev) {
        const double w1 = ev.ctx.hs.omega1_eff;
        double dw = 0.0;
        double dq_cl = 0.0;
        if (ev.outcome == StepOutcome::NoClick) {
            dw = expectation_real(ev.ctx.hs.dh, ev.pre);
        } else {
            dq_cl = classical_heat_increment(w1, ev.outcome);
            dw = expectation_real(ev.ctx.hs.dh, ev.post);
            q_cl_meas_.add(dq_cl);
            if (ev.outcome == StepOutcome::Click1) ++n1_;
            else ++n2_;
        }
        work_.add(dw);
        q_cl_.add(dq_cl);

        const double t_next = ev.ctx.t + dt_;
        const HamiltonianSample hs_next = sample(protocol_, t_next, dt_);
        const double u_next =
            internal_energy(ev.post, energy_operator(protocol_, hs_next));
        const double dq_q = u_next - u_prev_ - dw - dq_cl;
        if (ev.outcome == StepOutcome::NoClick) {
            q_q_.add(dq_q);
            max_qq_ = std::max(max_qq_, std::abs(dq_q));
        } else {
            add_qq(dq_q);
        }
        u_prev_ = u_next;
    }

    void add_qq(double dq) {
        q_q_.add(dq);
        max_qq_ = std::max(max_qq_, std::abs(dq));
        if (qq_events_) qq_events_->push_back(dq);
    }

    DriveProtocol protocol_;
    double dt_;
    std::vector<double>* qq_events_;
    double u_initial_ = 0.0;
    double u_prev_ = 0.0;
    KahanSum work_, q_cl_, q_q_, q_cl_meas_;
    std::int64_t n1_ = 0, n2_ = 0;
    double max_qq_ = 0.0;
};

} // namespace qjt
