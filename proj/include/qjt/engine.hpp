#pragma once

// Stochastic propagation of the monitored qubit.
//
// Perfect detection evolves pure states by the jump operators
//   M1 = sqrt(Gamma- dt) sigma,  M2 = sqrt(Gamma+ dt) sigma^dag,
//   M0 = 1 - i dt H(t) - (M1^dag M1 + M2^dag M2)/2,
// with outcome probabilities p_k = <M_k^dag M_k> and p0 := 1 - p1 - p2 so the
// three branches sum to one exactly at every step.
//
// Finite detection efficiency eta evolves a conditional density matrix. A
// detected click applies eta M_k rho M_k^dag; the no-click map is the purity-
// decreasing
//   E0 = M0 rho M0^dag + (1-eta)(M1 rho M1^dag + M2 rho M2^dag),
// which interpolates between the pure no-click back-action (eta = 1) and a
// full Lindblad step (eta = 0), and is by construction identical to the
// three-branch decomposition used by the fictitious-trajectory sampler.
//
// The per-step Hamiltonian, rates and jump operators depend only on time, so
// they are precomputed once per scenario into a StepSchedule shared read-only
// by every trajectory.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qjt/bath.hpp"
#include "qjt/drive.hpp"
#include "qjt/qubit.hpp"
#include "qjt/rng.hpp"

namespace qjt {

// ---------------------------------------------------------------------------
// Simulation grid

struct SimConfig {
    double dt = 0.0;
    std::int64_t n_steps = 0;
    double eta = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t trajectory_index = 0;
};

inline constexpr double kStepBudgetLimit = 0.05; // hard cap on dt*(rates), dt*|H|

/// Largest per-step probability/rotation budget the grid must respect; used
/// both to pick dt and to validate a SimConfig against protocol and bath.
inline double step_load(const DriveProtocol& p, const BathSpec& bath) {
    double load = 0.0;
    for (double t : {p.t_i, p.t_f}) {
        const double w = effective_frequency(p, t);
        const RatePoint r = rates_for(w, bath);
        load = std::max(load, r.gamma_plus + r.gamma_minus);
        load = std::max(load, spectral_norm(sample(p, t, 0.0).h));
    }
    load = std::max(load, std::max(p.epsilon * p.omega1_0, p.g));
    return load;
}

inline void validate(const SimConfig& c, const DriveProtocol& p,
                     const BathSpec& bath) {
    if (!(c.dt > 0.0)) throw std::invalid_argument("sim: dt must be > 0");
    if (c.n_steps < 0) throw std::invalid_argument("sim: n_steps must be >= 0");
    if (!(c.eta >= 0.0 && c.eta <= 1.0))
        throw std::invalid_argument("sim: eta must lie in [0, 1]");
    for (double t : {p.t_i, p.t_f}) {
        const double w = effective_frequency(p, t);
        const RatePoint r = rates_for(w, bath);
        if (c.dt * (r.gamma_plus + r.gamma_minus) >= kStepBudgetLimit)
            throw std::invalid_argument("sim: dt*(gamma_plus+gamma_minus) exceeds 0.05");
        if (c.dt * spectral_norm(sample(p, t, 0.0).h) >= kStepBudgetLimit)
            throw std::invalid_argument("sim: dt*|H| exceeds 0.05");
    }
}

/// dt = budget / max(rates, |H|, drive rate), rounded so the grid covers
/// [t_i, t_f] with an integer number of steps.
inline SimConfig make_grid(const DriveProtocol& p, const BathSpec& bath,
                           double budget = 0.02) {
    if (!(budget > 0.0 && budget < kStepBudgetLimit))
        throw std::invalid_argument("sim: dt budget must lie in (0, 0.05)");
    const double span = p.t_f - p.t_i;
    const double dt_raw = budget / step_load(p, bath);
    SimConfig c;
    c.n_steps = static_cast<std::int64_t>(std::ceil(span / dt_raw - 1e-9));
    if (c.n_steps < 1) c.n_steps = 1;
    c.dt = span / static_cast<double>(c.n_steps);
    return c;
}

// ---------------------------------------------------------------------------
// Jump operators and the precomputed schedule

struct JumpOps {
    Operator2 m0, m1, m2;
};

inline JumpOps jump_operators(const HamiltonianSample& hs, const RatePoint& rates,
                              double dt) {
    JumpOps ops;
    ops.m1 = cplx{std::sqrt(rates.gamma_minus * dt)} * Operator2::sigma();
    ops.m2 = cplx{std::sqrt(rates.gamma_plus * dt)} * Operator2::sigma_dag();
    // M0 = 1 - i dt H - (Gamma- dt |e><e| + Gamma+ dt |g><g|)/2
    ops.m0 = Operator2::identity() + cplx{0.0, -dt} * hs.h -
             Operator2::diag(cplx{0.5 * rates.gamma_plus * dt},
                             cplx{0.5 * rates.gamma_minus * dt});
    return ops;
}

struct StepContext {
    double t = 0.0;
    HamiltonianSample hs;
    RatePoint rates;
    JumpOps ops;
};

using StepSchedule = std::vector<StepContext>;

inline StepSchedule precompute_schedule(const DriveProtocol& p, const BathSpec& bath,
                                        const SimConfig& c) {
    StepSchedule sched(static_cast<std::size_t>(c.n_steps));
    for (std::int64_t n = 0; n < c.n_steps; ++n) {
        StepContext& ctx = sched[static_cast<std::size_t>(n)];
        ctx.t = p.t_i + static_cast<double>(n) * c.dt;
        ctx.hs = sample(p, ctx.t, c.dt);
        ctx.rates = rates_for(ctx.hs.omega1_eff, bath);
        ctx.ops = jump_operators(ctx.hs, ctx.rates, c.dt);
    }
    return sched;
}

// ---------------------------------------------------------------------------
// Single steps

enum class StepOutcome : std::uint8_t { NoClick = 0, Click1 = 1, Click2 = 2 };

struct StepResult {
    StepOutcome outcome = StepOutcome::NoClick;
    double p1 = 0.0; // <M1^dag M1>, before any eta weighting
    double p2 = 0.0;
};

/// Perfect-efficiency step. Click post-states are snapped to the exact basis
/// states, which is the renormalized M_k psi up to an unobservable phase
/// because M1 and M2 are proportional to sigma and sigma^dag.
inline StepResult step_perfect(PureState& psi, const JumpOps& ops, double u) {
    StepResult r;
    r.p1 = apply(ops.m1, psi).norm2();
    r.p2 = apply(ops.m2, psi).norm2();
    if (u < r.p1) {
        r.outcome = StepOutcome::Click1;
        psi = PureState::ground();
    } else if (u < r.p1 + r.p2) {
        r.outcome = StepOutcome::Click2;
        psi = PureState::excited();
    } else {
        r.outcome = StepOutcome::NoClick;
        psi = apply(ops.m0, psi);
        const double n2 = psi.norm2();
        if (n2 < 1e-300)
            throw std::runtime_error("step_perfect: no-click branch has vanishing norm");
        psi.normalize();
    }
    return r;
}

/// Finite-efficiency step on the conditional density matrix.
inline StepResult step_finite_eta(DensityMatrix& rho, const StepContext& ctx,
                                  double eta, double dt, double u) {
    StepResult r;
    const double gm_dt = ctx.rates.gamma_minus * dt;
    const double gp_dt = ctx.rates.gamma_plus * dt;
    r.p1 = gm_dt * rho.pop_e();
    r.p2 = gp_dt * rho.pop_g();
    if (u < eta * r.p1) {
        r.outcome = StepOutcome::Click1;
        rho = DensityMatrix::ground(); // sigma rho sigma^dag / tr
    } else if (u < eta * (r.p1 + r.p2)) {
        r.outcome = StepOutcome::Click2;
        rho = DensityMatrix::excited();
    } else {
        r.outcome = StepOutcome::NoClick;
        const double hidden1 = (1.0 - eta) * gm_dt * rho.pop_e();
        const double hidden2 = (1.0 - eta) * gp_dt * rho.pop_g();
        Operator2 next = matmul(matmul(ctx.ops.m0, rho.m), dagger(ctx.ops.m0));
        next.m[0] += cplx{hidden1};
        next.m[3] += cplx{hidden2};
        rho.m = next;
        rho.renormalize();
    }
    return r;
}

// ---------------------------------------------------------------------------
// Whole-trajectory propagation

enum class BasisState : std::int8_t { Unset = -1, G = 0, E = 1 };

struct TrajectoryRecord {
    std::vector<std::uint8_t> outcomes; // one StepOutcome per step
    BasisState initial_state = BasisState::Unset;
    BasisState final_state = BasisState::Unset;
    std::uint64_t seed = 0;
    std::uint64_t trajectory_index = 0;

    std::int64_t n_noclick() const {
        std::int64_t n = 0;
        for (auto k : outcomes)
            if (k == 0) ++n;
        return n;
    }
};

struct PureStepEvent {
    std::int64_t n;
    StepOutcome outcome;
    double p1, p2;
    const StepContext& ctx;
    const PureState& pre;
    const PureState& post;
};

struct DensityStepEvent {
    std::int64_t n;
    StepOutcome outcome;
    double p1, p2;
    const StepContext& ctx;
    const DensityMatrix& pre;
    const DensityMatrix& post;
};

/// Deterministic given (seed, trajectory_index): step n consumes exactly the
/// draw at index 1+n of the trajectory stream.
template <class Hook>
TrajectoryRecord run_trajectory(const SimConfig& c, const StepSchedule& sched,
                                PureState psi, Hook&& hook) {
    TrajectoryRecord rec;
    rec.seed = c.seed;
    rec.trajectory_index = c.trajectory_index;
    rec.outcomes.resize(static_cast<std::size_t>(c.n_steps));
    CounterRng rng(c.seed, StreamKind::Trajectory, c.trajectory_index);
    for (std::int64_t n = 0; n < c.n_steps; ++n) {
        const StepContext& ctx = sched[static_cast<std::size_t>(n)];
        const PureState pre = psi;
        const double u = rng.uniform_at(draw_index_step(n));
        const StepResult sr = step_perfect(psi, ctx.ops, u);
        rec.outcomes[static_cast<std::size_t>(n)] =
            static_cast<std::uint8_t>(sr.outcome);
        hook(PureStepEvent{n, sr.outcome, sr.p1, sr.p2, ctx, pre, psi});
    }
    return rec;
}

template <class Hook>
TrajectoryRecord run_trajectory(const SimConfig& c, const StepSchedule& sched,
                                DensityMatrix rho, Hook&& hook) {
    TrajectoryRecord rec;
    rec.seed = c.seed;
    rec.trajectory_index = c.trajectory_index;
    rec.outcomes.resize(static_cast<std::size_t>(c.n_steps));
    CounterRng rng(c.seed, StreamKind::Trajectory, c.trajectory_index);
    for (std::int64_t n = 0; n < c.n_steps; ++n) {
        const StepContext& ctx = sched[static_cast<std::size_t>(n)];
        const DensityMatrix pre = rho;
        const double u = rng.uniform_at(draw_index_step(n));
        const StepResult sr = step_finite_eta(rho, ctx, c.eta, c.dt, u);
        if ((n + 1) % 1000 == 0) rho.hermitize();
        rec.outcomes[static_cast<std::size_t>(n)] =
            static_cast<std::uint8_t>(sr.outcome);
        hook(DensityStepEvent{n, sr.outcome, sr.p1, sr.p2, ctx, pre, rho});
    }
    return rec;
}

struct NullHook {
    void operator()(const PureStepEvent&) const {}
    void operator()(const DensityStepEvent&) const {}
};

// ---------------------------------------------------------------------------
// Deterministic master-equation oracle (classic RK4)

/// Right-hand side of the master equation in the protocol's stepping frame:
/// drho/dt = -i[H(t), rho] + Gamma+(t) D[sigma^dag] rho + Gamma-(t) D[sigma] rho.
inline Operator2 lindblad_rhs(const DriveProtocol& p, const BathSpec& bath,
                              const Operator2& rho, double t) {
    const HamiltonianSample hs = sample(p, t, 0.0);
    const RatePoint r = rates_for(hs.omega1_eff, bath);
    Operator2 out = cplx{0.0, -1.0} * commutator(hs.h, rho);
    // D[sigma] rho = rho_ee |g><g| - {|e><e|, rho}/2
    const cplx ree = rho.m[3];
    const cplx rgg = rho.m[0];
    Operator2 demit = Operator2::zero();
    demit.m[0] = ree;
    demit.m[1] = -0.5 * rho.m[1];
    demit.m[2] = -0.5 * rho.m[2];
    demit.m[3] = -ree;
    Operator2 dabs = Operator2::zero();
    dabs.m[0] = -rgg;
    dabs.m[1] = -0.5 * rho.m[1];
    dabs.m[2] = -0.5 * rho.m[2];
    dabs.m[3] = rgg;
    out += cplx{r.gamma_minus} * demit;
    out += cplx{r.gamma_plus} * dabs;
    return out;
}

/// Integrates the master equation over the grid, returning all n_steps + 1
/// states. Trace is preserved to rounding (the generator is trace-free).
inline std::vector<DensityMatrix> integrate_lindblad(const DriveProtocol& p,
                                                     const BathSpec& bath,
                                                     const DensityMatrix& rho0,
                                                     double dt,
                                                     std::int64_t n_steps) {
    std::vector<DensityMatrix> out;
    out.reserve(static_cast<std::size_t>(n_steps) + 1);
    out.push_back(rho0);
    Operator2 rho = rho0.m;
    for (std::int64_t n = 0; n < n_steps; ++n) {
        const double t = p.t_i + static_cast<double>(n) * dt;
        const Operator2 k1 = lindblad_rhs(p, bath, rho, t);
        const Operator2 k2 =
            lindblad_rhs(p, bath, rho + cplx{0.5 * dt} * k1, t + 0.5 * dt);
        const Operator2 k3 =
            lindblad_rhs(p, bath, rho + cplx{0.5 * dt} * k2, t + 0.5 * dt);
        const Operator2 k4 = lindblad_rhs(p, bath, rho + cplx{dt} * k3, t + dt);
        rho += cplx{dt / 6.0} * (k1 + cplx{2.0} * k2 + cplx{2.0} * k3 + k4);
        out.push_back(DensityMatrix{rho});
    }
    return out;
}

} // namespace qjt
