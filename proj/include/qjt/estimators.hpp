#pragma once

// Fluctuation-theorem analysis.
//
// Probability conventions match the samplers exactly: at every step the
// no-click probability is one minus the click probabilities, so chain
// probabilities sum to one over all records by construction. All path
// probabilities are accumulated in log space.
//
// Finite-efficiency correction: a detection record gamma with N0 no-click
// steps is compatible with 3^N0 perfect-efficiency pure trajectories
// ("fictitious" paths), each no-click step hiding either nothing, an
// undetected emission, or an undetected absorption with branch weights
//   ( 1 - p1 - p2,  (1-eta) p1,  (1-eta) p2 ).
// sigma_eta is estimated by sequential importance sampling over these paths
// with the per-step renormalized branch proposal; the accumulated per-step
// normalizers make exp(log_weight) an unbiased estimate of the record's
// probability, and the self-normalized ratio cancels it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qjt/bath.hpp"
#include "qjt/drive.hpp"
#include "qjt/engine.hpp"
#include "qjt/ledger.hpp"
#include "qjt/qubit.hpp"
#include "qjt/rng.hpp"

namespace qjt {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum exp(v)) over finite entries; -inf for an empty or all--inf input.
inline double log_sum_exp(std::span<const double> v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// ---------------------------------------------------------------------------
// Histograms and ensemble statistics

struct Histogram {
    std::vector<double> edges; // n_bins + 1
    std::vector<std::int64_t> counts;
    std::int64_t underflow = 0;
    std::int64_t overflow = 0;
};

inline Histogram histogram(std::span<const double> values, int n_bins,
                           std::optional<std::pair<double, double>> range = {}) {
    if (n_bins < 1) throw std::invalid_argument("histogram: n_bins must be >= 1");
    double lo = 0.0, hi = 1.0;
    if (range) {
        lo = range->first;
        hi = range->second;
    } else if (!values.empty()) {
        lo = *std::min_element(values.begin(), values.end());
        hi = *std::max_element(values.begin(), values.end());
    }
    if (!(hi > lo)) hi = lo + 1.0; // degenerate data: one bin holds everything
    Histogram h;
    h.edges.resize(static_cast<std::size_t>(n_bins) + 1);
    const double w = (hi - lo) / n_bins;
    for (int i = 0; i <= n_bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + w * i;
    h.counts.assign(static_cast<std::size_t>(n_bins), 0);
    for (double x : values) {
        if (x < lo) {
            ++h.underflow;
        } else if (x > hi) {
            ++h.overflow;
        } else {
            auto b = static_cast<std::int64_t>((x - lo) / w);
            if (b >= n_bins) b = n_bins - 1; // x == hi lands in the last bin
            ++h.counts[static_cast<std::size_t>(b)];
        }
    }
    return h;
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Mean and standard error (sample standard deviation / sqrt(n)).
inline MeanStderr mean_stderr(std::span<const double> v) {
    MeanStderr out;
    const auto n = static_cast<double>(v.size());
    if (v.empty()) return out;
    KahanSum s;
    for (double x : v) s.add(x);
    out.mean = s.value() / n;
    if (v.size() < 2) return out;
    KahanSum q;
    for (double x : v) q.add((x - out.mean) * (x - out.mean));
    out.stderr_ = std::sqrt(q.value() / (n - 1.0)) / std::sqrt(n);
    return out;
}

struct EnsembleStats {
    std::int64_t n_traj = 0;
    double je_mean = 0.0;
    double je_stderr = 0.0;
    double mean_dis = 0.0;
    double dis_stderr = 0.0;
    Histogram hist;
};

inline EnsembleStats jarzynski_estimator(std::span<const EnergyLedger> ledgers,
                                         bool use_measured = false,
                                         int hist_bins = 61) {
    if (ledgers.size() < 2)
        throw std::invalid_argument("jarzynski_estimator: need n_traj >= 2");
    std::vector<double> dis(ledgers.size());
    std::vector<double> je(ledgers.size());
    for (std::size_t i = 0; i < ledgers.size(); ++i) {
        dis[i] = use_measured ? ledgers[i].entropy_production_measured
                              : ledgers[i].entropy_production;
        je[i] = std::exp(-dis[i]);
    }
    EnsembleStats st;
    st.n_traj = static_cast<std::int64_t>(ledgers.size());
    const MeanStderr mj = mean_stderr(je);
    st.je_mean = mj.mean;
    st.je_stderr = mj.stderr_;
    const MeanStderr md = mean_stderr(dis);
    st.mean_dis = md.mean;
    st.dis_stderr = md.stderr_;
    st.hist = histogram(dis, hist_bins);
    return st;
}

// ---------------------------------------------------------------------------
// Path probabilities

inline PureState basis_state(BasisState s) {
    return s == BasisState::E ? PureState::excited() : PureState::ground();
}

inline double eigenenergy(BasisState s, double omega1) {
    return s == BasisState::E ? 0.5 * omega1 : -0.5 * omega1;
}

/// log p of drawing `s` from the Gibbs state at (beta, omega1).
inline double log_gibbs_weight(double beta, double omega1, BasisState s) {
    return -beta * eigenenergy(s, omega1) - log_partition(beta, omega1);
}

/// log P_d[gamma]: initial thermal weight, per-step branch probabilities of
/// the conditional-state chain at the record's efficiency, final projector.
/// Impossible records return -inf.
inline double forward_log_probability(const TrajectoryRecord& rec,
                                      const DriveProtocol& p, const BathSpec& bath,
                                      const SimConfig& c,
                                      const StepSchedule& sched) {
    if (rec.initial_state == BasisState::Unset || rec.final_state == BasisState::Unset)
        throw std::invalid_argument("forward_log_probability: record lacks endpoints");
    const double w_i = effective_frequency(p, p.t_i);
    double log_p = log_gibbs_weight(bath.beta, w_i, rec.initial_state);

    DensityMatrix rho = rec.initial_state == BasisState::E ? DensityMatrix::excited()
                                                           : DensityMatrix::ground();
    const double eta = c.eta;
    for (std::int64_t n = 0; n < c.n_steps; ++n) {
        const StepContext& ctx = sched[static_cast<std::size_t>(n)];
        const double p1 = ctx.rates.gamma_minus * c.dt * rho.pop_e();
        const double p2 = ctx.rates.gamma_plus * c.dt * rho.pop_g();
        switch (rec.outcomes[static_cast<std::size_t>(n)]) {
        case 1: {
            const double q = eta * p1;
            if (!(q > 0.0)) return kNegInf;
            log_p += std::log(q);
            rho = DensityMatrix::ground();
            break;
        }
        case 2: {
            const double q = eta * p2;
            if (!(q > 0.0)) return kNegInf;
            log_p += std::log(q);
            rho = DensityMatrix::excited();
            break;
        }
        default: {
            const double q = 1.0 - eta * (p1 + p2);
            if (!(q > 0.0)) return kNegInf;
            log_p += std::log(q);
            Operator2 next = matmul(matmul(ctx.ops.m0, rho.m), dagger(ctx.ops.m0));
            next.m[0] += cplx{(1.0 - eta) * p1};
            next.m[3] += cplx{(1.0 - eta) * p2};
            rho.m = next;
            rho.renormalize();
            break;
        }
        }
    }
    const double proj =
        rec.final_state == BasisState::E ? rho.pop_e() : rho.pop_g();
    if (!(proj > 0.0)) return kNegInf;
    return log_p + std::log(proj);
}

/// log P_r[gamma^r] of the time-reversed record under the time-reversed drive
/// (eta = 1 only). Each detected jump reverses with the detailed-balance
/// weight: a recorded emission becomes an absorption of the reversed
/// experiment at the same frequency, and vice versa; no-click steps apply
/// M0^dag. The reversed run is itself a normalized chain, so summing over all
/// records gives one.
inline double reversed_log_probability(const TrajectoryRecord& rec,
                                       const DriveProtocol& p, const BathSpec& bath,
                                       const SimConfig& c,
                                       const StepSchedule& sched) {
    if (c.eta != 1.0)
        throw std::invalid_argument("reversed_log_probability: defined at eta = 1");
    const double w_f = effective_frequency(p, p.t_f);
    double log_p = log_gibbs_weight(bath.beta, w_f, rec.final_state);

    PureState phi = basis_state(rec.final_state);
    for (std::int64_t n = c.n_steps - 1; n >= 0; --n) {
        const StepContext& ctx = sched[static_cast<std::size_t>(n)];
        const double gm_dt = ctx.rates.gamma_minus * c.dt;
        const double gp_dt = ctx.rates.gamma_plus * c.dt;
        switch (rec.outcomes[static_cast<std::size_t>(n)]) {
        case 1: {
            // e^{-beta w1} M1^dag . M1 == absorption at rate Gamma+ in reverse
            const double q = gp_dt * phi.pop_g();
            if (!(q > 0.0)) return kNegInf;
            log_p += std::log(q);
            phi = PureState::excited();
            break;
        }
        case 2: {
            const double q = gm_dt * phi.pop_e();
            if (!(q > 0.0)) return kNegInf;
            log_p += std::log(q);
            phi = PureState::ground();
            break;
        }
        default: {
            const double q = 1.0 - gm_dt * phi.pop_e() - gp_dt * phi.pop_g();
            if (!(q > 0.0)) return kNegInf;
            log_p += std::log(q);
            phi = apply(dagger(ctx.ops.m0), phi);
            phi.normalize();
            break;
        }
        }
    }
    const double proj =
        rec.initial_state == BasisState::E ? phi.pop_e() : phi.pop_g();
    if (!(proj > 0.0)) return kNegInf;
    return log_p + std::log(proj);
}

// ---------------------------------------------------------------------------
// No-click decomposition

struct NoClickBranch {
    Operator2 op;
    double weight; // applied as weight * op rho op^dag
};

/// E0^(eta) split into the three purity-conserving branches
/// (M0, 1) + (M1, 1-eta) + (M2, 1-eta).
inline std::array<NoClickBranch, 3> decompose_noclick(const JumpOps& ops,
                                                      double eta) {
    return {NoClickBranch{ops.m0, 1.0}, NoClickBranch{ops.m1, 1.0 - eta},
            NoClickBranch{ops.m2, 1.0 - eta}};
}

/// E0^(eta)[rho] assembled from the decomposition (reference evaluator).
inline Operator2 apply_noclick_superop(const JumpOps& ops, double eta,
                                       const Operator2& rho) {
    Operator2 out = Operator2::zero();
    for (const auto& b : decompose_noclick(ops, eta)) {
        if (b.weight == 0.0) continue;
        out += cplx{b.weight} * matmul(matmul(b.op, rho), dagger(b.op));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fictitious-trajectory sampling

struct FictitiousSample {
    double q_cl_fictitious = 0.0;
    double log_weight = 0.0;
};

/// Sequential importance sampler over the fictitious pure trajectories of a
/// finite-efficiency record; one sample per (seed, trajectory, sample) stream.
/// Works for any drive; states stay pure throughout.
inline std::vector<FictitiousSample>
sample_fictitious(const TrajectoryRecord& rec, const StepSchedule& sched,
                  double eta, std::int64_t n_samples) {
    if (rec.initial_state == BasisState::Unset || rec.final_state == BasisState::Unset)
        throw std::invalid_argument("sample_fictitious: record lacks endpoints");
    const auto n_steps = static_cast<std::int64_t>(rec.outcomes.size());
    std::vector<FictitiousSample> out(static_cast<std::size_t>(n_samples));
    for (std::int64_t s = 0; s < n_samples; ++s) {
        CounterRng rng(rec.seed, StreamKind::Fictitious, rec.trajectory_index,
                       static_cast<std::uint32_t>(s));
        PureState psi = basis_state(rec.initial_state);
        double log_w = 0.0;
        KahanSum qcl;
        bool dead = false;
        for (std::int64_t n = 0; n < n_steps && !dead; ++n) {
            const StepContext& ctx = sched[static_cast<std::size_t>(n)];
            const double w1 = ctx.hs.omega1_eff;
            const double p1 = apply(ctx.ops.m1, psi).norm2();
            const double p2 = apply(ctx.ops.m2, psi).norm2();
            switch (rec.outcomes[static_cast<std::size_t>(n)]) {
            case 1: {
                const double mass = eta * p1;
                if (!(mass > 0.0)) { dead = true; break; }
                log_w += std::log(mass);
                qcl.add(-w1);
                psi = PureState::ground();
                break;
            }
            case 2: {
                const double mass = eta * p2;
                if (!(mass > 0.0)) { dead = true; break; }
                log_w += std::log(mass);
                qcl.add(w1);
                psi = PureState::excited();
                break;
            }
            default: {
                const double q00 = 1.0 - p1 - p2;
                const double q01 = (1.0 - eta) * p1;
                const double q02 = (1.0 - eta) * p2;
                const double mass = q00 + q01 + q02;
                if (!(mass > 0.0)) { dead = true; break; }
                log_w += std::log(mass);
                const double u = rng.next_uniform() * mass;
                if (u < q01) {
                    qcl.add(-w1); // hidden emission
                    psi = PureState::ground();
                } else if (u < q01 + q02) {
                    qcl.add(w1); // hidden absorption
                    psi = PureState::excited();
                } else {
                    psi = apply(ctx.ops.m0, psi);
                    psi.normalize();
                }
                break;
            }
            }
        }
        if (!dead) {
            const double proj = rec.final_state == BasisState::E ? psi.pop_e()
                                                                 : psi.pop_g();
            log_w = proj > 0.0 ? log_w + std::log(proj) : kNegInf;
        } else {
            log_w = kNegInf;
        }
        out[static_cast<std::size_t>(s)] = {qcl.value(), log_w};
    }
    return out;
}

// Fast path for diagonal drives (Landauer ramp, undriven relaxation): the
// fictitious chain is a two-state process, so hidden-jump times can be drawn
// directly from per-step survival prefix sums shared by every trajectory of a
// scenario point.
struct DiagonalSigmaSupport {
    double eta = 0.0;
    std::vector<double> omega1;       // per step
    std::vector<double> log_forced_e; // log(eta p_e(n)), emission detected from e
    std::vector<double> log_forced_g; // log(eta p_g(n)), absorption detected from g
    std::vector<double> log_mass_e;   // prefix sums of log(1 - eta p_s(n))
    std::vector<double> log_mass_g;
    std::vector<double> log_surv_e;   // prefix sums of log((1-p_s)/(1-eta p_s))
    std::vector<double> log_surv_g;
    std::vector<double> log_hidden_e; // log((1-eta) p_s(n)) per step
    std::vector<double> log_hidden_g;
};

inline bool is_diagonal_drive(const DriveProtocol& p) {
    return p.kind == DriveKind::None || p.kind == DriveKind::LandauerRamp;
}

inline DiagonalSigmaSupport make_diagonal_sigma_support(const StepSchedule& sched,
                                                        double dt, double eta) {
    DiagonalSigmaSupport s;
    s.eta = eta;
    const std::size_t n = sched.size();
    s.omega1.resize(n);
    s.log_forced_e.resize(n);
    s.log_forced_g.resize(n);
    s.log_hidden_e.resize(n);
    s.log_hidden_g.resize(n);
    s.log_mass_e.assign(n + 1, 0.0);
    s.log_mass_g.assign(n + 1, 0.0);
    s.log_surv_e.assign(n + 1, 0.0);
    s.log_surv_g.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double pe = sched[i].rates.gamma_minus * dt; // click-1 prob from |e>
        const double pg = sched[i].rates.gamma_plus * dt;  // click-2 prob from |g>
        s.omega1[i] = sched[i].hs.omega1_eff;
        s.log_forced_e[i] = std::log(eta * pe);
        s.log_forced_g[i] = std::log(eta * pg);
        s.log_hidden_e[i] = std::log((1.0 - eta) * pe);
        s.log_hidden_g[i] = std::log((1.0 - eta) * pg);
        s.log_mass_e[i + 1] = s.log_mass_e[i] + std::log1p(-eta * pe);
        s.log_mass_g[i + 1] = s.log_mass_g[i] + std::log1p(-eta * pg);
        s.log_surv_e[i + 1] =
            s.log_surv_e[i] + std::log1p(-pe) - std::log1p(-eta * pe);
        s.log_surv_g[i + 1] =
            s.log_surv_g[i] + std::log1p(-pg) - std::log1p(-eta * pg);
    }
    return s;
}

namespace detail {

/// Smallest j in (a, b] with surv[j] < threshold, or b+1 if none: the prefix
/// array is non-increasing, so binary search applies.
inline std::size_t find_crossing(const std::vector<double>& surv, std::size_t a,
                                 std::size_t b, double threshold) {
    if (surv[b] >= threshold) return b + 1;
    std::size_t lo = a + 1, hi = b; // invariant: surv[hi] < threshold
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (surv[mid] < threshold) hi = mid;
        else lo = mid + 1;
    }
    return lo;
}

} // namespace detail

/// Same sampler as above specialized to diagonal drives; draws hidden-jump
/// positions by inverting the survival prefix sums instead of stepping.
inline std::vector<FictitiousSample>
sample_fictitious_diagonal(const TrajectoryRecord& rec,
                           const DiagonalSigmaSupport& sup,
                           std::int64_t n_samples) {
    const auto n_steps = rec.outcomes.size();
    // Forced (detected) steps of the record, in order.
    std::vector<std::size_t> forced;
    for (std::size_t n = 0; n < n_steps; ++n)
        if (rec.outcomes[n] != 0) forced.push_back(n);

    std::vector<FictitiousSample> out(static_cast<std::size_t>(n_samples));
    for (std::int64_t s = 0; s < n_samples; ++s) {
        CounterRng rng(rec.seed, StreamKind::Fictitious, rec.trajectory_index,
                       static_cast<std::uint32_t>(s));
        bool in_e = rec.initial_state == BasisState::E;
        double log_w = 0.0;
        KahanSum qcl;
        bool dead = false;
        std::size_t a = 0;
        std::size_t next_forced = 0;
        while (a <= n_steps && !dead) {
            const std::size_t b =
                next_forced < forced.size() ? forced[next_forced] : n_steps;
            // Hidden jumps inside the no-click stretch [a, b).
            std::size_t pos = a;
            while (pos < b) {
                const auto& surv = in_e ? sup.log_surv_e : sup.log_surv_g;
                const auto& mass = in_e ? sup.log_mass_e : sup.log_mass_g;
                const double thr = surv[pos] + std::log1p(-rng.next_uniform());
                const std::size_t j = detail::find_crossing(surv, pos, b, thr);
                if (j > b) { // survived the stretch
                    log_w += mass[b] - mass[pos];
                    pos = b;
                } else { // hidden jump at step j-1
                    const std::size_t n = j - 1;
                    log_w += mass[n + 1] - mass[pos];
                    qcl.add(in_e ? -sup.omega1[n] : sup.omega1[n]);
                    in_e = !in_e;
                    pos = n + 1;
                }
            }
            if (b == n_steps) break;
            // Forced detected click at step b.
            const auto k = rec.outcomes[b];
            if (k == 1) {
                if (!in_e) { dead = true; break; }
                log_w += sup.log_forced_e[b];
                qcl.add(-sup.omega1[b]);
                in_e = false;
            } else {
                if (in_e) { dead = true; break; }
                log_w += sup.log_forced_g[b];
                qcl.add(sup.omega1[b]);
                in_e = true;
            }
            a = b + 1;
            ++next_forced;
        }
        if (!dead) {
            const bool want_e = rec.final_state == BasisState::E;
            if (in_e != want_e) dead = true;
        }
        out[static_cast<std::size_t>(s)] = {qcl.value(), dead ? kNegInf : log_w};
    }
    return out;
}

// ---------------------------------------------------------------------------
// sigma_eta

struct SigmaEstimate {
    double sigma = 0.0;
    double stderr_ = 0.0;
    std::int64_t n_fictitious = 0;
    double effective_sample_size = 0.0;
    bool low_ess = false; // fewer than 1% effective samples: estimate unreliable
};

/// Self-normalized estimate of
///   sigma_eta = -log < e^{beta (Q_cl[gamma_F] - Q_cl^eta[gamma])} >_{F[gamma]}.
/// Exactly zero when the record has no no-click steps or eta = 1 (the sample
/// set is then degenerate at the record itself).
inline SigmaEstimate sigma_eta(std::span<const FictitiousSample> samples,
                               double q_cl_measured, double beta) {
    if (samples.empty())
        throw std::invalid_argument("sigma_eta: samples must be nonempty");
    const auto n = samples.size();
    std::vector<double> la(n), lb(n);
    for (std::size_t i = 0; i < n; ++i) {
        lb[i] = samples[i].log_weight;
        la[i] = samples[i].log_weight +
                beta * (samples[i].q_cl_fictitious - q_cl_measured);
    }
    const double lse_a = log_sum_exp(la);
    const double lse_b = log_sum_exp(lb);
    if (!std::isfinite(lse_b))
        throw std::runtime_error(
            "sigma_eta: all fictitious samples have zero weight (record "
            "inconsistent with scenario)");

    SigmaEstimate est;
    est.n_fictitious = static_cast<std::int64_t>(n);
    est.sigma = -(lse_a - lse_b) + 0.0; // +0.0 normalizes a negative zero

    // Shift by the max weight once; ESS and the delta-method variance of the
    // ratio estimator are scale invariant.
    const double shift = std::max(lse_a, lse_b);
    std::vector<double> xs(n), ys(n);
    KahanSum sx, sy, syy;
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = std::isfinite(la[i]) ? std::exp(la[i] - shift) : 0.0;
        ys[i] = std::isfinite(lb[i]) ? std::exp(lb[i] - shift) : 0.0;
        sx.add(xs[i]);
        sy.add(ys[i]);
        syy.add(ys[i] * ys[i]);
    }
    const double nn = static_cast<double>(n);
    const double mx = sx.value() / nn, my = sy.value() / nn;
    if (n > 1 && mx > 0.0 && my > 0.0) {
        KahanSum cxx, cyy, cxy;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = xs[i] - mx;
            const double dy = ys[i] - my;
            cxx.add(dx * dx);
            cyy.add(dy * dy);
            cxy.add(dx * dy);
        }
        const double vxx = cxx.value() / (nn - 1.0);
        const double vyy = cyy.value() / (nn - 1.0);
        const double vxy = cxy.value() / (nn - 1.0);
        const double var =
            (vxx / (mx * mx) + vyy / (my * my) - 2.0 * vxy / (mx * my)) / nn;
        est.stderr_ = std::sqrt(std::max(0.0, var));
    }
    est.effective_sample_size =
        syy.value() > 0.0 ? sy.value() * sy.value() / syy.value() : 0.0;
    est.low_ess = est.effective_sample_size < 0.01 * nn;
    return est;
}

/// Exact sigma = 0 shortcut for eta = 1 or N0 = 0 records.
inline SigmaEstimate sigma_eta_trivial(std::int64_t n_samples) {
    SigmaEstimate est;
    est.n_fictitious = n_samples;
    est.effective_sample_size = static_cast<double>(n_samples);
    return est;
}

// ---------------------------------------------------------------------------
// Corrected Jarzynski estimator

/// < e^{-Delta_i s^eta / k_B - sigma_eta} >; reduces bitwise to the measured
/// Jarzynski estimator when every sigma is exactly zero.
inline EnsembleStats corrected_jarzynski(std::span<const EnergyLedger> ledgers,
                                         std::span<const SigmaEstimate> sigmas,
                                         int hist_bins = 61) {
    if (ledgers.size() != sigmas.size())
        throw std::invalid_argument("corrected_jarzynski: one sigma per ledger");
    if (ledgers.size() < 2)
        throw std::invalid_argument("corrected_jarzynski: need n_traj >= 2");
    std::vector<double> dis(ledgers.size());
    std::vector<double> je(ledgers.size());
    for (std::size_t i = 0; i < ledgers.size(); ++i) {
        dis[i] = ledgers[i].entropy_production_measured;
        je[i] = std::exp(-dis[i] - sigmas[i].sigma);
    }
    EnsembleStats st;
    st.n_traj = static_cast<std::int64_t>(ledgers.size());
    const MeanStderr mj = mean_stderr(je);
    st.je_mean = mj.mean;
    st.je_stderr = mj.stderr_;
    const MeanStderr md = mean_stderr(dis);
    st.mean_dis = md.mean;
    st.dis_stderr = md.stderr_;
    st.hist = histogram(dis, hist_bins);
    return st;
}

} // namespace qjt
