#pragma once

// Brute-force oracles for small grids.
//
// Everything here is test-only and intentionally re-derives weights from the
// raw jump operators instead of reusing the samplers' bookkeeping, so it can
// catch sign or weighting mistakes in the production estimators.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "qjt/engine.hpp"
#include "qjt/estimators.hpp"
#include "qjt/qubit.hpp"

namespace qjt_test {

using namespace qjt;

/// All 3^n outcome sequences of length n.
inline std::vector<std::vector<std::uint8_t>> all_outcome_sequences(int n_steps) {
    std::vector<std::vector<std::uint8_t>> out;
    std::vector<std::uint8_t> cur(static_cast<std::size_t>(n_steps), 0);
    std::function<void(int)> rec = [&](int pos) {
        if (pos == n_steps) {
            out.push_back(cur);
            return;
        }
        for (std::uint8_t k = 0; k < 3; ++k) {
            cur[static_cast<std::size_t>(pos)] = k;
            rec(pos + 1);
        }
    };
    rec(0);
    return out;
}

/// Classical heat of a detection record: -+ omega1(t_n) per recorded click.
inline double record_classical_heat(const TrajectoryRecord& rec,
                                    const StepSchedule& sched) {
    double q = 0.0;
    for (std::size_t n = 0; n < rec.outcomes.size(); ++n) {
        if (rec.outcomes[n] == 1) q -= sched[n].hs.omega1_eff;
        if (rec.outcomes[n] == 2) q += sched[n].hs.omega1_eff;
    }
    return q;
}

struct FictitiousEnumeration {
    double total_weight = 0.0;          // sum of joint weights == P_d[gamma]/p_i
    double sigma = 0.0;                 // exact sigma_eta
    std::int64_t n_paths = 0;           // number of contributing paths
};

/// Exhaustively enumerates the fictitious pure trajectories compatible with a
/// record, weighting each by its eta-decorated chain probability and the final
/// projector. sigma is computed from the exact conditional distribution.
inline FictitiousEnumeration
enumerate_fictitious(const TrajectoryRecord& rec, const StepSchedule& sched,
                     double eta, double beta, double q_cl_measured) {
    FictitiousEnumeration result;
    double num = 0.0; // sum of joint * exp(beta (Qcl_F - Qcl_meas))

    std::function<void(std::size_t, PureState, double, double)> walk =
        [&](std::size_t n, PureState psi, double weight, double qcl) {
            if (weight <= 0.0) return;
            if (n == rec.outcomes.size()) {
                const double proj =
                    rec.final_state == BasisState::E ? psi.pop_e() : psi.pop_g();
                const double joint = weight * proj;
                if (joint <= 0.0) return;
                result.total_weight += joint;
                num += joint * std::exp(beta * (qcl - q_cl_measured));
                ++result.n_paths;
                return;
            }
            const StepContext& ctx = sched[n];
            const double w1 = ctx.hs.omega1_eff;
            const double p1 = apply(ctx.ops.m1, psi).norm2();
            const double p2 = apply(ctx.ops.m2, psi).norm2();
            switch (rec.outcomes[n]) {
            case 1:
                walk(n + 1, PureState::ground(), weight * eta * p1, qcl - w1);
                break;
            case 2:
                walk(n + 1, PureState::excited(), weight * eta * p2, qcl + w1);
                break;
            default: {
                // hidden nothing / hidden emission / hidden absorption
                PureState survived = apply(ctx.ops.m0, psi);
                const double q00 = 1.0 - p1 - p2;
                if (q00 > 0.0 && survived.norm2() > 0.0) {
                    survived.normalize();
                    walk(n + 1, survived, weight * q00, qcl);
                }
                walk(n + 1, PureState::ground(), weight * (1.0 - eta) * p1, qcl - w1);
                walk(n + 1, PureState::excited(), weight * (1.0 - eta) * p2, qcl + w1);
                break;
            }
            }
        };

    walk(0, basis_state(rec.initial_state), 1.0, 0.0);
    result.sigma =
        result.total_weight > 0.0 ? -std::log(num / result.total_weight) : 0.0;
    return result;
}

} // namespace qjt_test
