#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qjt/engine.hpp"
#include "qjt/estimators.hpp"
#include "qjt/experiment.hpp"
#include "support/enumeration.hpp"

using namespace qjt;

namespace {

struct Grid {
    DriveProtocol protocol;
    BathSpec bath;
    SimConfig sim;
    StepSchedule sched;
};

/// Tiny Landauer grid with gentle per-step loads for exhaustive sweeps.
Grid landauer_grid(int n_steps, double eta, double dt = 2e-4, double eps = 40.0) {
    Grid g;
    g.protocol = DriveProtocol::landauer(1.0, eps, 0.0, dt * n_steps);
    g.bath = BathSpec{1.0, 0.4};
    g.sim.dt = dt;
    g.sim.n_steps = n_steps;
    g.sim.eta = eta;
    g.sim.seed = 5150;
    g.sched = precompute_schedule(g.protocol, g.bath, g.sim);
    return g;
}

Grid rabi_grid(int n_steps, double eta) {
    Grid g;
    const double dt = 5e-3;
    g.protocol = DriveProtocol::rabi(1.0, 2.0, 0.0, dt * n_steps);
    g.bath = BathSpec{0.8, 1.0};
    g.sim.dt = dt;
    g.sim.n_steps = n_steps;
    g.sim.eta = eta;
    g.sim.seed = 6001;
    g.sched = precompute_schedule(g.protocol, g.bath, g.sim);
    return g;
}

TrajectoryRecord make_record(const Grid& g, std::vector<std::uint8_t> outcomes,
                             BasisState init, BasisState fin,
                             std::uint64_t index = 0) {
    TrajectoryRecord rec;
    rec.outcomes = std::move(outcomes);
    rec.initial_state = init;
    rec.final_state = fin;
    rec.seed = g.sim.seed;
    rec.trajectory_index = index;
    return rec;
}

double record_delta_u(const TrajectoryRecord& rec, const Grid& g) {
    const double wi = effective_frequency(g.protocol, g.protocol.t_i);
    const double wf = effective_frequency(g.protocol, g.protocol.t_f);
    return eigenenergy(rec.final_state, wf) - eigenenergy(rec.initial_state, wi);
}

} // namespace

TEST_CASE("log_sum_exp handles extremes") {
    std::vector<double> v{0.0, std::log(2.0), kNegInf};
    REQUIRE(log_sum_exp(v) == Catch::Approx(std::log(3.0)).epsilon(1e-14));
    std::vector<double> empty;
    REQUIRE(std::isinf(log_sum_exp(empty)));
    std::vector<double> big{1000.0, 1000.0};
    REQUIRE(log_sum_exp(big) == Catch::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("histogram basics") {
    std::vector<double> empty;
    const Histogram h0 = histogram(empty, 4);
    REQUIRE(h0.counts == std::vector<std::int64_t>{0, 0, 0, 0});

    std::vector<double> same(17, 3.5);
    const Histogram h1 = histogram(same, 5);
    std::int64_t total = 0;
    std::int64_t nonzero_bins = 0;
    for (auto c : h1.counts) {
        total += c;
        if (c > 0) ++nonzero_bins;
    }
    REQUIRE(total == 17);
    REQUIRE(nonzero_bins == 1);

    std::vector<double> vals{-1.0, 0.5, 2.0, 7.0};
    const Histogram h2 = histogram(vals, 2, std::pair{0.0, 2.0});
    REQUIRE(h2.underflow == 1);
    REQUIRE(h2.overflow == 1);
    REQUIRE(h2.counts[0] == 1);
    REQUIRE(h2.counts[1] == 1);
}

TEST_CASE("jarzynski estimator on degenerate input") {
    std::vector<EnergyLedger> ledgers(8);
    for (auto& l : ledgers) {
        l.entropy_production = 0.0;
        l.entropy_production_measured = 0.0;
    }
    const EnsembleStats st = jarzynski_estimator(ledgers);
    REQUIRE(st.je_mean == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(st.je_stderr == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(st.n_traj == 8);
}

TEST_CASE("forward probability: trivial and impossible records") {
    Grid g = landauer_grid(0, 1.0);
    const TrajectoryRecord empty =
        make_record(g, {}, BasisState::G, BasisState::G);
    const double wi = effective_frequency(g.protocol, 0.0);
    REQUIRE(forward_log_probability(empty, g.protocol, g.bath, g.sim, g.sched) ==
            Catch::Approx(log_gibbs_weight(g.bath.beta, wi, BasisState::G))
                .epsilon(1e-12));

    // a mismatched projection has zero probability
    const TrajectoryRecord flip = make_record(g, {}, BasisState::G, BasisState::E);
    REQUIRE(std::isinf(
        forward_log_probability(flip, g.protocol, g.bath, g.sim, g.sched)));

    // absorbing from |e> is impossible
    Grid g1 = landauer_grid(1, 1.0);
    const TrajectoryRecord absurd =
        make_record(g1, {2}, BasisState::E, BasisState::E);
    REQUIRE(std::isinf(
        forward_log_probability(absurd, g1.protocol, g1.bath, g1.sim, g1.sched)));
}

TEST_CASE("forward probabilities sum to one over all records") {
    for (double eta : {1.0, 0.5}) {
        Grid g = landauer_grid(4, eta);
        double total = 0.0;
        for (const auto& outcomes : qjt_test::all_outcome_sequences(4))
            for (BasisState init : {BasisState::G, BasisState::E})
                for (BasisState fin : {BasisState::G, BasisState::E}) {
                    const TrajectoryRecord rec = make_record(g, outcomes, init, fin);
                    const double lp = forward_log_probability(rec, g.protocol, g.bath,
                                                              g.sim, g.sched);
                    if (std::isfinite(lp)) total += std::exp(lp);
                }
        REQUIRE(total == Catch::Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("reversed probabilities sum to one and satisfy microreversibility") {
    Grid g = landauer_grid(4, 1.0);
    const FreeEnergyPair df = free_energy_change(
        g.bath.beta, effective_frequency(g.protocol, g.protocol.t_i),
        effective_frequency(g.protocol, g.protocol.t_f));
    double total_r = 0.0;
    int checked = 0;
    for (const auto& outcomes : qjt_test::all_outcome_sequences(4))
        for (BasisState init : {BasisState::G, BasisState::E})
            for (BasisState fin : {BasisState::G, BasisState::E}) {
                const TrajectoryRecord rec = make_record(g, outcomes, init, fin);
                const double lr = reversed_log_probability(rec, g.protocol, g.bath,
                                                           g.sim, g.sched);
                if (std::isfinite(lr)) total_r += std::exp(lr);
                const double ld = forward_log_probability(rec, g.protocol, g.bath,
                                                          g.sim, g.sched);
                if (!std::isfinite(ld) || !std::isfinite(lr)) continue;
                const double lhs = ld - lr;
                const double rhs =
                    g.bath.beta * (record_delta_u(rec, g) - df.delta_f -
                                   qjt_test::record_classical_heat(rec, g.sched));
                REQUIRE(lhs == Catch::Approx(rhs).margin(1e-6));
                ++checked;
            }
    REQUIRE(total_r == Catch::Approx(1.0).margin(1e-8));
    // the diagonal drive keeps states on the basis axis, so a record is
    // possible iff clicks alternate correctly and the final state matches the
    // jump parity: 2^4 jump-position subsets per initial state
    REQUIRE(checked == 32);
}

TEST_CASE("detailed balance cancels a click pair on a static grid") {
    // one emission followed by one absorption at the same frequency: the
    // reversal factors e^{-bw} e^{+bw} cancel in the Crooks combination
    Grid g = landauer_grid(2, 1.0, 2e-4, 0.0); // eps = 0: static levels
    const TrajectoryRecord rec =
        make_record(g, {1, 2}, BasisState::E, BasisState::E);
    const double ld =
        forward_log_probability(rec, g.protocol, g.bath, g.sim, g.sched);
    const double lr =
        reversed_log_probability(rec, g.protocol, g.bath, g.sim, g.sched);
    REQUIRE(std::isfinite(ld));
    // Delta U = 0, Q_cl = 0, Delta F = 0: P_d == P_r
    REQUIRE(ld == Catch::Approx(lr).margin(1e-8));
}

TEST_CASE("no-click decomposition reconstructs the finite-eta map") {
    CounterRng rng(61, StreamKind::Test, 0);
    const double dt = 5e-3;
    HamiltonianSample hs;
    hs.h = cplx{0.4} * Operator2::sigma_x() + cplx{0.3} * Operator2::sigma_z();
    hs.omega1_eff = 1.0;
    const JumpOps ops = jump_operators(hs, RatePoint{0.5, 1.2, 0.0, 1.0}, dt);

    SECTION("eta -> 1 collapses to the pure no-click branch") {
        const auto branches = decompose_noclick(ops, 1.0);
        REQUIRE(branches[1].weight == 0.0);
        REQUIRE(branches[2].weight == 0.0);
    }
    SECTION("matches the literal interpolation form on random states") {
        for (int i = 0; i < 200; ++i) {
            // random valid density matrix from a random pure-state mixture
            const double w = rng.next_uniform();
            PureState a{cplx{std::sqrt(1.0 - w)},
                        std::polar(std::sqrt(w), 2 * M_PI * rng.next_uniform())};
            a.normalize();
            const double mix = rng.next_uniform();
            Operator2 rho = cplx{1.0 - mix} * density_from_pure(a).m +
                            cplx{mix} * DensityMatrix::maximally_mixed().m;
            const double eta = rng.next_uniform();

            const Operator2 reconstructed = apply_noclick_superop(ops, eta, rho);

            // independent route: 1 - i dt [H, rho] - (eta dt / 2) {...}
            //                    + (1 - eta) dt (full dissipators)
            const double gm = 1.2, gp = 0.5;
            Operator2 literal = rho + cplx{0.0, -dt} * commutator(hs.h, rho);
            literal -= cplx{0.5 * eta * dt * gm} *
                       anticommutator(Operator2::projector_e(), rho);
            literal -= cplx{0.5 * eta * dt * gp} *
                       anticommutator(Operator2::projector_g(), rho);
            Operator2 demit = Operator2::zero(); // D[sigma] rho
            demit.m[0] = rho.m[3];
            demit += cplx{-0.5} * anticommutator(Operator2::projector_e(), rho);
            Operator2 dabs = Operator2::zero(); // D[sigma^dag] rho
            dabs.m[3] = rho.m[0];
            dabs += cplx{-0.5} * anticommutator(Operator2::projector_g(), rho);
            literal += cplx{(1.0 - eta) * dt * gm} * demit;
            literal += cplx{(1.0 - eta) * dt * gp} * dabs;

            // the Kraus product form carries the O(dt^2) M0 rho M0^dag terms
            // that the literal first-order map drops
            const double slack =
                dt * dt * std::pow(spectral_norm(hs.h) + 0.5 * (gm + gp), 2) * 4.0;
            REQUIRE(max_abs(reconstructed - literal) < std::max(1e-12, slack));
        }
    }
    SECTION("eta = 0 on the excited state weights branches as (q00, G- dt, 0)") {
        const auto branches = decompose_noclick(ops, 0.0);
        const DensityMatrix rho = DensityMatrix::excited();
        const double w0 =
            branches[0].weight *
            std::real(trace(matmul(matmul(branches[0].op, rho.m),
                                   dagger(branches[0].op))));
        const double w1 =
            branches[1].weight *
            std::real(trace(matmul(matmul(branches[1].op, rho.m),
                                   dagger(branches[1].op))));
        const double w2 =
            branches[2].weight *
            std::real(trace(matmul(matmul(branches[2].op, rho.m),
                                   dagger(branches[2].op))));
        REQUIRE(w1 == Catch::Approx(1.2 * dt).epsilon(1e-12));
        REQUIRE(w2 == 0.0);
        REQUIRE(w0 < 1.0);
    }
}

TEST_CASE("fictitious sampling: degenerate records") {
    SECTION("record with no no-click steps reproduces itself") {
        Grid g = landauer_grid(2, 0.3);
        const TrajectoryRecord rec =
            make_record(g, {1, 2}, BasisState::E, BasisState::E);
        const auto samples = sample_fictitious(rec, g.sched, g.sim.eta, 64);
        const double qcl_meas = qjt_test::record_classical_heat(rec, g.sched);
        for (const auto& s : samples) {
            REQUIRE(s.q_cl_fictitious == Catch::Approx(qcl_meas).margin(1e-14));
            REQUIRE(std::isfinite(s.log_weight));
        }
        const SigmaEstimate est = sigma_eta(samples, qcl_meas, g.bath.beta);
        REQUIRE(est.sigma == 0.0);
        REQUIRE(est.stderr_ == 0.0);
    }
    SECTION("eta -> 1: hidden branches vanish") {
        Grid g = landauer_grid(4, 1.0 - 1e-9);
        const TrajectoryRecord rec =
            make_record(g, {0, 0, 0, 0}, BasisState::G, BasisState::G);
        const auto samples = sample_fictitious(rec, g.sched, g.sim.eta, 256);
        for (const auto& s : samples)
            REQUIRE(s.q_cl_fictitious == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("fictitious sampler is unbiased for the record probability") {
    Grid g = landauer_grid(6, 0.3, 2e-3, 10.0);
    // take a record that actually occurred at this efficiency
    SimConfig c = g.sim;
    c.trajectory_index = 4;
    DensityMatrix rho = DensityMatrix::excited();
    TrajectoryRecord rec = run_trajectory(c, g.sched, rho, NullHook{});
    rec.initial_state = BasisState::E;
    rec.final_state = BasisState::G;

    const double log_pd =
        forward_log_probability(rec, g.protocol, g.bath, g.sim, g.sched);
    const double wi = effective_frequency(g.protocol, 0.0);
    const double log_pi = log_gibbs_weight(g.bath.beta, wi, rec.initial_state);

    const std::int64_t n = 20000;
    const auto samples = sample_fictitious(rec, g.sched, g.sim.eta, n);
    // E[exp(log_weight)] should equal P_d / p_i
    double mean = 0.0, m2 = 0.0;
    for (const auto& s : samples) {
        const double w = std::isfinite(s.log_weight) ? std::exp(s.log_weight) : 0.0;
        mean += w;
        m2 += w * w;
    }
    mean /= static_cast<double>(n);
    const double sd =
        std::sqrt((m2 / n - mean * mean) / static_cast<double>(n));
    const double target = std::exp(log_pd - log_pi);
    REQUIRE(std::abs(mean - target) < 3.0 * std::max(sd, 1e-12));
}

TEST_CASE("sampled sigma matches exhaustive enumeration") {
    SECTION("diagonal fast path on a Landauer grid") {
        Grid g = landauer_grid(6, 0.3, 2e-3, 10.0);
        const auto support = make_diagonal_sigma_support(g.sched, g.sim.dt, g.sim.eta);
        int tested = 0;
        for (std::uint64_t idx = 0; idx < 24; ++idx) {
            SimConfig c = g.sim;
            c.trajectory_index = idx;
            CounterRng endpoint(c.seed, StreamKind::Trajectory, idx);
            const InitialDraw init = sample_initial_state(
                g.bath, 1.0, endpoint.uniform_at(kDrawInitialState));
            DensityMatrix rho = init.state == BasisState::E
                                    ? DensityMatrix::excited()
                                    : DensityMatrix::ground();
            DensityMatrix last = rho;
            TrajectoryRecord rec = run_trajectory(
                c, g.sched, rho, [&](const DensityStepEvent& ev) { last = ev.post; });
            rec.initial_state = init.state;
            rec.final_state = final_projective_measurement(
                                  last, 1.0, endpoint.uniform_at(draw_index_final(6)))
                                  .state;
            const double qcl_meas = qjt_test::record_classical_heat(rec, g.sched);
            const auto exact = qjt_test::enumerate_fictitious(rec, g.sched, g.sim.eta,
                                                              g.bath.beta, qcl_meas);
            if (exact.total_weight <= 0.0) continue;

            const auto fast = sample_fictitious_diagonal(rec, support, 4000);
            const SigmaEstimate est_fast = sigma_eta(fast, qcl_meas, g.bath.beta);
            REQUIRE(std::abs(est_fast.sigma - exact.sigma) <
                    3.0 * std::max(est_fast.stderr_, 1e-4));

            const auto generic = sample_fictitious(rec, g.sched, g.sim.eta, 4000);
            const SigmaEstimate est_gen = sigma_eta(generic, qcl_meas, g.bath.beta);
            REQUIRE(std::abs(est_gen.sigma - exact.sigma) <
                    3.0 * std::max(est_gen.stderr_, 1e-4));
            ++tested;
        }
        REQUIRE(tested >= 10);
    }
    SECTION("generic sampler on a coherent-drive grid") {
        Grid g = rabi_grid(5, 0.4);
        SimConfig c = g.sim;
        c.trajectory_index = 2;
        DensityMatrix rho = DensityMatrix::ground();
        DensityMatrix last = rho;
        TrajectoryRecord rec = run_trajectory(
            c, g.sched, rho, [&](const DensityStepEvent& ev) { last = ev.post; });
        rec.initial_state = BasisState::G;
        rec.final_state =
            last.pop_e() >= 0.5 ? BasisState::E : BasisState::G;
        const double qcl_meas = qjt_test::record_classical_heat(rec, g.sched);
        const auto exact = qjt_test::enumerate_fictitious(rec, g.sched, g.sim.eta,
                                                          g.bath.beta, qcl_meas);
        REQUIRE(exact.total_weight > 0.0);
        const auto samples = sample_fictitious(rec, g.sched, g.sim.eta, 20000);
        const SigmaEstimate est = sigma_eta(samples, qcl_meas, g.bath.beta);
        REQUIRE(std::abs(est.sigma - exact.sigma) <
                3.0 * std::max(est.stderr_, 1e-4));
    }
}

TEST_CASE("sigma is a property of the record, not the sampler seed") {
    // hot, strongly coupled grid so hidden jumps are common and sigma is
    // comfortably nonzero
    Grid g;
    const double dt = 5e-3;
    g.protocol = DriveProtocol::landauer(1.0, 10.0, 0.0, dt * 6);
    g.bath = BathSpec{0.5, 2.0};
    g.sim.dt = dt;
    g.sim.n_steps = 6;
    g.sim.eta = 0.3;
    g.sim.seed = 5150;
    g.sched = precompute_schedule(g.protocol, g.bath, g.sim);

    TrajectoryRecord rec =
        make_record(g, {0, 0, 1, 0, 0, 0}, BasisState::E, BasisState::G, 9);
    const double qcl_meas = qjt_test::record_classical_heat(rec, g.sched);

    TrajectoryRecord rec_alt = rec;
    rec_alt.seed = 777777; // different fictitious streams
    const auto s1 = sample_fictitious(rec, g.sched, g.sim.eta, 10000);
    const auto s2 = sample_fictitious(rec_alt, g.sched, g.sim.eta, 10000);
    const SigmaEstimate e1 = sigma_eta(s1, qcl_meas, g.bath.beta);
    const SigmaEstimate e2 = sigma_eta(s2, qcl_meas, g.bath.beta);
    REQUIRE(e1.sigma != 0.0);
    REQUIRE(std::abs(e1.sigma - e2.sigma) <=
            3.0 * std::hypot(e1.stderr_, e2.stderr_) + 1e-12);
    // and both agree with the exact value
    const auto exact =
        qjt_test::enumerate_fictitious(rec, g.sched, g.sim.eta, g.bath.beta, qcl_meas);
    REQUIRE(std::abs(e1.sigma - exact.sigma) < 3.0 * std::max(e1.stderr_, 1e-4));
    // convergence also holds at the smaller sample count
    const auto s3 = sample_fictitious(rec, g.sched, g.sim.eta, 1000);
    const SigmaEstimate e3 = sigma_eta(s3, qcl_meas, g.bath.beta);
    REQUIRE(std::abs(e3.sigma - exact.sigma) < 3.0 * std::max(e3.stderr_, 1e-4));
}

TEST_CASE("corrected estimator reduces to the plain one at eta = 1") {
    std::vector<EnergyLedger> ledgers(16);
    CounterRng rng(4, StreamKind::Test, 9);
    for (auto& l : ledgers) {
        l.entropy_production_measured = 2.0 * rng.next_uniform() - 1.0;
        l.entropy_production = l.entropy_production_measured;
    }
    std::vector<SigmaEstimate> zeros(16, sigma_eta_trivial(100));
    const EnsembleStats corrected = corrected_jarzynski(ledgers, zeros);
    const EnsembleStats plain = jarzynski_estimator(ledgers, true);
    REQUIRE(corrected.je_mean == plain.je_mean); // bitwise
    REQUIRE(corrected.je_stderr == plain.je_stderr);
}

TEST_CASE("generalized fluctuation identity closes on an enumerable grid") {
    // sum over records of P_d e^{-beta(dU - dF - Qcl^eta)} e^{-sigma} = 1,
    // with sigma from exhaustive enumeration.
    Grid g = landauer_grid(4, 0.3);
    const FreeEnergyPair df = free_energy_change(
        g.bath.beta, effective_frequency(g.protocol, g.protocol.t_i),
        effective_frequency(g.protocol, g.protocol.t_f));
    double total = 0.0;
    for (const auto& outcomes : qjt_test::all_outcome_sequences(4))
        for (BasisState init : {BasisState::G, BasisState::E})
            for (BasisState fin : {BasisState::G, BasisState::E}) {
                const TrajectoryRecord rec = make_record(g, outcomes, init, fin);
                const double lp = forward_log_probability(rec, g.protocol, g.bath,
                                                          g.sim, g.sched);
                if (!std::isfinite(lp)) continue;
                const double qcl_meas =
                    qjt_test::record_classical_heat(rec, g.sched);
                const auto exact = qjt_test::enumerate_fictitious(
                    rec, g.sched, g.sim.eta, g.bath.beta, qcl_meas);
                const double dis_meas =
                    g.bath.beta *
                    (record_delta_u(rec, g) - qcl_meas - df.delta_f);
                total += std::exp(lp - dis_meas - exact.sigma);
            }
    REQUIRE(total == Catch::Approx(1.0).margin(1e-6));
}
