#pragma once

// Engineered thermal reservoir for the effective qubit.
//
// Works in natural units hbar = k_B = 1; frequencies set the energy scale and
// temperature is held as the inverse temperature beta (beta = 0 is infinite
// temperature). The driven three-level realization enters only through the
// effective rates: Gamma-(t) = Gamma0 (nbar+1), Gamma+(t) = Gamma0 nbar, which
// keep the effective temperature fixed while the qubit frequency is ramped.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qjt {

struct BathSpec {
    /// Inverse temperature, units of 1/angular frequency. beta >= 0.
    double beta = 1.0;
    /// Spontaneous emission rate Gamma0 of the effective qubit. > 0.
    double gamma0 = 1.0;
};

inline void validate(const BathSpec& bath) {
    if (!(bath.gamma0 > 0.0))
        throw std::invalid_argument("bath: gamma0 must be > 0");
    if (!(bath.beta >= 0.0))
        throw std::invalid_argument("bath: beta must be >= 0");
}

/// Rates serving one instantaneous qubit frequency omega1.
struct RatePoint {
    double gamma_plus = 0.0;  // incoherent g -> e
    double gamma_minus = 0.0; // incoherent e -> g
    double omega_laser = 0.0; // Omega(t) schedule of the raising drive, reporting only
    double omega1 = 0.0;      // frequency these rates serve
};

/// Mean thermal photon number 1/(e^{beta omega1} - 1). Infinite temperature
/// (beta*omega1 == 0) returns +inf.
inline double nbar(double omega1, const BathSpec& bath) {
    if (!(omega1 > 0.0))
        throw std::domain_error("nbar: omega1 must be > 0");
    const double x = bath.beta * omega1;
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / std::expm1(x);
}

inline RatePoint rates_for(double omega1, const BathSpec& bath) {
    const double n = nbar(omega1, bath);
    if (!std::isfinite(n))
        throw std::domain_error("rates_for: infinite-temperature bath has no finite rates");
    RatePoint r;
    r.gamma_minus = bath.gamma0 * (n + 1.0);
    r.gamma_plus = bath.gamma0 * n;
    r.omega_laser = bath.gamma0 * std::sqrt((n + 1.0) * n);
    r.omega1 = omega1;
    return r;
}

/// Inverts detailed balance: returns beta*omega1 = ln(Gamma-/Gamma+).
inline double effective_temperature(double gamma_plus, double gamma_minus,
                                    double /*omega1*/ = 0.0) {
    if (!(gamma_plus > 0.0))
        throw std::domain_error("effective_temperature: gamma_plus must be > 0");
    if (!(gamma_plus < gamma_minus))
        throw std::domain_error(
            "effective_temperature: need gamma_plus < gamma_minus (negative "
            "temperature out of scope)");
    return std::log(gamma_minus / gamma_plus);
}

/// Adiabatic elimination of the metastable level: Gamma+ = 4 Omega^2 / Gamma.
/// Valid in the weak-drive regime Omega << Gamma; `validity` (optional) is set
/// false when Omega/Gamma > 0.1.
inline double gamma_plus_from_raw(double omega_laser, double gamma_metastable,
                                  bool* validity = nullptr) {
    if (!(omega_laser >= 0.0) || !(gamma_metastable > 0.0))
        throw std::domain_error("gamma_plus_from_raw: nonpositive input");
    if (validity) *validity = omega_laser <= 0.1 * gamma_metastable;
    return 4.0 * omega_laser * omega_laser / gamma_metastable;
}

/// Steady-state excited population Gamma+/(Gamma+ + Gamma-) = nbar/(2 nbar + 1).
inline double thermal_population(double omega1, const BathSpec& bath) {
    const double x = bath.beta * omega1;
    if (!(omega1 > 0.0))
        throw std::domain_error("thermal_population: omega1 must be > 0");
    if (x == 0.0) return 0.5;
    // nbar/(2 nbar + 1) rewritten to stay finite for small x.
    const double em = std::expm1(x);
    return 1.0 / (2.0 + em);
}

/// Gibbs weight of |e> at frequency omega1: e^{-beta omega1}/(1 + e^{-beta omega1}).
inline double gibbs_excited_probability(double beta, double omega1) {
    const double w = std::exp(-beta * omega1);
    return w / (1.0 + w);
}

} // namespace qjt
