#pragma once

// Time-dependent driving Hamiltonians H(t) = H0 + H_d(t).
//
// Two physical protocols are exposed:
//   * LandauerRamp:  H_d(t) = (omega1_0/2) eps (t - t_i) sigma_z, lab frame.
//   * RabiResonant:  H_d(t) = (g/2)(sigma e^{i w1 t} + h.c.), stepped in the
//     frame rotating at omega1 where it becomes the static (g/2) sigma_x.
// RabiResonantLab steps the same drive in the lab frame; it exists so the
// rotating-frame bookkeeping can be validated against a direct simulation at
// moderate omega1/Gamma- and is not exposed as a preset.
//
// A sample carries the stepping-frame Hamiltonian plus `dh`, the Hermitian
// work generator for one step: <psi| dh |psi> is the work increment produced
// by the Hamiltonian's explicit time dependence over [t, t+dt]. For the
// rotating frame dh is dt * e^{iH0t} (dH_d/dt) e^{-iH0t}, whose expectation
// reduces to -g omega1_0 dt Im<sigma>_rot.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "qjt/qubit.hpp"

namespace qjt {

enum class DriveKind { None, LandauerRamp, RabiResonant, RabiResonantLab };

enum class Frame { Lab, RotatingAtOmega1 };

struct DriveProtocol {
    DriveKind kind = DriveKind::None;
    double omega1_0 = 1.0; // bare qubit frequency at t_i
    double epsilon = 0.0;  // Landauer ramp slope, 1/time
    double g = 0.0;        // Rabi frequency, 1/time
    double t_i = 0.0;
    double t_f = 1.0;

    static DriveProtocol none(double omega1_0, double t_i, double t_f) {
        return {DriveKind::None, omega1_0, 0.0, 0.0, t_i, t_f};
    }
    static DriveProtocol landauer(double omega1_0, double epsilon, double t_i,
                                  double t_f) {
        return {DriveKind::LandauerRamp, omega1_0, epsilon, 0.0, t_i, t_f};
    }
    static DriveProtocol rabi(double omega1_0, double g, double t_i, double t_f) {
        return {DriveKind::RabiResonant, omega1_0, 0.0, g, t_i, t_f};
    }
    static DriveProtocol rabi_lab(double omega1_0, double g, double t_i,
                                  double t_f) {
        return {DriveKind::RabiResonantLab, omega1_0, 0.0, g, t_i, t_f};
    }
};

inline void validate(const DriveProtocol& p) {
    if (!(p.t_f > p.t_i))
        throw std::invalid_argument("drive: t_f must exceed t_i");
    if (!(p.omega1_0 > 0.0))
        throw std::invalid_argument("drive: omega1_0 must be > 0");
    if (p.epsilon < 0.0 || p.g < 0.0)
        throw std::invalid_argument("drive: epsilon and g must be >= 0");
}

struct HamiltonianSample {
    Operator2 h;      // stepping-frame Hamiltonian at t
    Operator2 dh;     // work generator over one dt (Hermitian)
    double omega1_eff = 0.0;
    Frame frame = Frame::Lab;
};

inline void check_time(const DriveProtocol& p, double t) {
    if (t < p.t_i - 1e-12 || t > p.t_f + 1e-12)
        throw std::domain_error("drive: t outside [t_i, t_f]");
}

/// omega1(t) = <e|H(t)|e> - <g|H(t)|g>.
inline double effective_frequency(const DriveProtocol& p, double t) {
    check_time(p, t);
    if (p.kind == DriveKind::LandauerRamp)
        return p.omega1_0 * (1.0 + p.epsilon * (t - p.t_i));
    return p.omega1_0; // resonant drive has no diagonal part
}

inline HamiltonianSample sample(const DriveProtocol& p, double t, double dt) {
    check_time(p, t);
    HamiltonianSample hs;
    switch (p.kind) {
    case DriveKind::None: {
        hs.h = Operator2::diag(cplx{-0.5 * p.omega1_0}, cplx{0.5 * p.omega1_0});
        hs.dh = Operator2::zero();
        hs.omega1_eff = p.omega1_0;
        hs.frame = Frame::Lab;
        break;
    }
    case DriveKind::LandauerRamp: {
        const double w = p.omega1_0 * (1.0 + p.epsilon * (t - p.t_i));
        const double dw = p.omega1_0 * p.epsilon * dt;
        hs.h = Operator2::diag(cplx{-0.5 * w}, cplx{0.5 * w});
        hs.dh = Operator2::diag(cplx{-0.5 * dw}, cplx{0.5 * dw});
        hs.omega1_eff = w;
        hs.frame = Frame::Lab;
        break;
    }
    case DriveKind::RabiResonant: {
        // Rotating at omega1: drive is static, jump operators keep their form
        // up to a global phase that cancels in every probability.
        hs.h = cplx{0.5 * p.g} * Operator2::sigma_x();
        const double a = 0.5 * p.g * p.omega1_0 * dt;
        hs.dh = Operator2{{cplx{0}, cplx{0, a}, cplx{0, -a}, cplx{0}}};
        hs.omega1_eff = p.omega1_0;
        hs.frame = Frame::RotatingAtOmega1;
        break;
    }
    case DriveKind::RabiResonantLab: {
        const cplx ph = std::polar(0.5 * p.g, p.omega1_0 * t);
        hs.h = Operator2::diag(cplx{-0.5 * p.omega1_0}, cplx{0.5 * p.omega1_0});
        hs.h.m[1] = ph;            // (g/2) e^{+i w1 t} on |g><e|
        hs.h.m[2] = std::conj(ph); // h.c.
        const cplx dph = cplx{0, p.omega1_0 * dt} * ph;
        hs.dh = Operator2{{cplx{0}, dph, std::conj(dph), cplx{0}}};
        hs.omega1_eff = p.omega1_0;
        hs.frame = Frame::Lab;
        break;
    }
    }
    return hs;
}

/// Operator whose expectation is the lab-frame energy <H0 + H_d>, expressed in
/// the stepping frame of `hs`.
inline Operator2 energy_operator(const DriveProtocol& p,
                                 const HamiltonianSample& hs) {
    if (hs.frame == Frame::Lab) return hs.h;
    return Operator2::diag(cplx{-0.5 * p.omega1_0}, cplx{0.5 * p.omega1_0}) + hs.h;
}

/// H_d(t) decomposed as delta(t) sigma_z + mu(t) sigma + mu*(t) sigma^dag,
/// always in the lab frame.
struct GeneralDriveForm {
    double delta = 0.0;
    cplx mu{0.0, 0.0};
};

inline GeneralDriveForm to_general_form(const DriveProtocol& p, double t) {
    switch (p.kind) {
    case DriveKind::LandauerRamp:
        return {0.5 * p.omega1_0 * p.epsilon * (t - p.t_i), cplx{0.0, 0.0}};
    case DriveKind::RabiResonant:
    case DriveKind::RabiResonantLab:
        return {0.0, std::polar(0.5 * p.g, p.omega1_0 * t)};
    case DriveKind::None:
    default:
        return {};
    }
}

/// H_d just after switch-on at t_i (stepping frame). The Rabi drive quenches
/// from zero; the Landauer ramp starts at zero smoothly.
inline Operator2 switch_on_operator(const DriveProtocol& p) {
    switch (p.kind) {
    case DriveKind::RabiResonant:
        return cplx{0.5 * p.g} * Operator2::sigma_x();
    case DriveKind::RabiResonantLab: {
        const cplx ph = std::polar(0.5 * p.g, p.omega1_0 * p.t_i);
        return Operator2{{cplx{0}, ph, std::conj(ph), cplx{0}}};
    }
    default:
        return Operator2::zero();
    }
}

/// H_d just before switch-off at t_f (stepping frame). Zero for protocols that
/// do not quench the drive at the end.
inline Operator2 switch_off_operator(const DriveProtocol& p) {
    switch (p.kind) {
    case DriveKind::RabiResonant:
        return cplx{0.5 * p.g} * Operator2::sigma_x();
    case DriveKind::RabiResonantLab: {
        const cplx ph = std::polar(0.5 * p.g, p.omega1_0 * p.t_f);
        return Operator2{{cplx{0}, ph, std::conj(ph), cplx{0}}};
    }
    default:
        return Operator2::zero();
    }
}

} // namespace qjt
