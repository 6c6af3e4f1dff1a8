#pragma once

// Exact complex linear algebra for a single qubit.
//
// Basis order is (|g>, |e>) everywhere: index 0 = ground, index 1 = excited.
// With that ordering sigma_z = diag(-1, +1), sigma = |g><e| lowers, and
// sigma^dag = |e><g| raises. All types are small immutable values.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

namespace qjt {

using cplx = std::complex<double>;

inline constexpr double kAlgebraTol = 1e-12;     // algebraic identities
inline constexpr double kAccumulatedTol = 1e-10; // long accumulations

// ---------------------------------------------------------------------------
// PureState

struct PureState {
    cplx g{1.0, 0.0};
    cplx e{0.0, 0.0};

    double norm2() const { return std::norm(g) + std::norm(e); }

    void normalize() {
        const double n2 = norm2();
        if (n2 < 1e-300)
            throw std::runtime_error("PureState::normalize: vanishing norm");
        const double inv = 1.0 / std::sqrt(n2);
        g *= inv;
        e *= inv;
    }

    PureState normalized() const {
        PureState out = *this;
        out.normalize();
        return out;
    }

    double pop_g() const { return std::norm(g); }
    double pop_e() const { return std::norm(e); }

    static PureState ground() { return {cplx{1.0, 0.0}, cplx{0.0, 0.0}}; }
    static PureState excited() { return {cplx{0.0, 0.0}, cplx{1.0, 0.0}}; }
    static PureState plus() {
        const double r = 1.0 / std::sqrt(2.0);
        return {cplx{r, 0.0}, cplx{r, 0.0}};
    }
};

inline cplx inner(const PureState& a, const PureState& b) {
    return std::conj(a.g) * b.g + std::conj(a.e) * b.e;
}

// ---------------------------------------------------------------------------
// Operator2: dense 2x2 complex matrix, row-major over (g, e)

struct Operator2 {
    std::array<cplx, 4> m{};

    cplx& at(int r, int c) { return m[2 * r + c]; }
    const cplx& at(int r, int c) const { return m[2 * r + c]; }

    static Operator2 zero() { return {}; }
    static Operator2 identity() { return {{cplx{1}, cplx{0}, cplx{0}, cplx{1}}}; }
    static Operator2 diag(cplx a, cplx b) { return {{a, cplx{0}, cplx{0}, b}}; }
    /// sigma = |g><e|
    static Operator2 sigma() { return {{cplx{0}, cplx{1}, cplx{0}, cplx{0}}}; }
    /// sigma^dag = |e><g|
    static Operator2 sigma_dag() { return {{cplx{0}, cplx{0}, cplx{1}, cplx{0}}}; }
    /// sigma_z = |e><e| - |g><g|
    static Operator2 sigma_z() { return diag(cplx{-1}, cplx{1}); }
    static Operator2 sigma_x() { return {{cplx{0}, cplx{1}, cplx{1}, cplx{0}}}; }
    static Operator2 sigma_y() {
        return {{cplx{0}, cplx{0, -1}, cplx{0, 1}, cplx{0}}};
    }
    static Operator2 projector_g() { return diag(cplx{1}, cplx{0}); }
    static Operator2 projector_e() { return diag(cplx{0}, cplx{1}); }

    Operator2& operator+=(const Operator2& o) {
        for (int i = 0; i < 4; ++i) m[i] += o.m[i];
        return *this;
    }
    Operator2& operator-=(const Operator2& o) {
        for (int i = 0; i < 4; ++i) m[i] -= o.m[i];
        return *this;
    }
    Operator2& operator*=(cplx s) {
        for (int i = 0; i < 4; ++i) m[i] *= s;
        return *this;
    }

    friend Operator2 operator+(Operator2 a, const Operator2& b) { return a += b; }
    friend Operator2 operator-(Operator2 a, const Operator2& b) { return a -= b; }
    friend Operator2 operator*(cplx s, Operator2 a) { return a *= s; }
    friend Operator2 operator*(Operator2 a, cplx s) { return a *= s; }
};

inline Operator2 matmul(const Operator2& a, const Operator2& b) {
    Operator2 r;
    r.m[0] = a.m[0] * b.m[0] + a.m[1] * b.m[2];
    r.m[1] = a.m[0] * b.m[1] + a.m[1] * b.m[3];
    r.m[2] = a.m[2] * b.m[0] + a.m[3] * b.m[2];
    r.m[3] = a.m[2] * b.m[1] + a.m[3] * b.m[3];
    return r;
}

inline Operator2 dagger(const Operator2& a) {
    return {{std::conj(a.m[0]), std::conj(a.m[2]), std::conj(a.m[1]),
             std::conj(a.m[3])}};
}

inline cplx trace(const Operator2& a) { return a.m[0] + a.m[3]; }

inline cplx det(const Operator2& a) { return a.m[0] * a.m[3] - a.m[1] * a.m[2]; }

/// Largest absolute entry; cheap stand-in for a matrix norm on 2x2 inputs.
inline double max_abs(const Operator2& a) {
    double r = 0.0;
    for (const auto& z : a.m) r = std::max(r, std::abs(z));
    return r;
}

/// Spectral norm (largest singular value).
inline double spectral_norm(const Operator2& a) {
    // Eigenvalues of the 2x2 positive matrix a^dag a.
    const Operator2 g = matmul(dagger(a), a);
    const double tr = std::real(trace(g));
    const double dt = std::real(det(g));
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - dt));
    return std::sqrt(std::max(0.0, tr / 2.0 + disc));
}

inline bool is_hermitian(const Operator2& a, double tol = kAlgebraTol) {
    return std::abs(a.m[0] - std::conj(a.m[0])) <= 2 * tol &&
           std::abs(a.m[3] - std::conj(a.m[3])) <= 2 * tol &&
           std::abs(a.m[1] - std::conj(a.m[2])) <= tol;
}

inline PureState apply(const Operator2& op, const PureState& psi) {
    return {op.m[0] * psi.g + op.m[1] * psi.e, op.m[2] * psi.g + op.m[3] * psi.e};
}

inline cplx expectation(const Operator2& op, const PureState& psi) {
    const PureState ap = apply(op, psi);
    return std::conj(psi.g) * ap.g + std::conj(psi.e) * ap.e;
}

inline double expectation_real(const Operator2& op, const PureState& psi) {
    return std::real(expectation(op, psi));
}

inline Operator2 anticommutator(const Operator2& a, const Operator2& b) {
    return matmul(a, b) + matmul(b, a);
}

inline Operator2 commutator(const Operator2& a, const Operator2& b) {
    return matmul(a, b) - matmul(b, a);
}

// ---------------------------------------------------------------------------
// DensityMatrix: Hermitian, unit-trace, positive conditional state

struct DensityMatrix {
    Operator2 m;

    double trace_real() const { return std::real(trace(m)); }
    double pop_g() const { return std::real(m.m[0]); }
    double pop_e() const { return std::real(m.m[3]); }
    /// <g|rho|e> coherence.
    cplx coherence() const { return m.m[1]; }

    void renormalize() {
        const double tr = trace_real();
        if (tr < 1e-300)
            throw std::runtime_error("DensityMatrix::renormalize: vanishing trace");
        m *= cplx{1.0 / tr};
    }

    /// rho <- (rho + rho^dag)/2, suppressing Hermiticity drift.
    void hermitize() {
        const cplx od = 0.5 * (m.m[1] + std::conj(m.m[2]));
        m.m[0] = cplx{std::real(m.m[0]), 0.0};
        m.m[3] = cplx{std::real(m.m[3]), 0.0};
        m.m[1] = od;
        m.m[2] = std::conj(od);
    }

    std::pair<double, double> eigenvalues() const {
        const double tr = trace_real();
        const double dt = std::real(det(m));
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - dt));
        return {tr / 2.0 - disc, tr / 2.0 + disc};
    }

    bool is_valid(double tol_herm = kAlgebraTol, double tol_tr = kAccumulatedTol,
                  double tol_pos = kAccumulatedTol) const {
        if (!is_hermitian(m, tol_herm)) return false;
        if (std::abs(trace_real() - 1.0) > tol_tr) return false;
        return eigenvalues().first >= -tol_pos;
    }

    static DensityMatrix maximally_mixed() {
        return {Operator2::diag(cplx{0.5}, cplx{0.5})};
    }
    static DensityMatrix ground() { return {Operator2::projector_g()}; }
    static DensityMatrix excited() { return {Operator2::projector_e()}; }
};

inline DensityMatrix density_from_pure(const PureState& psi) {
    DensityMatrix rho;
    rho.m.m[0] = psi.g * std::conj(psi.g);
    rho.m.m[1] = psi.g * std::conj(psi.e);
    rho.m.m[2] = psi.e * std::conj(psi.g);
    rho.m.m[3] = psi.e * std::conj(psi.e);
    return rho;
}

inline double purity(const DensityMatrix& rho) {
    return std::real(trace(matmul(rho.m, rho.m)));
}

/// Tr(rho X); real up to rounding when X is Hermitian.
inline cplx expectation(const Operator2& op, const DensityMatrix& rho) {
    return trace(matmul(rho.m, op));
}

inline double expectation_real(const Operator2& op, const DensityMatrix& rho) {
    return std::real(expectation(op, rho));
}

} // namespace qjt
