#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

namespace hyperepp {

using Complex = std::complex<double>;

// Physical parameters of the quantum-dot / double-sided-cavity scatterer.
// All rates and frequencies are dimensionless, expressed in units of the
// cavity decay rate kappa (so kappa == 1 by convention).
struct ScatteringParams {
    double omega = 0.0;   // photon frequency
    double omega_c = 0.0; // cavity mode frequency
    double omega_x = 0.0; // trion transition frequency
    double gamma = 0.1;   // trion dipole decay rate
    double kappa = 1.0;   // cavity decay rate (reference unit)
    double kappa_s = 0.0; // cavity side-leakage rate
    double g = 0.0;       // QD-cavity coupling strength

    // Resonant configuration parameterized the way the efficiency curves
    // are drawn: the coupling is given as the ratio g/(kappa+kappa_s).
    static ScatteringParams resonant(double gamma, double kappa_s, double g_over_kks) {
        ScatteringParams p;
        p.gamma = gamma;
        p.kappa_s = kappa_s;
        p.g = g_over_kks * (p.kappa + kappa_s);
        p.validate();
        return p;
    }

    void validate() const {
        if (!(gamma >= 0.0) || !(kappa > 0.0) || !(kappa_s >= 0.0) || !(g >= 0.0))
            throw std::invalid_argument("ScatteringParams: rates must be non-negative and kappa > 0");
        for (double v : {omega, omega_c, omega_x, gamma, kappa, kappa_s, g})
            if (!std::isfinite(v))
                throw std::invalid_argument("ScatteringParams: parameters must be finite");
    }
};

// Scattering amplitudes of the unit. r/t describe the cavity with the spin
// coupled to the photon, r0/t0 the decoupled (cold-cavity) channel. D and T
// are the detector-click and pass branch amplitudes of the modified unit.
//
// Note the coefficients follow the closed-form weak-excitation expressions
// literally, so at resonance r = 1 + t marginally exceeds one and |T| can be
// slightly above unity; branch weights are renormalized only where trajectory
// probabilities are sampled (see scatter.hpp).
struct ScatteringCoefficients {
    Complex r, t;   // coupled channel
    Complex r0, t0; // decoupled channel
    Complex D;      // (t + r + t0 + r0) / 2, heralded-failure branch
    Complex T;      // (t + r - t0 - r0) / 2, pass branch

    static ScatteringCoefficients ideal() {
        ScatteringCoefficients c;
        c.t = 0.0;
        c.r = 1.0;
        c.t0 = -1.0;
        c.r0 = 0.0;
        c.D = 0.0;
        c.T = 1.0;
        return c;
    }
};

namespace detail {
inline void check_denominator(const Complex& den) {
    if (std::abs(den) < 1e-15)
        throw std::domain_error("singular scattering parameters: vanishing denominator");
}
} // namespace detail

// Reflection/transmission of the coupled (spin-interacting) channel.
inline std::pair<Complex, Complex> coupled_coefficients(const ScatteringParams& p) {
    p.validate();
    const Complex i(0.0, 1.0);
    const Complex dx = i * (p.omega_x - p.omega) + p.gamma / 2.0;
    const Complex dc = i * (p.omega_c - p.omega) + p.kappa + p.kappa_s / 2.0;
    const Complex den = dx * dc + p.g * p.g;
    detail::check_denominator(den);
    const Complex t = p.kappa * dx / den;
    return {1.0 + t, t};
}

// Reflection/transmission of the decoupled (cold-cavity) channel. This is the
// physical model for scattering off a spin in the non-interacting ground
// state; the coupled formula at g = 0 does not reduce to it and is never used
// for that purpose.
inline std::pair<Complex, Complex> decoupled_coefficients(const ScatteringParams& p) {
    p.validate();
    const Complex i(0.0, 1.0);
    const Complex den = i * (p.omega_c - p.omega) + p.kappa + p.kappa_s / 2.0;
    detail::check_denominator(den);
    const Complex t0 = -p.kappa / den;
    return {1.0 + t0, t0};
}

inline ScatteringCoefficients branch_amplitudes(const ScatteringParams& p) {
    ScatteringCoefficients c;
    std::tie(c.r, c.t) = coupled_coefficients(p);
    std::tie(c.r0, c.t0) = decoupled_coefficients(p);
    c.D = (c.t + c.r + c.t0 + c.r0) / 2.0;
    c.T = (c.t + c.r - c.t0 - c.r0) / 2.0;
    return c;
}

// Success efficiency of one parity-check QND: |T|^4.
inline double qnd_efficiency(const ScatteringCoefficients& c) {
    const double t2 = std::norm(c.T);
    return t2 * t2;
}

inline double qnd_efficiency(const ScatteringParams& p) {
    return qnd_efficiency(branch_amplitudes(p));
}

// Success efficiency of the polarization SWAP gate: |T|^8.
inline double swap_efficiency(const ScatteringCoefficients& c) {
    const double e = qnd_efficiency(c);
    return e * e;
}

inline double swap_efficiency(const ScatteringParams& p) {
    return swap_efficiency(branch_amplitudes(p));
}

} // namespace hyperepp
