#pragma once

// Independent reference computations the tests check the library against.
// Everything here is written from the closed forms directly, without going
// through the library implementation paths.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "hyperepp/state.hpp"

namespace oracle {

using Cx = std::complex<double>;

inline Cx coupled_t(double omega, double wc, double wx, double gamma, double kappa, double ks,
                    double g) {
    const Cx i(0.0, 1.0);
    const Cx num = kappa * (i * (wx - omega) + gamma / 2.0);
    const Cx den = (i * (wx - omega) + gamma / 2.0) * (i * (wc - omega) + kappa + ks / 2.0) + g * g;
    return num / den;
}

inline Cx decoupled_t0(double omega, double wc, double kappa, double ks) {
    const Cx i(0.0, 1.0);
    return -kappa / (i * (wc - omega) + kappa + ks / 2.0);
}

struct Branch {
    Cx T, D;
};

inline Branch branch(double omega, double wc, double wx, double gamma, double kappa, double ks,
                     double g) {
    const Cx t = coupled_t(omega, wc, wx, gamma, kappa, ks, g);
    const Cx r = 1.0 + t;
    const Cx t0 = decoupled_t0(omega, wc, kappa, ks);
    const Cx r0 = 1.0 + t0;
    return {(t + r - t0 - r0) / 2.0, (t + r + t0 + r0) / 2.0};
}

inline Branch branch_resonant(double gamma, double ks, double g_over_kks) {
    return branch(0, 0, 0, gamma, 1.0, ks, g_over_kks * (1.0 + ks));
}

// Amplitudes of a two-qubit Bell state, index = first_bit * 2 + second_bit.
inline std::array<Cx, 4> bell_amps(hyperepp::BellKind k) {
    const double s = 1.0 / std::sqrt(2.0);
    switch (k) {
    case hyperepp::BellKind::PhiPlus: return {s, 0, 0, s};
    case hyperepp::BellKind::PhiMinus: return {s, 0, 0, -s};
    case hyperepp::BellKind::PsiPlus: return {0, s, s, 0};
    case hyperepp::BellKind::PsiMinus: return {0, s, -s, 0};
    }
    throw std::logic_error("bad BellKind");
}

// Brute-force comparison of the AC vs BD parities for one DOF: expands
// bell(ab) (x) bell(cd) over the four-photon computational basis and checks
// whether every component has matching AC/BD parity. The answer must be the
// same for all components; anything else is flagged.
inline bool parity_same(hyperepp::BellKind ab, hyperepp::BellKind cd) {
    const auto amps_ab = bell_amps(ab);
    const auto amps_cd = bell_amps(cd);
    int seen = -1;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            if (std::abs(amps_ab[a * 2 + b]) < 1e-12) continue;
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) {
                    if (std::abs(amps_cd[c * 2 + d]) < 1e-12) continue;
                    const bool same = (a == c) == (b == d);
                    if (seen == -1) seen = same ? 1 : 0;
                    if (seen != (same ? 1 : 0))
                        throw std::logic_error("parity comparison is not component-independent");
                }
        }
    return seen == 1;
}

// 3-sigma binomial band.
inline double band3(double p, long n) {
    return 3.0 * std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

} // namespace oracle
