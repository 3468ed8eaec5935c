#pragma once

#include <optional>
#include <stdexcept>
#include <utility>

#include "hyperepp/scatter.hpp"

namespace hyperepp {

enum class Parity { Even, Odd };

inline const char* to_string(Parity p) { return p == Parity::Even ? "even" : "odd"; }

// Result of one parity-check QND. On success the amplitude factor |T|^2 has
// been folded into the post state (norm^2 = |T|^4 for a normalized input);
// failure is heralded and leaves no post state.
struct ParityOutcome {
    QubitKind dof = QubitKind::Polarization;
    std::optional<Parity> parity; // absent on failure
    bool success = false;
    double amplitude_factor = 0.0; // |T|^2 on success
};

struct ParityResult {
    ParityOutcome outcome;
    std::optional<RegisterState> state;
};

struct SwapOutcome {
    bool success = false;
    int spin_result = -1; // electron readout of the P-P gate, -1 when n/a
    bool feedback_applied = false;
    double amplitude_factor = 0.0; // |T|^4 for P-P and S-S, 1 for P-S
};

struct SwapResult {
    SwapOutcome outcome;
    std::optional<RegisterState> state;
};

namespace detail {

inline int next_owner_id(const RegisterState& s) {
    int m = -1;
    for (const QubitLabel& q : s.labels()) m = std::max(m, q.owner);
    return m + 1;
}

inline const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Shared body of the two parity-check QNDs: a fresh ancilla spin prepared in
// the +1 diagonal state scatters both photons' DOF qubits in sequence, then
// is read out in the diagonal basis and discarded. Even parity leaves the
// spin in its prepared state, odd parity flips it.
inline ParityResult parity_qnd(QubitKind dof, int photon_a, int photon_c, const RegisterState& s,
                               const ScatteringCoefficients& c, Rng& rng, bool post_select) {
    const QubitLabel qa{dof, photon_a};
    const QubitLabel qc{dof, photon_c};
    ParityResult r;
    r.outcome.dof = dof;

    RegisterState st = s;
    const QubitLabel ancilla = spin_q(next_owner_id(st));
    st.append_qubit(ancilla, kInvSqrt2, kInvSqrt2);

    for (const QubitLabel& q : {qa, qc})
        if (!scatter_stage(q, ancilla, st, c, rng, post_select)) return r; // heralded failure

    const int bit = st.collapse_measure(ancilla, /*diagonal=*/1, rng);
    r.outcome.parity = bit == 0 ? Parity::Even : Parity::Odd;
    r.outcome.success = true;
    r.outcome.amplitude_factor = std::norm(c.T);
    r.state = remove_qubit(ancilla, st);
    return r;
}

} // namespace detail

// Nondemolition parity check on the polarization DOF of two photons; the
// spatial DOF is untouched. Success probability |T|^4.
inline ParityResult parity_qnd_pol(int photon_a, int photon_c, const RegisterState& s,
                                   const ScatteringCoefficients& c, Rng& rng,
                                   bool post_select = false) {
    return detail::parity_qnd(QubitKind::Polarization, photon_a, photon_c, s, c, rng, post_select);
}

// Mirror of parity_qnd_pol on the spatial-mode DOF; polarization untouched.
inline ParityResult parity_qnd_spa(int photon_a, int photon_c, const RegisterState& s,
                                   const ScatteringCoefficients& c, Rng& rng,
                                   bool post_select = false) {
    return detail::parity_qnd(QubitKind::SpatialMode, photon_a, photon_c, s, c, rng, post_select);
}

// SWAP gate between the polarization states of two photons. Two scattering
// rounds, each followed by Hadamards on both photons and the spin; the
// electron readout selects a known residual phase pattern that the feed-back
// phase flip removes. Spatial-mode states (including any entanglement with
// third parties) are spectators. Success probability |T|^8.
inline SwapResult swap_pp(int photon_a, int photon_a2, const RegisterState& s,
                          const ScatteringCoefficients& c, Rng& rng, bool post_select = false) {
    const QubitLabel qa = pol_q(photon_a);
    const QubitLabel qa2 = pol_q(photon_a2);
    SwapResult r;

    RegisterState st = s;
    const QubitLabel ancilla = spin_q(detail::next_owner_id(st));
    st.append_qubit(ancilla, detail::kInvSqrt2, detail::kInvSqrt2);

    for (int round = 0; round < 2; ++round) {
        for (const QubitLabel& q : {qa, qa2})
            if (!scatter_stage(q, ancilla, st, c, rng, post_select)) return r;
        st.apply_matrix(qa, detail::hadamard());
        st.apply_matrix(qa2, detail::hadamard());
        st.apply_matrix(ancilla, detail::hadamard());
    }

    const int bit = st.collapse_measure(ancilla, /*diagonal=*/0, rng);
    if (bit == 1) {
        st.apply_matrix(qa, detail::pauli_z());
        st.apply_matrix(qa2, detail::pauli_z());
        r.outcome.feedback_applied = true;
    }
    r.outcome.success = true;
    r.outcome.spin_result = bit;
    const double t2 = std::norm(c.T);
    r.outcome.amplitude_factor = t2 * t2;
    r.state = remove_qubit(ancilla, st);
    return r;
}

// Deterministic SWAP between the polarization and spatial-mode qubits of the
// same photon (linear optics only, unit efficiency).
inline RegisterState swap_ps(int photon, const RegisterState& s) {
    RegisterState out = s;
    out.apply_swap(pol_q(photon), spa_q(photon));
    return out;
}

// SWAP gate between the spatial-mode states of two photons: a P-P SWAP
// sandwiched between P-S SWAPs. Polarization states come back untouched; the
// amplitude factor is the P-P gate's |T|^4.
inline SwapResult swap_ss(int photon_a, int photon_a2, const RegisterState& s,
                          const ScatteringCoefficients& c, Rng& rng, bool post_select = false) {
    RegisterState st = swap_ps(photon_a2, swap_ps(photon_a, s));
    SwapResult r = swap_pp(photon_a, photon_a2, st, c, rng, post_select);
    if (!r.outcome.success) {
        r.state.reset();
        return r;
    }
    r.state = swap_ps(photon_a2, swap_ps(photon_a, *r.state));
    return r;
}

} // namespace hyperepp
