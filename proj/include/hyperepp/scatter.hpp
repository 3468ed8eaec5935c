#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "hyperepp/cavity.hpp"
#include "hyperepp/rng.hpp"
#include "hyperepp/state.hpp"

namespace hyperepp {

// Outcome branches of the modified QD-cavity unit: the photon either passes
// (exits the working port with amplitude T), triggers the heralding detector
// (amplitude D), or is lost to cavity decay channels. Click and loss both
// herald failure of the enclosing gadget; the trajectory is discarded.
enum class UnitBranch { Pass, DetectorClick, Loss };

struct UnitOutcome {
    UnitBranch branch = UnitBranch::Loss;
    std::optional<RegisterState> post_state; // present only for Pass
    double weight = 0.0;                     // probability of the sampled branch
};

// Kraus-style branch operators of the unit acting on one photon polarization
// qubit and one electron spin. The pass branch relabels the photon
// polarization (R <-> L at the exit port), phase-flips the spin in its
// diagonal basis and carries amplitude T; the click branch leaves photon and
// spin untouched and carries amplitude D.
struct UnitBranchOperators {
    QubitLabel photon_pol{};
    QubitLabel spin{};
    Complex pass_amp{};  // T
    Complex click_amp{}; // D

    RegisterState apply_pass(const RegisterState& s) const {
        RegisterState out = s;
        out.apply_matrix(photon_pol, detail::pauli_x());
        out.apply_matrix(spin, detail::pauli_z()); // sigma_z flips phi+ <-> phi-
        out.scale(pass_amp);
        return out;
    }

    RegisterState apply_click(const RegisterState& s) const {
        RegisterState out = s;
        out.scale(click_amp);
        return out;
    }
};

inline UnitBranchOperators unit_map(QubitLabel photon_pol, QubitLabel spin,
                                    const ScatteringCoefficients& c) {
    if (photon_pol.kind != QubitKind::Polarization || spin.kind != QubitKind::Spin)
        throw std::invalid_argument("unit_map: expects one polarization qubit and one spin");
    return UnitBranchOperators{photon_pol, spin, c.T, c.D};
}

struct BranchWeights {
    double pass = 0.0, click = 0.0, loss = 0.0;
};

namespace detail {

// The weak-excitation closed forms can push |T| marginally above one at
// resonance; branch weights are renormalized at the sampling point so they
// always form a distribution.
inline BranchWeights normalize_weights(double pass, double click) {
    if (!std::isfinite(pass) || !std::isfinite(click))
        throw std::domain_error("branch weights: non-finite scattering coefficients");
    BranchWeights w;
    const double total = pass + click;
    if (total > 1.0) {
        w.pass = pass / total;
        w.click = click / total;
        w.loss = 0.0;
    } else {
        w.pass = pass;
        w.click = click;
        w.loss = 1.0 - total;
    }
    return w;
}

} // namespace detail

// Branch weights for a photon in a definite polarization entering the unit.
inline BranchWeights unit_branch_weights(const ScatteringCoefficients& c) {
    return detail::normalize_weights(std::norm(c.T), std::norm(c.D));
}

inline UnitOutcome sample_unit(QubitLabel photon_pol, QubitLabel spin, const RegisterState& s,
                               const ScatteringCoefficients& c, Rng& rng) {
    const UnitBranchOperators ops = unit_map(photon_pol, spin, c);
    const BranchWeights w = unit_branch_weights(c);
    const double u = rng.next_double();
    UnitOutcome out;
    if (u < w.pass) {
        out.branch = UnitBranch::Pass;
        out.post_state = ops.apply_pass(s);
        out.weight = w.pass;
    } else if (u < w.pass + w.click) {
        out.branch = UnitBranch::DetectorClick;
        out.weight = w.click;
    } else {
        out.branch = UnitBranch::Loss;
        out.weight = w.loss;
    }
    return out;
}

// One pass of a photon through the scattering stage as wired inside the
// gadgets: the component with DOF value 1 (L or x2) is routed through the
// unit behind a pair of wave plates, the complementary component through a
// partially transmitting mirror matched to T. On success the net action is
// the amplitude T together with a spin phase flip conditioned on the routed
// component, i.e. T * CZ(dof, spin); failure is heralded (click or loss).
// Returns false on failure; post_select forces the success branch.
inline bool scatter_stage(QubitLabel dof_qubit, QubitLabel spin, RegisterState& s,
                          const ScatteringCoefficients& c, Rng& rng, bool post_select = false) {
    const double t2 = std::norm(c.T);
    if (!post_select) {
        const double total = s.norm_squared();
        if (total < 1e-300) throw std::runtime_error("scatter_stage: zero-norm state");
        const std::size_t mask = s.bit_mask(s.position(dof_qubit));
        double w_routed = 0.0; // weight of the component that enters the unit
        for (std::size_t i = 0; i < s.dim(); ++i)
            if (i & mask) w_routed += std::norm(s.amplitudes()[i]);
        w_routed /= total;

        const double d2 = std::norm(c.D);
        double pass = t2;
        double click = d2 * w_routed;
        double loss = std::max(0.0, 1.0 - t2) * (1.0 - w_routed) +
                      std::max(0.0, 1.0 - t2 - d2) * w_routed;
        const double sum = pass + click + loss;
        if (sum > 1.0) {
            pass /= sum;
            click /= sum;
        }
        if (!rng.chance(pass)) return false;
    }
    s.apply_cz(dof_qubit, spin);
    s.scale(c.T);
    return true;
}

} // namespace hyperepp
