#pragma once

#include <cmath>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hyperepp/gadgets.hpp"

namespace hyperepp {

// Conventional photon ids: A/B form the pair kept after purification, C/D the
// sacrificed pair measured in step 1, A'/B' the partner pair pumped in step 2.
inline constexpr int kPhotonA = 0;
inline constexpr int kPhotonB = 1;
inline constexpr int kPhotonC = 2;
inline constexpr int kPhotonD = 3;
inline constexpr int kPhotonA2 = 4;
inline constexpr int kPhotonB2 = 5;

struct PairIds {
    int first = kPhotonA;
    int second = kPhotonB;
};

// Classical mixture weights of the input ensemble: each DOF of a shared pair
// is phi+ with the given probability and psi+ (a bit-flip error) otherwise.
struct MixtureSpec {
    double f1 = 1.0; // probability of phi+ in the polarization DOF
    double f2 = 1.0; // probability of phi+ in the spatial-mode DOF

    void validate() const {
        if (!(f1 > 0.0) || f1 > 1.0 || !(f2 > 0.0) || f2 > 1.0)
            throw std::invalid_argument("MixtureSpec: fidelities must lie in (0, 1]");
    }
};

// Outcome classes of the bilateral parity comparison (AC vs BD per DOF).
enum class CaseLabel {
    Case1SameSame = 1,     // both DOFs agree: round finished, pair kept
    Case2DiffDiff = 2,     // both DOFs disagree: pair discarded
    Case3DiffPolSameSpa = 3, // spatial DOF purified, polarization spoiled
    Case4SamePolDiffSpa = 4, // polarization purified, spatial DOF spoiled
};

inline const char* to_string(CaseLabel c) {
    switch (c) {
    case CaseLabel::Case1SameSame: return "case1";
    case CaseLabel::Case2DiffDiff: return "case2";
    case CaseLabel::Case3DiffPolSameSpa: return "case3";
    case CaseLabel::Case4SamePolDiffSpa: return "case4";
    }
    return "?";
}

inline CaseLabel classify_case(bool pol_same, bool spa_same) {
    if (pol_same && spa_same) return CaseLabel::Case1SameSame;
    if (!pol_same && !spa_same) return CaseLabel::Case2DiffDiff;
    return pol_same ? CaseLabel::Case4SamePolDiffSpa : CaseLabel::Case3DiffPolSameSpa;
}

enum class Correction {
    BitFlipPolCD,  // polarization bit flips on photons C and D
    BitFlipSpaCD,  // spatial-mode bit flips on photons C and D
    PhaseFlipPolB, // polarization phase flip on photon B
    PhaseFlipSpaB, // spatial-mode phase flip on photon B
};

inline const char* to_string(Correction c) {
    switch (c) {
    case Correction::BitFlipPolCD: return "bit-flip-pol-CD";
    case Correction::BitFlipSpaCD: return "bit-flip-spa-CD";
    case Correction::PhaseFlipPolB: return "phase-flip-pol-B";
    case Correction::PhaseFlipSpaB: return "phase-flip-spa-B";
    }
    return "?";
}

// Draws one hyperentangled pair from the mixture; the two DOFs are sampled
// independently.
inline std::pair<HyperBellLabel, RegisterState> sample_pair(const MixtureSpec& m, PairIds photons,
                                                            Rng& rng) {
    m.validate();
    HyperBellLabel label;
    label.pol = rng.chance(m.f1) ? BellKind::PhiPlus : BellKind::PsiPlus;
    label.spa = rng.chance(m.f2) ? BellKind::PhiPlus : BellKind::PsiPlus;
    return {label, make_bell_pair(label, photons.first, photons.second)};
}

struct Step1Result {
    bool success = false; // all four parity checks passed
    std::optional<CaseLabel> case_label;
    bool kept = false;
    std::vector<Correction> corrections;
    std::optional<RegisterState> state; // AB register when success
};

// First purification step: bilateral polarization and spatial parity checks
// on (A,C) and (B,D), normalizing bit flips on C/D when the AC parity is odd,
// Hadamards on C/D in both DOFs, destructive readout of C/D, and conditional
// phase flips on B when the C/D readouts disagree in a DOF. The pair is kept
// unless both DOF parity comparisons disagree.
inline Step1Result step1(const RegisterState& pair_ab, const RegisterState& pair_cd,
                         const ScatteringCoefficients& c, Rng& rng, bool post_select = false,
                         PairIds ab = {kPhotonA, kPhotonB}, PairIds cd = {kPhotonC, kPhotonD}) {
    Step1Result r;
    RegisterState st = tensor(pair_ab, pair_cd);
    const int a = ab.first, b = ab.second, cc = cd.first, d = cd.second;

    Parity par_ac_pol, par_ac_spa, par_bd_pol, par_bd_spa;
    struct QndCall {
        QubitKind dof;
        int p1, p2;
        Parity* out;
    };
    const QndCall calls[] = {
        {QubitKind::Polarization, a, cc, &par_ac_pol},
        {QubitKind::SpatialMode, a, cc, &par_ac_spa},
        {QubitKind::Polarization, b, d, &par_bd_pol},
        {QubitKind::SpatialMode, b, d, &par_bd_spa},
    };
    for (const QndCall& q : calls) {
        ParityResult pr = detail::parity_qnd(q.dof, q.p1, q.p2, st, c, rng, post_select);
        if (!pr.outcome.success) return r; // heralded failure, attempt consumed
        *q.out = *pr.outcome.parity;
        st = std::move(*pr.state);
    }
    r.success = true;

    const bool pol_same = par_ac_pol == par_bd_pol;
    const bool spa_same = par_ac_spa == par_bd_spa;
    r.case_label = classify_case(pol_same, spa_same);

    if (par_ac_pol == Parity::Odd) {
        st.apply_matrix(pol_q(cc), detail::pauli_x());
        st.apply_matrix(pol_q(d), detail::pauli_x());
        r.corrections.push_back(Correction::BitFlipPolCD);
    }
    if (par_ac_spa == Parity::Odd) {
        st.apply_matrix(spa_q(cc), detail::pauli_x());
        st.apply_matrix(spa_q(d), detail::pauli_x());
        r.corrections.push_back(Correction::BitFlipSpaCD);
    }
    for (int photon : {cc, d}) {
        st.apply_matrix(pol_q(photon), detail::hadamard());
        st.apply_matrix(spa_q(photon), detail::hadamard());
    }

    const int mc_pol = st.collapse_measure(pol_q(cc), 0, rng);
    const int md_pol = st.collapse_measure(pol_q(d), 0, rng);
    const int mc_spa = st.collapse_measure(spa_q(cc), 0, rng);
    const int md_spa = st.collapse_measure(spa_q(d), 0, rng);
    if (mc_pol != md_pol) {
        st.apply_matrix(pol_q(b), detail::pauli_z());
        r.corrections.push_back(Correction::PhaseFlipPolB);
    }
    if (mc_spa != md_spa) {
        st.apply_matrix(spa_q(b), detail::pauli_z());
        r.corrections.push_back(Correction::PhaseFlipSpaB);
    }

    r.state = keep_subsystem({pol_q(a), spa_q(a), pol_q(b), spa_q(b)}, st);
    r.kept = r.case_label != CaseLabel::Case2DiffDiff;
    return r;
}

// Which surviving pair absorbs the other's good DOF in step 2.
enum class Step2Arrangement {
    PumpIntoAB,   // P-P SWAPs move the case-4 pair's polarization onto AB
    PumpIntoA2B2, // S-S SWAPs move the case-3 pair's spatial state onto A'B'
};

inline const char* to_string(Step2Arrangement a) {
    return a == Step2Arrangement::PumpIntoAB ? "pump-into-ab" : "pump-into-a2b2";
}

struct Step2Result {
    bool success = false;
    std::optional<RegisterState> state; // the kept pair
    PairIds kept_ids;
};

// Second purification step (entanglement pumping): AB comes from case 3 with
// a purified spatial DOF, A'B' from case 4 with a purified polarization DOF.
// One SWAP per side moves the good DOF of one pair onto the other; the donor
// pair is discarded. Any SWAP failure aborts and both pairs are lost.
inline Step2Result step2(const RegisterState& ab_case3, const RegisterState& a2b2_case4,
                         Step2Arrangement arrangement, const ScatteringCoefficients& c, Rng& rng,
                         bool post_select = false, PairIds ab = {kPhotonA, kPhotonB},
                         PairIds a2b2 = {kPhotonA2, kPhotonB2}) {
    Step2Result r;
    RegisterState st = tensor(ab_case3, a2b2_case4);

    const bool into_ab = arrangement == Step2Arrangement::PumpIntoAB;
    for (auto [p, p2] : {std::pair{ab.first, a2b2.first}, std::pair{ab.second, a2b2.second}}) {
        SwapResult sr = into_ab ? swap_pp(p, p2, st, c, rng, post_select)
                                : swap_ss(p, p2, st, c, rng, post_select);
        if (!sr.outcome.success) return r;
        st = std::move(*sr.state);
    }

    const PairIds kept = into_ab ? ab : a2b2;
    r.state = keep_subsystem({pol_q(kept.first), spa_q(kept.first), pol_q(kept.second),
                              spa_q(kept.second)},
                             st);
    r.kept_ids = kept;
    r.success = true;
    return r;
}

// ---------------------------------------------------------------------------
// Closed-form predictions

// One round of the purification recursion per DOF: F -> F^2/(F^2+(1-F)^2).
inline double fidelity_update(double f) {
    if (!(f > 0.0) || f > 1.0)
        throw std::invalid_argument("fidelity_update: F must lie in (0, 1]");
    const double a = f * f;
    const double b = (1.0 - f) * (1.0 - f);
    return a / (a + b);
}

// Round yields: Y1 counts pairs finished by step 1 alone, Y2 adds the pairs
// recovered by pumping, which is limited by the scarcer of case 3 and case 4.
inline std::pair<double, double> yields(double f1, double f2) {
    MixtureSpec{f1, f2}.validate();
    const double a = f1 * f1 + (1.0 - f1) * (1.0 - f1);
    const double b = f2 * f2 + (1.0 - f2) * (1.0 - f2);
    const double y1 = a * b;
    const double pumped = std::min(a * 2.0 * f2 * (1.0 - f2), 2.0 * f1 * (1.0 - f1) * b);
    return {y1, y1 + pumped};
}

struct RoundFidelities {
    double f1 = 0.0, f2 = 0.0;
    double product = 0.0;
};

// Componentwise fidelity trajectory over N rounds, starting from the input
// mixture (rounds + 1 entries, the first being the input itself).
inline std::vector<RoundFidelities> iterate_rounds(const MixtureSpec& m, int rounds) {
    m.validate();
    if (rounds < 0) throw std::invalid_argument("iterate_rounds: negative round count");
    std::vector<RoundFidelities> out;
    out.reserve(rounds + 1);
    double f1 = m.f1, f2 = m.f2;
    out.push_back({f1, f2, f1 * f2});
    for (int i = 0; i < rounds; ++i) {
        f1 = fidelity_update(f1);
        f2 = fidelity_update(f2);
        out.push_back({f1, f2, f1 * f2});
    }
    return out;
}

// Detector inefficiency scales each purification step's yield by eta_d^2.
inline double detector_scaled_yield(double yield, double eta_d) {
    if (!(eta_d >= 0.0) || eta_d > 1.0)
        throw std::invalid_argument("detector_scaled_yield: eta_d must lie in [0, 1]");
    return yield * eta_d * eta_d;
}

// Fidelity left after the electron spin dephases for dt against a coherence
// time t2e: [1 + exp(-dt/t2e)] / 2.
inline double decoherence_fidelity(double dt, double t2e) {
    if (!(dt >= 0.0) || !(t2e > 0.0))
        throw std::invalid_argument("decoherence_fidelity: need dt >= 0 and t2e > 0");
    return 0.5 * (1.0 + std::exp(-dt / t2e));
}

// ---------------------------------------------------------------------------
// Per-trajectory protocol driver

struct RoundOutcome {
    bool gadget_failure = false; // a parity check or SWAP heralded failure
    std::optional<CaseLabel> case_label;
    bool kept = false;
    std::vector<Correction> corrections;
    bool step2_used = false;
    std::optional<RegisterState> final_pair_state; // relabeled to photons A,B
    int resources = 2;                             // fresh pairs consumed by this attempt
};

// Identifies which of the four {phi+,psi+}^2 combinations a kept pair is in.
// Kept states are exact hyper-Bell states; anything else is an error.
inline std::optional<HyperBellLabel> classify_plus_bell(const RegisterState& s, PairIds ids,
                                                        double tol = 1e-6) {
    for (BellKind p : {BellKind::PhiPlus, BellKind::PsiPlus})
        for (BellKind q : {BellKind::PhiPlus, BellKind::PsiPlus}) {
            const HyperBellLabel label{p, q};
            if (fidelity_to(label, s, ids.first, ids.second) >= 1.0 - tol) return label;
        }
    return std::nullopt;
}

// Runs attempts of the full two-step round. Case-3 and case-4 survivors are
// queued and paired first-in-first-out; survivors left unmatched when the
// batch ends are discarded.
class RoundRunner {
  public:
    RoundRunner(MixtureSpec mixture, ScatteringCoefficients coeffs, Step2Arrangement arrangement)
        : mixture_(mixture), coeffs_(coeffs), arrangement_(arrangement) {
        mixture_.validate();
    }

    // One attempt: samples two fresh pairs and runs step 1; a case-3/case-4
    // survivor completes step 2 as soon as a partner is available.
    RoundOutcome run_round(Rng& rng, bool post_select = false) {
        RoundOutcome out;
        auto [label_ab, ab] = sample_pair(mixture_, {kPhotonA, kPhotonB}, rng);
        auto [label_cd, cd] = sample_pair(mixture_, {kPhotonC, kPhotonD}, rng);
        (void)label_ab;
        (void)label_cd;
        Step1Result s1 = step1(ab, cd, coeffs_, rng, post_select);
        if (!s1.success) {
            out.gadget_failure = true;
            return out;
        }
        out.case_label = s1.case_label;
        out.corrections = s1.corrections;
        switch (*s1.case_label) {
        case CaseLabel::Case1SameSame:
            out.kept = true;
            out.final_pair_state = std::move(s1.state);
            break;
        case CaseLabel::Case2DiffDiff: break;
        case CaseLabel::Case3DiffPolSameSpa:
            complete_step2(std::move(*s1.state), /*is_case3=*/true, out, rng, post_select);
            break;
        case CaseLabel::Case4SamePolDiffSpa:
            complete_step2(std::move(*s1.state), /*is_case3=*/false, out, rng, post_select);
            break;
        }
        return out;
    }

    std::size_t pending_case3() const { return case3_.size(); }
    std::size_t pending_case4() const { return case4_.size(); }

  private:
    void complete_step2(RegisterState survivor, bool is_case3, RoundOutcome& out, Rng& rng,
                        bool post_select) {
        std::deque<RegisterState>& own = is_case3 ? case3_ : case4_;
        std::deque<RegisterState>& other = is_case3 ? case4_ : case3_;
        if (other.empty()) {
            own.push_back(std::move(survivor));
            return;
        }
        RegisterState partner = std::move(other.front());
        other.pop_front();
        // the case-3 pair plays AB, the case-4 pair A'B'
        RegisterState ab = is_case3 ? std::move(survivor) : std::move(partner);
        RegisterState a2b2 = is_case3 ? std::move(partner) : std::move(survivor);
        a2b2 = relabel_owner(relabel_owner(a2b2, kPhotonA, kPhotonA2), kPhotonB, kPhotonB2);

        out.step2_used = true;
        Step2Result s2 = step2(ab, a2b2, arrangement_, coeffs_, rng, post_select);
        if (!s2.success) {
            out.gadget_failure = true;
            return;
        }
        RegisterState kept = std::move(*s2.state);
        if (s2.kept_ids.first != kPhotonA)
            kept = relabel_owner(relabel_owner(kept, s2.kept_ids.first, kPhotonA),
                                 s2.kept_ids.second, kPhotonB);
        out.kept = true;
        out.final_pair_state = std::move(kept);
    }

    MixtureSpec mixture_;
    ScatteringCoefficients coeffs_;
    Step2Arrangement arrangement_;
    std::deque<RegisterState> case3_;
    std::deque<RegisterState> case4_;
};

} // namespace hyperepp
