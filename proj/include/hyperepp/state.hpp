#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperepp/rng.hpp"

namespace hyperepp {

using Complex = std::complex<double>;

// Qubit kinds carried by the register. The enum order fixes the canonical
// label order together with the owner id.
enum class QubitKind : std::uint8_t { Polarization = 0, SpatialMode = 1, Spin = 2 };

// A qubit is addressed by (kind, owner); owner is a photon id for the photonic
// kinds and a QD id for spins. Circuits address qubits by label, never by
// amplitude-vector index.
struct QubitLabel {
    QubitKind kind{};
    int owner = 0;

    friend bool operator==(const QubitLabel& a, const QubitLabel& b) {
        return a.owner == b.owner && a.kind == b.kind;
    }
    friend bool operator!=(const QubitLabel& a, const QubitLabel& b) { return !(a == b); }
    friend bool operator<(const QubitLabel& a, const QubitLabel& b) {
        if (a.owner != b.owner) return a.owner < b.owner;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    }
};

inline QubitLabel pol_q(int photon) { return {QubitKind::Polarization, photon}; }
inline QubitLabel spa_q(int photon) { return {QubitKind::SpatialMode, photon}; }
inline QubitLabel spin_q(int qd) { return {QubitKind::Spin, qd}; }

inline std::string to_string(const QubitLabel& q) {
    const char* k = q.kind == QubitKind::Polarization ? "pol"
                    : q.kind == QubitKind::SpatialMode ? "spa"
                                                       : "spin";
    return std::string(k) + "#" + std::to_string(q.owner);
}

enum class NormClass { Normalized, Subnormalized };

// Pure state of a register of labeled qubits, stored as a dense complex
// amplitude vector of length 2^n. Labels are kept sorted in canonical
// (owner, kind) order; the bit of the label at position p sits at
// 1 << (n - 1 - p), with bit value 0 meaning R / x1 / spin-up.
//
// Subnormalized states carry an accumulated branch amplitude (for example the
// global T^2 of a successful parity check), so post-selected success
// probabilities can be read off as norm^2.
class RegisterState {
  public:
    RegisterState() = default;

    RegisterState(std::vector<QubitLabel> labels, std::vector<Complex> amplitudes) {
        if (labels.size() > 30)
            throw std::invalid_argument("RegisterState: too many qubits");
        if (amplitudes.size() != (std::size_t{1} << labels.size()))
            throw std::invalid_argument("RegisterState: amplitude vector must have length 2^n");
        const int n = static_cast<int>(labels.size());
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return labels[a] < labels[b]; });
        labels_.resize(n);
        for (int k = 0; k < n; ++k) labels_[k] = labels[order[k]];
        for (int k = 0; k + 1 < n; ++k)
            if (labels_[k] == labels_[k + 1])
                throw std::invalid_argument("RegisterState: duplicate qubit label " +
                                            to_string(labels_[k]));
        bool sorted = true;
        for (int k = 0; k < n; ++k) sorted = sorted && order[k] == k;
        if (sorted) {
            amps_ = std::move(amplitudes);
        } else {
            // new position of old position p
            std::vector<int> newpos(n);
            for (int k = 0; k < n; ++k) newpos[order[k]] = k;
            amps_.assign(amplitudes.size(), Complex{});
            for (std::size_t i = 0; i < amplitudes.size(); ++i) {
                std::size_t j = 0;
                for (int p = 0; p < n; ++p)
                    if (i >> (n - 1 - p) & 1) j |= std::size_t{1} << (n - 1 - newpos[p]);
                amps_[j] = amplitudes[i];
            }
        }
    }

    static RegisterState single(QubitLabel q, Complex a0, Complex a1) {
        return RegisterState({q}, {a0, a1});
    }

    bool empty() const { return labels_.empty(); }
    int num_qubits() const { return static_cast<int>(labels_.size()); }
    std::size_t dim() const { return amps_.size(); }
    const std::vector<QubitLabel>& labels() const { return labels_; }
    const std::vector<Complex>& amplitudes() const { return amps_; }

    bool contains(QubitLabel q) const {
        return std::binary_search(labels_.begin(), labels_.end(), q);
    }

    int position(QubitLabel q) const {
        auto it = std::lower_bound(labels_.begin(), labels_.end(), q);
        if (it == labels_.end() || !(*it == q))
            throw std::invalid_argument("RegisterState: missing qubit label " + to_string(q));
        return static_cast<int>(it - labels_.begin());
    }

    double norm_squared() const {
        double s = 0.0;
        for (const Complex& a : amps_) s += std::norm(a);
        return s;
    }
    double norm() const { return std::sqrt(norm_squared()); }

    NormClass norm_class() const {
        return std::abs(norm_squared() - 1.0) <= 1e-9 ? NormClass::Normalized
                                                      : NormClass::Subnormalized;
    }

    void scale(Complex c) {
        for (Complex& a : amps_) a *= c;
    }

    // --- in-place label-addressed primitives -------------------------------
    // The const free functions below build on these; circuit modules use them
    // directly on working copies.

    void apply_matrix(QubitLabel q, const std::array<Complex, 4>& u) {
        const std::size_t mask = bit_mask(position(q));
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) continue;
            const Complex a0 = amps_[i];
            const Complex a1 = amps_[i | mask];
            amps_[i] = u[0] * a0 + u[1] * a1;
            amps_[i | mask] = u[2] * a0 + u[3] * a1;
        }
    }

    // Phase -1 on the |1,1> component of the two addressed qubits.
    void apply_cz(QubitLabel a, QubitLabel b) {
        const std::size_t ma = bit_mask(position(a));
        const std::size_t mb = bit_mask(position(b));
        for (std::size_t i = 0; i < amps_.size(); ++i)
            if ((i & ma) && (i & mb)) amps_[i] = -amps_[i];
    }

    // Exchanges the states of two qubits (SWAP gate).
    void apply_swap(QubitLabel a, QubitLabel b) {
        const std::size_t ma = bit_mask(position(a));
        const std::size_t mb = bit_mask(position(b));
        for (std::size_t i = 0; i < amps_.size(); ++i)
            if ((i & ma) && !(i & mb)) std::swap(amps_[i], amps_[(i & ~ma) | mb]);
    }

    // Tensors a fresh qubit onto the register.
    void append_qubit(QubitLabel q, Complex a0, Complex a1) {
        if (empty()) {
            labels_ = {q};
            amps_ = {a0, a1};
            return;
        }
        if (contains(q))
            throw std::invalid_argument("RegisterState: duplicate qubit label " + to_string(q));
        auto it = std::lower_bound(labels_.begin(), labels_.end(), q);
        const int p = static_cast<int>(it - labels_.begin());
        // the low (n - p) bits keep their offsets; everything above shifts up
        const std::size_t keep = std::size_t{1} << (num_qubits() - p);
        std::vector<Complex> out(amps_.size() * 2);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            const std::size_t hi = i / keep;
            const std::size_t lo = i % keep;
            out[(hi * 2) * keep + lo] = amps_[i] * a0;
            out[(hi * 2 + 1) * keep + lo] = amps_[i] * a1;
        }
        labels_.insert(it, q);
        amps_ = std::move(out);
    }

    // Projective measurement collapsing in place. The collapsed state is
    // rescaled back to the pre-measurement norm so accumulated branch
    // amplitudes survive measurements; the returned probability is relative
    // to that norm. Outcome 0 means R/x1/up, or the +1 diagonal eigenstate.
    template <class RngT>
    int collapse_measure(QubitLabel target, int basis_diagonal, RngT& rng,
                         double* probability_out = nullptr) {
        const std::size_t mask = bit_mask(position(target));
        const double total = norm_squared();
        if (total < 1e-300) throw std::runtime_error("measure: zero-norm state");

        double p0_raw = 0.0;
        if (!basis_diagonal) {
            for (std::size_t i = 0; i < amps_.size(); ++i)
                if (!(i & mask)) p0_raw += std::norm(amps_[i]);
        } else {
            for (std::size_t i = 0; i < amps_.size(); ++i)
                if (!(i & mask)) p0_raw += 0.5 * std::norm(amps_[i] + amps_[i | mask]);
        }
        const double p0 = p0_raw / total;
        const int outcome = rng.chance(p0) ? 0 : 1;
        const double p_raw = outcome == 0 ? p0_raw : total - p0_raw;

        if (!basis_diagonal) {
            for (std::size_t i = 0; i < amps_.size(); ++i)
                if (((i & mask) != 0) != (outcome == 1)) amps_[i] = Complex{};
        } else {
            const double sign = outcome == 0 ? 1.0 : -1.0;
            for (std::size_t i = 0; i < amps_.size(); ++i) {
                if (i & mask) continue;
                const Complex v = 0.5 * (amps_[i] + sign * amps_[i | mask]);
                amps_[i] = v;
                amps_[i | mask] = sign * v;
            }
        }
        scale(std::sqrt(total / std::max(p_raw, 1e-300)));
        if (probability_out) *probability_out = outcome == 0 ? p0 : 1.0 - p0;
        return outcome;
    }

    std::size_t bit_mask(int position) const {
        return std::size_t{1} << (num_qubits() - 1 - position);
    }

  private:
    std::vector<QubitLabel> labels_;
    std::vector<Complex> amps_;
};

// ---------------------------------------------------------------------------
// Pure operations

inline RegisterState tensor(const RegisterState& a, const RegisterState& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    for (const QubitLabel& q : b.labels())
        if (a.contains(q))
            throw std::invalid_argument("tensor: overlapping qubit label " + to_string(q));
    const int na = a.num_qubits(), nb = b.num_qubits();
    std::vector<QubitLabel> labels;
    labels.reserve(na + nb);
    labels.insert(labels.end(), a.labels().begin(), a.labels().end());
    labels.insert(labels.end(), b.labels().begin(), b.labels().end());
    std::vector<Complex> amps(std::size_t{1} << (na + nb));
    for (std::size_t ia = 0; ia < a.dim(); ++ia) {
        const Complex va = a.amplitudes()[ia];
        if (va == Complex{}) continue;
        for (std::size_t ib = 0; ib < b.dim(); ++ib)
            amps[(ia << nb) | ib] = va * b.amplitudes()[ib];
    }
    return RegisterState(std::move(labels), std::move(amps)); // ctor canonicalizes the order
}

// Single-qubit elements used by the circuits: wave plates and beam splitters
// on the photonic DOFs, Hadamard on the spin.
enum class SingleQubitOp {
    HwpX,      // polarization bit flip
    PhaseZPol, // polarization phase flip
    PhaseZSpa, // spatial-mode phase flip
    HPol,      // polarization Hadamard
    HSpa,      // spatial-mode Hadamard (50:50 beam splitter)
    HSpin,     // spin Hadamard
    BitXSpa,   // spatial-mode bit flip
};

namespace detail {

inline const std::array<Complex, 4>& pauli_x() {
    static const std::array<Complex, 4> m{0.0, 1.0, 1.0, 0.0};
    return m;
}
inline const std::array<Complex, 4>& pauli_z() {
    static const std::array<Complex, 4> m{1.0, 0.0, 0.0, -1.0};
    return m;
}
inline const std::array<Complex, 4>& hadamard() {
    static const double s = 1.0 / std::sqrt(2.0);
    static const std::array<Complex, 4> m{s, s, s, -s};
    return m;
}

inline QubitKind required_kind(SingleQubitOp op) {
    switch (op) {
    case SingleQubitOp::HwpX:
    case SingleQubitOp::PhaseZPol:
    case SingleQubitOp::HPol: return QubitKind::Polarization;
    case SingleQubitOp::PhaseZSpa:
    case SingleQubitOp::HSpa:
    case SingleQubitOp::BitXSpa: return QubitKind::SpatialMode;
    case SingleQubitOp::HSpin: return QubitKind::Spin;
    }
    throw std::invalid_argument("unknown single-qubit op");
}

inline const std::array<Complex, 4>& op_matrix(SingleQubitOp op) {
    switch (op) {
    case SingleQubitOp::HwpX:
    case SingleQubitOp::BitXSpa: return pauli_x();
    case SingleQubitOp::PhaseZPol:
    case SingleQubitOp::PhaseZSpa: return pauli_z();
    default: return hadamard();
    }
}

} // namespace detail

inline RegisterState apply_single(SingleQubitOp op, QubitLabel target, const RegisterState& s) {
    if (target.kind != detail::required_kind(op))
        throw std::invalid_argument("apply_single: op/qubit kind mismatch on " + to_string(target));
    RegisterState out = s;
    out.apply_matrix(target, detail::op_matrix(op));
    return out;
}

enum class MeasureBasis { Computational, Diagonal };

struct MeasureResult {
    int outcome = 0;         // 0 = R/x1/up (or the +1 diagonal eigenstate)
    RegisterState collapsed; // rescaled to the pre-measurement norm
    double probability = 0.0;
};

inline MeasureResult measure(QubitLabel target, MeasureBasis basis, const RegisterState& s,
                             Rng& rng) {
    MeasureResult r;
    r.collapsed = s;
    r.outcome = r.collapsed.collapse_measure(target, basis == MeasureBasis::Diagonal, rng,
                                             &r.probability);
    return r;
}

// Keeps the named qubits, contracting away the rest. The discarded subsystem
// must be in a product state with the kept one (up to 1e-10 in amplitude);
// the kept state keeps the full register norm.
inline RegisterState keep_subsystem(const std::vector<QubitLabel>& keep, const RegisterState& s) {
    if (keep.empty()) throw std::invalid_argument("keep_subsystem: empty kept set");
    std::vector<QubitLabel> kept = keep;
    std::sort(kept.begin(), kept.end());
    for (std::size_t k = 0; k + 1 < kept.size(); ++k)
        if (kept[k] == kept[k + 1])
            throw std::invalid_argument("keep_subsystem: duplicate label " + to_string(kept[k]));
    const int n = s.num_qubits();
    std::vector<int> keep_pos, drop_pos;
    for (const QubitLabel& q : kept) keep_pos.push_back(s.position(q));
    for (int p = 0; p < n; ++p)
        if (!std::binary_search(kept.begin(), kept.end(), s.labels()[p])) drop_pos.push_back(p);
    const int nk = static_cast<int>(keep_pos.size());
    const int nd = static_cast<int>(drop_pos.size());
    if (nd == 0) return s;

    const std::size_t kdim = std::size_t{1} << nk;
    const std::size_t ddim = std::size_t{1} << nd;
    std::vector<Complex> m(kdim * ddim);
    for (std::size_t i = 0; i < s.dim(); ++i) {
        std::size_t ik = 0, id = 0;
        for (int k = 0; k < nk; ++k)
            if (i >> (n - 1 - keep_pos[k]) & 1) ik |= std::size_t{1} << (nk - 1 - k);
        for (int d = 0; d < nd; ++d)
            if (i >> (n - 1 - drop_pos[d]) & 1) id |= std::size_t{1} << (nd - 1 - d);
        m[ik * ddim + id] = s.amplitudes()[i];
    }

    double total = 0.0;
    std::vector<double> col(ddim, 0.0);
    for (std::size_t ik = 0; ik < kdim; ++ik)
        for (std::size_t id = 0; id < ddim; ++id) {
            const double w = std::norm(m[ik * ddim + id]);
            col[id] += w;
            total += w;
        }
    if (total < 1e-300) throw std::runtime_error("keep_subsystem: zero-norm state");
    const std::size_t jstar =
        static_cast<std::size_t>(std::max_element(col.begin(), col.end()) - col.begin());

    std::vector<Complex> u(kdim);
    for (std::size_t ik = 0; ik < kdim; ++ik) u[ik] = m[ik * ddim + jstar];
    std::vector<Complex> v(ddim);
    for (std::size_t id = 0; id < ddim; ++id) {
        Complex acc{};
        for (std::size_t ik = 0; ik < kdim; ++ik) acc += std::conj(u[ik]) * m[ik * ddim + id];
        v[id] = acc / col[jstar];
    }
    double residual = 0.0, vnorm2 = 0.0;
    for (std::size_t id = 0; id < ddim; ++id) vnorm2 += std::norm(v[id]);
    for (std::size_t ik = 0; ik < kdim; ++ik)
        for (std::size_t id = 0; id < ddim; ++id)
            residual += std::norm(m[ik * ddim + id] - u[ik] * v[id]);
    if (residual > 1e-16 * total)
        throw std::runtime_error("keep_subsystem: kept qubits are entangled with discarded ones");

    const double vnorm = std::sqrt(vnorm2);
    for (Complex& a : u) a *= vnorm;
    return RegisterState(kept, std::move(u));
}

inline RegisterState remove_qubit(QubitLabel q, const RegisterState& s) {
    std::vector<QubitLabel> keep;
    for (const QubitLabel& l : s.labels())
        if (!(l == q)) keep.push_back(l);
    if (keep.size() == s.labels().size())
        throw std::invalid_argument("remove_qubit: missing label " + to_string(q));
    return keep_subsystem(keep, s);
}

// Reduced density matrix of the named qubits, row-major over their canonical
// order. Used to verify spectator DOFs are untouched.
inline std::vector<Complex> reduced_density_matrix(const std::vector<QubitLabel>& keep,
                                                   const RegisterState& s) {
    std::vector<QubitLabel> kept = keep;
    std::sort(kept.begin(), kept.end());
    const int n = s.num_qubits();
    std::vector<int> keep_pos, drop_pos;
    for (const QubitLabel& q : kept) keep_pos.push_back(s.position(q));
    for (int p = 0; p < n; ++p)
        if (!std::binary_search(kept.begin(), kept.end(), s.labels()[p])) drop_pos.push_back(p);
    const int nk = static_cast<int>(keep_pos.size());
    const int nd = static_cast<int>(drop_pos.size());
    const std::size_t kdim = std::size_t{1} << nk;
    const std::size_t ddim = std::size_t{1} << nd;
    std::vector<Complex> m(kdim * ddim);
    for (std::size_t i = 0; i < s.dim(); ++i) {
        std::size_t ik = 0, id = 0;
        for (int k = 0; k < nk; ++k)
            if (i >> (n - 1 - keep_pos[k]) & 1) ik |= std::size_t{1} << (nk - 1 - k);
        for (int d = 0; d < nd; ++d)
            if (i >> (n - 1 - drop_pos[d]) & 1) id |= std::size_t{1} << (nd - 1 - d);
        m[ik * ddim + id] = s.amplitudes()[i];
    }
    std::vector<Complex> rho(kdim * kdim);
    for (std::size_t a = 0; a < kdim; ++a)
        for (std::size_t b = 0; b < kdim; ++b) {
            Complex acc{};
            for (std::size_t id = 0; id < ddim; ++id)
                acc += m[a * ddim + id] * std::conj(m[b * ddim + id]);
            rho[a * kdim + b] = acc;
        }
    return rho;
}

inline Complex inner_product(const RegisterState& a, const RegisterState& b) {
    if (a.labels() != b.labels())
        throw std::invalid_argument("inner_product: register label mismatch");
    Complex acc{};
    for (std::size_t i = 0; i < a.dim(); ++i)
        acc += std::conj(a.amplitudes()[i]) * b.amplitudes()[i];
    return acc;
}

inline RegisterState superpose(Complex ca, const RegisterState& a, Complex cb,
                               const RegisterState& b) {
    if (a.labels() != b.labels())
        throw std::invalid_argument("superpose: register label mismatch");
    std::vector<Complex> amps(a.dim());
    for (std::size_t i = 0; i < amps.size(); ++i)
        amps[i] = ca * a.amplitudes()[i] + cb * b.amplitudes()[i];
    return RegisterState(a.labels(), std::move(amps));
}

// Renames photon/QD owners; the register is re-canonicalized afterwards.
inline RegisterState relabel_owner(const RegisterState& s, int old_owner, int new_owner) {
    std::vector<QubitLabel> labels = s.labels();
    for (QubitLabel& q : labels)
        if (q.owner == old_owner) q.owner = new_owner;
    return RegisterState(std::move(labels), s.amplitudes());
}

// ---------------------------------------------------------------------------
// Hyperentangled Bell-state constructors

enum class BellKind : std::uint8_t { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline bool even_parity(BellKind k) { return k == BellKind::PhiPlus || k == BellKind::PhiMinus; }

inline std::string to_string(BellKind k) {
    switch (k) {
    case BellKind::PhiPlus: return "phi+";
    case BellKind::PhiMinus: return "phi-";
    case BellKind::PsiPlus: return "psi+";
    case BellKind::PsiMinus: return "psi-";
    }
    return "?";
}

inline std::optional<BellKind> bell_from_string(const std::string& s) {
    if (s == "phi+") return BellKind::PhiPlus;
    if (s == "phi-") return BellKind::PhiMinus;
    if (s == "psi+") return BellKind::PsiPlus;
    if (s == "psi-") return BellKind::PsiMinus;
    return std::nullopt;
}

// One Bell state per DOF of a photon pair.
struct HyperBellLabel {
    BellKind pol{};
    BellKind spa{};
    friend bool operator==(const HyperBellLabel& a, const HyperBellLabel& b) {
        return a.pol == b.pol && a.spa == b.spa;
    }
};

namespace detail {

inline RegisterState bell_two_qubit(BellKind k, QubitLabel qa, QubitLabel qb) {
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<Complex> amps(4, Complex{});
    switch (k) {
    case BellKind::PhiPlus: amps[0] = s; amps[3] = s; break;
    case BellKind::PhiMinus: amps[0] = s; amps[3] = -s; break;
    case BellKind::PsiPlus: amps[1] = s; amps[2] = s; break;
    case BellKind::PsiMinus: amps[1] = s; amps[2] = -s; break;
    }
    return RegisterState({qa, qb}, std::move(amps));
}

} // namespace detail

inline RegisterState make_bell_pair(HyperBellLabel label, int photon_a, int photon_b) {
    if (photon_a == photon_b)
        throw std::invalid_argument("make_bell_pair: photon ids must be distinct");
    return tensor(detail::bell_two_qubit(label.pol, pol_q(photon_a), pol_q(photon_b)),
                  detail::bell_two_qubit(label.spa, spa_q(photon_a), spa_q(photon_b)));
}

// |<label|s>|^2 / norm^2. The register must hold exactly the four qubits of
// the named photon pair.
inline double fidelity_to(HyperBellLabel label, const RegisterState& s, int photon_a,
                          int photon_b) {
    const RegisterState ref = make_bell_pair(label, photon_a, photon_b);
    if (s.labels() != ref.labels())
        throw std::invalid_argument("fidelity_to: register does not hold exactly this photon pair");
    const double n2 = s.norm_squared();
    if (n2 < 1e-300) throw std::runtime_error("fidelity_to: zero-norm state");
    return std::norm(inner_product(ref, s)) / n2;
}

} // namespace hyperepp
