#include <catch2/catch_amalgamated.hpp>

#include "hyperepp/gadgets.hpp"
#include "support/oracle.hpp"

using namespace hyperepp;
using Catch::Matchers::WithinAbs;

namespace {

const std::vector<BellKind> kAllBell = {BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus,
                                        BellKind::PsiMinus};

ScatteringCoefficients practical() {
    return branch_amplitudes(ScatteringParams::resonant(0.1, 0.2, 2.0));
}

RegisterState random_state(const std::vector<QubitLabel>& labels, Rng& rng) {
    std::vector<Complex> amps(std::size_t{1} << labels.size());
    for (Complex& a : amps)
        a = Complex(2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0);
    RegisterState s(labels, std::move(amps));
    s.scale(1.0 / s.norm());
    return s;
}

RegisterState product_pair(Complex a1, Complex b1, Complex g1, Complex d1, Complex a2, Complex b2,
                           Complex g2, Complex d2) {
    RegisterState s;
    s.append_qubit(pol_q(0), a1, b1);
    s.append_qubit(spa_q(0), g1, d1);
    s.append_qubit(pol_q(1), a2, b2);
    s.append_qubit(spa_q(1), g2, d2);
    return s;
}

double fid(const RegisterState& a, const RegisterState& b) {
    return std::norm(inner_product(a, b)) / (a.norm_squared() * b.norm_squared());
}

} // namespace

TEST_CASE("parity QND reproduces the closed-form evolution on every Bell input", "[gadgets]") {
    const ScatteringCoefficients c = practical();
    Rng rng(31);
    for (BellKind p : kAllBell)
        for (BellKind s : kAllBell) {
            const RegisterState input = make_bell_pair({p, s}, 0, 1);
            const ParityResult pol = parity_qnd_pol(0, 1, input, c, rng, /*post_select=*/true);
            REQUIRE(pol.outcome.success);
            CHECK(*pol.outcome.parity == (even_parity(p) ? Parity::Even : Parity::Odd));
            CHECK_THAT(pol.outcome.amplitude_factor, WithinAbs(std::norm(c.T), 1e-14));
            RegisterState scaled = input;
            scaled.scale(c.T * c.T);
            CHECK_THAT(superpose(1.0, *pol.state, -1.0, scaled).norm(), WithinAbs(0.0, 1e-12));

            const ParityResult spa = parity_qnd_spa(0, 1, input, c, rng, true);
            REQUIRE(spa.outcome.success);
            CHECK(*spa.outcome.parity == (even_parity(s) ? Parity::Even : Parity::Odd));
            CHECK_THAT(superpose(1.0, *spa.state, -1.0, scaled).norm(), WithinAbs(0.0, 1e-12));
        }
}

TEST_CASE("parity QND on a parity superposition collapses by the Born rule", "[gadgets]") {
    const ScatteringCoefficients ideal = ScatteringCoefficients::ideal();
    const RegisterState even = make_bell_pair({BellKind::PhiPlus, BellKind::PhiPlus}, 0, 1);
    const RegisterState odd = make_bell_pair({BellKind::PsiPlus, BellKind::PhiPlus}, 0, 1);
    const double is2 = 1.0 / std::sqrt(2.0);
    const RegisterState input = superpose(is2, even, is2, odd);

    const long n = 40000;
    long evens = 0;
    for (long i = 0; i < n; ++i) {
        Rng rng = Rng::derive(17, 2, i);
        const ParityResult r = parity_qnd_pol(0, 1, input, ideal, rng);
        REQUIRE(r.outcome.success);
        if (*r.outcome.parity == Parity::Even) {
            ++evens;
            CHECK_THAT(fid(*r.state, even), WithinAbs(1.0, 1e-10));
        } else {
            CHECK_THAT(fid(*r.state, odd), WithinAbs(1.0, 1e-10));
        }
    }
    CHECK_THAT(static_cast<double>(evens) / n, WithinAbs(0.5, oracle::band3(0.5, n)));
}

TEST_CASE("polarization and spatial checks commute and ignore each other's DOF", "[gadgets]") {
    const ScatteringCoefficients ideal = ScatteringCoefficients::ideal();
    Rng rng(41);
    const RegisterState input = make_bell_pair({BellKind::PhiPlus, BellKind::PsiPlus}, 0, 1);

    const ParityResult spa_first = parity_qnd_spa(0, 1, input, ideal, rng, true);
    const ParityResult then_pol = parity_qnd_pol(0, 1, *spa_first.state, ideal, rng, true);
    CHECK(*spa_first.outcome.parity == Parity::Odd);
    CHECK(*then_pol.outcome.parity == Parity::Even);

    const ParityResult pol_first = parity_qnd_pol(0, 1, input, ideal, rng, true);
    const ParityResult then_spa = parity_qnd_spa(0, 1, *pol_first.state, ideal, rng, true);
    CHECK(*pol_first.outcome.parity == Parity::Even);
    CHECK(*then_spa.outcome.parity == Parity::Odd);

    CHECK_THAT(fid(*then_pol.state, *then_spa.state), WithinAbs(1.0, 1e-12));
}

TEST_CASE("repeating a parity QND reproduces the first answer", "[gadgets]") {
    const ScatteringCoefficients ideal = ScatteringCoefficients::ideal();
    const RegisterState even = make_bell_pair({BellKind::PhiPlus, BellKind::PhiPlus}, 0, 1);
    const RegisterState odd = make_bell_pair({BellKind::PsiMinus, BellKind::PhiPlus}, 0, 1);
    for (long i = 0; i < 50; ++i) {
        Rng rng = Rng::derive(19, 3, i);
        const RegisterState input = superpose(0.8, even, 0.6, odd);
        const ParityResult first = parity_qnd_pol(0, 1, input, ideal, rng);
        REQUIRE(first.outcome.success);
        const ParityResult second = parity_qnd_pol(0, 1, *first.state, ideal, rng);
        REQUIRE(second.outcome.success);
        CHECK(*second.outcome.parity == *first.outcome.parity);
    }
}

TEST_CASE("traversal order does not change parity outcomes", "[gadgets]") {
    const ScatteringCoefficients c = practical();
    Rng rng(43);
    for (BellKind p : kAllBell) {
        const RegisterState input = make_bell_pair({p, BellKind::PhiPlus}, 0, 1);
        const ParityResult fwd = parity_qnd_pol(0, 1, input, c, rng, true);
        const ParityResult rev = parity_qnd_pol(1, 0, input, c, rng, true);
        CHECK(*fwd.outcome.parity == *rev.outcome.parity);
        CHECK_THAT(fid(*fwd.state, *rev.state), WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("gadget success rates match the efficiencies", "[gadgets]") {
    const ScatteringCoefficients c = practical();
    const RegisterState input = make_bell_pair({BellKind::PhiPlus, BellKind::PhiPlus}, 0, 1);
    const long n = 100000;
    long qnd_ok = 0, swap_ok = 0;
    for (long i = 0; i < n; ++i) {
        Rng rng = Rng::derive(23, 4, i);
        if (parity_qnd_pol(0, 1, input, c, rng).outcome.success) ++qnd_ok;
        Rng rng2 = Rng::derive(23, 5, i);
        if (swap_pp(0, 1, input, c, rng2).outcome.success) ++swap_ok;
    }
    const double epc = qnd_efficiency(c);
    const double esw = swap_efficiency(c);
    CHECK_THAT(static_cast<double>(qnd_ok) / n, WithinAbs(epc, oracle::band3(epc, n)));
    CHECK_THAT(static_cast<double>(swap_ok) / n, WithinAbs(esw, oracle::band3(esw, n)));
}

TEST_CASE("P-P SWAP exchanges polarization states", "[gadgets]") {
    const ScatteringCoefficients ideal = ScatteringCoefficients::ideal();

    SECTION("basis case") {
        for (long seed = 0; seed < 10; ++seed) {
            Rng rng = Rng::derive(47, 0, seed);
            const RegisterState in = product_pair(1, 0, 1, 0, 0, 1, 1, 0); // A:R, A':L, both x1
            const SwapResult r = swap_pp(0, 1, in, ideal, rng);
            REQUIRE(r.outcome.success);
            RegisterState target = in;
            target.apply_swap(pol_q(0), pol_q(1));
            CHECK_THAT(fid(*r.state, target), WithinAbs(1.0, 1e-10));
            CHECK(r.outcome.feedback_applied == (r.outcome.spin_result == 1));
        }
    }
    SECTION("weighted product case") {
        for (long seed = 0; seed < 10; ++seed) {
            Rng rng = Rng::derive(47, 1, seed);
            const RegisterState in = product_pair(0.6, 0.8, 1, 0, 1, 0, 1, 0);
            const SwapResult r = swap_pp(0, 1, in, ideal, rng);
            REQUIRE(r.outcome.success);
            RegisterState target = in;
            target.apply_swap(pol_q(0), pol_q(1));
            CHECK_THAT(fid(*r.state, target), WithinAbs(1.0, 1e-10));
            CHECK_THAT(r.outcome.amplitude_factor, WithinAbs(1.0, 1e-14));
        }
    }
    SECTION("entanglement transfer to a remote photon") {
        // photon 0 polarization-entangled with remote photon 7; after the
        // SWAP the entanglement lives on photon 1
        RegisterState in = detail::bell_two_qubit(BellKind::PhiMinus, pol_q(0), pol_q(7));
        in.append_qubit(spa_q(0), 1, 0);
        in.append_qubit(spa_q(7), 0, 1);
        in.append_qubit(pol_q(1), 0.28, 0.96);
        in.append_qubit(spa_q(1), 1, 0);
        Rng rng(53);
        const SwapResult r = swap_pp(0, 1, in, ideal, rng);
        REQUIRE(r.outcome.success);
        RegisterState target = in;
        target.apply_swap(pol_q(0), pol_q(1));
        CHECK_THAT(fid(*r.state, target), WithinAbs(1.0, 1e-10));
    }
    SECTION("spatial marginals are spectators") {
        Rng rng(59);
        for (int i = 0; i < 30; ++i) {
            const RegisterState in =
                random_state({pol_q(0), spa_q(0), pol_q(1), spa_q(1)}, rng);
            Rng rg = Rng::derive(61, 0, i);
            const SwapResult r = swap_pp(0, 1, in, practical(), rg, true);
            const auto before = reduced_density_matrix({spa_q(0), spa_q(1)}, in);
            const auto after = reduced_density_matrix({spa_q(0), spa_q(1)}, *r.state);
            const double n2 = r.state->norm_squared();
            for (std::size_t k = 0; k < before.size(); ++k)
                CHECK_THAT(std::abs(before[k] - after[k] / n2), WithinAbs(0.0, 1e-10));
        }
    }
}

TEST_CASE("P-S SWAP exchanges the two DOFs of one photon", "[gadgets]") {
    SECTION("basis case |R x2> -> |L x1>") {
        RegisterState in;
        in.append_qubit(pol_q(0), 1, 0);
        in.append_qubit(spa_q(0), 0, 1);
        const RegisterState out = swap_ps(0, in);
        CHECK_THAT(std::abs(out.amplitudes()[2] - 1.0), WithinAbs(0.0, 1e-15)); // (L, x1)
    }
    SECTION("involution") {
        Rng rng(67);
        for (int i = 0; i < 20; ++i) {
            const RegisterState in = random_state({pol_q(0), spa_q(0), pol_q(3)}, rng);
            const RegisterState back = swap_ps(0, swap_ps(0, in));
            CHECK_THAT(superpose(1.0, back, -1.0, in).norm(), WithinAbs(0.0, 1e-15));
        }
    }
    SECTION("moves Bell correlations between DOFs") {
        // photon 0 of a polarization Bell pair, both photons in x1: after the
        // hybrid SWAP the correlations connect photon 0's spatial mode with
        // photon 1's polarization
        RegisterState in = detail::bell_two_qubit(BellKind::PhiPlus, pol_q(0), pol_q(1));
        in.append_qubit(spa_q(0), 1, 0);
        in.append_qubit(spa_q(1), 1, 0);
        const RegisterState out = swap_ps(0, in);
        RegisterState expected = detail::bell_two_qubit(BellKind::PhiPlus, spa_q(0), pol_q(1));
        expected.append_qubit(pol_q(0), 1, 0);
        expected.append_qubit(spa_q(1), 1, 0);
        CHECK_THAT(superpose(1.0, out, -1.0, expected).norm(), WithinAbs(0.0, 1e-14));
    }
}

TEST_CASE("S-S SWAP exchanges spatial states and matches its decomposition", "[gadgets]") {
    const ScatteringCoefficients ideal = ScatteringCoefficients::ideal();

    SECTION("basis case") {
        Rng rng(71);
        const RegisterState in = product_pair(1, 0, 1, 0, 1, 0, 0, 1); // A:x1, A':x2
        const SwapResult r = swap_ss(0, 1, in, ideal, rng);
        REQUIRE(r.outcome.success);
        RegisterState target = in;
        target.apply_swap(spa_q(0), spa_q(1));
        CHECK_THAT(fid(*r.state, target), WithinAbs(1.0, 1e-10));
    }
    SECTION("equivalent to P-S, P-P, P-S on random product inputs") {
        Rng rng(73);
        for (int i = 0; i < 200; ++i) {
            RegisterState in;
            for (QubitLabel q : {pol_q(0), spa_q(0), pol_q(1), spa_q(1)}) {
                const double th = 3.14159265358979 * rng.next_double();
                in.append_qubit(q, std::cos(th), std::sin(th));
            }
            Rng ra = Rng::derive(79, 0, i);
            const SwapResult direct = swap_ss(0, 1, in, ideal, ra, true);
            Rng rb = Rng::derive(79, 0, i); // same stream, same measurement path
            RegisterState manual = swap_ps(1, swap_ps(0, in));
            const SwapResult pp = swap_pp(0, 1, manual, ideal, rb, true);
            manual = swap_ps(1, swap_ps(0, *pp.state));
            CHECK_THAT(fid(*direct.state, manual), WithinAbs(1.0, 1e-10));
        }
    }
    SECTION("polarization marginals are spectators") {
        Rng rng(83);
        for (int i = 0; i < 20; ++i) {
            const RegisterState in =
                random_state({pol_q(0), spa_q(0), pol_q(1), spa_q(1)}, rng);
            Rng rg = Rng::derive(89, 0, i);
            const SwapResult r = swap_ss(0, 1, in, practical(), rg, true);
            const auto before = reduced_density_matrix({pol_q(0), pol_q(1)}, in);
            const auto after = reduced_density_matrix({pol_q(0), pol_q(1)}, *r.state);
            const double n2 = r.state->norm_squared();
            for (std::size_t k = 0; k < before.size(); ++k)
                CHECK_THAT(std::abs(before[k] - after[k] / n2), WithinAbs(0.0, 1e-10));
        }
    }
}

TEST_CASE("post-success gadget fidelity does not depend on scattering quality", "[gadgets]") {
    const ScatteringCoefficients settings[] = {
        ScatteringCoefficients::ideal(),
        practical(),
        branch_amplitudes(ScatteringParams::resonant(0.3, 0.1, 1.0)),
    };
    Rng rng(97);
    for (int i = 0; i < 10; ++i) {
        const RegisterState in = random_state({pol_q(0), spa_q(0), pol_q(1), spa_q(1)}, rng);
        RegisterState target = in;
        target.apply_swap(pol_q(0), pol_q(1));
        double fids[3];
        int k = 0;
        for (const ScatteringCoefficients& c : settings) {
            Rng rg = Rng::derive(101, static_cast<std::uint64_t>(i), 0);
            const SwapResult r = swap_pp(0, 1, in, c, rg, true);
            fids[k++] = fid(*r.state, target);
        }
        CHECK_THAT(std::abs(fids[0] - fids[1]), WithinAbs(0.0, 1e-9));
        CHECK_THAT(std::abs(fids[0] - fids[2]), WithinAbs(0.0, 1e-9));
        CHECK_THAT(fids[0], WithinAbs(1.0, 1e-10));
    }
}
