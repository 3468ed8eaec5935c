// Command-line surface of the hyper-EPP toolkit: scattering coefficients,
// single-gadget demos, purification runs, grid sweeps, figure data emission
// and the acceptance checklist.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hyperepp/verify.hpp"

namespace {

using namespace hyperepp;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerifyFailed = 2;

std::string fmt_c(Complex z) {
    std::string s = fmt_g9(z.real());
    s += z.imag() < 0 ? "-" : "+";
    s += fmt_g9(std::abs(z.imag()));
    s += "i";
    return s;
}

// Physical-parameter flags shared by the subcommands that scatter photons.
struct PhysicalArgs {
    double gamma = 0.1;
    double kappa_s = 0.2;
    double g_ratio = 2.0;
    double detuning_c = 0.0;
    double detuning_x = 0.0;
    bool ideal = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--gamma", gamma, "dipole decay rate gamma/kappa");
        cmd->add_option("--kappa-s", kappa_s, "side-leakage rate kappa_s/kappa");
        cmd->add_option("--g-ratio", g_ratio, "coupling g/(kappa+kappa_s)");
        cmd->add_option("--detuning-c", detuning_c, "omega_c - omega in units of kappa");
        cmd->add_option("--detuning-x", detuning_x, "omega_X - omega in units of kappa");
        cmd->add_flag("--ideal", ideal, "use the ideal unit (T=1, D=0)");
    }

    ScatteringParams params() const {
        ScatteringParams p = ScatteringParams::resonant(gamma, kappa_s, g_ratio);
        p.omega_c = detuning_c;
        p.omega_x = detuning_x;
        return p;
    }

    ScatteringCoefficients coefficients() const {
        return ideal ? ScatteringCoefficients::ideal() : branch_amplitudes(params());
    }
};

void print_state(const RegisterState& s, std::ostream& out) {
    for (std::size_t i = 0; i < s.dim(); ++i) {
        const Complex a = s.amplitudes()[i];
        if (std::abs(a) < 1e-12) continue;
        out << "  |";
        for (int p = 0; p < s.num_qubits(); ++p) {
            const bool bit = i >> (s.num_qubits() - 1 - p) & 1;
            const QubitLabel& q = s.labels()[p];
            const char* sym = q.kind == QubitKind::Polarization ? (bit ? "L" : "R")
                              : q.kind == QubitKind::SpatialMode ? (bit ? "x2" : "x1")
                                                                 : (bit ? "dn" : "up");
            out << (p ? " " : "") << sym;
        }
        out << ">  " << fmt_c(a) << "\n";
    }
}

int run_coeffs(const PhysicalArgs& phys) {
    const ScatteringCoefficients c = phys.coefficients();
    std::cout << "t   = " << fmt_c(c.t) << "\n"
              << "r   = " << fmt_c(c.r) << "\n"
              << "t0  = " << fmt_c(c.t0) << "\n"
              << "r0  = " << fmt_c(c.r0) << "\n"
              << "D   = " << fmt_c(c.D) << "\n"
              << "T   = " << fmt_c(c.T) << "\n"
              << "|T|^2    = " << fmt_g9(std::norm(c.T)) << "\n"
              << "eta_pc   = " << fmt_g9(qnd_efficiency(c)) << "\n"
              << "eta_swap = " << fmt_g9(swap_efficiency(c)) << "\n";
    return kExitOk;
}

int run_qnd(const PhysicalArgs& phys, const std::string& dof, const std::string& pol_bell,
            const std::string& spa_bell, long trials, std::uint64_t seed) {
    const auto pk = bell_from_string(pol_bell);
    const auto sk = bell_from_string(spa_bell);
    if (!pk || !sk) throw CLI::ValidationError("bell states must be one of phi+,phi-,psi+,psi-");
    const ScatteringCoefficients c = phys.coefficients();
    const RegisterState input = make_bell_pair({*pk, *sk}, 0, 1);

    long successes = 0, even = 0;
    double last_fidelity = -1.0;
    for (long i = 0; i < trials; ++i) {
        Rng rng = Rng::derive(seed, 1, static_cast<std::uint64_t>(i));
        ParityResult pr = dof == "pol" ? parity_qnd_pol(0, 1, input, c, rng)
                                       : parity_qnd_spa(0, 1, input, c, rng);
        if (!pr.outcome.success) continue;
        ++successes;
        if (*pr.outcome.parity == Parity::Even) ++even;
        last_fidelity = std::norm(inner_product(input, *pr.state)) /
                        (input.norm_squared() * pr.state->norm_squared());
    }
    std::cout << "input (" << pol_bell << "," << spa_bell << "), " << dof << "-parity QND\n"
              << "successes: " << successes << "/" << trials
              << " (expected rate " << fmt_g9(qnd_efficiency(c)) << ")\n";
    if (successes > 0) {
        std::cout << "even outcomes: " << even << ", odd outcomes: " << successes - even << "\n"
                  << "post-state fidelity to input: " << fmt_g9(last_fidelity) << "\n";
    }
    return kExitOk;
}

int run_swap(const PhysicalArgs& phys, const std::string& gate, double a1, double b1, double a2,
             double b2, std::uint64_t seed) {
    const ScatteringCoefficients c = phys.coefficients();
    Rng rng(seed);
    const double n1 = std::sqrt(a1 * a1 + b1 * b1), n2 = std::sqrt(a2 * a2 + b2 * b2);
    if (n1 == 0.0 || n2 == 0.0) throw CLI::ValidationError("input amplitudes must not vanish");

    RegisterState s;
    s.append_qubit(pol_q(0), a1 / n1, b1 / n1);
    s.append_qubit(spa_q(0), 1.0, 0.0);
    s.append_qubit(pol_q(1), a2 / n2, b2 / n2);
    s.append_qubit(spa_q(1), 0.0, 1.0); // photon A' enters in x2 to make P-S visible
    std::cout << "input:\n";
    print_state(s, std::cout);

    if (gate == "ps") {
        const RegisterState out = swap_ps(0, s);
        std::cout << "P-S SWAP on photon 0:\n";
        print_state(out, std::cout);
        return kExitOk;
    }
    const SwapResult r = gate == "pp" ? swap_pp(0, 1, s, c, rng) : swap_ss(0, 1, s, c, rng);
    if (!r.outcome.success) {
        std::cout << "heralded failure (expected success rate " << fmt_g9(swap_efficiency(c))
                  << ")\n";
        return kExitOk;
    }
    RegisterState target = s;
    if (gate == "pp")
        target.apply_swap(pol_q(0), pol_q(1));
    else
        target.apply_swap(spa_q(0), spa_q(1));
    const double fid = std::norm(inner_product(target, *r.state)) /
                       (target.norm_squared() * r.state->norm_squared());
    std::cout << "success (spin readout " << r.outcome.spin_result << ", feedback "
              << (r.outcome.feedback_applied ? "applied" : "not needed") << "):\n";
    print_state(*r.state, std::cout);
    std::cout << "fidelity to swapped target: " << fmt_g9(fid) << "\n";
    return kExitOk;
}

int run_purify(const PhysicalArgs& phys, double f1, double f2, long trials, std::uint64_t seed,
               int workers, const std::string& arrangement, double eta_d) {
    const ScatteringCoefficients c = phys.coefficients();
    const Step2Arrangement arr = arrangement == "a2b2" ? Step2Arrangement::PumpIntoA2B2
                                                       : Step2Arrangement::PumpIntoAB;
    const BatchStats st = run_batch({f1, f2}, c, arr, trials, seed, 1, workers);
    const YieldReport rep = make_yield_report(st);
    const auto [y1, y2] = yields(f1, f2);
    std::cout << "attempts: " << st.attempts << ", heralded failures: " << st.failures << "\n"
              << "cases: 1=" << st.cases[0] << " 2=" << st.cases[1] << " 3=" << st.cases[2]
              << " 4=" << st.cases[3] << ", pumped pairs kept: " << st.pumped_kept << "\n"
              << "Y1 = " << fmt_g9(rep.y1) << " +/- " << fmt_g9(rep.y1_err)
              << "  (closed form " << fmt_g9(y1) << ")\n"
              << "Y2 = " << fmt_g9(rep.y2) << " +/- " << fmt_g9(rep.y2_err)
              << "  (closed form " << fmt_g9(y2) << ")\n"
              << "F1' = " << fmt_g9(rep.f1_out) << " +/- " << fmt_g9(rep.f1_err)
              << "  (closed form " << fmt_g9(fidelity_update(f1)) << ")\n"
              << "F2' = " << fmt_g9(rep.f2_out) << " +/- " << fmt_g9(rep.f2_err)
              << "  (closed form " << fmt_g9(fidelity_update(f2)) << ")\n";
    if (eta_d < 1.0)
        std::cout << "detector-scaled yields (eta_d=" << fmt_g9(eta_d)
                  << "): Y1 -> " << fmt_g9(detector_scaled_yield(rep.y1, eta_d)) << ", Y2 -> "
                  << fmt_g9(detector_scaled_yield(rep.y2, eta_d)) << "\n";
    return kExitOk;
}

int with_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return kExitOk;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    fn(out);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyper-EPP simulator: QD-cavity assisted purification of "
                 "polarization/spatial-mode hyperentangled photon pairs"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI config file ([subcommand] sections)");

    int exit_code = kExitOk;

    // coeffs
    {
        auto* cmd = app.add_subcommand("coeffs", "print scattering coefficients and efficiencies");
        auto phys = std::make_shared<PhysicalArgs>();
        phys->attach(cmd);
        cmd->callback([phys, &exit_code] { exit_code = run_coeffs(*phys); });
    }

    // qnd
    {
        auto* cmd = app.add_subcommand("qnd", "run a parity-check QND on a hyper-Bell pair");
        auto phys = std::make_shared<PhysicalArgs>();
        phys->attach(cmd);
        auto dof = std::make_shared<std::string>("pol");
        auto pol_bell = std::make_shared<std::string>("phi+");
        auto spa_bell = std::make_shared<std::string>("phi+");
        auto trials = std::make_shared<long>(1);
        auto seed = std::make_shared<std::uint64_t>(1);
        cmd->add_option("--dof", *dof, "which DOF to check")
            ->check(CLI::IsMember({"pol", "spa"}));
        cmd->add_option("--pol", *pol_bell, "polarization Bell state of the input pair");
        cmd->add_option("--spa", *spa_bell, "spatial-mode Bell state of the input pair");
        cmd->add_option("--trials", *trials, "number of repetitions")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", *seed, "random seed");
        cmd->callback([=, &exit_code] {
            exit_code = run_qnd(*phys, *dof, *pol_bell, *spa_bell, *trials, *seed);
        });
    }

    // swap
    {
        auto* cmd = app.add_subcommand("swap", "run a SWAP gate demo on two photons");
        auto phys = std::make_shared<PhysicalArgs>();
        phys->attach(cmd);
        auto gate = std::make_shared<std::string>("pp");
        auto a1 = std::make_shared<double>(0.6), b1 = std::make_shared<double>(0.8);
        auto a2 = std::make_shared<double>(1.0), b2 = std::make_shared<double>(0.0);
        auto seed = std::make_shared<std::uint64_t>(1);
        cmd->add_option("--gate", *gate, "which SWAP gate")
            ->check(CLI::IsMember({"pp", "ps", "ss"}));
        cmd->add_option("--alpha1", *a1, "R amplitude of photon 0");
        cmd->add_option("--beta1", *b1, "L amplitude of photon 0");
        cmd->add_option("--alpha2", *a2, "R amplitude of photon 1");
        cmd->add_option("--beta2", *b2, "L amplitude of photon 1");
        cmd->add_option("--seed", *seed, "random seed");
        cmd->callback([=, &exit_code] {
            exit_code = run_swap(*phys, *gate, *a1, *b1, *a2, *b2, *seed);
        });
    }

    // purify
    {
        auto* cmd = app.add_subcommand("purify", "Monte-Carlo purification rounds, print yields");
        auto phys = std::make_shared<PhysicalArgs>();
        phys->ideal = true; // protocol statistics default to ideal gadgets
        phys->attach(cmd);
        auto f1 = std::make_shared<double>(0.8), f2 = std::make_shared<double>(0.8);
        auto trials = std::make_shared<long>(20000);
        auto seed = std::make_shared<std::uint64_t>(1);
        auto workers = std::make_shared<int>(1);
        auto arrangement = std::make_shared<std::string>("ab");
        auto eta_d = std::make_shared<double>(1.0);
        cmd->add_option("--f1", *f1, "initial polarization fidelity");
        cmd->add_option("--f2", *f2, "initial spatial-mode fidelity");
        cmd->add_option("--trials", *trials, "attempts (two pairs each)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--seed", *seed, "random seed");
        cmd->add_option("--workers", *workers, "worker threads")->check(CLI::PositiveNumber);
        cmd->add_option("--arrangement", *arrangement, "step-2 pumping arrangement")
            ->check(CLI::IsMember({"ab", "a2b2"}));
        cmd->add_option("--eta-d", *eta_d, "detector efficiency");
        cmd->callback([=, &exit_code] {
            exit_code =
                run_purify(*phys, *f1, *f2, *trials, *seed, *workers, *arrangement, *eta_d);
        });
    }

    // sweep
    {
        auto* cmd = app.add_subcommand("sweep", "Monte-Carlo grid sweep, CSV output");
        auto cfg = std::make_shared<SweepConfig>();
        auto output = std::make_shared<std::string>("-");
        auto arrangement = std::make_shared<std::string>("ab");
        auto quiet = std::make_shared<bool>(false);
        cmd->add_option("--gamma", cfg->gamma, "dipole decay rate gamma/kappa");
        cmd->add_option("--kappa-s", cfg->kappa_s, "side-leakage grid")->delimiter(',');
        cmd->add_option("--g-ratio", cfg->g_ratio, "coupling grid g/(kappa+kappa_s)")
            ->delimiter(',');
        cmd->add_option("--detuning-c", cfg->detuning_c, "omega_c - omega");
        cmd->add_option("--detuning-x", cfg->detuning_x, "omega_X - omega");
        cmd->add_flag("--ideal", cfg->ideal, "use the ideal unit");
        cmd->add_option("--f1", cfg->f1, "polarization fidelity grid")->delimiter(',');
        cmd->add_option("--f2", cfg->f2, "spatial fidelity grid")->delimiter(',');
        cmd->add_option("--rounds", cfg->rounds, "iterated purification rounds");
        cmd->add_option("--trials", cfg->trials, "attempts per grid point");
        cmd->add_option("--seed", cfg->seed, "random seed");
        cmd->add_option("--eta-d", cfg->eta_d, "detector efficiency");
        cmd->add_option("--workers", cfg->workers, "worker threads");
        cmd->add_option("--arrangement", *arrangement, "step-2 pumping arrangement")
            ->check(CLI::IsMember({"ab", "a2b2"}));
        cmd->add_option("--output,-o", *output, "output file ('-' for stdout)");
        cmd->add_flag("--quiet", *quiet, "suppress progress on stderr");
        cmd->callback([=, &exit_code] {
            cfg->arrangement = *arrangement == "a2b2" ? Step2Arrangement::PumpIntoA2B2
                                                      : Step2Arrangement::PumpIntoAB;
            exit_code = with_output(*output, [&](std::ostream& out) {
                run_sweep(*cfg, out, *quiet ? nullptr : &std::cerr);
            });
        });
    }

    // figure
    {
        auto* cmd = app.add_subcommand("figure", "emit figure data as CSV");
        auto id = std::make_shared<std::string>();
        auto cfg = std::make_shared<FigureConfig>();
        auto output = std::make_shared<std::string>("-");
        cmd->add_option("id", *id, "figure id")
            ->required()
            ->check(CLI::IsMember({"7a", "7b", "8a", "8b"}));
        cmd->add_option("--gamma", cfg->gamma, "dipole decay rate gamma/kappa");
        cmd->add_option("--kappa-s", cfg->kappa_s, "side-leakage series")->delimiter(',');
        cmd->add_option("--rounds", cfg->rounds, "rounds for the multi-round figure");
        cmd->add_flag("--per-dof", cfg->per_dof,
                      "read the multi-round x axis as per-DOF fidelity instead of F1*F2");
        cmd->add_option("--output,-o", *output, "output file ('-' for stdout)");
        cmd->callback([=, &exit_code] {
            const FigureSeries fig = reproduce_figure(*figure_from_string(*id), *cfg);
            exit_code =
                with_output(*output, [&](std::ostream& out) { figure_to_csv(fig, out); });
        });
    }

    // verify
    {
        auto* cmd = app.add_subcommand("verify", "run the acceptance checklist");
        auto opt = std::make_shared<VerifyOptions>();
        cmd->add_option("--trials", opt->mc_trials, "Monte-Carlo trials per checklist point")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--seed", opt->seed, "random seed");
        cmd->add_option("--workers", opt->workers, "worker threads")->check(CLI::PositiveNumber);
        cmd->add_option("--only", opt->only_id, "run a single criterion (1-9)")
            ->check(CLI::Range(1, 9));
        cmd->callback([=, &exit_code] {
            const bool ok = print_verify_report(verify_claims(*opt), std::cout);
            exit_code = ok ? kExitOk : kExitVerifyFailed;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return exit_code;
}
