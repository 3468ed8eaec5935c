#pragma once

#include <cstdint>
#include <cstdio>
#include <deque>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hyperepp/protocol.hpp"

namespace hyperepp {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// CSV emission: a '#'-prefixed metadata block (key=value), one header row,
// then data rows. Floats are printed with 9 significant digits so output is
// byte-reproducible for a fixed configuration and seed.

inline std::string fmt_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string join_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt_g9(v[i]);
    }
    return out;
}

class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void metadata(const std::string& key, const std::string& value) {
        out_ << "# " << key << "=" << value << "\n";
    }
    void metadata(const std::string& key, double value) { metadata(key, fmt_g9(value)); }
    void metadata(const std::string& key, std::uint64_t value) {
        metadata(key, std::to_string(value));
    }

    void header(const std::vector<std::string>& columns) { line(columns); }

    void row(const std::vector<std::string>& cells) { line(cells); }

  private:
    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ",";
            out_ << cells[i];
        }
        out_ << "\n";
    }
    std::ostream& out_;
};

// ---------------------------------------------------------------------------
// Monte-Carlo batches
//
// Trajectories are independent; batches tally integer counts only, so merged
// results are identical no matter how trajectories are split over workers.
// Step-2 pumping is resolved in a deterministic sequential pass (trajectory
// order) after the parallel step-1 phase, with its own derived rng streams.

struct BatchStats {
    long attempts = 0;
    long failures = 0; // step-1 heralded gadget failures
    long cases[4] = {0, 0, 0, 0};
    long kept_case1 = 0;
    long kept1_pol_good = 0, kept1_spa_good = 0;
    long pump_attempts = 0, pump_failures = 0;
    long pumped_kept = 0;
    long pumped_pol_good = 0, pumped_spa_good = 0;

    long kept_total() const { return kept_case1 + pumped_kept; }
    long kept_pol_good() const { return kept1_pol_good + pumped_pol_good; }
    long kept_spa_good() const { return kept1_spa_good + pumped_spa_good; }
};

// Point estimates with binomial standard errors.
struct YieldReport {
    long samples = 0;
    double y1 = 0.0, y1_err = 0.0;
    double y2 = 0.0, y2_err = 0.0;
    double f1_out = 0.0, f1_err = 0.0; // over all kept pairs
    double f2_out = 0.0, f2_err = 0.0;
    double f1_case1 = 0.0, f2_case1 = 0.0; // over step-1-only keeps
    long kept_total = 0;
};

namespace detail {

inline double binom_err(double p, long n) {
    if (n <= 0) return 0.0;
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

struct Step1Record {
    std::int8_t status = -1; // -1 failure, otherwise the case number 1..4
    std::int8_t pol_good = 0, spa_good = 0;
    std::optional<RegisterState> survivor; // case-3/case-4 kept pair
};

inline void classify_kept(const RegisterState& s, PairIds ids, std::int8_t& pol_good,
                          std::int8_t& spa_good) {
    const std::optional<HyperBellLabel> label = classify_plus_bell(s, ids);
    if (!label)
        throw std::runtime_error("kept pair is not one of the four expected hyper-Bell states");
    pol_good = label->pol == BellKind::PhiPlus ? 1 : 0;
    spa_good = label->spa == BellKind::PhiPlus ? 1 : 0;
}

} // namespace detail

inline BatchStats run_batch(const MixtureSpec& mixture, const ScatteringCoefficients& coeffs,
                            Step2Arrangement arrangement, long trials, std::uint64_t seed,
                            std::uint64_t stream, int workers = 1) {
    mixture.validate();
    if (trials < 1) throw std::invalid_argument("run_batch: trials must be >= 1");

    std::vector<detail::Step1Record> records(static_cast<std::size_t>(trials));
    const std::uint64_t step1_stream = stream * 2;
    const std::uint64_t pump_stream = stream * 2 + 1;

    auto worker = [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            Rng rng = Rng::derive(seed, step1_stream, static_cast<std::uint64_t>(i));
            auto [label_ab, ab] = sample_pair(mixture, {kPhotonA, kPhotonB}, rng);
            auto [label_cd, cd] = sample_pair(mixture, {kPhotonC, kPhotonD}, rng);
            (void)label_ab;
            (void)label_cd;
            detail::Step1Record& rec = records[static_cast<std::size_t>(i)];
            Step1Result s1 = step1(ab, cd, coeffs, rng);
            if (!s1.success) continue;
            rec.status = static_cast<std::int8_t>(*s1.case_label);
            if (*s1.case_label == CaseLabel::Case1SameSame)
                detail::classify_kept(*s1.state, {kPhotonA, kPhotonB}, rec.pol_good, rec.spa_good);
            else if (*s1.case_label != CaseLabel::Case2DiffDiff)
                rec.survivor = std::move(s1.state);
        }
    };

    const int nw = std::max(1, workers);
    if (nw == 1 || trials < 2 * nw) {
        worker(0, trials);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (trials + nw - 1) / nw;
        for (int w = 0; w < nw; ++w) {
            const long lo = w * chunk;
            const long hi = std::min(trials, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(worker, lo, hi);
        }
        for (std::thread& t : pool) t.join();
    }

    // sequential FIFO pairing of case-3/case-4 survivors
    BatchStats st;
    st.attempts = trials;
    std::deque<std::size_t> queue3, queue4;
    std::uint64_t pair_counter = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        detail::Step1Record& rec = records[i];
        switch (rec.status) {
        case -1: st.failures++; continue;
        case 1:
            st.cases[0]++;
            st.kept_case1++;
            st.kept1_pol_good += rec.pol_good;
            st.kept1_spa_good += rec.spa_good;
            continue;
        case 2: st.cases[1]++; continue;
        case 3: st.cases[2]++; break;
        case 4: st.cases[3]++; break;
        default: continue;
        }
        std::deque<std::size_t>& own = rec.status == 3 ? queue3 : queue4;
        std::deque<std::size_t>& other = rec.status == 3 ? queue4 : queue3;
        if (other.empty()) {
            own.push_back(i);
            continue;
        }
        const std::size_t j = other.front();
        other.pop_front();
        const std::size_t i3 = rec.status == 3 ? i : j; // case-3 pair plays AB
        const std::size_t i4 = rec.status == 3 ? j : i;
        RegisterState ab = std::move(*records[i3].survivor);
        RegisterState a2b2 = relabel_owner(
            relabel_owner(std::move(*records[i4].survivor), kPhotonA, kPhotonA2), kPhotonB,
            kPhotonB2);
        Rng rng = Rng::derive(seed, pump_stream, pair_counter++);
        st.pump_attempts++;
        Step2Result s2 = step2(ab, a2b2, arrangement, coeffs, rng);
        if (!s2.success) {
            st.pump_failures++;
            continue;
        }
        std::int8_t pg = 0, sg = 0;
        detail::classify_kept(*s2.state, s2.kept_ids, pg, sg);
        st.pumped_kept++;
        st.pumped_pol_good += pg;
        st.pumped_spa_good += sg;
    }
    return st;
}

inline YieldReport make_yield_report(const BatchStats& st) {
    YieldReport r;
    r.samples = st.attempts;
    r.kept_total = st.kept_total();
    const double n = static_cast<double>(st.attempts);
    r.y1 = st.kept_case1 / n;
    r.y2 = st.kept_total() / n;
    r.y1_err = detail::binom_err(r.y1, st.attempts);
    r.y2_err = detail::binom_err(r.y2, st.attempts);
    if (st.kept_total() > 0) {
        r.f1_out = static_cast<double>(st.kept_pol_good()) / st.kept_total();
        r.f2_out = static_cast<double>(st.kept_spa_good()) / st.kept_total();
        r.f1_err = detail::binom_err(r.f1_out, st.kept_total());
        r.f2_err = detail::binom_err(r.f2_out, st.kept_total());
    }
    if (st.kept_case1 > 0) {
        r.f1_case1 = static_cast<double>(st.kept1_pol_good) / st.kept_case1;
        r.f2_case1 = static_cast<double>(st.kept1_spa_good) / st.kept_case1;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Figure data

enum class FigureId { Fig7a, Fig7b, Fig8a, Fig8b };

inline std::optional<FigureId> figure_from_string(const std::string& s) {
    if (s == "7a") return FigureId::Fig7a;
    if (s == "7b") return FigureId::Fig7b;
    if (s == "8a") return FigureId::Fig8a;
    if (s == "8b") return FigureId::Fig8b;
    return std::nullopt;
}

inline const char* to_string(FigureId id) {
    switch (id) {
    case FigureId::Fig7a: return "7a";
    case FigureId::Fig7b: return "7b";
    case FigureId::Fig8a: return "8a";
    case FigureId::Fig8b: return "8b";
    }
    return "?";
}

struct FigureConfig {
    double gamma = 0.1;
    std::vector<double> kappa_s = {0.0, 0.1, 0.2}; // series of the efficiency figures
    int fidelity_steps = 100;                      // grid 0.5..1.0 for the fidelity figures
    int coupling_steps = 90;                       // grid 0.5..5.0 for the efficiency figures
    int rounds = 3;                                // series of the multi-round figure
    // x-axis convention of the multi-round figure: by default x is the total
    // fidelity F = F1*F2 with F1 = F2 = sqrt(x); per_dof reads x as the
    // per-DOF fidelity instead.
    bool per_dof = false;
};

struct FigurePoint {
    double x = 0.0, y = 0.0;
};

struct FigureSeriesColumn {
    std::string label;
    std::vector<FigurePoint> points;
};

struct FigureSeries {
    std::string figure_id;
    std::vector<FigureSeriesColumn> series;
    std::vector<std::pair<std::string, std::string>> metadata;
};

inline FigureSeries reproduce_figure(FigureId id, const FigureConfig& cfg = {}) {
    FigureSeries fig;
    fig.figure_id = to_string(id);
    fig.metadata.emplace_back("figure", fig.figure_id);

    switch (id) {
    case FigureId::Fig7a: {
        fig.metadata.emplace_back("x_axis", cfg.per_dof ? "per-dof-fidelity" : "product-fidelity");
        for (int n = 1; n <= cfg.rounds; ++n) {
            FigureSeriesColumn col;
            col.label = "N=" + std::to_string(n);
            for (int i = 0; i <= cfg.fidelity_steps; ++i) {
                const double x = 0.5 + 0.5 * i / cfg.fidelity_steps;
                double y;
                if (cfg.per_dof) {
                    double f = x;
                    for (int k = 0; k < n; ++k) f = fidelity_update(f);
                    y = f;
                } else {
                    double f = std::sqrt(x);
                    for (int k = 0; k < n; ++k) f = fidelity_update(f);
                    y = f * f;
                }
                col.points.push_back({x, y});
            }
            fig.series.push_back(std::move(col));
        }
        break;
    }
    case FigureId::Fig7b: {
        fig.metadata.emplace_back("x_axis", "per-dof-fidelity");
        FigureSeriesColumn y1col{"Y1", {}}, y2col{"Y2", {}};
        for (int i = 0; i <= cfg.fidelity_steps; ++i) {
            const double x = 0.5 + 0.5 * i / cfg.fidelity_steps;
            const auto [y1, y2] = yields(x, x);
            y1col.points.push_back({x, y1});
            y2col.points.push_back({x, y2});
        }
        fig.series.push_back(std::move(y1col));
        fig.series.push_back(std::move(y2col));
        break;
    }
    case FigureId::Fig8a:
    case FigureId::Fig8b: {
        fig.metadata.emplace_back("gamma", fmt_g9(cfg.gamma));
        fig.metadata.emplace_back("x_axis", "g-over-kappa-plus-kappa_s");
        for (double ks : cfg.kappa_s) {
            FigureSeriesColumn col;
            col.label = "kappa_s=" + fmt_g9(ks);
            for (int i = 0; i <= cfg.coupling_steps; ++i) {
                const double x = 0.5 + 4.5 * i / cfg.coupling_steps;
                const ScatteringParams p = ScatteringParams::resonant(cfg.gamma, ks, x);
                const double y =
                    id == FigureId::Fig8a ? qnd_efficiency(p) : swap_efficiency(p);
                col.points.push_back({x, y});
            }
            fig.series.push_back(std::move(col));
        }
        break;
    }
    }
    return fig;
}

inline void figure_to_csv(const FigureSeries& fig, std::ostream& out) {
    CsvWriter csv(out);
    csv.metadata("version", std::string(kVersion));
    for (const auto& [k, v] : fig.metadata) csv.metadata(k, v);
    csv.header({"series", "x", "y"});
    for (const FigureSeriesColumn& col : fig.series)
        for (const FigurePoint& p : col.points)
            csv.row({col.label, fmt_g9(p.x), fmt_g9(p.y)});
}

inline std::string figure_to_csv(const FigureSeries& fig) {
    std::ostringstream os;
    figure_to_csv(fig, os);
    return os.str();
}

// ---------------------------------------------------------------------------
// Grid sweeps

struct SweepConfig {
    // physical grid (resonant unless detunings are set; rates in units of kappa)
    double gamma = 0.1;
    std::vector<double> kappa_s = {0.2};
    std::vector<double> g_ratio = {2.0}; // g/(kappa+kappa_s)
    double detuning_c = 0.0;             // omega_c - omega
    double detuning_x = 0.0;             // omega_x - omega
    bool ideal = false;                  // replace scattering by the ideal unit

    // protocol grid
    std::vector<double> f1 = {0.8};
    std::vector<double> f2 = {0.8};
    int rounds = 1;
    long trials = 10000;
    std::uint64_t seed = 1;
    Step2Arrangement arrangement = Step2Arrangement::PumpIntoAB;

    double eta_d = 1.0; // detector efficiency
    int workers = 1;

    void validate() const {
        if (kappa_s.empty() || g_ratio.empty() || f1.empty() || f2.empty())
            throw std::invalid_argument("SweepConfig: grids must be non-empty");
        if (trials < 1) throw std::invalid_argument("SweepConfig: trials must be >= 1");
        if (rounds < 1) throw std::invalid_argument("SweepConfig: rounds must be >= 1");
        if (!(eta_d >= 0.0) || eta_d > 1.0)
            throw std::invalid_argument("SweepConfig: eta_d must lie in [0, 1]");
        for (double f : f1) MixtureSpec{f, 1.0}.validate();
        for (double f : f2) MixtureSpec{1.0, f}.validate();
    }

    ScatteringCoefficients coefficients(double ks, double gr) const {
        if (ideal) return ScatteringCoefficients::ideal();
        ScatteringParams p = ScatteringParams::resonant(gamma, ks, gr);
        p.omega_c = detuning_c;
        p.omega_x = detuning_x;
        return branch_amplitudes(p);
    }
};

// Runs the Monte-Carlo grid and writes one CSV row per (point, round).
// Output bytes depend only on (config, seed), never on the worker count.
inline void run_sweep(const SweepConfig& cfg, std::ostream& out, std::ostream* status = nullptr) {
    cfg.validate();
    CsvWriter csv(out);
    csv.metadata("version", std::string(kVersion));
    csv.metadata("seed", cfg.seed);
    csv.metadata("trials", static_cast<std::uint64_t>(cfg.trials));
    csv.metadata("rounds", static_cast<std::uint64_t>(cfg.rounds));
    csv.metadata("gamma", cfg.gamma);
    csv.metadata("kappa_s", join_list(cfg.kappa_s));
    csv.metadata("g_ratio", join_list(cfg.g_ratio));
    csv.metadata("detuning_c", cfg.detuning_c);
    csv.metadata("detuning_x", cfg.detuning_x);
    csv.metadata("ideal", std::string(cfg.ideal ? "true" : "false"));
    csv.metadata("f1", join_list(cfg.f1));
    csv.metadata("f2", join_list(cfg.f2));
    csv.metadata("eta_d", cfg.eta_d);
    csv.metadata("arrangement", std::string(to_string(cfg.arrangement)));
    csv.header({"kappa_s", "g_ratio", "f1_in",      "f2_in",      "round",  "trials",
                "abs_T",   "eta_pc",  "eta_swap",   "y1_mc",      "y1_err", "y2_mc",
                "y2_err",  "f1_out",  "f1_err",     "f2_out",     "f2_err", "y1_pred",
                "y2_pred", "f1_pred", "f2_pred",    "y1_scaled",  "y2_scaled"});

    const std::size_t total_points =
        cfg.kappa_s.size() * cfg.g_ratio.size() * cfg.f1.size() * cfg.f2.size();
    std::size_t point = 0;
    for (double ks : cfg.kappa_s)
        for (double gr : cfg.g_ratio) {
            const ScatteringCoefficients coeffs = cfg.coefficients(ks, gr);
            const double abs_t = std::abs(coeffs.T);
            for (double f1_in : cfg.f1)
                for (double f2_in : cfg.f2) {
                    ++point;
                    if (status)
                        *status << "sweep point " << point << "/" << total_points << "\n";
                    double f1_cur = f1_in, f2_cur = f2_in;
                    for (int round = 1; round <= cfg.rounds; ++round) {
                        const MixtureSpec m{f1_cur, f2_cur};
                        const std::uint64_t stream =
                            (static_cast<std::uint64_t>(point) << 8) | static_cast<unsigned>(round);
                        const BatchStats stats = run_batch(m, coeffs, cfg.arrangement, cfg.trials,
                                                           cfg.seed, stream, cfg.workers);
                        const YieldReport rep = make_yield_report(stats);
                        const auto [y1p, y2p] = yields(f1_cur, f2_cur);
                        const double f1p = fidelity_update(f1_cur);
                        const double f2p = fidelity_update(f2_cur);
                        csv.row({fmt_g9(ks), fmt_g9(gr), fmt_g9(f1_in), fmt_g9(f2_in),
                                 std::to_string(round), std::to_string(cfg.trials), fmt_g9(abs_t),
                                 fmt_g9(qnd_efficiency(coeffs)), fmt_g9(swap_efficiency(coeffs)),
                                 fmt_g9(rep.y1), fmt_g9(rep.y1_err), fmt_g9(rep.y2),
                                 fmt_g9(rep.y2_err), fmt_g9(rep.f1_out), fmt_g9(rep.f1_err),
                                 fmt_g9(rep.f2_out), fmt_g9(rep.f2_err), fmt_g9(y1p), fmt_g9(y2p),
                                 fmt_g9(f1p), fmt_g9(f2p),
                                 fmt_g9(detector_scaled_yield(rep.y1, cfg.eta_d)),
                                 fmt_g9(detector_scaled_yield(rep.y2, cfg.eta_d))});
                        if (rep.kept_total == 0) break; // nothing to iterate on
                        f1_cur = std::min(1.0, std::max(rep.f1_out, 1e-9));
                        f2_cur = std::min(1.0, std::max(rep.f2_out, 1e-9));
                    }
                }
        }
}

inline std::string sweep_to_string(const SweepConfig& cfg) {
    std::ostringstream os;
    run_sweep(cfg, os, nullptr);
    return os.str();
}

} // namespace hyperepp
