#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "hyperepp/harness.hpp"
#include "hyperepp/verify.hpp"
#include "support/oracle.hpp"

using namespace hyperepp;
using Catch::Matchers::WithinAbs;

TEST_CASE("float formatting uses nine significant digits", "[harness]") {
    CHECK(fmt_g9(0.5) == "0.5");
    CHECK(fmt_g9(1.0 / 3.0) == "0.333333333");
    CHECK(fmt_g9(0.7092229621701166) == "0.709222962");
}

TEST_CASE("csv writer layout", "[harness]") {
    std::ostringstream os;
    CsvWriter csv(os);
    csv.metadata("seed", std::uint64_t{42});
    csv.header({"a", "b"});
    csv.row({"1", "2"});
    CHECK(os.str() == "# seed=42\na,b\n1,2\n");
}

TEST_CASE("figure data", "[harness]") {
    SECTION("yield curves start at the unpolarized point") {
        const FigureSeries fig = reproduce_figure(FigureId::Fig7b);
        REQUIRE(fig.series.size() == 2);
        CHECK(fig.series[0].label == "Y1");
        CHECK_THAT(fig.series[0].points.front().x, WithinAbs(0.5, 1e-12));
        CHECK_THAT(fig.series[0].points.front().y, WithinAbs(0.25, 1e-12));
        CHECK_THAT(fig.series[1].points.front().y, WithinAbs(0.5, 1e-12));
        CHECK_THAT(fig.series[0].points.back().y, WithinAbs(1.0, 1e-12));
    }
    SECTION("x grids are strictly increasing") {
        for (FigureId id : {FigureId::Fig7a, FigureId::Fig7b, FigureId::Fig8a, FigureId::Fig8b}) {
            const FigureSeries fig = reproduce_figure(id);
            REQUIRE(!fig.series.empty());
            for (const FigureSeriesColumn& col : fig.series)
                for (std::size_t i = 1; i < col.points.size(); ++i)
                    CHECK(col.points[i].x > col.points[i - 1].x);
        }
    }
    SECTION("QND efficiency curve hits the reference point") {
        const FigureSeries fig = reproduce_figure(FigureId::Fig8a);
        const FigureSeriesColumn* leaky = nullptr;
        for (const FigureSeriesColumn& col : fig.series)
            if (col.label == "kappa_s=0.2") leaky = &col;
        REQUIRE(leaky != nullptr);
        bool found = false;
        for (const FigurePoint& pt : leaky->points)
            if (std::abs(pt.x - 2.0) < 1e-9) {
                found = true;
                CHECK_THAT(pt.y, WithinAbs(0.7092229621701166, 1e-12));
                CHECK(pt.y >= 0.658);
            }
        CHECK(found);
    }
    SECTION("leak-free efficiency approaches unity at strong coupling") {
        FigureConfig cfg;
        cfg.kappa_s = {0.0};
        const FigureSeries fig = reproduce_figure(FigureId::Fig8a, cfg);
        CHECK_THAT(fig.series[0].points.back().y, WithinAbs(1.0, 0.01));
    }
    SECTION("multi-round conventions") {
        FigureConfig cfg;
        const FigureSeries prod = reproduce_figure(FigureId::Fig7a, cfg);
        // default: x = F1*F2 and F1 = F2 = sqrt(x)
        const double x0 = prod.series[0].points.front().x;
        const double f = fidelity_update(std::sqrt(x0));
        CHECK_THAT(prod.series[0].points.front().y, WithinAbs(f * f, 1e-12));

        cfg.per_dof = true;
        const FigureSeries dof = reproduce_figure(FigureId::Fig7a, cfg);
        CHECK_THAT(dof.series[0].points.front().y, WithinAbs(fidelity_update(x0), 1e-12));
        CHECK_THAT(dof.series[2].points.back().y, WithinAbs(1.0, 1e-12));
    }
    SECTION("csv emission carries metadata and rows") {
        const std::string csv = figure_to_csv(reproduce_figure(FigureId::Fig8b));
        CHECK(csv.find("# figure=8b") != std::string::npos);
        CHECK(csv.find("series,x,y") != std::string::npos);
        CHECK(csv.find("kappa_s=0.2") != std::string::npos);
    }
}

TEST_CASE("batches and reports", "[harness]") {
    SECTION("single-trial batch produces one attempt") {
        const BatchStats st = run_batch({0.9, 0.9}, ScatteringCoefficients::ideal(),
                                        Step2Arrangement::PumpIntoAB, 1, 7, 1, 1);
        CHECK(st.attempts == 1);
        CHECK(st.cases[0] + st.cases[1] + st.cases[2] + st.cases[3] + st.failures == 1);
    }
    SECTION("standard errors shrink like one over root trials") {
        double errs[3];
        int k = 0;
        for (long trials : {1000L, 10000L, 100000L}) {
            const BatchStats st = run_batch({0.7, 0.7}, ScatteringCoefficients::ideal(),
                                            Step2Arrangement::PumpIntoAB, trials, 11, 3, 4);
            errs[k++] = make_yield_report(st).y1_err;
        }
        CHECK_THAT(errs[0] / errs[1], WithinAbs(std::sqrt(10.0), 0.2 * std::sqrt(10.0)));
        CHECK_THAT(errs[1] / errs[2], WithinAbs(std::sqrt(10.0), 0.2 * std::sqrt(10.0)));
    }
    SECTION("worker count does not change the tallies") {
        const BatchStats a = run_batch({0.75, 0.65}, ScatteringCoefficients::ideal(),
                                       Step2Arrangement::PumpIntoAB, 4000, 13, 5, 1);
        const BatchStats b = run_batch({0.75, 0.65}, ScatteringCoefficients::ideal(),
                                       Step2Arrangement::PumpIntoAB, 4000, 13, 5, 4);
        CHECK(a.kept_case1 == b.kept_case1);
        CHECK(a.pumped_kept == b.pumped_kept);
        CHECK(a.kept_pol_good() == b.kept_pol_good());
        CHECK(a.cases[2] == b.cases[2]);
    }
}

TEST_CASE("sweep output", "[harness]") {
    SweepConfig cfg;
    cfg.ideal = true;
    cfg.f1 = {0.7, 0.8};
    cfg.f2 = {0.7};
    cfg.trials = 1500;
    cfg.seed = 321;

    SECTION("structure and reproducibility") {
        const std::string a = sweep_to_string(cfg);
        CHECK(a.rfind("# version=", 0) == 0);
        CHECK(a.find("kappa_s,g_ratio,f1_in") != std::string::npos);
        CHECK(a.find("\n0.2,2,0.7,0.7,1,1500,") != std::string::npos);
        const std::string b = sweep_to_string(cfg);
        CHECK(a == b);
    }
    SECTION("byte-identical across worker counts") {
        cfg.workers = 1;
        const std::string one = sweep_to_string(cfg);
        cfg.workers = 4;
        const std::string four = sweep_to_string(cfg);
        CHECK(one == four);
    }
    SECTION("different seeds give different samples") {
        const std::string a = sweep_to_string(cfg);
        cfg.seed = 322;
        CHECK(a != sweep_to_string(cfg));
    }
    SECTION("multi-round sweeps emit one row per round") {
        cfg.f1 = {0.7};
        cfg.rounds = 2;
        std::istringstream in(sweep_to_string(cfg));
        std::string line;
        int rows = 0;
        while (std::getline(in, line))
            if (!line.empty() && line[0] != '#' && line.rfind("kappa_s", 0) != 0) ++rows;
        CHECK(rows == 2);
    }
    SECTION("invalid grids are rejected") {
        cfg.f1.clear();
        CHECK_THROWS_AS(sweep_to_string(cfg), std::invalid_argument);
    }
}

TEST_CASE("verification checklist hooks", "[harness]") {
    SECTION("the recursion check passes with the true closed form") {
        VerifyOptions opt;
        opt.mc_trials = 20000;
        opt.workers = 4;
        opt.only_id = 5;
        const auto results = verify_claims(opt);
        REQUIRE(results.size() == 1);
        CHECK(results[0].passed);
    }
    SECTION("a corrupted recursion is caught (negative control)") {
        VerifyOptions opt;
        opt.mc_trials = 20000;
        opt.workers = 4;
        opt.only_id = 5;
        opt.recursion = [](double f) { return std::min(1.0, f + 0.15); };
        const auto results = verify_claims(opt);
        REQUIRE(results.size() == 1);
        CHECK(!results[0].passed);
    }
    SECTION("report printing flags failures in the exit status") {
        std::ostringstream os;
        CHECK(print_verify_report({{1, "ok", true, "fine"}}, os));
        CHECK(os.str().find("[PASS] 1 ok") != std::string::npos);
        std::ostringstream os2;
        CHECK(!print_verify_report({{2, "bad", false, "broken"}}, os2));
        CHECK(os2.str().find("[FAIL] 2 bad") != std::string::npos);
    }
}
