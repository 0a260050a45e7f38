#include <cmath>
#include <numeric>
#include <sstream>

#include "avnet/config.hpp"
#include "avnet/generator.hpp"
#include "avnet/oracle/oracle.hpp"
#include "avnet/qos.hpp"
#include "avnet/slicing.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace avnet;

namespace {

// Best grid point of sum ln f_k with f_k >= fmin_k, sum f = 1, at 0.001 steps.
std::vector<double> brute_fractions3(const std::vector<double>& fmin) {
    double best = -1e300;
    std::vector<double> arg;
    for (int a = 1; a < 1000; ++a) {
        for (int b = 1; a + b < 1000; ++b) {
            const double f[3] = {a / 1000.0, b / 1000.0, (1000 - a - b) / 1000.0};
            if (f[0] < fmin[0] - 1e-12 || f[1] < fmin[1] - 1e-12 || f[2] < fmin[2] - 1e-12) continue;
            const double u = std::log(f[0]) + std::log(f[1]) + std::log(f[2]);
            if (u > best) {
                best = u;
                arg = {f[0], f[1], f[2]};
            }
        }
    }
    return arg;
}

}  // namespace

TEST_CASE("optimal fractions") {
    SUBCASE("no minima splits equally") {
        const auto r = optimal_fractions(std::vector<double>{0.0, 0.0});
        CHECK(r.feasible);
        CHECK(r.fractions[0] == doctest::Approx(0.5));
        CHECK(r.fractions[1] == doctest::Approx(0.5));
    }
    SUBCASE("one binding minimum is pinned") {
        const std::vector<double> fmin{0.6, 0.0, 0.0};
        const auto r = optimal_fractions(fmin);
        CHECK(r.fractions[0] == doctest::Approx(0.6));
        CHECK(r.fractions[1] == doctest::Approx(0.2));
        CHECK(r.fractions[2] == doctest::Approx(0.2));
        const auto brute = brute_fractions3(fmin);
        for (int i = 0; i < 3; ++i) CHECK(r.fractions[i] == doctest::Approx(brute[i]).epsilon(2e-3));
    }
    SUBCASE("non-binding minima change nothing") {
        const auto r = optimal_fractions(std::vector<double>{0.1, 0.2, 0.3});
        for (double f : r.fractions) CHECK(f == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("single AV takes everything") {
        const auto r = optimal_fractions(std::vector<double>{0.3});
        CHECK(r.fractions[0] == doctest::Approx(1.0));
    }
    SUBCASE("over-subscribed minima are infeasible") {
        const auto r = optimal_fractions(std::vector<double>{0.7, 0.5});
        CHECK_FALSE(r.feasible);
        CHECK(r.fractions[0] == doctest::Approx(0.5));
    }
}

TEST_CASE("simplex grid") {
    const auto g = simplex_grid(3, 0.02);
    CHECK(g.size() == 1326);
    CHECK(g.front() == std::vector<double>{0.0, 0.0, 1.0});
    for (const auto& b : g) CHECK(std::accumulate(b.begin(), b.end(), 0.0) == doctest::Approx(1.0));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i - 1] < g[i]);
    CHECK(simplex_grid(1, 0.05) == std::vector<std::vector<double>>{{1.0}});
}

TEST_CASE("evaluate: one eNB, one AV") {
    Scenario s = test::scenario({test::enb("E1", 0.0, 0.0)}, {test::vehicle(0, 100.0, 0.0)});
    const std::vector<double> beta{1.0};
    const auto sol = evaluate(s, s.mec_servers[0], beta, {{0, "E1"}});
    const double gamma = std::log2(1.0 + std::pow(10.0, 4.4));
    CHECK(sol.feasible);
    CHECK(sol.rates_bps.at(0) == doctest::Approx(25e6 * gamma));
    CHECK(sol.utility == doctest::Approx(std::log(25e6 * gamma)));
    CHECK(sol.fractions.at({"E1", 0}) == doctest::Approx(1.0));
}

TEST_CASE("evaluate: AP without bandwidth is infeasible") {
    // 300 m apart, inside the protection distance, so A1 cannot reuse E1's slice.
    Scenario s = test::scenario({test::enb("E1", 0.0), test::ap("A1", 300.0)},
                                {test::vehicle(0, 300.0, 1.75), test::vehicle(1, 20.0, 1.75)});
    const std::vector<double> beta{1.0, 0.0};
    const auto sol = evaluate(s, s.mec_servers[0], beta, {{0, "A1"}, {1, "E1"}});
    CHECK_FALSE(sol.feasible);
}

TEST_CASE("case-study max-SINR regression value") {
    const auto cfg = case_study_config();
    const Scenario s = generate_case_study(0.12, 2024, cfg);
    const std::vector<double> beta{1.0 / 3, 1.0 / 3, 1.0 / 3};
    const auto sol = solve_max_sinr(s, s.mec_server("M1"), beta);
    CHECK(sol.feasible);
    CHECK(sol.association.size() == 120);
    CHECK(sol.utility == doctest::Approx(1763.8896336171).epsilon(1e-9));
}

TEST_CASE("max-SINR association") {
    SUBCASE("eNB beats an AP that shares its channel with another AP") {
        Scenario s = test::scenario({test::enb("E1", 0.0, 0.0), test::ap("A1", 150.0, 0.0), test::ap("A2", 250.0, 0.0)},
                                    {test::vehicle(0, 100.0, 0.0)});
        const std::vector<double> beta{0.5, 0.5};
        CHECK(solve_max_sinr(s, s.mec_servers[0], beta).association.at(0) == "E1");
    }
    SUBCASE("single covering BS") {
        Scenario s = test::scenario({test::enb("E1", 0.0, 0.0), test::ap("A1", 900.0, 0.0)},
                                    {test::vehicle(0, 100.0, 0.0)});
        const std::vector<double> beta{0.5, 0.5};
        CHECK(solve_max_sinr(s, s.mec_servers[0], beta).association.at(0) == "E1");
    }
    SUBCASE("twin APs tie to the lower id") {
        Scenario s = test::scenario({test::ap("A2", 600.0, 0.0), test::ap("A1", 400.0, 0.0)},
                                    {test::vehicle(0, 500.0, 0.0)});
        const std::vector<double> beta{1.0};
        CHECK(solve_max_sinr(s, s.mec_servers[0], beta).association.at(0) == "A1");
    }
}

TEST_CASE("single BS: the solver returns the closed-form fractions") {
    Scenario s = test::scenario({test::enb("E1", 500.0)},
                                {test::vehicle(0, 100.0, 1.75), test::vehicle(1, 480.0, 5.25),
                                 test::vehicle(2, 900.0, 8.75, test::hd_map())},
                                2e6);
    const auto sol = solve_num(s, s.mec_servers[0]);
    REQUIRE(sol.feasible);
    CHECK(sol.beta() == std::vector<double>{1.0});
    std::vector<double> fmin;
    for (const auto& v : s.vehicles) fmin.push_back(required_rate(v).min_rate_bps / (sol.rates_bps.at(v.id) / sol.fractions.at({"E1", v.id})));
    const auto want = optimal_fractions(fmin);
    for (std::size_t k = 0; k < 3; ++k) CHECK(sol.fractions.at({"E1", static_cast<VehicleId>(k)}) == doctest::Approx(want.fractions[k]));
}

TEST_CASE("solution invariants on a case-study snapshot") {
    const auto cfg = case_study_config();
    const Scenario s = generate_case_study(0.18, 5, cfg);
    const auto& m1 = s.mec_server("M1");
    SlicingOptions opt;
    opt.grid_step = 0.05;
    const auto sol = solve_num(s, m1, opt);
    REQUIRE(sol.feasible);

    const auto beta = sol.beta();
    CHECK(std::accumulate(beta.begin(), beta.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(reuse_is_legal(s, sol.pattern));

    std::map<std::string, double> per_bs;
    double utility = 0.0;
    for (const auto& [key, f] : sol.fractions) {
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        per_bs[key.first] += f;
    }
    for (const auto& [bs, sum] : per_bs) CHECK(sum <= 1.0 + 1e-9);
    for (const auto& [av, bs] : sol.association) {
        const auto& v = s.vehicle(av);
        const auto cov = coverage_set(s, v);
        CHECK(std::find(cov.begin(), cov.end(), bs) != cov.end());
        double expect = 0.0;
        for (const auto& slice : sol.pattern.bs_slices.at(bs)) {
            expect += sol.pattern.ratio(slice) * m1.bandwidth_hz * sol.fractions.at({bs, av}) *
                      spectral_efficiency(s, sol.pattern, bs, av, slice);
        }
        CHECK(sol.rates_bps.at(av) == doctest::Approx(expect).epsilon(1e-9));
        CHECK(sol.rates_bps.at(av) >= required_rate(v).min_rate_bps - 1e-6);
        utility += std::log(sol.rates_bps.at(av));
    }
    CHECK(sol.utility == doctest::Approx(utility).epsilon(1e-12));
    for (std::size_t i = 1; i < sol.search_trace.size(); ++i) CHECK(sol.search_trace[i] >= sol.search_trace[i - 1] - 1e-9);

    std::ostringstream csv;
    write_solution_csv(csv, sol);
    CHECK(csv.str().rfind("av_id,bs_id,fraction,rate_bps\n", 0) == 0);
    const auto j = to_json(sol);
    CHECK(j.at("association").size() == sol.association.size());
}

TEST_CASE("proposed never loses to max-SINR") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Scenario s = oracle::make_tiny_slicing_instance(seed);
        SlicingOptions opt;
        opt.grid_step = 0.05;
        opt.exact_association_limit = 0;
        SlicingProblem p(s, s.mec_servers[0], opt);
        const auto base = p.solve_max_sinr(p.baseline_beta());
        const auto prop = p.solve_num();
        CAPTURE(seed);
        if (base.feasible) {
            CHECK(prop.feasible);
            CHECK(prop.utility >= base.utility - 1e-9);
        }
    }
}

TEST_CASE("no feasible ratio yields a diagnostic") {
    Scenario s = test::scenario({test::enb("E1", 500.0)},
                                {test::vehicle(0, 100.0, 1.75), test::vehicle(1, 480.0, 5.25)}, 1e3);
    const auto sol = solve_num(s, s.mec_servers[0]);
    CHECK_FALSE(sol.feasible);
    REQUIRE_FALSE(sol.diagnostics.empty());
    CHECK(sol.diagnostics.front().find("no feasible beta") != std::string::npos);
}

TEST_CASE("extra rate floors tighten the problem") {
    Scenario s = test::scenario({test::enb("E1", 500.0)},
                                {test::vehicle(0, 100.0, 1.75), test::vehicle(1, 480.0, 5.25)}, 1e6);
    SlicingProblem loose(s, s.mec_servers[0]);
    SlicingProblem tight(s, s.mec_servers[0], {}, {{0, 5e6}});
    CHECK(tight.min_rate_bps(0) == doctest::Approx(5e6));
    CHECK(loose.min_rate_bps(0) == doctest::Approx(required_rate(s.vehicles[0]).min_rate_bps));
    CHECK(tight.solve_num().utility <= loose.solve_num().utility + 1e-9);
}
