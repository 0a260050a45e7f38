#include <cmath>
#include <sstream>
#include <stdexcept>

#include "avnet/config.hpp"
#include "avnet/errors.hpp"
#include "avnet/radio.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace avnet;

TEST_CASE("pathloss and received power") {
    const auto e = test::enb("E", 0.0);
    const auto a = test::ap("A", 0.0);
    CHECK(pathloss_db(e, 1.0) == doctest::Approx(-30.0));
    CHECK(pathloss_db(e, 100.0) == doctest::Approx(-100.0));
    CHECK(received_power_dbm(e, 100.0) == doctest::Approx(-60.0));
    CHECK(pathloss_db(a, 50.0) == doctest::Approx(-40.0 - 35.0 * std::log10(50.0)));
    CHECK(received_power_dbm(a, 50.0) == doctest::Approx(-71.01).epsilon(1e-4));
    // Below the floor the loss is that of the floor distance.
    CHECK(pathloss_db(e, 0.2) == doctest::Approx(-30.0));
    CHECK_THROWS_AS(pathloss_db(e, 0.0), std::domain_error);
    CHECK_THROWS_AS(pathloss_db(e, -3.0), std::domain_error);
}

TEST_CASE("dBm / mW round trip") {
    for (double dbm : {-104.0, -60.0, 0.0, 28.45, 40.0}) CHECK(std::abs(mw_to_dbm(dbm_to_mw(dbm)) - dbm) < 1e-9);
    CHECK(dbm_to_mw(0.0) == doctest::Approx(1.0));
}

TEST_CASE("single eNB at 100 m: 44 dB SINR") {
    Scenario s = test::scenario({test::enb("E1", 0.0, 0.0)}, {test::vehicle(0, 100.0, 0.0)});
    const std::vector<double> beta{1.0};
    const auto rp = build_reuse_pattern(s, s.mec_servers[0], beta);
    const double g = sinr(s, rp, "E1", 0, "E1");
    CHECK(10.0 * std::log10(g) == doctest::Approx(44.0));
    CHECK(spectral_efficiency(s, rp, "E1", 0, "E1") == doctest::Approx(std::log2(1.0 + std::pow(10.0, 4.4))));
    CHECK(spectral_efficiency(s, rp, "E1", 0, "E1") == doctest::Approx(14.62).epsilon(1e-3));
}

TEST_CASE("equidistant co-channel APs give SINR just under 0 dB") {
    Scenario s = test::scenario({test::ap("A1", 400.0, 0.0), test::ap("A2", 600.0, 0.0)},
                                {test::vehicle(0, 500.0, 0.0)});
    const std::vector<double> beta{1.0};
    const auto rp = build_reuse_pattern(s, s.mec_servers[0], beta);
    const double g = sinr(s, rp, "A1", 0, kWifiSlice);
    CHECK(g < 1.0);
    CHECK(g > 0.99);
    // SINR of exactly 1 would give 0.8 b/s/Hz.
    CHECK(spectral_efficiency(s, rp, "A1", 0, kWifiSlice) == doctest::Approx(0.8 * std::log2(1.0 + g)));
    CHECK(spectral_efficiency(s, rp, "A1", 0, kWifiSlice) == doctest::Approx(0.8).epsilon(1e-2));
}

TEST_CASE("adding a co-channel interferer never raises SINR") {
    auto bss = std::vector<BaseStation>{test::ap("A1", 400.0, 0.0)};
    Scenario one = test::scenario(bss, {test::vehicle(0, 450.0, 0.0)});
    bss.push_back(test::ap("A2", 700.0, 0.0));
    Scenario two = test::scenario(bss, {test::vehicle(0, 450.0, 0.0)});
    const std::vector<double> beta{1.0};
    const double g1 = sinr(one, build_reuse_pattern(one, one.mec_servers[0], beta), "A1", 0, kWifiSlice);
    const double g2 = sinr(two, build_reuse_pattern(two, two.mec_servers[0], beta), "A1", 0, kWifiSlice);
    CHECK(g2 < g1);
}

TEST_CASE("an AP on its Wi-Fi slice sees no eNB interference") {
    Scenario s = test::scenario({test::enb("E1", 0.0, 0.0), test::ap("A1", 600.0, 0.0)},
                                {test::vehicle(0, 600.0, 50.0)});
    const std::vector<double> beta{0.5, 0.5};
    const auto rp = build_reuse_pattern(s, s.mec_servers[0], beta);
    const double g = sinr(s, rp, "A1", 0, kWifiSlice);
    const double rx = received_power_dbm(s.base_stations[1], 50.0);
    CHECK(10.0 * std::log10(g) == doctest::Approx(rx - s.noise_dbm));
}

TEST_CASE("case-study reuse pattern") {
    const auto cfg = case_study_config();
    Scenario s;
    s.road = cfg.road;
    s.base_stations = cfg.base_stations;
    s.mec_servers = cfg.mec_servers;
    const auto& m1 = s.mec_server("M1");
    CHECK(slice_ids(s, m1) == std::vector<std::string>{"S1", "S2", kWifiSlice});
    const std::vector<double> beta{0.2, 0.3, 0.5};
    const auto rp = build_reuse_pattern(s, m1, beta);
    CHECK(reuse_is_legal(s, rp));
    CHECK(rp.ratio("S2") == doctest::Approx(0.3));
    for (const char* id : {"AP4", "AP5", "AP6"}) {
        CHECK(rp.transmits_on(id, "S1"));
        CHECK_FALSE(rp.transmits_on(id, "S2"));
    }
    for (const char* id : {"AP1", "AP2", "AP3"}) {
        CHECK(rp.transmits_on(id, "S2"));
        CHECK_FALSE(rp.transmits_on(id, "S1"));
    }
    CHECK_FALSE(rp.transmits_on("S1", "S2"));
    CHECK_THROWS_AS(build_reuse_pattern(s, m1, std::vector<double>{0.5, 0.5}), ContractViolation);
    CHECK_THROWS_AS(build_reuse_pattern(s, m1, std::vector<double>{0.5, 0.6, -0.1}), ContractViolation);

    // A hand-built pattern putting AP2 on S1 breaks the protection rule.
    auto bad = rp;
    bad.bs_slices["AP2"].push_back("S1");
    CHECK_FALSE(reuse_is_legal(s, bad));
}

TEST_CASE("contract violations and link dump") {
    Scenario s = test::scenario({test::enb("E1", 0.0, 0.0), test::ap("A1", 900.0, 0.0)},
                                {test::vehicle(0, 100.0, 0.0)});
    const std::vector<double> beta{0.5, 0.5};
    const auto rp = build_reuse_pattern(s, s.mec_servers[0], beta);
    CHECK_THROWS_AS(sinr(s, rp, "A1", 0, kWifiSlice), ContractViolation);  // out of range
    CHECK_THROWS_AS(sinr(s, rp, "E1", 0, kWifiSlice), ContractViolation);  // off-slice

    const auto links = link_qualities(s, rp);
    REQUIRE(links.size() == 1);
    CHECK(links[0].bs_id == "E1");
    CHECK(links[0].achievable_rate_bps("E1", 1e6) == doctest::Approx(links[0].spectral_efficiency("E1") * 1e6));
    std::ostringstream csv;
    write_link_csv(csv, links);
    CHECK(csv.str().rfind("bs_id,av_id,slice_id,sinr_db,eff\nE1,0,E1,", 0) == 0);
}

TEST_CASE("shifting every power and the noise by one offset keeps the best BS") {
    Scenario s = test::scenario({test::enb("E1", 0.0, 0.0), test::ap("A1", 300.0, 0.0)},
                                {test::vehicle(0, 250.0, 0.0)});
    const std::vector<double> beta{0.5, 0.5};
    auto best = [&](const Scenario& sc) {
        const auto rp = build_reuse_pattern(sc, sc.mec_servers[0], beta);
        return sinr(sc, rp, "E1", 0, "E1") > sinr(sc, rp, "A1", 0, kWifiSlice) ? "E1" : "A1";
    };
    const std::string before = best(s);
    for (auto& b : s.base_stations) b.tx_power_dbm += 7.0;
    s.noise_dbm += 7.0;
    CHECK(best(s) == before);
}
