#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "avnet/cli.hpp"
#include "avnet/config.hpp"
#include "avnet/sweep.hpp"
#include "doctest.h"

using namespace avnet;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "avnet");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("avnet_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path small_config(const fs::path& dir, const std::string& densities = "[0.12, 0.2]") {
    const auto p = dir / "small.json";
    std::ofstream(p) << R"({"densities": )" << densities << R"(, "replications": 2, "solver": {"grid_step": 0.1}})";
    return p;
}

}  // namespace

TEST_CASE("cell seeds are stable and distinct") {
    CHECK(cell_seed(1, 0.12, 0) == cell_seed(1, 0.12, 0));
    std::set<std::uint64_t> seen;
    const auto cfg = case_study_config();
    for (double d : cfg.densities) {
        for (int r = 0; r < cfg.replications; ++r) CHECK(seen.insert(cell_seed(cfg.base_seed, d, r)).second);
    }
    // Adding densities leaves existing seeds alone.
    CHECK(cell_seed(cfg.base_seed, 0.14, 3) == cell_seed(cfg.base_seed, 0.14, 3));
}

TEST_CASE("sweep output does not depend on the worker count") {
    auto cfg = case_study_config();
    cfg.densities = {0.12, 0.14};
    cfg.replications = 2;
    cfg.solver.grid_step = 0.1;
    std::ostringstream a;
    std::ostringstream b;
    const auto rows = run_sweep(cfg, 1);
    write_sweep_csv(a, rows);
    write_sweep_csv(b, run_sweep(cfg, 3));
    CHECK(a.str() == b.str());
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].density == 0.12);
    CHECK(rows[1].replication == 1);
    for (const auto& r : rows) {
        CHECK(r.feasible);
        CHECK(r.utility_gain == doctest::Approx(r.utility_proposed - r.utility_baseline));
        CHECK(r.utility_gain >= -1e-9);
    }
    CHECK(a.str().rfind(std::string(kSweepHeader) + "\n", 0) == 0);
    CHECK(std::string(kSweepHeader) ==
          "density,replication,seed,beta1,beta2,beta_w,utility_proposed,utility_baseline,utility_gain,n_ap_avg,"
          "n_enb_avg,mec_utility,migrated_volume,feasible,error");
}

TEST_CASE("association averages use 6 APs and 2 eNBs") {
    auto cfg = case_study_config();
    cfg.solver.grid_step = 0.1;
    const auto r = run_cell(cfg, 0.12, 0);
    REQUIRE(r.feasible);
    CHECK(6.0 * r.n_ap_avg + 2.0 * r.n_enb_avg == doctest::Approx(120.0));
    CHECK(6.0 * r.n_ap_baseline + 2.0 * r.n_enb_baseline == doctest::Approx(120.0));
}

TEST_CASE("module errors land in the record") {
    auto cfg = case_study_config();
    cfg.road.lanes = 1;
    cfg.road.length_m = 100.0;
    const auto r = run_cell(cfg, 0.4, 0);
    CHECK_FALSE(r.feasible);
    CHECK(r.error.find("lane 0") != std::string::npos);
}

TEST_CASE("cli: sweep, plotdata and determinism") {
    const auto dir = scratch("sweep");
    const auto cfg = small_config(dir);
    const auto first = cli({"sweep", "--config", cfg.string(), "--out", (dir / "a.csv").string()});
    CHECK(first.code == 0);
    const auto second = cli({"sweep", "--config", cfg.string(), "--out", (dir / "b.csv").string(), "--jobs", "3"});
    CHECK(second.code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(fs::exists(dir / "a_baseline.csv"));
    CHECK(slurp(dir / "a_baseline.csv").rfind(std::string(kBaselineHeader) + "\n", 0) == 0);

    CHECK(cli({"plotdata", "--in", (dir / "a.csv").string(), "--out", (dir / "p1").string()}).code == 0);
    CHECK(cli({"plotdata", "--in", (dir / "a.csv").string(), "--out", (dir / "p2").string()}).code == 0);
    for (const char* f : {"gain_by_density.csv", "gain_sorted.csv", "association_by_density.csv"}) {
        CAPTURE(f);
        CHECK(slurp(dir / "p1" / f) == slurp(dir / "p2" / f));
        CHECK_FALSE(slurp(dir / "p1" / f).empty());
    }
    // Two densities and two replications.
    std::istringstream g(slurp(dir / "p1" / "gain_by_density.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(g, line)) ++lines;
    CHECK(lines == 3);
}

TEST_CASE("cli: empty densities give a header-only CSV") {
    const auto dir = scratch("empty");
    const auto cfg = small_config(dir, "[]");
    const auto r = cli({"sweep", "--config", cfg.string(), "--out", (dir / "s.csv").string()});
    CHECK(r.code == 0);
    CHECK(slurp(dir / "s.csv") == std::string(kSweepHeader) + "\n");
}

TEST_CASE("cli: single density and seed override") {
    const auto dir = scratch("single");
    const auto cfg = small_config(dir);
    const auto r = cli({"sweep", "--config", cfg.string(), "--out", (dir / "s.csv").string(), "--density", "0.14",
                        "--seed", "5", "--grid-step", "0.25"});
    CHECK(r.code == 0);
    const auto csv = slurp(dir / "s.csv");
    CHECK(csv.find("\n0.1400,0,") != std::string::npos);
    CHECK(csv.find("0.1200") == std::string::npos);
}

TEST_CASE("cli: errors and usage") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"bogus"}).code == 1);
    CHECK(cli({"sweep", "--out", "x.csv", "--nonsense"}).code == 1);
    CHECK(cli({"--help"}).code == 0);
    const auto missing = cli({"sweep", "--config", "/no/such/config.json", "--out", "x.csv"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("/no/such/config.json") != std::string::npos);
    CHECK(cli({"verify", "--size", "huge"}).code == 1);
    CHECK(cli({"generate", "--density", "0.9"}).code == 1);
}

TEST_CASE("cli: generate and solve") {
    const auto dir = scratch("solve");
    const auto gen = cli({"generate", "--density", "0.12", "--seed", "3"});
    REQUIRE(gen.code == 0);
    const auto j = nlohmann::json::parse(gen.out);
    CHECK(j.at("vehicles").size() == 120);
    std::ofstream(dir / "scn.json") << gen.out;

    const auto solve = cli({"solve", "--scenario", (dir / "scn.json").string(), "--grid-step", "0.1", "--out",
                            (dir / "out").string()});
    CHECK(solve.code == 0);
    for (const char* f : {"joint.json", "baseline.json", "mec_summary.csv", "slicing_M1.csv"}) {
        CAPTURE(f);
        CHECK(fs::exists(dir / "out" / f));
    }
    const auto joint = nlohmann::json::parse(slurp(dir / "out" / "joint.json"));
    CHECK(joint.at("converged") == true);
    CHECK(cli({"solve", "--out", (dir / "x").string()}).code == 1);
}

TEST_CASE("cli: AVNET_CONFIG supplies the default config") {
    const auto dir = scratch("env");
    const auto cfg = small_config(dir, "[0.16]");
    setenv("AVNET_CONFIG", cfg.string().c_str(), 1);
    const auto r = cli({"sweep", "--out", (dir / "s.csv").string()});
    unsetenv("AVNET_CONFIG");
    CHECK(r.code == 0);
    CHECK(slurp(dir / "s.csv").find("\n0.1600,1,") != std::string::npos);
}

TEST_CASE("cli: verify tiny") {
    const auto r = cli({"verify", "--size", "tiny"});
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
}
