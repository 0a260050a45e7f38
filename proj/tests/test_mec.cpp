#include <cmath>
#include <set>
#include <sstream>

#include "avnet/errors.hpp"
#include "avnet/mec.hpp"
#include "avnet/oracle/oracle.hpp"
#include "doctest.h"

using namespace avnet;

namespace {

MecServer server(const std::string& id, double compute, double storage, double backhaul = 0.01) {
    return {id, compute, storage, 1e6, {}, backhaul};
}

TaskDemand task(VehicleId id, const std::string& home, double compute, double storage = 0.0) {
    TaskDemand t;
    t.av_id = id;
    t.home_server = home;
    t.compute = compute;
    t.storage = storage;
    t.workload_cycles = compute > 0.0 ? compute * 0.01 : 0.0;
    t.response_threshold_s = 10.0;
    return t;
}

void check_invariants(const MecAssignment& a, const std::vector<TaskDemand>& tasks,
                      const std::vector<MecServer>& servers) {
    std::map<std::string, double> c_load;
    std::map<std::string, double> s_load;
    for (const auto& t : tasks) {
        if (t.compute > 0.0) {
            REQUIRE(a.compute_server.count(t.av_id) == 1);
            c_load[a.compute_server.at(t.av_id)] += t.compute;
        } else {
            CHECK(a.compute_server.count(t.av_id) == 0);
        }
        if (t.storage > 0.0) {
            REQUIRE(a.storage_server.count(t.av_id) == 1);
            s_load[a.storage_server.at(t.av_id)] += t.storage;
        } else {
            CHECK(a.storage_server.count(t.av_id) == 0);
        }
    }
    for (const auto& sv : servers) {
        CHECK(c_load[sv.id] <= sv.compute_capacity);
        CHECK(s_load[sv.id] <= sv.storage_capacity);
        CHECK(a.per_server_compute_util.at(sv.id) <= 1.0);
        CHECK(a.per_server_storage_util.at(sv.id) <= 1.0);
    }
    for (std::size_t i = 1; i < a.search_trace.size(); ++i) CHECK(a.search_trace[i] >= a.search_trace[i - 1] - 1e-12);
}

}  // namespace

TEST_CASE("processing delay") {
    TaskDemand t = task(0, "M1", 1e8);
    t.workload_cycles = 1e7;
    const MecParams params;
    CHECK(processing_delay(t, server("M1", 1e10, 1e9), params) == doctest::Approx(0.1));
    CHECK(processing_delay(t, server("M2", 1e10, 1e9, 0.01), params) == doctest::Approx(0.11));
    CHECK(cloud_processing_delay(t, params) == doctest::Approx(0.15));
    MecParams twice;
    twice.backhaul_hop_multiplier = 2.0;
    CHECK(processing_delay(t, server("M2", 1e10, 1e9, 0.01), twice) == doctest::Approx(0.12));
    t.workload_cycles = 0.0;
    CHECK(processing_delay(t, server("M1", 1e10, 1e9), params) == 0.0);
    t.compute = 0.0;
    t.workload_cycles = 5.0;
    CHECK_THROWS_AS(processing_delay(t, server("M1", 1e10, 1e9), params), ContractViolation);
}

TEST_CASE("assignment utility") {
    MecAssignment empty;
    CHECK(assignment_utility(empty, {}) == 0.0);
    MecAssignment a;
    a.per_server_compute_util = {{"M1", 0.5}, {"M2", 0.25}};
    a.per_server_storage_util = {{"M1", 0.1}, {"M2", 0.0}};
    CHECK(assignment_utility(a, {1.0, 1.0, 7.0}) == doctest::Approx(0.85));
    a.migrated_volume = 0.2;
    CHECK(assignment_utility(a, {1.0, 2.0, 0.5}) == doctest::Approx(0.75 + 0.2 - 0.1));
}

TEST_CASE("three 6-unit tasks on two 10-unit servers") {
    const std::vector<MecServer> servers{server("M1", 10, 10), server("M2", 10, 10)};
    const std::vector<TaskDemand> tasks{task(0, "M1", 6), task(1, "M1", 6), task(2, "M1", 6)};
    const MecWeights w{1.0, 1.0, 0.1};
    const auto a = solve_assignment(tasks, servers, w);
    check_invariants(a, tasks, servers);
    int migrated = 0;
    int cloud = 0;
    for (const auto& [id, where] : a.compute_server) {
        migrated += where == "M2";
        cloud += where == kCloud;
    }
    CHECK(migrated == 1);
    CHECK(cloud == 1);
    CHECK(a.utility == doctest::Approx(oracle::brute_force_assignment(tasks, servers, w).utility));
}

TEST_CASE("kappa = 0 matches brute force with spare remote capacity") {
    const std::vector<MecServer> servers{server("M1", 8, 10), server("M2", 20, 10)};
    const std::vector<TaskDemand> tasks{task(0, "M1", 5, 3), task(1, "M1", 4, 2), task(2, "M2", 3)};
    const MecWeights w{1.0, 1.0, 0.0};
    const auto a = solve_assignment(tasks, servers, w);
    check_invariants(a, tasks, servers);
    CHECK(a.utility == doctest::Approx(oracle::brute_force_assignment(tasks, servers, w).utility).epsilon(1e-12));
}

TEST_CASE("huge kappa never migrates; overflow goes to the cloud") {
    const std::vector<MecServer> servers{server("M1", 10, 10), server("M2", 100, 100)};
    const std::vector<TaskDemand> tasks{task(0, "M1", 6, 6), task(1, "M1", 6, 6), task(2, "M1", 6, 6)};
    const auto a = solve_assignment(tasks, servers, {1.0, 1.0, 1e6});
    CHECK(a.migrated_volume == 0.0);
    int cloud = 0;
    for (const auto& [id, where] : a.compute_server) {
        CHECK(where != "M2");
        cloud += where == kCloud;
    }
    CHECK(cloud == 2);
}

TEST_CASE("single server within capacity keeps every task home") {
    const std::vector<MecServer> servers{server("M1", 100, 100)};
    const std::vector<TaskDemand> tasks{task(0, "M1", 10, 5), task(1, "M1", 20), task(2, "M1", 0, 7)};
    const auto a = solve_assignment(tasks, servers, {});
    for (const auto& [id, where] : a.compute_server) CHECK(where == "M1");
    for (const auto& [id, where] : a.storage_server) CHECK(where == "M1");
    CHECK(a.per_server_compute_util.at("M1") == doctest::Approx(0.3));
    CHECK(a.per_server_storage_util.at("M1") == doctest::Approx(0.12));
    CHECK(a.utility == doctest::Approx(0.42));
}

TEST_CASE("random instances match brute force exactly") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto inst = oracle::make_tiny_mec_instance(500 + seed);
        const auto a = solve_assignment(inst.tasks, inst.servers, inst.weights);
        const auto want = oracle::brute_force_assignment(inst.tasks, inst.servers, inst.weights);
        CAPTURE(seed);
        check_invariants(a, inst.tasks, inst.servers);
        CHECK(std::abs(a.utility - want.utility) <= 1e-9);
    }
}

TEST_CASE("local search alone stays feasible on a large instance") {
    std::vector<MecServer> servers{server("M1", 300, 300), server("M2", 200, 150), server("M3", 100, 400)};
    std::vector<TaskDemand> tasks;
    for (VehicleId k = 0; k < 60; ++k) tasks.push_back(task(k, servers[k % 3].id, 1 + k % 9, 2 + k % 5));
    const auto a = solve_assignment(tasks, servers, {1.0, 1.0, 0.5});
    check_invariants(a, tasks, servers);
    CHECK(a.search_trace.size() >= 1);
}

TEST_CASE("migrated volume never grows with kappa") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto inst = oracle::make_tiny_mec_instance(900 + seed);
        double prev = std::numeric_limits<double>::infinity();
        for (double kappa : {0.0, 0.5, 1.0, 2.0, 10.0}) {
            inst.weights.kappa = kappa;
            const auto a = solve_assignment(inst.tasks, inst.servers, inst.weights);
            CAPTURE(seed);
            CAPTURE(kappa);
            CHECK(a.migrated_volume <= prev + 1e-12);
            prev = a.migrated_volume;
        }
    }
}

TEST_CASE("unreachable latency flags only the affected task") {
    const std::vector<MecServer> servers{server("M1", 10, 10), server("M2", 10, 10)};
    std::vector<TaskDemand> tasks{task(0, "M1", 2), task(1, "M1", 2), task(2, "M2", 2)};
    tasks[1].transmission_delay_s = 0.01;
    tasks[1].latency_threshold_s = 0.005;  // below even R alone
    const auto a = solve_assignment(tasks, servers, {});
    CHECK(a.infeasible_tasks == std::vector<VehicleId>{1});
    CHECK(a.compute_server.at(1) == kCloud);
    CHECK(a.compute_server.at(0) == "M1");
    CHECK(a.compute_server.at(2) == "M2");
}

TEST_CASE("delay budget rules out migration but not home") {
    const std::vector<MecServer> servers{server("M1", 4, 10), server("M2", 100, 10, 0.05)};
    std::vector<TaskDemand> tasks{task(0, "M1", 3), task(1, "M1", 3)};
    for (auto& t : tasks) t.latency_threshold_s = 0.05;  // D = 0.01 home, 0.06 remote, 0.06 cloud
    const auto a = solve_assignment(tasks, servers, {1.0, 1.0, 0.0});
    CHECK(a.compute_server.at(0) == "M1");
    CHECK(a.compute_server.at(1) == kCloud);
    CHECK(a.infeasible_tasks == std::vector<VehicleId>{1});
}

TEST_CASE("serialisation") {
    const std::vector<MecServer> servers{server("M1", 10, 10), server("M2", 10, 10)};
    const std::vector<TaskDemand> tasks{task(0, "M1", 6, 2), task(1, "M1", 6), task(2, "M1", 6)};
    const auto a = solve_assignment(tasks, servers, {1.0, 1.0, 0.1});
    const auto j = to_json(a);
    CHECK(j.at("tasks").size() == 3);
    CHECK(j.at("servers").size() == 2);
    std::ostringstream csv;
    write_summary_csv(csv, a, tasks);
    const std::string out = csv.str();
    CHECK(out.rfind("server_id,compute_util,storage_util,n_tasks,n_migrated\n", 0) == 0);
    CHECK(out.find("\nM2,0.600000000,0.000000000,1,1\n") != std::string::npos);
    CHECK(out.find("\nCLOUD,") != std::string::npos);
    CHECK_THROWS_AS(solve_assignment(tasks, std::vector<MecServer>{}, {}), ContractViolation);
}
