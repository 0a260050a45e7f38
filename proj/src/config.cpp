#include "avnet/config.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "avnet/errors.hpp"

namespace avnet {

namespace {

BaseStation make_enb(std::string id, double x) {
    BaseStation b;
    b.id = std::move(id);
    b.kind = BsKind::ENB;
    b.position_m = {x, -10.0};
    b.tx_power_dbm = 40.0;
    b.range_m = 600.0;
    b.pathloss_a_db = -30.0;
    b.pathloss_b_db = -35.0;
    b.mac_efficiency = 1.0;
    b.reuse_protection_m = 150.0;
    return b;
}

BaseStation make_ap(std::string id, double x) {
    BaseStation b;
    b.id = std::move(id);
    b.kind = BsKind::WIFI_AP;
    b.position_m = {x, -10.0};
    b.tx_power_dbm = 28.45;
    b.range_m = 180.0;
    b.pathloss_a_db = -40.0;
    b.pathloss_b_db = -35.0;
    b.mac_efficiency = 0.8;
    return b;
}

void to_json(nlohmann::json& j, const DemandProfile& d) {
    j = {{"compute_demand", d.compute_demand},
         {"workload_cycles", d.workload_cycles},
         {"storage_demand", d.storage_demand}};
}

void merge(const nlohmann::json& j, DemandProfile& d) {
    d.compute_demand = j.value("compute_demand", d.compute_demand);
    d.workload_cycles = j.value("workload_cycles", d.workload_cycles);
    d.storage_demand = j.value("storage_demand", d.storage_demand);
}

nlohmann::json solver_to_json(const SolverKnobs& k) {
    return {{"grid_step", k.grid_step},
            {"max_iters", k.max_iters},
            {"kappa", k.kappa},
            {"w_compute", k.w_compute},
            {"w_storage", k.w_storage},
            {"baseline_beta", k.baseline_beta},
            {"warm_start_baseline", k.warm_start_baseline},
            {"interference_radius_factor", k.interference_radius_factor},
            {"min_distance_m", k.min_distance_m},
            {"cloud_delay_s", k.cloud_delay_s},
            {"backhaul_hop_multiplier", k.backhaul_hop_multiplier},
            {"exact_task_limit", k.exact_task_limit}};
}

void merge(const nlohmann::json& j, SolverKnobs& k) {
    k.grid_step = j.value("grid_step", k.grid_step);
    k.max_iters = j.value("max_iters", k.max_iters);
    k.kappa = j.value("kappa", k.kappa);
    k.w_compute = j.value("w_compute", k.w_compute);
    k.w_storage = j.value("w_storage", k.w_storage);
    if (j.contains("baseline_beta")) k.baseline_beta = j.at("baseline_beta").get<std::vector<double>>();
    k.warm_start_baseline = j.value("warm_start_baseline", k.warm_start_baseline);
    k.interference_radius_factor = j.value("interference_radius_factor", k.interference_radius_factor);
    k.min_distance_m = j.value("min_distance_m", k.min_distance_m);
    k.cloud_delay_s = j.value("cloud_delay_s", k.cloud_delay_s);
    k.backhaul_hop_multiplier = j.value("backhaul_hop_multiplier", k.backhaul_hop_multiplier);
    k.exact_task_limit = j.value("exact_task_limit", k.exact_task_limit);
}

void validate(const DemandProfile& d, const std::string& name) {
    if (d.compute_demand < 0.0 || d.workload_cycles < 0.0 || d.storage_demand < 0.0) {
        throw ValidationError("demands." + name + ": values must be >= 0");
    }
    if ((d.compute_demand == 0.0) != (d.workload_cycles == 0.0)) {
        throw ValidationError("demands." + name + ": compute_demand = 0 iff workload_cycles = 0");
    }
}

}  // namespace

ScenarioConfig case_study_config() {
    ScenarioConfig c;
    c.road = RoadGeometry{1000.0, 4, 3.5};
    c.base_stations = {make_enb("S1", 250.0), make_enb("S2", 750.0),
                       make_ap("AP1", 85.0),  make_ap("AP2", 250.0),
                       make_ap("AP3", 415.0), make_ap("AP4", 585.0),
                       make_ap("AP5", 750.0), make_ap("AP6", 915.0)};

    MecServer m1;
    m1.id = "M1";
    m1.compute_capacity = 1.0e10;
    m1.storage_capacity = 3.0e9;
    m1.bandwidth_hz = 25.0e6;
    m1.backhaul_delay_s = 0.01;
    for (const auto& b : c.base_stations) m1.bs_ids.push_back(b.id);

    // Neighbouring server whose own service area lies off this road segment;
    // it only offers idle capacity for migrated tasks.
    MecServer m2;
    m2.id = "M2";
    m2.compute_capacity = 4.0e9;
    m2.storage_capacity = 1.0e9;
    m2.bandwidth_hz = 25.0e6;
    m2.backhaul_delay_s = 0.01;
    c.mec_servers = {m1, m2};

    c.delay_sensitive_demand = {1.0e8, 2.0e6, 1.0e7};
    c.delay_tolerant_demand = {0.0, 0.0, 5.0e7};

    c.safety_app.kind = AppKind::DELAY_SENSITIVE;
    c.safety_app.arrival_rate_pps = 4.0;
    c.safety_app.packet_size_bits = 1048.0;
    c.safety_app.delay_bound_s = 0.1;
    c.safety_app.violation_prob = 1.0e-3;

    c.hd_map_app.kind = AppKind::DELAY_TOLERANT;
    c.hd_map_app.arrival_rate_pps = 20.0;
    c.hd_map_app.packet_size_bits = 9000.0;

    c.densities = {0.12, 0.14, 0.16, 0.18, 0.20, 0.22, 0.24};
    c.replications = 20;
    c.base_seed = 20190415;
    return c;
}

void validate(const ScenarioConfig& cfg) {
    Scenario shell;
    shell.road = cfg.road;
    shell.base_stations = cfg.base_stations;
    shell.mec_servers = cfg.mec_servers;
    validate(shell);

    if (!(cfg.min_spacing_m > 0.0)) throw ValidationError("min_spacing_m must be > 0");
    if (!(cfg.delay_sensitive_prob >= 0.0 && cfg.delay_sensitive_prob <= 1.0)) {
        throw ValidationError("delay_sensitive_prob must lie in [0,1]");
    }
    if (!(cfg.nominal_speed_mps > 0.0)) throw ValidationError("nominal_speed_mps must be > 0");
    validate(cfg.delay_sensitive_demand, "delay_sensitive");
    validate(cfg.delay_tolerant_demand, "delay_tolerant");
    validate(cfg.safety_app);
    validate(cfg.hd_map_app);
    if (cfg.safety_app.kind != AppKind::DELAY_SENSITIVE) {
        throw ValidationError("qos.safety must be DELAY_SENSITIVE");
    }
    if (cfg.hd_map_app.kind != AppKind::DELAY_TOLERANT) {
        throw ValidationError("qos.hd_map must be DELAY_TOLERANT");
    }

    const auto& k = cfg.solver;
    if (!(k.grid_step > 0.0 && k.grid_step <= 0.5)) throw ValidationError("solver.grid_step must lie in (0, 0.5]");
    if (k.max_iters < 1) throw ValidationError("solver.max_iters must be >= 1");
    if (k.kappa < 0.0 || k.w_compute < 0.0 || k.w_storage < 0.0) {
        throw ValidationError("solver weights and kappa must be >= 0");
    }
    if (!k.baseline_beta.empty()) {
        double sum = std::accumulate(k.baseline_beta.begin(), k.baseline_beta.end(), 0.0);
        for (double b : k.baseline_beta) {
            if (b < 0.0) throw ValidationError("solver.baseline_beta entries must be >= 0");
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("solver.baseline_beta must sum to 1");
    }
    if (!(k.interference_radius_factor > 0.0)) throw ValidationError("solver.interference_radius_factor must be > 0");
    if (!(k.min_distance_m > 0.0)) throw ValidationError("solver.min_distance_m must be > 0");
    if (k.cloud_delay_s < 0.0) throw ValidationError("solver.cloud_delay_s must be >= 0");
    if (k.backhaul_hop_multiplier < 0.0) throw ValidationError("solver.backhaul_hop_multiplier must be >= 0");
    if (k.exact_task_limit < 0) throw ValidationError("solver.exact_task_limit must be >= 0");

    for (double d : cfg.densities) {
        if (!(d >= kMinDensity - 1e-12 && d <= kMaxDensity + 1e-12)) {
            throw ValidationError("density " + std::to_string(d) + " outside [0.12, 0.40]");
        }
    }
    if (cfg.replications < 1) throw ValidationError("replications must be >= 1");
}

ScenarioConfig config_from_json(const nlohmann::json& j) {
    ScenarioConfig c = case_study_config();
    try {
        if (j.contains("road")) c.road = j.at("road").get<RoadGeometry>();
        c.min_spacing_m = j.value("min_spacing_m", c.min_spacing_m);
        c.delay_sensitive_prob = j.value("delay_sensitive_prob", c.delay_sensitive_prob);
        c.noise_dbm = j.value("noise_dbm", c.noise_dbm);
        c.nominal_speed_mps = j.value("nominal_speed_mps", c.nominal_speed_mps);
        if (j.contains("base_stations")) c.base_stations = j.at("base_stations").get<std::vector<BaseStation>>();
        if (j.contains("mec_servers")) c.mec_servers = j.at("mec_servers").get<std::vector<MecServer>>();
        if (j.contains("demands")) {
            const auto& d = j.at("demands");
            if (d.contains("delay_sensitive")) merge(d.at("delay_sensitive"), c.delay_sensitive_demand);
            if (d.contains("delay_tolerant")) merge(d.at("delay_tolerant"), c.delay_tolerant_demand);
        }
        if (j.contains("qos")) {
            const auto& q = j.at("qos");
            if (q.contains("safety")) c.safety_app = q.at("safety").get<ApplicationProfile>();
            if (q.contains("hd_map")) c.hd_map_app = q.at("hd_map").get<ApplicationProfile>();
        }
        if (j.contains("solver")) merge(j.at("solver"), c.solver);
        if (j.contains("densities")) c.densities = j.at("densities").get<std::vector<double>>();
        c.replications = j.value("replications", c.replications);
        c.base_seed = j.value("base_seed", c.base_seed);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed config: ") + e.what());
    }
    return c;
}

nlohmann::json config_to_json(const ScenarioConfig& c) {
    nlohmann::json demands;
    to_json(demands["delay_sensitive"], c.delay_sensitive_demand);
    to_json(demands["delay_tolerant"], c.delay_tolerant_demand);
    return {{"road", c.road},
            {"min_spacing_m", c.min_spacing_m},
            {"delay_sensitive_prob", c.delay_sensitive_prob},
            {"noise_dbm", c.noise_dbm},
            {"nominal_speed_mps", c.nominal_speed_mps},
            {"base_stations", c.base_stations},
            {"mec_servers", c.mec_servers},
            {"demands", demands},
            {"qos", {{"safety", c.safety_app}, {"hd_map", c.hd_map_app}}},
            {"solver", solver_to_json(c.solver)},
            {"densities", c.densities},
            {"replications", c.replications},
            {"base_seed", c.base_seed}};
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    ScenarioConfig c = config_from_json(j);
    try {
        validate(c);
    } catch (const ValidationError& e) {
        throw ValidationError("config file '" + path.string() + "': " + e.what());
    }
    return c;
}

}  // namespace avnet
