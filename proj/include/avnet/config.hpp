#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "avnet/scenario.hpp"
#include "json.hpp"

namespace avnet {

/// Per-AV resource demands attached at generation time, by application kind.
struct DemandProfile {
    double compute_demand{0.0};   // cycles/s
    double workload_cycles{0.0};  // cycles
    double storage_demand{0.0};   // bytes
};

struct SolverKnobs {
    double grid_step{0.02};
    int max_iters{10};
    double kappa{0.5};
    double w_compute{1.0};
    double w_storage{1.0};
    // Fixed slicing ratios for the max-SINR baseline; empty means equal split.
    std::vector<double> baseline_beta;
    // Seed the proposed search with the baseline's ratios and association.
    bool warm_start_baseline{true};
    double interference_radius_factor{2.0};
    double min_distance_m{1.0};
    double cloud_delay_s{0.05};
    // Backhaul hops charged for a migrated task (1 = charged once).
    double backhaul_hop_multiplier{1.0};
    // Per-resource task count at or below which assignment is solved exactly.
    int exact_task_limit{10};
};

struct ScenarioConfig {
    RoadGeometry road;
    double min_spacing_m{5.0};
    double delay_sensitive_prob{0.8};
    double noise_dbm{-104.0};
    double nominal_speed_mps{20.0};
    std::vector<BaseStation> base_stations;
    std::vector<MecServer> mec_servers;
    DemandProfile delay_sensitive_demand;
    DemandProfile delay_tolerant_demand;
    ApplicationProfile safety_app;
    ApplicationProfile hd_map_app;
    SolverKnobs solver;
    std::vector<double> densities;
    int replications{1};
    std::uint64_t base_seed{0};
};

inline constexpr double kMinDensity = 0.12;
inline constexpr double kMaxDensity = 0.40;

/// Built-in case study: 1 km four-lane road, two eNBs and six Wi-Fi APs on one
/// roadside, one MEC server owning all of them plus one neighbouring server.
ScenarioConfig case_study_config();

/// Throws ValidationError on the first broken invariant.
void validate(const ScenarioConfig& cfg);

/// Missing keys fall back to case_study_config() values.
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& cfg);

/// Reads and validates a config file. Throws ValidationError naming the path.
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace avnet
