#pragma once

// Compute/storage placement of AV tasks on MEC servers (or the cloud sink),
// trading summed utilisation against migration cost.

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avnet/scenario.hpp"
#include "json.hpp"

namespace avnet {

inline constexpr const char* kCloud = "CLOUD";

struct TaskDemand {
    VehicleId av_id{0};
    std::string home_server;
    double compute{0.0};          // cycles/s
    double storage{0.0};          // bytes
    double workload_cycles{0.0};
    double response_threshold_s{0.0};
    std::optional<double> latency_threshold_s;
    // Downlink delay R under the current bandwidth allocation.
    double transmission_delay_s{0.0};
};

struct MecWeights {
    double w_compute{1.0};
    double w_storage{1.0};
    double kappa{0.5};
};

struct MecParams {
    double cloud_delay_s{0.05};
    double backhaul_hop_multiplier{1.0};
    // Per-resource task count at or below which placement is solved exactly.
    int exact_task_limit{10};
};

struct MecAssignment {
    std::map<VehicleId, std::string> compute_server;  // server id or CLOUD
    std::map<VehicleId, std::string> storage_server;
    std::map<std::string, double> per_server_compute_util;
    std::map<std::string, double> per_server_storage_util;
    double migrated_volume{0.0};
    double utility{0.0};
    // Tasks whose delay budget no placement meets; their compute sits on CLOUD.
    std::vector<VehicleId> infeasible_tasks;
    // Search objective after seeding and after every accepted move.
    std::vector<double> search_trace;
};

/// workload / compute, plus backhaul when off the home server, plus the cloud
/// delay on CLOUD. Throws ContractViolation for work with no compute rate.
double processing_delay(const TaskDemand& t, const MecServer& server, const MecParams& params = {});
double cloud_processing_delay(const TaskDemand& t, const MecParams& params = {});

/// sum_i (w_c util_c(i) + w_s util_s(i)) - kappa * migrated_volume.
double assignment_utility(const MecAssignment& a, const MecWeights& weights);

/// Greedy seeding (home, else best remote, else CLOUD), then single moves and
/// pairwise swaps until no move improves; small instances are finished by an
/// exact branch and bound. Compute placements honour D + R against the task's
/// thresholds; capacities are never exceeded.
MecAssignment solve_assignment(std::span<const TaskDemand> tasks, std::span<const MecServer> servers,
                               const MecWeights& weights, const MecParams& params = {});

nlohmann::json to_json(const MecAssignment& a);
/// server_id,compute_util,storage_util,n_tasks,n_migrated
void write_summary_csv(std::ostream& out, const MecAssignment& a, std::span<const TaskDemand> tasks);

}  // namespace avnet
