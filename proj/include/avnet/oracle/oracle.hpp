#pragma once

// Reference solvers for cross-checking the production code at toy sizes.
// Everything here is written from the model definitions directly and shares
// no search code with the solvers it checks.

#include <cstdint>
#include <map>
#include <vector>

#include "avnet/mec.hpp"
#include "avnet/scenario.hpp"
#include "avnet/slicing.hpp"

namespace avnet::oracle {

// ---- queueing -------------------------------------------------------------

struct QueueSimResult {
    std::uint64_t packets{0};
    std::uint64_t late{0};
    double mean_delay_s{0.0};
    double violation_ratio() const { return packets ? static_cast<double>(late) / static_cast<double>(packets) : 0.0; }
};

/// FIFO single-server queue with Poisson arrivals and exponential packet
/// sizes of mean `mean_packet_bits`, served at `rate_bps`. Counts packets
/// whose sojourn exceeds `bound_s`.
QueueSimResult simulate_mm1(double arrival_pps, double mean_packet_bits, double rate_bps, double bound_s,
                            std::uint64_t packets, std::uint64_t seed);

// ---- slicing --------------------------------------------------------------

struct SlicingOptimum {
    bool feasible{false};
    double utility{0.0};
    std::vector<double> beta;
    Association association;
};

/// Every beta on the grid times every association, fractions by bisection.
SlicingOptimum exhaustive_slicing(const Scenario& s, const MecServer& mec, double grid_step,
                                  const RateFloors& floors = {}, const RadioParams& radio = {});

/// One MEC server, 1-3 BSs, 2-6 AVs, all on a short road.
Scenario make_tiny_slicing_instance(std::uint64_t seed);

// ---- placement ------------------------------------------------------------

struct PlacementOptimum {
    // Tasks left on CLOUD although the cloud breaks their delay budget.
    int violations{0};
    double utility{0.0};
};

/// Enumerates every placement of every task (servers plus CLOUD) for compute
/// and storage separately; best is fewest violations, then highest utility.
PlacementOptimum brute_force_assignment(const std::vector<TaskDemand>& tasks, const std::vector<MecServer>& servers,
                                        const MecWeights& weights, const MecParams& params = {});

struct MecInstance {
    std::vector<TaskDemand> tasks;
    std::vector<MecServer> servers;
    MecWeights weights;
};

/// 1-3 servers, 1-8 tasks, integer demands and capacities, random delays.
MecInstance make_tiny_mec_instance(std::uint64_t seed);

// ---- joint ----------------------------------------------------------------

struct JointOptimum {
    int violations{0};
    double slicing_utility{0.0};
    double mec_utility{0.0};
};

/// Every compute placement, and for each the exhaustive slicing optimum under
/// the rate floors that placement implies. Ranked by fewest violations, then
/// slicing utility, then placement utility.
JointOptimum brute_force_joint(const Scenario& s, double grid_step, const MecWeights& weights,
                               const MecParams& params = {});

/// Two servers (the second a neighbour with no BSs), one eNB, one AP, 4 AVs.
Scenario make_tiny_joint_instance(std::uint64_t seed);

}  // namespace avnet::oracle
