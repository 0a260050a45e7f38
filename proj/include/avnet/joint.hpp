#pragma once

// Alternating solve of bandwidth slicing and MEC placement. Placement fixes
// each task's processing delay D, which tightens the AV's rate floor to leave
// room for D in its delay budget; the resulting rates give the downlink delay
// R that placement must respect in turn.

#include <optional>
#include <vector>

#include "avnet/config.hpp"
#include "avnet/mec.hpp"
#include "avnet/slicing.hpp"

namespace avnet {

struct JointOptions {
    SlicingOptions slicing;
    MecWeights weights;
    MecParams mec;
    int max_iters{10};
};

JointOptions joint_options(const SolverKnobs& knobs);

struct JointResult {
    // One per MEC server that manages at least one AV, ascending id.
    std::vector<SlicingSolution> slicing;
    MecAssignment assignment;
    std::vector<TaskDemand> tasks;
    // Per-AV rate floors (QoS and delay) the returned slicing was solved under.
    RateFloors floors;
    bool converged{false};
    int iterations{0};

    double slicing_utility() const;
    bool slicing_feasible() const;
};

/// Task for every AV with a serving MEC server and positive demand, with R unset.
std::vector<TaskDemand> make_tasks(const Scenario& s);

/// Rate needed for the downlink to fit in what the delay budget leaves after
/// `processing_s`; nullopt when nothing is left.
std::optional<double> delay_floor_bps(const Vehicle& v, double processing_s);

/// Iterates slicing and placement until the rate floors repeat. Without a
/// fixed point inside max_iters the iterate with the best (slicing utility,
/// placement utility) is returned with converged = false.
JointResult joint_solve(const Scenario& s, const JointOptions& options);

nlohmann::json to_json(const JointResult& r);

}  // namespace avnet
