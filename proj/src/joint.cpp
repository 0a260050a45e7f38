#include "avnet/joint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "avnet/qos.hpp"

namespace avnet {

JointOptions joint_options(const SolverKnobs& knobs) {
    JointOptions o;
    o.slicing.grid_step = knobs.grid_step;
    o.slicing.baseline_beta = knobs.baseline_beta;
    o.slicing.warm_start_baseline = knobs.warm_start_baseline;
    o.slicing.radio.min_distance_m = knobs.min_distance_m;
    o.slicing.radio.interference_radius_factor = knobs.interference_radius_factor;
    o.weights = {knobs.w_compute, knobs.w_storage, knobs.kappa};
    o.mec.cloud_delay_s = knobs.cloud_delay_s;
    o.mec.backhaul_hop_multiplier = knobs.backhaul_hop_multiplier;
    o.mec.exact_task_limit = knobs.exact_task_limit;
    o.max_iters = knobs.max_iters;
    return o;
}

double JointResult::slicing_utility() const {
    double u = 0.0;
    for (const auto& sol : slicing) u += sol.utility;
    return u;
}

bool JointResult::slicing_feasible() const {
    return std::all_of(slicing.begin(), slicing.end(), [](const SlicingSolution& sol) { return sol.feasible; });
}

std::vector<TaskDemand> make_tasks(const Scenario& s) {
    std::vector<TaskDemand> tasks;
    for (const auto& v : s.vehicles) {
        if (!(v.compute_demand > 0.0) && !(v.storage_demand > 0.0)) continue;
        const auto home = serving_mec(s, v);
        if (!home) continue;
        TaskDemand t;
        t.av_id = v.id;
        t.home_server = *home;
        t.compute = v.compute_demand;
        t.storage = v.storage_demand;
        t.workload_cycles = v.workload_cycles;
        t.response_threshold_s = v.response_threshold_s;
        t.latency_threshold_s = v.latency_threshold_s;
        tasks.push_back(std::move(t));
    }
    std::sort(tasks.begin(), tasks.end(), [](const TaskDemand& a, const TaskDemand& b) { return a.av_id < b.av_id; });
    return tasks;
}

std::optional<double> delay_floor_bps(const Vehicle& v, double processing_s) {
    double budget = v.response_threshold_s;
    if (v.latency_threshold_s) budget = std::min(budget, *v.latency_threshold_s);
    budget -= processing_s;
    if (!(budget > 0.0)) return std::nullopt;
    // Shave the budget so that rounding in the fraction arithmetic cannot push
    // R past it when an AV is held exactly at its floor.
    return rate_for_delay(budget * (1.0 - 1e-9), v.app);
}

namespace {

struct Iterate {
    std::vector<SlicingSolution> slicing;
    MecAssignment assignment;
    std::vector<TaskDemand> tasks;
    RateFloors floors;
};

RateFloors floors_for(const Scenario& s, const std::vector<TaskDemand>& tasks,
                      const std::map<VehicleId, double>& processing) {
    // Folding in the QoS floor makes equal maps mean equal slicing problems.
    RateFloors floors;
    for (const auto& t : tasks) {
        const auto& v = s.vehicle(t.av_id);
        double f = required_rate(v).min_rate_bps;
        if (auto d = delay_floor_bps(v, processing.at(t.av_id))) f = std::max(f, *d);
        floors[t.av_id] = f;
    }
    return floors;
}

std::map<VehicleId, double> processing_delays(const Scenario& s, const std::vector<TaskDemand>& tasks,
                                              const MecAssignment* a, const MecParams& params) {
    std::map<VehicleId, double> d;
    for (const auto& t : tasks) {
        if (!(t.compute > 0.0)) {
            d[t.av_id] = 0.0;
            continue;
        }
        const std::string& where = a ? a->compute_server.at(t.av_id) : t.home_server;
        d[t.av_id] = where == kCloud ? cloud_processing_delay(t, params)
                                     : processing_delay(t, s.mec_server(where), params);
    }
    return d;
}

}  // namespace

JointResult joint_solve(const Scenario& s, const JointOptions& options) {
    std::vector<const MecServer*> servers;
    for (const auto& m : s.mec_servers) servers.push_back(&m);
    std::sort(servers.begin(), servers.end(), [](const MecServer* a, const MecServer* b) { return a->id < b->id; });

    const auto base_tasks = make_tasks(s);
    RateFloors floors = floors_for(s, base_tasks, processing_delays(s, base_tasks, nullptr, options.mec));

    JointResult out;
    std::optional<Iterate> best;
    const int max_iters = std::max(1, options.max_iters);
    for (int it = 1; it <= max_iters; ++it) {
        Iterate cur;
        cur.floors = floors;
        std::map<VehicleId, double> rates;
        for (const auto* mec : servers) {
            SlicingProblem problem(s, *mec, options.slicing, floors);
            if (problem.members().empty()) continue;
            cur.slicing.push_back(problem.solve_num());
            for (const auto& [av, r] : cur.slicing.back().rates_bps) rates[av] = r;
        }
        cur.tasks = base_tasks;
        for (auto& t : cur.tasks) {
            auto r = rates.find(t.av_id);
            t.transmission_delay_s = r == rates.end() ? std::numeric_limits<double>::infinity()
                                                      : transmission_delay(r->second, s.vehicle(t.av_id).app);
        }
        cur.assignment = solve_assignment(cur.tasks, s.mec_servers, options.weights, options.mec);

        const auto next = floors_for(s, cur.tasks, processing_delays(s, cur.tasks, &cur.assignment, options.mec));
        out.iterations = it;
        const bool fixed = next == floors;
        auto score = [](const Iterate& x) {
            double u = 0.0;
            for (const auto& sol : x.slicing) u += sol.utility;
            return std::pair{u, x.assignment.utility};
        };
        if (!best || score(cur) > score(*best)) best = cur;
        if (fixed) {
            out.converged = true;
            best = std::move(cur);
            break;
        }
        floors = next;
    }

    out.slicing = std::move(best->slicing);
    out.assignment = std::move(best->assignment);
    out.tasks = std::move(best->tasks);
    out.floors = std::move(best->floors);
    return out;
}

nlohmann::json to_json(const JointResult& r) {
    nlohmann::json slicing = nlohmann::json::array();
    for (const auto& sol : r.slicing) slicing.push_back(to_json(sol));
    return {{"converged", r.converged},
            {"iterations", r.iterations},
            {"slicing_utility", r.slicing_utility()},
            {"slicing", slicing},
            {"assignment", to_json(r.assignment)}};
}

}  // namespace avnet
