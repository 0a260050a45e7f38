#include "avnet/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "avnet/errors.hpp"
#include "avnet/joint.hpp"
#include "avnet/mec.hpp"
#include "avnet/oracle/oracle.hpp"
#include "avnet/qos.hpp"
#include "avnet/slicing.hpp"

namespace avnet {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

CheckResult check_queue(std::uint64_t packets) {
    ApplicationProfile safety{AppKind::DELAY_SENSITIVE, 4.0, 1048.0, 0.1, 1e-3, std::nullopt};
    const double r = required_rate(safety).min_rate_bps;
    const auto sim = oracle::simulate_mm1(4.0, 1048.0, r, 0.1, packets, 7);
    const double p = sim.violation_ratio();
    return {"queue: delay violations at the required rate", p <= 1.5e-3,
            fmt("rate %.1f b/s, P(delay > 0.1 s) = %.2e over %.0f packets", r, p, static_cast<double>(packets))};
}

CheckResult check_slicing(int instances) {
    int bad = 0;
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        const Scenario s = oracle::make_tiny_slicing_instance(1000 + static_cast<std::uint64_t>(i));
        SlicingOptions opt;
        opt.grid_step = 0.05;
        opt.warm_start_baseline = false;
        const auto got = solve_num(s, s.mec_servers.front(), opt);
        const auto want = oracle::exhaustive_slicing(s, s.mec_servers.front(), 0.05);
        if (got.feasible != want.feasible) {
            ++bad;
            continue;
        }
        if (!want.feasible) continue;
        const double gap = (want.utility - got.utility) / std::max(1.0, std::abs(want.utility));
        worst = std::max(worst, gap);
        if (gap > 0.01) ++bad;
    }
    return {"slicing: grid search vs exhaustive enumeration", bad == 0,
            fmt("%.0f instances, %.0f mismatches, worst relative gap %.2e", instances, bad, worst)};
}

CheckResult check_mec(int instances) {
    int bad = 0;
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        const auto inst = oracle::make_tiny_mec_instance(2000 + static_cast<std::uint64_t>(i));
        const auto got = solve_assignment(inst.tasks, inst.servers, inst.weights);
        const auto want = oracle::brute_force_assignment(inst.tasks, inst.servers, inst.weights);
        int got_violations = 0;
        for (VehicleId id : got.infeasible_tasks) {
            auto it = std::find_if(inst.tasks.begin(), inst.tasks.end(), [&](const TaskDemand& t) { return t.av_id == id; });
            if (it->compute > 0.0) ++got_violations;
        }
        const double gap = std::abs(got.utility - want.utility);
        worst = std::max(worst, gap);
        if (gap > 1e-9 || got_violations != want.violations) ++bad;
    }
    return {"mec: placement search vs brute force", bad == 0,
            fmt("%.0f instances, %.0f mismatches, worst |dU| %.2e", instances, bad, worst)};
}

CheckResult check_joint(int instances) {
    int bad = 0;
    int compared = 0;
    for (int i = 0; i < instances; ++i) {
        const Scenario s = oracle::make_tiny_joint_instance(3000 + static_cast<std::uint64_t>(i));
        JointOptions opt;
        opt.slicing.grid_step = 0.05;
        const auto got = joint_solve(s, opt);
        const auto want = oracle::brute_force_joint(s, 0.05, opt.weights, opt.mec);
        if (!got.slicing_feasible() || !std::isfinite(want.slicing_utility)) continue;
        ++compared;
        const double ds = std::abs(got.slicing_utility() - want.slicing_utility) / std::max(1.0, std::abs(want.slicing_utility));
        const double dm = std::abs(got.assignment.utility - want.mec_utility);
        if (ds > 1e-6 || dm > 1e-6) ++bad;
    }
    return {"joint: alternating solve vs joint enumeration", bad == 0 && compared > 0,
            fmt("%.0f instances compared, %.0f mismatches", compared, bad)};
}

}  // namespace

std::vector<CheckResult> run_verification(const std::string& size) {
    if (size != "tiny" && size != "full") throw ValidationError("unknown verify size '" + size + "' (tiny|full)");
    const bool full = size == "full";
    return {check_queue(full ? 1'000'000 : 200'000), check_slicing(full ? 50 : 15), check_mec(full ? 50 : 25),
            check_joint(full ? 20 : 5)};
}

}  // namespace avnet
