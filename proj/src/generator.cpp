#include "avnet/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "avnet/errors.hpp"

namespace avnet {

namespace {

// 53 random mantissa bits: portable, unlike std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double dwell_time_s(const Scenario& s, const MecServer& mec, const Point& pos, double speed_mps) {
    // Coverage of the line y = pos.y by each disk is an x-interval.
    std::vector<std::pair<double, double>> spans;
    for (const auto& id : mec.bs_ids) {
        const auto& bs = s.base_station(id);
        const double dy = pos.y - bs.position_m.y;
        if (std::abs(dy) > bs.range_m) continue;
        const double half = std::sqrt(bs.range_m * bs.range_m - dy * dy);
        spans.emplace_back(bs.position_m.x - half, bs.position_m.x + half);
    }
    std::sort(spans.begin(), spans.end());

    // Merge into connected components and find the one holding pos.x.
    double lo = 0.0;
    double hi = 0.0;
    bool open = false;
    for (const auto& [a, b] : spans) {
        if (open && a <= hi) {
            hi = std::max(hi, b);
            continue;
        }
        if (open && lo <= pos.x && pos.x <= hi) break;
        lo = a;
        hi = b;
        open = true;
    }
    if (!open || pos.x < lo || pos.x > hi) return 0.0;
    const double exit_x = hi;
    return (exit_x - pos.x) / speed_mps;
}

Scenario generate_case_study(double density_av_per_m, std::uint64_t seed, const ScenarioConfig& cfg) {
    if (!(density_av_per_m >= kMinDensity - 1e-12 && density_av_per_m <= kMaxDensity + 1e-12)) {
        std::ostringstream msg;
        msg << "density " << density_av_per_m << " AV/m outside [" << kMinDensity << ", " << kMaxDensity << "]";
        throw ValidationError(msg.str());
    }
    validate(cfg.road);

    Scenario s;
    s.road = cfg.road;
    s.base_stations = cfg.base_stations;
    s.mec_servers = cfg.mec_servers;
    s.noise_dbm = cfg.noise_dbm;
    s.seed = seed;

    std::mt19937_64 rng(seed);
    const auto total = static_cast<long long>(std::llround(density_av_per_m * cfg.road.length_m));
    const int lanes = cfg.road.lanes;

    struct Slot {
        double x;
        int lane;
    };
    std::vector<Slot> slots;
    slots.reserve(static_cast<std::size_t>(total));
    for (int lane = 0; lane < lanes; ++lane) {
        const long long count = total / lanes + (lane < total % lanes ? 1 : 0);
        if (count == 0) continue;
        const double span_needed = static_cast<double>(count - 1) * cfg.min_spacing_m;
        const double slack = cfg.road.length_m - span_needed;
        if (slack < -1e-9) {
            std::ostringstream msg;
            msg << "lane " << lane << ": cannot place " << count << " AVs " << cfg.min_spacing_m
                << " m apart on a " << cfg.road.length_m << " m road";
            throw GenerationError(msg.str());
        }
        // Uniform over spacing-feasible configurations: sort `count` uniform
        // draws on the slack interval, then shift the i-th by i * spacing.
        std::vector<double> u(static_cast<std::size_t>(count));
        for (auto& x : u) x = unit_uniform(rng) * std::max(slack, 0.0);
        std::sort(u.begin(), u.end());
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double x = std::min(u[i] + static_cast<double>(i) * cfg.min_spacing_m, cfg.road.length_m);
            slots.push_back({x, lane});
        }
    }
    std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
        return a.x != b.x ? a.x < b.x : a.lane < b.lane;
    });

    s.vehicles.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        Vehicle v;
        v.id = static_cast<VehicleId>(i);
        v.lane = slots[i].lane;
        v.position_m = {slots[i].x, cfg.road.lane_width_m * (slots[i].lane + 0.5)};
        const bool sensitive = unit_uniform(rng) < cfg.delay_sensitive_prob;
        const DemandProfile& d = sensitive ? cfg.delay_sensitive_demand : cfg.delay_tolerant_demand;
        v.app = sensitive ? cfg.safety_app : cfg.hd_map_app;
        v.compute_demand = d.compute_demand;
        v.workload_cycles = d.workload_cycles;
        v.storage_demand = d.storage_demand;
        s.vehicles.push_back(v);
    }

    for (auto& v : s.vehicles) {
        const auto mec_id = serving_mec(s, v);
        if (!mec_id) {
            throw GenerationError("vehicle " + std::to_string(v.id) + " at x=" + std::to_string(v.position_m.x) +
                                  " is not covered by any base station");
        }
        v.response_threshold_s = dwell_time_s(s, s.mec_server(*mec_id), v.position_m, cfg.nominal_speed_mps);
        if (v.app.kind == AppKind::DELAY_SENSITIVE) {
            v.latency_threshold_s = std::min(v.app.delay_bound_s, v.response_threshold_s);
        }
    }

    validate(s);
    return s;
}

}  // namespace avnet
