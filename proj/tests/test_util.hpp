#pragma once

#include <string>
#include <vector>

#include "avnet/config.hpp"
#include "avnet/scenario.hpp"

namespace avnet::test {

inline BaseStation enb(const std::string& id, double x, double y = -10.0) {
    return {id, BsKind::ENB, {x, y}, 40.0, 600.0, -30.0, -35.0, 1.0, 150.0};
}

inline BaseStation ap(const std::string& id, double x, double y = -10.0) {
    return {id, BsKind::WIFI_AP, {x, y}, 28.45, 180.0, -40.0, -35.0, 0.8, 0.0};
}

inline ApplicationProfile safety() {
    return {AppKind::DELAY_SENSITIVE, 4.0, 1048.0, 0.1, 1e-3, std::nullopt};
}

inline ApplicationProfile hd_map() {
    return {AppKind::DELAY_TOLERANT, 20.0, 9000.0, 0.0, 0.0, std::nullopt};
}

inline Vehicle vehicle(VehicleId id, double x, double y, ApplicationProfile app = safety()) {
    Vehicle v;
    v.id = id;
    v.position_m = {x, y};
    v.lane = 0;
    v.app = app;
    v.response_threshold_s = 10.0;
    return v;
}

/// One MEC server "M1" owning every BS given; road 1000 m, 4 lanes.
inline Scenario scenario(std::vector<BaseStation> bss, std::vector<Vehicle> avs, double bandwidth_hz = 25e6) {
    Scenario s;
    s.road = {1000.0, 4, 3.5};
    MecServer m{"M1", 1e10, 3e9, bandwidth_hz, {}, 0.01};
    for (const auto& b : bss) m.bs_ids.push_back(b.id);
    s.base_stations = std::move(bss);
    s.mec_servers = {m};
    s.vehicles = std::move(avs);
    return s;
}

}  // namespace avnet::test
