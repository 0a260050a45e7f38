#pragma once

// Domain snapshot of one time slot: road, AVs, base stations and MEC servers.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace avnet {

struct Point {
    double x{0.0};
    double y{0.0};
};

double distance(const Point& a, const Point& b);

struct RoadGeometry {
    double length_m{1000.0};
    int lanes{4};
    double lane_width_m{3.5};
};

enum class BsKind { ENB, WIFI_AP };

struct BaseStation {
    std::string id;
    BsKind kind{BsKind::ENB};
    Point position_m;
    double tx_power_dbm{0.0};
    double range_m{0.0};
    double pathloss_a_db{0.0};
    double pathloss_b_db{-35.0};
    double mac_efficiency{1.0};
    // eNB only: APs whose coverage disk stays clear of this radius may reuse
    // the eNB's dedicated slice.
    double reuse_protection_m{0.0};
};

enum class AppKind { DELAY_SENSITIVE, DELAY_TOLERANT };

struct ApplicationProfile {
    AppKind kind{AppKind::DELAY_SENSITIVE};
    double arrival_rate_pps{0.0};
    double packet_size_bits{0.0};
    // DELAY_SENSITIVE
    double delay_bound_s{0.0};
    double violation_prob{0.0};
    // DELAY_TOLERANT; unset means "mean offered load"
    std::optional<double> rate_threshold_bps;
};

using VehicleId = std::uint32_t;

struct Vehicle {
    VehicleId id{0};
    Point position_m;
    int lane{0};
    ApplicationProfile app;
    double compute_demand{0.0};   // cycles/s
    double storage_demand{0.0};   // bytes
    double workload_cycles{0.0};  // cycles
    double response_threshold_s{0.0};
    std::optional<double> latency_threshold_s;
};

struct MecServer {
    std::string id;
    double compute_capacity{0.0};  // cycles/s
    double storage_capacity{0.0};  // bytes
    double bandwidth_hz{0.0};
    std::vector<std::string> bs_ids;
    double backhaul_delay_s{0.0};
};

/// Immutable after construction; share freely across threads.
struct Scenario {
    RoadGeometry road;
    std::vector<Vehicle> vehicles;
    std::vector<BaseStation> base_stations;
    std::vector<MecServer> mec_servers;
    double noise_dbm{-104.0};
    std::uint64_t seed{0};

    const Vehicle& vehicle(VehicleId id) const;
    const BaseStation& base_station(const std::string& id) const;
    const MecServer& mec_server(const std::string& id) const;
    /// MEC server owning the given BS.
    const MecServer& owner_of(const std::string& bs_id) const;
};

/// Throws ValidationError naming the first broken invariant.
void validate(const RoadGeometry& road);
void validate(const BaseStation& bs);
void validate(const ApplicationProfile& app);
void validate(const Scenario& s);

/// BS ids (ascending) whose coverage disk contains the AV, boundary inclusive.
std::vector<std::string> coverage_set(const Scenario& s, const Vehicle& v);

/// The MEC server responsible for an AV's bandwidth: lowest id among servers
/// with a BS covering it. Empty when nothing covers the AV.
std::optional<std::string> serving_mec(const Scenario& s, const Vehicle& v);

/// Fraction of AVs inside at least one Wi-Fi AP disk; 0 with no AVs.
double wifi_coverage_rate(const Scenario& s);

std::string to_string(BsKind k);
std::string to_string(AppKind k);

void to_json(nlohmann::json& j, const Point& p);
void from_json(const nlohmann::json& j, Point& p);
void to_json(nlohmann::json& j, const RoadGeometry& r);
void from_json(const nlohmann::json& j, RoadGeometry& r);
void to_json(nlohmann::json& j, const BaseStation& b);
void from_json(const nlohmann::json& j, BaseStation& b);
void to_json(nlohmann::json& j, const ApplicationProfile& a);
void from_json(const nlohmann::json& j, ApplicationProfile& a);
void to_json(nlohmann::json& j, const Vehicle& v);
void from_json(const nlohmann::json& j, Vehicle& v);
void to_json(nlohmann::json& j, const MecServer& m);
void from_json(const nlohmann::json& j, MecServer& m);
void to_json(nlohmann::json& j, const Scenario& s);
void from_json(const nlohmann::json& j, Scenario& s);

}  // namespace avnet
