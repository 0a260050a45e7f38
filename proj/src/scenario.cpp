#include "avnet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "avnet/errors.hpp"

namespace avnet {

double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

const Vehicle& Scenario::vehicle(VehicleId id) const {
    auto it = std::find_if(vehicles.begin(), vehicles.end(),
                           [id](const Vehicle& v) { return v.id == id; });
    if (it == vehicles.end()) {
        throw ContractViolation("unknown vehicle id " + std::to_string(id));
    }
    return *it;
}

const BaseStation& Scenario::base_station(const std::string& id) const {
    auto it = std::find_if(base_stations.begin(), base_stations.end(),
                           [&id](const BaseStation& b) { return b.id == id; });
    if (it == base_stations.end()) {
        throw ContractViolation("unknown base station id '" + id + "'");
    }
    return *it;
}

const MecServer& Scenario::mec_server(const std::string& id) const {
    auto it = std::find_if(mec_servers.begin(), mec_servers.end(),
                           [&id](const MecServer& m) { return m.id == id; });
    if (it == mec_servers.end()) {
        throw ContractViolation("unknown MEC server id '" + id + "'");
    }
    return *it;
}

const MecServer& Scenario::owner_of(const std::string& bs_id) const {
    for (const auto& m : mec_servers) {
        if (std::find(m.bs_ids.begin(), m.bs_ids.end(), bs_id) != m.bs_ids.end()) {
            return m;
        }
    }
    throw ContractViolation("base station '" + bs_id + "' has no MEC server");
}

void validate(const RoadGeometry& road) {
    if (!(road.length_m > 0.0)) throw ValidationError("road.length_m must be > 0");
    if (road.lanes < 1) throw ValidationError("road.lanes must be >= 1");
    if (!(road.lane_width_m > 0.0)) throw ValidationError("road.lane_width_m must be > 0");
}

void validate(const BaseStation& bs) {
    if (bs.id.empty()) throw ValidationError("base station id must be non-empty");
    const std::string where = "base station '" + bs.id + "': ";
    if (!(bs.range_m > 0.0)) throw ValidationError(where + "range_m must be > 0");
    if (!(bs.mac_efficiency > 0.0 && bs.mac_efficiency <= 1.0)) {
        throw ValidationError(where + "mac_efficiency must lie in (0,1]");
    }
    if (bs.kind == BsKind::ENB && bs.mac_efficiency != 1.0) {
        throw ValidationError(where + "an eNB must have mac_efficiency = 1");
    }
    if (bs.reuse_protection_m < 0.0) {
        throw ValidationError(where + "reuse_protection_m must be >= 0");
    }
}

void validate(const ApplicationProfile& app) {
    if (!(app.arrival_rate_pps > 0.0)) throw ValidationError("arrival_rate_pps must be > 0");
    if (!(app.packet_size_bits > 0.0)) throw ValidationError("packet_size_bits must be > 0");
    if (app.kind == AppKind::DELAY_SENSITIVE) {
        if (!(app.violation_prob > 0.0 && app.violation_prob < 1.0)) {
            throw ValidationError("violation_prob must lie in (0,1)");
        }
        if (!(app.delay_bound_s > 0.0)) throw ValidationError("delay_bound_s must be > 0");
    } else if (app.rate_threshold_bps && !(*app.rate_threshold_bps > 0.0)) {
        throw ValidationError("rate_threshold_bps must be > 0 when set");
    }
}

void validate(const Scenario& s) {
    validate(s.road);

    std::set<std::string> bs_ids;
    for (const auto& bs : s.base_stations) {
        validate(bs);
        if (!bs_ids.insert(bs.id).second) {
            throw ValidationError("duplicate base station id '" + bs.id + "'");
        }
    }

    std::set<std::string> mec_ids;
    std::set<std::string> owned;
    for (const auto& m : s.mec_servers) {
        const std::string where = "MEC server '" + m.id + "': ";
        if (m.id.empty()) throw ValidationError("MEC server id must be non-empty");
        if (m.id == "CLOUD") throw ValidationError("MEC server id 'CLOUD' is reserved");
        if (!mec_ids.insert(m.id).second) throw ValidationError("duplicate MEC server id '" + m.id + "'");
        if (!(m.compute_capacity > 0.0) || !(m.storage_capacity > 0.0) || !(m.bandwidth_hz > 0.0)) {
            throw ValidationError(where + "capacities must be > 0");
        }
        if (m.backhaul_delay_s < 0.0) throw ValidationError(where + "backhaul_delay_s must be >= 0");
        for (const auto& b : m.bs_ids) {
            if (!bs_ids.count(b)) throw ValidationError(where + "unknown base station '" + b + "'");
            if (!owned.insert(b).second) {
                throw ValidationError("base station '" + b + "' belongs to more than one MEC server");
            }
        }
    }
    for (const auto& b : bs_ids) {
        if (!owned.count(b)) throw ValidationError("base station '" + b + "' belongs to no MEC server");
    }

    std::set<VehicleId> av_ids;
    const double width = s.road.lanes * s.road.lane_width_m;
    for (const auto& v : s.vehicles) {
        const std::string where = "vehicle " + std::to_string(v.id) + ": ";
        if (!av_ids.insert(v.id).second) throw ValidationError("duplicate vehicle id " + std::to_string(v.id));
        validate(v.app);
        if (v.position_m.x < 0.0 || v.position_m.x > s.road.length_m ||
            v.position_m.y < 0.0 || v.position_m.y > width) {
            throw ValidationError(where + "outside road bounds");
        }
        if (v.lane < 0 || v.lane >= s.road.lanes) throw ValidationError(where + "lane out of range");
        if (v.compute_demand < 0.0 || v.storage_demand < 0.0 || v.workload_cycles < 0.0) {
            throw ValidationError(where + "demands must be >= 0");
        }
        if ((v.compute_demand == 0.0) != (v.workload_cycles == 0.0)) {
            throw ValidationError(where + "compute_demand = 0 iff workload_cycles = 0");
        }
        if (v.latency_threshold_s && *v.latency_threshold_s > v.response_threshold_s) {
            throw ValidationError(where + "latency threshold exceeds response threshold");
        }
        if (coverage_set(s, v).empty()) throw ValidationError(where + "not covered by any base station");
    }
}

std::vector<std::string> coverage_set(const Scenario& s, const Vehicle& v) {
    std::vector<std::string> out;
    for (const auto& bs : s.base_stations) {
        if (distance(bs.position_m, v.position_m) <= bs.range_m) out.push_back(bs.id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::string> serving_mec(const Scenario& s, const Vehicle& v) {
    std::optional<std::string> best;
    for (const auto& bs_id : coverage_set(s, v)) {
        const auto& owner = s.owner_of(bs_id).id;
        if (!best || owner < *best) best = owner;
    }
    return best;
}

double wifi_coverage_rate(const Scenario& s) {
    if (s.vehicles.empty()) return 0.0;
    std::size_t covered = 0;
    for (const auto& v : s.vehicles) {
        for (const auto& bs : s.base_stations) {
            if (bs.kind == BsKind::WIFI_AP && distance(bs.position_m, v.position_m) <= bs.range_m) {
                ++covered;
                break;
            }
        }
    }
    return static_cast<double>(covered) / static_cast<double>(s.vehicles.size());
}

std::string to_string(BsKind k) {
    return k == BsKind::ENB ? "ENB" : "WIFI_AP";
}

std::string to_string(AppKind k) {
    return k == AppKind::DELAY_SENSITIVE ? "DELAY_SENSITIVE" : "DELAY_TOLERANT";
}

namespace {

BsKind parse_bs_kind(const std::string& s) {
    if (s == "ENB") return BsKind::ENB;
    if (s == "WIFI_AP") return BsKind::WIFI_AP;
    throw ValidationError("unknown base station kind '" + s + "'");
}

AppKind parse_app_kind(const std::string& s) {
    if (s == "DELAY_SENSITIVE") return AppKind::DELAY_SENSITIVE;
    if (s == "DELAY_TOLERANT") return AppKind::DELAY_TOLERANT;
    throw ValidationError("unknown application kind '" + s + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const Point& p) {
    j = nlohmann::json::array({p.x, p.y});
}

void from_json(const nlohmann::json& j, Point& p) {
    if (!j.is_array() || j.size() != 2) throw ValidationError("a position must be [x, y]");
    p.x = j.at(0).get<double>();
    p.y = j.at(1).get<double>();
}

void to_json(nlohmann::json& j, const RoadGeometry& r) {
    j = {{"length_m", r.length_m}, {"lanes", r.lanes}, {"lane_width_m", r.lane_width_m}};
}

void from_json(const nlohmann::json& j, RoadGeometry& r) {
    r.length_m = j.at("length_m").get<double>();
    r.lanes = j.at("lanes").get<int>();
    r.lane_width_m = j.at("lane_width_m").get<double>();
}

void to_json(nlohmann::json& j, const BaseStation& b) {
    j = {{"id", b.id},
         {"kind", to_string(b.kind)},
         {"position_m", b.position_m},
         {"tx_power_dbm", b.tx_power_dbm},
         {"range_m", b.range_m},
         {"pathloss_a_db", b.pathloss_a_db},
         {"pathloss_b_db", b.pathloss_b_db},
         {"mac_efficiency", b.mac_efficiency}};
    if (b.kind == BsKind::ENB) j["reuse_protection_m"] = b.reuse_protection_m;
}

void from_json(const nlohmann::json& j, BaseStation& b) {
    b.id = j.at("id").get<std::string>();
    b.kind = parse_bs_kind(j.at("kind").get<std::string>());
    b.position_m = j.at("position_m").get<Point>();
    b.tx_power_dbm = j.at("tx_power_dbm").get<double>();
    b.range_m = j.at("range_m").get<double>();
    b.pathloss_a_db = j.at("pathloss_a_db").get<double>();
    b.pathloss_b_db = j.at("pathloss_b_db").get<double>();
    b.mac_efficiency = j.value("mac_efficiency", 1.0);
    b.reuse_protection_m = j.value("reuse_protection_m", 0.0);
}

void to_json(nlohmann::json& j, const ApplicationProfile& a) {
    j = {{"kind", to_string(a.kind)},
         {"arrival_rate_pps", a.arrival_rate_pps},
         {"packet_size_bits", a.packet_size_bits}};
    if (a.kind == AppKind::DELAY_SENSITIVE) {
        j["delay_bound_s"] = a.delay_bound_s;
        j["violation_prob"] = a.violation_prob;
    } else if (a.rate_threshold_bps) {
        j["rate_threshold_bps"] = *a.rate_threshold_bps;
    }
}

void from_json(const nlohmann::json& j, ApplicationProfile& a) {
    a = ApplicationProfile{};
    a.kind = parse_app_kind(j.at("kind").get<std::string>());
    a.arrival_rate_pps = j.at("arrival_rate_pps").get<double>();
    a.packet_size_bits = j.at("packet_size_bits").get<double>();
    if (a.kind == AppKind::DELAY_SENSITIVE) {
        a.delay_bound_s = j.at("delay_bound_s").get<double>();
        a.violation_prob = j.at("violation_prob").get<double>();
    } else if (j.contains("rate_threshold_bps") && !j.at("rate_threshold_bps").is_null()) {
        a.rate_threshold_bps = j.at("rate_threshold_bps").get<double>();
    }
}

void to_json(nlohmann::json& j, const Vehicle& v) {
    j = {{"id", v.id},
         {"position_m", v.position_m},
         {"lane", v.lane},
         {"app", v.app},
         {"compute_demand", v.compute_demand},
         {"storage_demand", v.storage_demand},
         {"workload_cycles", v.workload_cycles},
         {"response_threshold_s", v.response_threshold_s}};
    if (v.latency_threshold_s) j["latency_threshold_s"] = *v.latency_threshold_s;
}

void from_json(const nlohmann::json& j, Vehicle& v) {
    v = Vehicle{};
    v.id = j.at("id").get<VehicleId>();
    v.position_m = j.at("position_m").get<Point>();
    v.lane = j.at("lane").get<int>();
    v.app = j.at("app").get<ApplicationProfile>();
    v.compute_demand = j.at("compute_demand").get<double>();
    v.storage_demand = j.at("storage_demand").get<double>();
    v.workload_cycles = j.at("workload_cycles").get<double>();
    v.response_threshold_s = j.at("response_threshold_s").get<double>();
    if (j.contains("latency_threshold_s") && !j.at("latency_threshold_s").is_null()) {
        v.latency_threshold_s = j.at("latency_threshold_s").get<double>();
    }
}

void to_json(nlohmann::json& j, const MecServer& m) {
    j = {{"id", m.id},
         {"compute_capacity", m.compute_capacity},
         {"storage_capacity", m.storage_capacity},
         {"bandwidth_hz", m.bandwidth_hz},
         {"bs_ids", m.bs_ids},
         {"backhaul_delay_s", m.backhaul_delay_s}};
}

void from_json(const nlohmann::json& j, MecServer& m) {
    m.id = j.at("id").get<std::string>();
    m.compute_capacity = j.at("compute_capacity").get<double>();
    m.storage_capacity = j.at("storage_capacity").get<double>();
    m.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    m.bs_ids = j.at("bs_ids").get<std::vector<std::string>>();
    m.backhaul_delay_s = j.value("backhaul_delay_s", 0.0);
}

void to_json(nlohmann::json& j, const Scenario& s) {
    j = {{"road", s.road},
         {"vehicles", s.vehicles},
         {"base_stations", s.base_stations},
         {"mec_servers", s.mec_servers},
         {"noise_dbm", s.noise_dbm},
         {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, Scenario& s) {
    s.road = j.at("road").get<RoadGeometry>();
    s.vehicles = j.at("vehicles").get<std::vector<Vehicle>>();
    s.base_stations = j.at("base_stations").get<std::vector<BaseStation>>();
    s.mec_servers = j.at("mec_servers").get<std::vector<MecServer>>();
    s.noise_dbm = j.at("noise_dbm").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
}

}  // namespace avnet
