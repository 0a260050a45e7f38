#include "avnet/radio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "avnet/errors.hpp"

namespace avnet {

double dbm_to_mw(double dbm) {
    return std::pow(10.0, dbm / 10.0);
}

double mw_to_dbm(double mw) {
    return 10.0 * std::log10(mw);
}

double pathloss_db(const BaseStation& bs, double distance_m, double min_distance_m) {
    if (!(distance_m > 0.0)) {
        throw std::domain_error("pathloss distance must be > 0, got " + std::to_string(distance_m));
    }
    const double d = std::max(distance_m, min_distance_m);
    return bs.pathloss_a_db + bs.pathloss_b_db * std::log10(d);
}

double received_power_dbm(const BaseStation& bs, double distance_m, double min_distance_m) {
    return bs.tx_power_dbm + pathloss_db(bs, distance_m, min_distance_m);
}

std::size_t ReusePattern::slice_index(const std::string& slice_id) const {
    for (std::size_t i = 0; i < slices.size(); ++i) {
        if (slices[i].id == slice_id) return i;
    }
    throw ContractViolation("unknown slice '" + slice_id + "'");
}

bool ReusePattern::transmits_on(const std::string& bs_id, const std::string& slice_id) const {
    auto it = bs_slices.find(bs_id);
    if (it == bs_slices.end()) return false;
    return std::find(it->second.begin(), it->second.end(), slice_id) != it->second.end();
}

std::vector<std::string> slice_ids(const Scenario& s, const MecServer& mec) {
    std::vector<std::string> enbs;
    bool has_ap = false;
    for (const auto& id : mec.bs_ids) {
        if (s.base_station(id).kind == BsKind::ENB) {
            enbs.push_back(id);
        } else {
            has_ap = true;
        }
    }
    std::sort(enbs.begin(), enbs.end());
    if (has_ap) enbs.emplace_back(kWifiSlice);
    return enbs;
}

bool reuse_allowed(const BaseStation& ap, const BaseStation& enb) {
    return distance(ap.position_m, enb.position_m) >= ap.range_m + enb.reuse_protection_m;
}

ReusePattern build_reuse_pattern(const Scenario& s, const MecServer& mec, std::span<const double> beta) {
    const auto ids = slice_ids(s, mec);
    if (beta.size() != ids.size()) {
        throw ContractViolation("beta has " + std::to_string(beta.size()) + " entries, MEC server '" + mec.id +
                                "' has " + std::to_string(ids.size()) + " slices");
    }
    const double sum = std::accumulate(beta.begin(), beta.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9 || std::any_of(beta.begin(), beta.end(), [](double b) { return b < 0.0; })) {
        throw ContractViolation("beta must lie on the simplex");
    }

    ReusePattern rp;
    for (std::size_t i = 0; i < ids.size(); ++i) rp.slices.push_back({ids[i], beta[i]});

    for (const auto& id : mec.bs_ids) {
        const auto& bs = s.base_station(id);
        auto& mine = rp.bs_slices[id];
        if (bs.kind == BsKind::ENB) {
            mine.push_back(id);
            continue;
        }
        for (const auto& other_id : ids) {
            if (other_id == kWifiSlice) continue;
            if (reuse_allowed(bs, s.base_station(other_id))) mine.push_back(other_id);
        }
        mine.emplace_back(kWifiSlice);
    }
    return rp;
}

bool reuse_is_legal(const Scenario& s, const ReusePattern& rp) {
    for (const auto& [bs_id, slices] : rp.bs_slices) {
        const auto& bs = s.base_station(bs_id);
        if (bs.kind != BsKind::WIFI_AP) continue;
        for (const auto& slice : slices) {
            if (slice == kWifiSlice) continue;
            const auto& enb = s.base_station(slice);
            if (distance(bs.position_m, enb.position_m) < bs.range_m + enb.reuse_protection_m) return false;
        }
    }
    return true;
}

namespace {

double sinr_linear(const Scenario& s, const ReusePattern& rp, const BaseStation& bs, const Vehicle& v,
                   const std::string& slice_id, const RadioParams& params) {
    const double d = distance(bs.position_m, v.position_m);
    if (d > bs.range_m) {
        throw ContractViolation("base station '" + bs.id + "' does not cover vehicle " + std::to_string(v.id));
    }
    if (!rp.transmits_on(bs.id, slice_id)) {
        throw ContractViolation("base station '" + bs.id + "' does not transmit on slice '" + slice_id + "'");
    }
    const double signal = dbm_to_mw(received_power_dbm(bs, d, params.min_distance_m));
    double denom = dbm_to_mw(s.noise_dbm);
    for (const auto& [other_id, slices] : rp.bs_slices) {
        if (other_id == bs.id) continue;
        if (std::find(slices.begin(), slices.end(), slice_id) == slices.end()) continue;
        const auto& other = s.base_station(other_id);
        const double od = distance(other.position_m, v.position_m);
        if (od > params.interference_radius_factor * other.range_m) continue;
        denom += dbm_to_mw(received_power_dbm(other, od, params.min_distance_m));
    }
    return signal / denom;
}

}  // namespace

double sinr(const Scenario& s, const ReusePattern& rp, const std::string& bs_id, VehicleId av_id,
            const std::string& slice_id, const RadioParams& params) {
    return sinr_linear(s, rp, s.base_station(bs_id), s.vehicle(av_id), slice_id, params);
}

double spectral_efficiency(const Scenario& s, const ReusePattern& rp, const std::string& bs_id, VehicleId av_id,
                           const std::string& slice_id, const RadioParams& params) {
    const auto& bs = s.base_station(bs_id);
    return bs.mac_efficiency * std::log2(1.0 + sinr(s, rp, bs_id, av_id, slice_id, params));
}

std::vector<LinkQuality> link_qualities(const Scenario& s, const ReusePattern& rp, const RadioParams& params) {
    std::vector<LinkQuality> out;
    for (const auto& v : s.vehicles) {
        for (const auto& [bs_id, slices] : rp.bs_slices) {
            const auto& bs = s.base_station(bs_id);
            if (distance(bs.position_m, v.position_m) > bs.range_m) continue;
            LinkQuality lq;
            lq.bs_id = bs_id;
            lq.av_id = v.id;
            for (const auto& slice : slices) {
                const double g = sinr_linear(s, rp, bs, v, slice, params);
                lq.sinr_db_per_slice[slice] = 10.0 * std::log10(g);
                lq.spectral_eff_per_slice[slice] = bs.mac_efficiency * std::log2(1.0 + g);
            }
            out.push_back(std::move(lq));
        }
    }
    return out;
}

void write_link_csv(std::ostream& out, const std::vector<LinkQuality>& links) {
    out << "bs_id,av_id,slice_id,sinr_db,eff\n";
    char buf[64];
    for (const auto& lq : links) {
        for (const auto& [slice, db] : lq.sinr_db_per_slice) {
            std::snprintf(buf, sizeof buf, "%.6f,%.6f", db, lq.spectral_eff_per_slice.at(slice));
            out << lq.bs_id << ',' << lq.av_id << ',' << slice << ',' << buf << '\n';
        }
    }
}

}  // namespace avnet
