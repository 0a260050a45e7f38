#pragma once

// Downlink link budget: pathloss, received power, SINR under a slice reuse
// pattern, and per-slice spectral efficiency.

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "avnet/scenario.hpp"

namespace avnet {

struct RadioParams {
    double min_distance_m{1.0};
    // A co-channel BS interferes within this multiple of its own range.
    double interference_radius_factor{2.0};
};

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

/// a + b*log10(d) in dB (a gain, so negative). Distances below the floor are
/// clamped to it. Throws std::domain_error for d <= 0.
double pathloss_db(const BaseStation& bs, double distance_m, double min_distance_m = 1.0);
double received_power_dbm(const BaseStation& bs, double distance_m, double min_distance_m = 1.0);

inline constexpr const char* kWifiSlice = "WIFI";

struct Slice {
    std::string id;
    double ratio{0.0};
};

/// One MEC server's bandwidth split. Each eNB owns a dedicated slice (id =
/// eNB id, ascending); all Wi-Fi APs share the WIFI slice, listed last. An
/// AP also transmits on an eNB's slice when its coverage disk stays clear of
/// that eNB's reuse-protection disk.
struct ReusePattern {
    std::vector<Slice> slices;
    std::map<std::string, std::vector<std::string>> bs_slices;

    std::size_t slice_index(const std::string& slice_id) const;
    double ratio(const std::string& slice_id) const { return slices.at(slice_index(slice_id)).ratio; }
    bool transmits_on(const std::string& bs_id, const std::string& slice_id) const;
};

/// Slice ids for the MEC server's BSs in pattern order.
std::vector<std::string> slice_ids(const Scenario& s, const MecServer& mec);

bool reuse_allowed(const BaseStation& ap, const BaseStation& enb);

/// beta must have one entry per slice, on the simplex within 1e-9.
ReusePattern build_reuse_pattern(const Scenario& s, const MecServer& mec, std::span<const double> beta);

/// True iff no AP on an eNB's slice overlaps that eNB's protection disk.
bool reuse_is_legal(const Scenario& s, const ReusePattern& rp);

/// Linear SINR of bs -> av on one slice, full-buffer co-channel interferers.
/// Throws ContractViolation when bs does not cover av or does not transmit on
/// the slice.
double sinr(const Scenario& s, const ReusePattern& rp, const std::string& bs_id, VehicleId av_id,
            const std::string& slice_id, const RadioParams& params = {});

/// mac_efficiency * log2(1 + sinr), bits/s/Hz.
double spectral_efficiency(const Scenario& s, const ReusePattern& rp, const std::string& bs_id, VehicleId av_id,
                           const std::string& slice_id, const RadioParams& params = {});

struct LinkQuality {
    std::string bs_id;
    VehicleId av_id{0};
    std::map<std::string, double> sinr_db_per_slice;
    std::map<std::string, double> spectral_eff_per_slice;

    /// The per-slice quantity read as a spectral efficiency (bits/s/Hz) ...
    double spectral_efficiency(const std::string& slice_id) const { return spectral_eff_per_slice.at(slice_id); }
    /// ... or as the achievable rate over a slice of the given width.
    double achievable_rate_bps(const std::string& slice_id, double slice_bandwidth_hz) const {
        return spectral_efficiency(slice_id) * slice_bandwidth_hz;
    }
};

/// Every covering (BS in the pattern, AV) pair, AVs ascending then BS ids.
std::vector<LinkQuality> link_qualities(const Scenario& s, const ReusePattern& rp, const RadioParams& params = {});

/// bs_id,av_id,slice_id,sinr_db,eff
void write_link_csv(std::ostream& out, const std::vector<LinkQuality>& links);

}  // namespace avnet
