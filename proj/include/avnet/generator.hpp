#pragma once

#include <cstdint>

#include "avnet/config.hpp"
#include "avnet/scenario.hpp"

namespace avnet {

/// Draws one case-study snapshot. A pure function of its arguments: equal
/// inputs give a bit-identical Scenario.
///
/// AVs are split evenly over the lanes (low lanes take the remainder) and
/// placed uniformly per lane subject to the minimum spacing. Each AV is
/// delay-sensitive with probability cfg.delay_sensitive_prob.
///
/// Throws ValidationError when density is outside [0.12, 0.40] and
/// GenerationError naming the lane when the spacing cannot be met.
Scenario generate_case_study(double density_av_per_m, std::uint64_t seed, const ScenarioConfig& cfg);

/// Seconds until an AV at `pos` driving in +x leaves the service area of `mec`
/// (the union of its BSs' coverage disks), at the given speed. Zero when the
/// AV is outside the service area.
double dwell_time_s(const Scenario& s, const MecServer& mec, const Point& pos, double speed_mps);

}  // namespace avnet
