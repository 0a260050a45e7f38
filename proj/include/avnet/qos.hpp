#pragma once

// Application profiles -> rate floors and delay feasibility.
//
// Delay-sensitive traffic is modelled as an M/M/1 queue served at rate r
// (bits/s) with packets of L bits arriving at lambda pkt/s. Its sojourn time
// is exponential with rate mu - lambda (mu = r / L), so
//   P(delay > D) = exp(-(mu - lambda) D) <= eps
// holds iff r >= L * (lambda + ln(1/eps) / D).

#include <optional>

#include "avnet/scenario.hpp"

namespace avnet {

enum class RateSource { EFFECTIVE_BANDWIDTH, RATE_THRESHOLD };

struct RateRequirement {
    VehicleId av_id{0};
    double min_rate_bps{0.0};
    RateSource source{RateSource::EFFECTIVE_BANDWIDTH};
};

struct DelayBudget {
    VehicleId av_id{0};
    double processing_s{0.0};    // D
    double transmission_s{0.0};  // R
    double response_threshold_s{0.0};
    std::optional<double> latency_threshold_s;
};

/// Throws std::domain_error when eps is outside (0,1) or D <= 0.
RateRequirement required_rate(const ApplicationProfile& app);
RateRequirement required_rate(const Vehicle& v);

/// Mean M/M/1 sojourn 1 / (r/L - lambda); +infinity at or below the
/// stability point.
double transmission_delay(double rate_bps, const ApplicationProfile& app);

/// Smallest rate whose mean sojourn fits in `budget_s`; +infinity if the
/// budget is not positive.
double rate_for_delay(double budget_s, const ApplicationProfile& app);

/// D + R <= T_th and, when present, D + R <= L_th (both inclusive).
bool check_delay_constraints(const DelayBudget& b);

}  // namespace avnet
