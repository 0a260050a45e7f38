#include "avnet/qos.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace avnet {

RateRequirement required_rate(const ApplicationProfile& app) {
    const double lambda = app.arrival_rate_pps;
    const double bits = app.packet_size_bits;
    if (!(lambda > 0.0) || !(bits > 0.0)) {
        throw std::domain_error("arrival rate and packet size must be > 0");
    }
    RateRequirement req;
    if (app.kind == AppKind::DELAY_SENSITIVE) {
        const double eps = app.violation_prob;
        const double bound = app.delay_bound_s;
        if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("violation probability must lie in (0,1)");
        if (!(bound > 0.0)) throw std::domain_error("delay bound must be > 0");
        req.min_rate_bps = bits * (lambda + std::log(1.0 / eps) / bound);
        req.source = RateSource::EFFECTIVE_BANDWIDTH;
    } else {
        req.min_rate_bps = app.rate_threshold_bps.value_or(lambda * bits);
        req.source = RateSource::RATE_THRESHOLD;
    }
    return req;
}

RateRequirement required_rate(const Vehicle& v) {
    auto req = required_rate(v.app);
    req.av_id = v.id;
    return req;
}

double transmission_delay(double rate_bps, const ApplicationProfile& app) {
    const double mu = rate_bps / app.packet_size_bits;
    if (mu <= app.arrival_rate_pps) return std::numeric_limits<double>::infinity();
    return 1.0 / (mu - app.arrival_rate_pps);
}

double rate_for_delay(double budget_s, const ApplicationProfile& app) {
    if (!(budget_s > 0.0)) return std::numeric_limits<double>::infinity();
    return app.packet_size_bits * (app.arrival_rate_pps + 1.0 / budget_s);
}

bool check_delay_constraints(const DelayBudget& b) {
    const double total = b.processing_s + b.transmission_s;
    if (total > b.response_threshold_s) return false;
    return !b.latency_threshold_s || total <= *b.latency_threshold_s;
}

}  // namespace avnet
