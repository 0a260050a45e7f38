#pragma once

// Two-level bandwidth allocation for one MEC server: slice ratios (beta) over
// the reuse pattern, then AV-BS association and per-AV fractions of each BS's
// slices, maximising the sum of log rates under per-AV rate floors.

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "avnet/radio.hpp"
#include "avnet/scenario.hpp"
#include "json.hpp"

namespace avnet {

struct SlicingOptions {
    double grid_step{0.02};
    // Fixed ratios for the max-SINR baseline; empty means an equal split.
    std::vector<double> baseline_beta;
    // Also start a local search from the baseline ratios and association.
    bool warm_start_baseline{true};
    RadioParams radio;
    int max_local_search_passes{500};
    // Enumerate associations outright when there are at most this many.
    long exact_association_limit{4096};
};

using Association = std::map<VehicleId, std::string>;

/// Extra per-AV rate floors in bits/s, combined (max) with the QoS floor.
using RateFloors = std::map<VehicleId, double>;

struct SlicingSolution {
    std::string mec_id;
    ReusePattern pattern;
    Association association;
    std::map<std::pair<std::string, VehicleId>, double> fractions;
    std::map<VehicleId, double> rates_bps;
    std::map<VehicleId, double> min_rates_bps;
    double utility{0.0};
    bool feasible{false};
    std::vector<std::string> diagnostics;
    // Utility after each accepted local-search move for the winning start.
    std::vector<double> search_trace;

    std::vector<double> beta() const;
    /// AVs associated with each BS id.
    std::map<std::string, int> load() const;
};

struct FractionResult {
    std::vector<double> fractions;
    bool feasible{true};
};

/// Maximises sum ln(c_k f_k) subject to sum f_k = 1, f_k >= f_min_k. The
/// optimum is f_k = max(f_min_k, tau) with tau set by the budget, so it does
/// not depend on c_k. Infeasible (sum f_min > 1) yields an equal split with
/// feasible = false.
FractionResult optimal_fractions(std::span<const double> min_fractions);

/// Every beta on the simplex grid, lexicographic in the leading coordinates.
std::vector<std::vector<double>> simplex_grid(std::size_t dims, double step);

/// Precomputed link table for one MEC server. Cheap to query, immutable.
class SlicingProblem {
public:
    SlicingProblem(const Scenario& s, const MecServer& mec, SlicingOptions options = {},
                   const RateFloors& extra_floors = {});

    const Scenario& scenario() const { return *scenario_; }
    const MecServer& mec() const { return *mec_; }
    const SlicingOptions& options() const { return options_; }
    /// AVs whose bandwidth this server manages, ascending.
    const std::vector<VehicleId>& members() const { return members_; }
    const std::vector<std::string>& slice_ids() const { return slice_ids_; }
    std::vector<double> baseline_beta() const;
    double min_rate_bps(VehicleId av) const;

    /// Fractions, rates and utility for a fixed beta and association.
    SlicingSolution evaluate(std::span<const double> beta, const Association& association) const;

    /// Grid search over beta; per beta, greedy insertion followed by
    /// single-AV relocation until no move improves the utility. Small
    /// instances enumerate associations instead of the greedy pass.
    SlicingSolution solve_num() const;

    /// Each AV joins its highest-SINR covering BS (ties: lower id), no beta search.
    SlicingSolution solve_max_sinr(std::span<const double> beta) const;
    Association max_sinr_association(std::span<const double> beta) const;

private:
    struct Link {
        std::size_t bs;                // index into bs_ids_
        std::vector<double> eff;       // per slice, 0 where the BS is silent
        std::vector<double> sinr;      // per slice, linear; 0 where silent
    };
    struct Member {
        VehicleId id;
        double min_rate;
        std::vector<Link> links;       // ascending BS id
    };
    struct Search;

    SlicingSolution finish(std::span<const double> beta, const Association& a, std::vector<double> trace) const;

    const Scenario* scenario_;
    const MecServer* mec_;
    SlicingOptions options_;
    std::vector<std::string> slice_ids_;
    std::vector<std::string> bs_ids_;
    std::vector<VehicleId> members_;
    std::vector<Member> table_;
    ReusePattern structure_;
};

SlicingSolution evaluate(const Scenario& s, const MecServer& mec, std::span<const double> beta,
                         const Association& association, const SlicingOptions& options = {});
SlicingSolution solve_num(const Scenario& s, const MecServer& mec, const SlicingOptions& options = {});
SlicingSolution solve_max_sinr(const Scenario& s, const MecServer& mec, std::span<const double> fixed_beta,
                               const SlicingOptions& options = {});

nlohmann::json to_json(const SlicingSolution& sol);
/// av_id,bs_id,fraction,rate_bps
void write_solution_csv(std::ostream& out, const SlicingSolution& sol);

}  // namespace avnet
