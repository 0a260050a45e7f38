#pragma once

// Seeded Monte-Carlo density sweep comparing the joint scheme against the
// max-SINR baseline, plus CSV persistence and per-figure aggregation.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "avnet/config.hpp"

namespace avnet {

struct SweepRecord {
    double density{0.0};
    int replication{0};
    std::uint64_t seed{0};
    // Ratios of the first MEC server (ascending id) that slices bandwidth;
    // NaN where that server has fewer slices.
    double beta1{0.0};
    double beta2{0.0};
    double beta_w{0.0};
    double utility_proposed{0.0};
    double utility_baseline{0.0};
    double utility_gain{0.0};
    double n_ap_avg{0.0};
    double n_enb_avg{0.0};
    double mec_utility{0.0};
    double migrated_volume{0.0};
    bool feasible{false};
    std::string error;
    // Baseline association counts; written to the companion CSV.
    double n_ap_baseline{0.0};
    double n_enb_baseline{0.0};
    bool converged{false};
};

inline constexpr const char* kSweepHeader =
    "density,replication,seed,beta1,beta2,beta_w,utility_proposed,utility_baseline,utility_gain,n_ap_avg,"
    "n_enb_avg,mec_utility,migrated_volume,feasible,error";
inline constexpr const char* kBaselineHeader = "density,replication,seed,n_ap_avg,n_enb_avg";

/// base_seed XOR a hash of (density, replication); adding densities or
/// replications leaves existing seeds alone.
std::uint64_t cell_seed(std::uint64_t base_seed, double density, int replication);

/// One (density, replication) cell. Module errors are caught and reported in
/// the record rather than thrown.
SweepRecord run_cell(const ScenarioConfig& cfg, double density, int replication);

/// All cells sorted by (density, replication). `jobs` worker threads; the
/// result does not depend on it.
std::vector<SweepRecord> run_sweep(const ScenarioConfig& cfg, int jobs = 1);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& rows);
void write_baseline_csv(std::ostream& out, const std::vector<SweepRecord>& rows);
/// `<dir>/<stem>_baseline.csv` next to the main sweep file.
std::filesystem::path baseline_csv_path(const std::filesystem::path& sweep_csv);

/// Reads a sweep CSV (and its companion when present) and writes
/// gain_by_density.csv, gain_sorted.csv and association_by_density.csv into
/// `out_dir`. Returns the files written.
std::vector<std::filesystem::path> write_plot_data(const std::filesystem::path& sweep_csv,
                                                   const std::filesystem::path& out_dir);

}  // namespace avnet
