#include "avnet/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "avnet/errors.hpp"
#include "avnet/generator.hpp"
#include "avnet/joint.hpp"

namespace avnet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string num(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

std::string density_str(double d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", d);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += (c == '\n' || c == '\r') ? ' ' : c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else if (c != '\r') {
            fields.back() += c;
        }
    }
    return fields;
}

// Rows of a CSV file keyed by header name.
std::vector<std::map<std::string, std::string>> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("'" + path.string() + "' is empty");
    const auto header = split_csv_line(line);
    std::vector<std::map<std::string, std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw ValidationError("'" + path.string() + "': row with " + std::to_string(fields.size()) +
                                  " fields, header has " + std::to_string(header.size()));
        }
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = fields[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

double field(const std::map<std::string, std::string>& row, const std::string& key) {
    auto it = row.find(key);
    if (it == row.end()) throw ValidationError("sweep CSV lacks column '" + key + "'");
    if (it->second.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::stod(it->second);
}

struct Counts {
    double ap{0.0};
    double enb{0.0};
};

Counts association_counts(const Scenario& s, const std::vector<SlicingSolution>& sols) {
    int n_ap = 0;
    int n_enb = 0;
    for (const auto& bs : s.base_stations) (bs.kind == BsKind::ENB ? n_enb : n_ap) += 1;
    double on_ap = 0.0;
    double on_enb = 0.0;
    for (const auto& sol : sols) {
        for (const auto& [av, bs_id] : sol.association) {
            (s.base_station(bs_id).kind == BsKind::ENB ? on_enb : on_ap) += 1.0;
        }
    }
    return {n_ap ? on_ap / n_ap : 0.0, n_enb ? on_enb / n_enb : 0.0};
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t base_seed, double density, int replication) {
    const auto d = static_cast<std::uint64_t>(std::llround(density * 1e6));
    return base_seed ^ splitmix64(d ^ splitmix64(static_cast<std::uint64_t>(replication) + 0x632be59bd9b4e019ULL));
}

SweepRecord run_cell(const ScenarioConfig& cfg, double density, int replication) {
    SweepRecord rec;
    rec.density = density;
    rec.replication = replication;
    rec.seed = cell_seed(cfg.base_seed, density, replication);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.beta1 = rec.beta2 = rec.beta_w = nan;
    try {
        const Scenario s = generate_case_study(density, rec.seed, cfg);
        const JointOptions opts = joint_options(cfg.solver);
        const JointResult joint = joint_solve(s, opts);

        std::vector<SlicingSolution> baseline;
        bool baseline_ok = true;
        for (const auto& mec : s.mec_servers) {
            SlicingProblem problem(s, mec, opts.slicing, joint.floors);
            if (problem.members().empty()) continue;
            baseline.push_back(problem.solve_max_sinr(problem.baseline_beta()));
            baseline_ok = baseline_ok && baseline.back().feasible;
            rec.utility_baseline += baseline.back().utility;
        }

        for (const auto& sol : joint.slicing) {
            const auto beta = sol.beta();
            if (beta.empty()) continue;
            double* slots[] = {&rec.beta1, &rec.beta2, &rec.beta_w};
            // eNB slices come first and the shared Wi-Fi slice last.
            const bool has_wifi = sol.pattern.slices.back().id == kWifiSlice;
            const std::size_t n_enb = beta.size() - (has_wifi ? 1 : 0);
            for (std::size_t i = 0; i < n_enb && i < 2; ++i) *slots[i] = beta[i];
            if (has_wifi) rec.beta_w = beta.back();
            break;
        }
        rec.utility_proposed = joint.slicing_utility();
        rec.utility_gain = rec.utility_proposed - rec.utility_baseline;
        const auto prop = association_counts(s, joint.slicing);
        const auto base = association_counts(s, baseline);
        rec.n_ap_avg = prop.ap;
        rec.n_enb_avg = prop.enb;
        rec.n_ap_baseline = base.ap;
        rec.n_enb_baseline = base.enb;
        rec.mec_utility = joint.assignment.utility;
        rec.migrated_volume = joint.assignment.migrated_volume;
        rec.converged = joint.converged;
        rec.feasible = joint.slicing_feasible() && baseline_ok && joint.assignment.infeasible_tasks.empty();
        if (!rec.feasible) {
            std::vector<std::string> why;
            for (const auto& sol : joint.slicing) {
                for (const auto& d : sol.diagnostics) why.push_back("proposed " + sol.mec_id + ": " + d);
            }
            for (const auto& sol : baseline) {
                for (const auto& d : sol.diagnostics) why.push_back("baseline " + sol.mec_id + ": " + d);
            }
            if (!joint.assignment.infeasible_tasks.empty()) {
                why.push_back(std::to_string(joint.assignment.infeasible_tasks.size()) + " tasks miss their delay budget");
            }
            std::ostringstream msg;
            for (std::size_t i = 0; i < why.size(); ++i) msg << (i ? "; " : "") << why[i];
            rec.error = msg.str();
        }
    } catch (const std::exception& e) {
        rec.feasible = false;
        rec.error = e.what();
    }
    return rec;
}

std::vector<SweepRecord> run_sweep(const ScenarioConfig& cfg, int jobs) {
    std::vector<std::pair<double, int>> cells;
    auto densities = cfg.densities;
    std::sort(densities.begin(), densities.end());
    for (double d : densities) {
        for (int r = 0; r < cfg.replications; ++r) cells.emplace_back(d, r);
    }
    std::vector<SweepRecord> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = run_cell(cfg, cells[i].first, cells[i].second);
    };
    const auto n = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min(n, cells.size()); ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& rows) {
    out << kSweepHeader << '\n';
    for (const auto& r : rows) {
        out << density_str(r.density) << ',' << r.replication << ',' << r.seed << ',' << num(r.beta1) << ','
            << num(r.beta2) << ',' << num(r.beta_w) << ',' << num(r.utility_proposed) << ',' << num(r.utility_baseline)
            << ',' << num(r.utility_gain) << ',' << num(r.n_ap_avg) << ',' << num(r.n_enb_avg) << ','
            << num(r.mec_utility) << ',' << num(r.migrated_volume) << ',' << (r.feasible ? "true" : "false") << ','
            << csv_escape(r.error) << '\n';
    }
}

void write_baseline_csv(std::ostream& out, const std::vector<SweepRecord>& rows) {
    out << kBaselineHeader << '\n';
    for (const auto& r : rows) {
        out << density_str(r.density) << ',' << r.replication << ',' << r.seed << ',' << num(r.n_ap_baseline) << ','
            << num(r.n_enb_baseline) << '\n';
    }
}

std::filesystem::path baseline_csv_path(const std::filesystem::path& sweep_csv) {
    auto p = sweep_csv;
    p.replace_filename(sweep_csv.stem().string() + "_baseline" + sweep_csv.extension().string());
    return p;
}

std::vector<std::filesystem::path> write_plot_data(const std::filesystem::path& sweep_csv,
                                                   const std::filesystem::path& out_dir) {
    const auto rows = read_csv(sweep_csv);
    std::vector<std::map<std::string, std::string>> base_rows;
    if (std::filesystem::exists(baseline_csv_path(sweep_csv))) base_rows = read_csv(baseline_csv_path(sweep_csv));
    std::filesystem::create_directories(out_dir);

    struct Acc {
        int n{0};
        int feasible{0};
        double gain{0.0};
        double min_gain{std::numeric_limits<double>::infinity()};
        double max_gain{-std::numeric_limits<double>::infinity()};
        double beta[3]{0.0, 0.0, 0.0};
        int beta_n[3]{0, 0, 0};
        double n_ap{0.0};
        double n_enb{0.0};
        double n_ap_base{0.0};
        double n_enb_base{0.0};
        int n_base{0};
    };
    // Keyed numerically; the label keeps the text as written in the sweep file.
    std::map<double, std::pair<std::string, Acc>> by_density;
    for (const auto& row : rows) {
        auto& [label, a] = by_density[field(row, "density")];
        label = row.at("density");
        const double g = field(row, "utility_gain");
        ++a.n;
        a.feasible += row.at("feasible") == "true";
        a.gain += g;
        a.min_gain = std::min(a.min_gain, g);
        a.max_gain = std::max(a.max_gain, g);
        const char* keys[] = {"beta1", "beta2", "beta_w"};
        for (int i = 0; i < 3; ++i) {
            const double b = field(row, keys[i]);
            if (std::isnan(b)) continue;
            a.beta[i] += b;
            ++a.beta_n[i];
        }
        a.n_ap += field(row, "n_ap_avg");
        a.n_enb += field(row, "n_enb_avg");
    }
    for (const auto& row : base_rows) {
        auto it = by_density.find(field(row, "density"));
        if (it == by_density.end()) continue;
        auto& a = it->second.second;
        a.n_ap_base += field(row, "n_ap_avg");
        a.n_enb_base += field(row, "n_enb_avg");
        ++a.n_base;
    }

    std::vector<std::filesystem::path> written;
    auto open = [&](const char* name) {
        written.push_back(out_dir / name);
        std::ofstream f(written.back());
        if (!f) throw ValidationError("cannot write '" + written.back().string() + "'");
        return f;
    };
    auto mean = [](double sum, int n) { return n ? sum / n : std::numeric_limits<double>::quiet_NaN(); };

    {
        auto f = open("gain_by_density.csv");
        f << "density,n,n_feasible,mean_gain,min_gain,max_gain,mean_beta1,mean_beta2,mean_beta_w\n";
        for (const auto& [d, entry] : by_density) {
            const auto& a = entry.second;
            f << entry.first << ',' << a.n << ',' << a.feasible << ',' << num(mean(a.gain, a.n)) << ','
              << num(a.min_gain) << ',' << num(a.max_gain) << ',' << num(mean(a.beta[0], a.beta_n[0])) << ','
              << num(mean(a.beta[1], a.beta_n[1])) << ',' << num(mean(a.beta[2], a.beta_n[2])) << '\n';
        }
    }
    {
        std::vector<const std::map<std::string, std::string>*> order;
        for (const auto& row : rows) order.push_back(&row);
        std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
            return field(*a, "utility_gain") < field(*b, "utility_gain");
        });
        auto f = open("gain_sorted.csv");
        f << "rank,density,replication,utility_gain,beta1,beta2,beta_w\n";
        for (std::size_t i = 0; i < order.size(); ++i) {
            const auto& r = *order[i];
            f << i << ',' << r.at("density") << ',' << r.at("replication") << ',' << r.at("utility_gain") << ','
              << r.at("beta1") << ',' << r.at("beta2") << ',' << r.at("beta_w") << '\n';
        }
    }
    {
        auto f = open("association_by_density.csv");
        f << "density,n_ap_proposed,n_enb_proposed,n_ap_baseline,n_enb_baseline\n";
        for (const auto& [d, entry] : by_density) {
            const auto& a = entry.second;
            f << entry.first << ',' << num(mean(a.n_ap, a.n)) << ',' << num(mean(a.n_enb, a.n)) << ','
              << num(mean(a.n_ap_base, a.n_base)) << ',' << num(mean(a.n_enb_base, a.n_base)) << '\n';
        }
    }
    return written;
}

}  // namespace avnet
