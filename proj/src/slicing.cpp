#include "avnet/slicing.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "avnet/errors.hpp"
#include "avnet/qos.hpp"

namespace avnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBudgetTol = 1e-12;
constexpr double kImproveTol = 1e-10;

// Descending sequence with at most one element skipped and one inserted,
// consumed front to back without materialising it.
class MergedSeq {
public:
    MergedSeq(const std::vector<double>& v, std::ptrdiff_t skip, std::optional<double> add)
        : v_(v), skip_(skip), add_(add) {
        advance();
    }

    double peek() const {
        if (add_ && (i_ >= v_.size() || *add_ >= v_[i_])) return *add_;
        return v_[i_];
    }

    void pop() {
        if (add_ && (i_ >= v_.size() || *add_ >= v_[i_])) {
            add_.reset();
        } else {
            ++i_;
            advance();
        }
    }

private:
    void advance() {
        if (static_cast<std::ptrdiff_t>(i_) == skip_) ++i_;
    }

    const std::vector<double>& v_;
    std::ptrdiff_t skip_;
    std::optional<double> add_;
    std::size_t i_{0};
};

// Sum of ln f_k under the water-filling allocation f_k = max(f_min_k, tau).
double log_fraction_sum(const std::vector<double>& fmins, std::ptrdiff_t skip, std::optional<double> add,
                        double sum_fmin) {
    const auto n = static_cast<std::ptrdiff_t>(fmins.size()) - (skip >= 0 ? 1 : 0) + (add ? 1 : 0);
    if (n == 0) return 0.0;
    if (!(sum_fmin <= 1.0 + kBudgetTol)) return -kInf;
    MergedSeq seq(fmins, skip, add);
    double remaining = 1.0;
    double acc = 0.0;
    std::ptrdiff_t pinned = 0;
    while (pinned < n) {
        const double share = remaining / static_cast<double>(n - pinned);
        const double f = seq.peek();
        if (f <= share) break;
        acc += std::log(f);
        remaining -= f;
        ++pinned;
        seq.pop();
    }
    if (pinned == n) return acc;
    const auto free_n = static_cast<double>(n - pinned);
    return acc + free_n * std::log(remaining / free_n);
}

struct BsState {
    std::vector<double> fmins;  // descending
    double sum_fmin{0.0};
    double sum_log_c{0.0};
    double utility{0.0};

    void refresh() {
        utility = fmins.empty() ? 0.0 : sum_log_c + log_fraction_sum(fmins, -1, std::nullopt, sum_fmin);
    }
    std::ptrdiff_t position(double fmin) const {
        auto it = std::lower_bound(fmins.begin(), fmins.end(), fmin, std::greater<>());
        return it - fmins.begin();
    }
};

std::string format_beta(std::span<const double> beta) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < beta.size(); ++i) os << (i ? ", " : "") << beta[i];
    os << ')';
    return os.str();
}

}  // namespace

FractionResult optimal_fractions(std::span<const double> min_fractions) {
    const std::size_t n = min_fractions.size();
    FractionResult out;
    if (n == 0) return out;

    std::vector<double> fmin(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fmin[i] = std::max(min_fractions[i], 0.0);
        sum += fmin[i];
    }
    if (!(sum <= 1.0 + kBudgetTol)) {
        out.fractions.assign(n, 1.0 / static_cast<double>(n));
        out.feasible = false;
        return out;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fmin[a] > fmin[b]; });

    // Pin the largest minima while they exceed the equal share of what is left.
    double remaining = 1.0;
    std::size_t pinned = 0;
    while (pinned < n) {
        const double share = remaining / static_cast<double>(n - pinned);
        if (fmin[order[pinned]] <= share) break;
        remaining -= fmin[order[pinned]];
        ++pinned;
    }
    out.fractions.assign(n, 0.0);
    const double share = pinned < n ? remaining / static_cast<double>(n - pinned) : 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        out.fractions[order[r]] = r < pinned ? fmin[order[r]] : share;
    }
    return out;
}

std::vector<std::vector<double>> simplex_grid(std::size_t dims, double step) {
    if (!(step > 0.0 && step <= 0.5)) throw ContractViolation("grid step must lie in (0, 0.5]");
    std::vector<std::vector<double>> out;
    if (dims == 0) return out;
    if (dims == 1) return {{1.0}};

    const auto steps = static_cast<long>(std::floor(1.0 / step + 1e-9));
    const bool exact = std::abs(static_cast<double>(steps) * step - 1.0) < 1e-9;
    auto value = [&](long k) { return exact ? static_cast<double>(k) / static_cast<double>(steps) : k * step; };

    std::vector<long> k(dims - 1, 0);
    std::function<void(std::size_t, long)> rec = [&](std::size_t d, long used) {
        if (d == dims - 1) {
            std::vector<double> beta(dims);
            double sum = 0.0;
            for (std::size_t i = 0; i + 1 < dims; ++i) {
                beta[i] = value(k[i]);
                sum += beta[i];
            }
            beta[dims - 1] = std::max(0.0, 1.0 - sum);
            out.push_back(std::move(beta));
            return;
        }
        for (long v = 0; used + v <= steps; ++v) {
            k[d] = v;
            rec(d + 1, used + v);
        }
    };
    rec(0, 0);
    return out;
}

std::vector<double> SlicingSolution::beta() const {
    std::vector<double> b;
    for (const auto& s : pattern.slices) b.push_back(s.ratio);
    return b;
}

std::map<std::string, int> SlicingSolution::load() const {
    std::map<std::string, int> out;
    for (const auto& [av, bs] : association) ++out[bs];
    return out;
}

// Search state for one beta: per-member capacities and per-BS water-filling.
struct SlicingProblem::Search {
    const SlicingProblem& p;
    std::vector<std::vector<double>> fmin;   // [member][link]
    std::vector<std::vector<double>> logc;   // [member][link]
    std::vector<BsState> bs;
    std::vector<int> assign;                 // link index per member, -1 if none
    std::vector<double> trace;

    Search(const SlicingProblem& problem, std::span<const double> beta)
        : p(problem), fmin(problem.table_.size()), logc(problem.table_.size()), bs(problem.bs_ids_.size()),
          assign(problem.table_.size(), -1) {
        const double bandwidth = p.mec_->bandwidth_hz;
        for (std::size_t k = 0; k < p.table_.size(); ++k) {
            const auto& m = p.table_[k];
            for (const auto& link : m.links) {
                double cap = 0.0;
                for (std::size_t sl = 0; sl < beta.size(); ++sl) cap += beta[sl] * link.eff[sl];
                cap *= bandwidth;
                fmin[k].push_back(cap > 0.0 ? m.min_rate / cap : kInf);
                logc[k].push_back(cap > 0.0 ? std::log(cap) : -kInf);
            }
        }
    }

    double utility() const {
        double u = 0.0;
        for (const auto& b : bs) u += b.utility;
        return u;
    }

    bool usable(std::size_t k, std::size_t l) const { return std::isfinite(fmin[k][l]); }

    double util_with(std::size_t k, std::size_t l) const {
        const auto& b = bs[p.table_[k].links[l].bs];
        return b.sum_log_c + logc[k][l] + log_fraction_sum(b.fmins, -1, fmin[k][l], b.sum_fmin + fmin[k][l]);
    }

    double util_without(std::size_t k) const {
        const auto l = static_cast<std::size_t>(assign[k]);
        const auto& b = bs[p.table_[k].links[l].bs];
        if (b.fmins.size() == 1) return 0.0;
        return b.sum_log_c - logc[k][l] +
               log_fraction_sum(b.fmins, b.position(fmin[k][l]), std::nullopt, b.sum_fmin - fmin[k][l]);
    }

    void add(std::size_t k, std::size_t l) {
        auto& b = bs[p.table_[k].links[l].bs];
        b.fmins.insert(b.fmins.begin() + b.position(fmin[k][l]), fmin[k][l]);
        b.sum_fmin += fmin[k][l];
        b.sum_log_c += logc[k][l];
        b.refresh();
        assign[k] = static_cast<int>(l);
    }

    void remove(std::size_t k) {
        const auto l = static_cast<std::size_t>(assign[k]);
        auto& b = bs[p.table_[k].links[l].bs];
        b.fmins.erase(b.fmins.begin() + b.position(fmin[k][l]));
        if (b.fmins.empty()) {
            b.sum_fmin = 0.0;
            b.sum_log_c = 0.0;
        } else {
            b.sum_fmin -= fmin[k][l];
            b.sum_log_c -= logc[k][l];
        }
        b.refresh();
        assign[k] = -1;
    }

    // Members in id order, each to the BS with the best marginal utility.
    bool greedy() {
        for (std::size_t k = 0; k < p.table_.size(); ++k) {
            int best = -1;
            double best_gain = -kInf;
            for (std::size_t l = 0; l < p.table_[k].links.size(); ++l) {
                if (!usable(k, l)) continue;
                const double gain = util_with(k, l) - bs[p.table_[k].links[l].bs].utility;
                if (gain > best_gain) {
                    best_gain = gain;
                    best = static_cast<int>(l);
                }
            }
            if (best < 0 || !std::isfinite(best_gain)) return false;
            add(k, static_cast<std::size_t>(best));
        }
        return true;
    }

    // Depth-first over every usable association; leaves the best one applied.
    bool exhaustive() {
        std::vector<int> best;
        double best_u = -kInf;
        auto dfs = [&](auto&& self, std::size_t k) -> void {
            if (k == p.table_.size()) {
                const double u = utility();
                if (u > best_u + kImproveTol) {
                    best_u = u;
                    best = assign;
                }
                return;
            }
            for (std::size_t l = 0; l < p.table_[k].links.size(); ++l) {
                if (!usable(k, l)) continue;
                add(k, l);
                self(self, k + 1);
                remove(k);
            }
        };
        dfs(dfs, 0);
        if (!std::isfinite(best_u)) return false;
        for (std::size_t k = 0; k < best.size(); ++k) add(k, static_cast<std::size_t>(best[k]));
        return true;
    }

    bool seed(const std::vector<int>& links) {
        for (std::size_t k = 0; k < links.size(); ++k) {
            if (links[k] < 0 || !usable(k, static_cast<std::size_t>(links[k]))) return false;
            add(k, static_cast<std::size_t>(links[k]));
        }
        return std::isfinite(utility());
    }

    // Relocate single AVs while some move strictly improves the utility.
    void local_search(int max_passes) {
        double current = utility();
        trace.push_back(current);
        for (int pass = 0; pass < max_passes; ++pass) {
            bool moved = false;
            for (std::size_t k = 0; k < p.table_.size(); ++k) {
                const auto& links = p.table_[k].links;
                if (links.size() < 2) continue;
                const auto cur = static_cast<std::size_t>(assign[k]);
                const auto& home = bs[links[cur].bs];
                const double leave = util_without(k) - home.utility;
                int best = -1;
                double best_delta = kImproveTol;
                for (std::size_t l = 0; l < links.size(); ++l) {
                    if (l == cur || !usable(k, l)) continue;
                    const double delta = leave + util_with(k, l) - bs[links[l].bs].utility;
                    if (delta > best_delta) {
                        best_delta = delta;
                        best = static_cast<int>(l);
                    }
                }
                if (best < 0) continue;
                remove(k);
                add(k, static_cast<std::size_t>(best));
                const double next = utility();
                assert(next >= current - 1e-9);
                current = next;
                trace.push_back(current);
                moved = true;
            }
            if (!moved) break;
        }
    }
};

SlicingProblem::SlicingProblem(const Scenario& s, const MecServer& mec, SlicingOptions options,
                               const RateFloors& extra_floors)
    : scenario_(&s), mec_(&mec), options_(std::move(options)) {
    slice_ids_ = avnet::slice_ids(s, mec);
    bs_ids_ = mec.bs_ids;
    std::sort(bs_ids_.begin(), bs_ids_.end());
    if (slice_ids_.empty()) return;

    std::vector<double> equal(slice_ids_.size(), 1.0 / static_cast<double>(slice_ids_.size()));
    structure_ = build_reuse_pattern(s, mec, equal);

    for (const auto& v : s.vehicles) {
        const auto owner = serving_mec(s, v);
        if (!owner || *owner != mec.id) continue;
        Member m;
        m.id = v.id;
        m.min_rate = required_rate(v).min_rate_bps;
        if (auto it = extra_floors.find(v.id); it != extra_floors.end()) m.min_rate = std::max(m.min_rate, it->second);
        for (std::size_t j = 0; j < bs_ids_.size(); ++j) {
            const auto& bs = s.base_station(bs_ids_[j]);
            if (distance(bs.position_m, v.position_m) > bs.range_m) continue;
            Link link{j, std::vector<double>(slice_ids_.size(), 0.0), std::vector<double>(slice_ids_.size(), 0.0)};
            for (std::size_t sl = 0; sl < slice_ids_.size(); ++sl) {
                if (!structure_.transmits_on(bs.id, slice_ids_[sl])) continue;
                const double g = sinr(s, structure_, bs.id, v.id, slice_ids_[sl], options_.radio);
                link.sinr[sl] = g;
                link.eff[sl] = bs.mac_efficiency * std::log2(1.0 + g);
            }
            m.links.push_back(std::move(link));
        }
        members_.push_back(v.id);
        table_.push_back(std::move(m));
    }
}

std::vector<double> SlicingProblem::baseline_beta() const {
    if (!options_.baseline_beta.empty()) {
        if (options_.baseline_beta.size() != slice_ids_.size()) {
            throw ValidationError("baseline_beta has " + std::to_string(options_.baseline_beta.size()) +
                                  " entries, MEC server '" + mec_->id + "' has " +
                                  std::to_string(slice_ids_.size()) + " slices");
        }
        return options_.baseline_beta;
    }
    return std::vector<double>(slice_ids_.size(), 1.0 / static_cast<double>(slice_ids_.size()));
}

double SlicingProblem::min_rate_bps(VehicleId av) const {
    auto it = std::lower_bound(members_.begin(), members_.end(), av);
    if (it == members_.end() || *it != av) throw ContractViolation("vehicle " + std::to_string(av) + " not managed here");
    return table_[static_cast<std::size_t>(it - members_.begin())].min_rate;
}

SlicingSolution SlicingProblem::evaluate(std::span<const double> beta, const Association& association) const {
    SlicingSolution sol;
    sol.mec_id = mec_->id;
    if (slice_ids_.empty()) {
        sol.feasible = true;
        return sol;
    }
    sol.pattern = build_reuse_pattern(*scenario_, *mec_, beta);

    std::map<std::size_t, std::vector<std::pair<std::size_t, double>>> per_bs;  // bs -> (member, cap)
    for (const auto& [av, bs_id] : association) {
        if (!std::binary_search(members_.begin(), members_.end(), av)) {
            throw ContractViolation("vehicle " + std::to_string(av) + " is not managed by MEC server '" + mec_->id + "'");
        }
    }
    for (std::size_t k = 0; k < table_.size(); ++k) {
        const auto& m = table_[k];
        auto it = association.find(m.id);
        if (it == association.end()) throw ContractViolation("vehicle " + std::to_string(m.id) + " has no association");
        const auto link = std::find_if(m.links.begin(), m.links.end(),
                                       [&](const Link& l) { return bs_ids_[l.bs] == it->second; });
        if (link == m.links.end()) {
            throw ContractViolation("vehicle " + std::to_string(m.id) + " is not covered by '" + it->second + "'");
        }
        double cap = 0.0;
        for (std::size_t sl = 0; sl < beta.size(); ++sl) cap += beta[sl] * link->eff[sl];
        per_bs[link->bs].emplace_back(k, cap * mec_->bandwidth_hz);
        sol.association[m.id] = it->second;
        sol.min_rates_bps[m.id] = m.min_rate;
    }

    sol.feasible = true;
    for (const auto& [j, entries] : per_bs) {
        std::vector<double> fmins;
        for (const auto& [k, cap] : entries) fmins.push_back(cap > 0.0 ? table_[k].min_rate / cap : kInf);
        const auto fr = optimal_fractions(fmins);
        if (!fr.feasible) {
            sol.feasible = false;
            const double need = std::accumulate(fmins.begin(), fmins.end(), 0.0);
            std::ostringstream msg;
            msg << "BS " << bs_ids_[j] << ": rate floors of " << entries.size() << " AVs need fraction sum " << need
                << " > 1 at beta " << format_beta(beta);
            sol.diagnostics.push_back(msg.str());
        }
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& [k, cap] = entries[i];
            const VehicleId av = table_[k].id;
            const double rate = cap * fr.fractions[i];
            sol.fractions[{bs_ids_[j], av}] = fr.fractions[i];
            sol.rates_bps[av] = rate;
            if (rate > 0.0) sol.utility += std::log(rate);
            if (!(rate > 0.0) || rate < table_[k].min_rate - 1e-6) sol.feasible = false;
        }
    }
    return sol;
}

SlicingSolution SlicingProblem::finish(std::span<const double> beta, const Association& a,
                                       std::vector<double> trace) const {
    auto sol = evaluate(beta, a);
    sol.search_trace = std::move(trace);
    return sol;
}

Association SlicingProblem::max_sinr_association(std::span<const double> beta) const {
    Association a;
    for (const auto& m : table_) {
        if (m.links.empty()) continue;
        std::size_t best = 0;
        double best_sinr = -1.0;
        for (std::size_t l = 0; l < m.links.size(); ++l) {
            double g = -1.0;
            for (std::size_t sl = 0; sl < beta.size(); ++sl) {
                if (beta[sl] > 0.0 && m.links[l].sinr[sl] > 0.0) g = std::max(g, m.links[l].sinr[sl]);
            }
            // Links are in ascending BS id, so an exact tie keeps the lower id.
            if (g > best_sinr * (1.0 + 1e-12) && g > best_sinr) {
                best_sinr = g;
                best = l;
            }
        }
        a[m.id] = bs_ids_[m.links[best].bs];
    }
    return a;
}

SlicingSolution SlicingProblem::solve_max_sinr(std::span<const double> beta) const {
    return evaluate(beta, max_sinr_association(beta));
}

SlicingSolution SlicingProblem::solve_num() const {
    if (slice_ids_.empty() || table_.empty()) {
        auto beta = slice_ids_.empty() ? std::vector<double>{} : baseline_beta();
        auto sol = evaluate(beta, {});
        return sol;
    }

    std::optional<std::vector<double>> best_beta;
    std::vector<int> best_assign;
    std::vector<double> best_trace;
    double best_utility = -kInf;

    auto consider = [&](const std::vector<double>& beta, Search& search) {
        search.local_search(options_.max_local_search_passes);
        const double u = search.utility();
        if (std::isfinite(u) && u > best_utility + 1e-12) {
            best_utility = u;
            best_beta = beta;
            best_assign = search.assign;
            best_trace = search.trace;
        }
    };

    double combos = 1.0;
    for (const auto& m : table_) combos *= static_cast<double>(std::max<std::size_t>(1, m.links.size()));
    const bool small = combos <= static_cast<double>(options_.exact_association_limit);

    for (const auto& beta : simplex_grid(slice_ids_.size(), options_.grid_step)) {
        Search search(*this, beta);
        if (!(small ? search.exhaustive() : search.greedy())) continue;
        consider(beta, search);
    }

    if (options_.warm_start_baseline) {
        const auto beta = baseline_beta();
        const auto assoc = max_sinr_association(beta);
        std::vector<int> links;
        for (const auto& m : table_) {
            const auto& bs_id = assoc.at(m.id);
            int li = -1;
            for (std::size_t l = 0; l < m.links.size(); ++l) {
                if (bs_ids_[m.links[l].bs] == bs_id) li = static_cast<int>(l);
            }
            links.push_back(li);
        }
        Search search(*this, beta);
        if (search.seed(links)) consider(beta, search);
    }

    if (!best_beta) {
        const auto beta = baseline_beta();
        auto sol = evaluate(beta, max_sinr_association(beta));
        sol.feasible = false;
        std::ostringstream msg;
        msg << "no feasible beta on the grid (step " << options_.grid_step << ")";
        sol.diagnostics.insert(sol.diagnostics.begin(), msg.str());
        for (const auto& m : table_) {
            bool usable = false;
            for (const auto& l : m.links) {
                for (double e : l.eff) usable = usable || e > 0.0;
            }
            if (!usable) sol.diagnostics.push_back("vehicle " + std::to_string(m.id) + ": no usable link");
        }
        return sol;
    }

    Association assoc;
    for (std::size_t k = 0; k < table_.size(); ++k) {
        assoc[table_[k].id] = bs_ids_[table_[k].links[static_cast<std::size_t>(best_assign[k])].bs];
    }
    return finish(*best_beta, assoc, std::move(best_trace));
}

SlicingSolution evaluate(const Scenario& s, const MecServer& mec, std::span<const double> beta,
                         const Association& association, const SlicingOptions& options) {
    return SlicingProblem(s, mec, options).evaluate(beta, association);
}

SlicingSolution solve_num(const Scenario& s, const MecServer& mec, const SlicingOptions& options) {
    return SlicingProblem(s, mec, options).solve_num();
}

SlicingSolution solve_max_sinr(const Scenario& s, const MecServer& mec, std::span<const double> fixed_beta,
                               const SlicingOptions& options) {
    return SlicingProblem(s, mec, options).solve_max_sinr(fixed_beta);
}

nlohmann::json to_json(const SlicingSolution& sol) {
    nlohmann::json slices = nlohmann::json::array();
    for (const auto& s : sol.pattern.slices) slices.push_back({{"id", s.id}, {"ratio", s.ratio}});
    nlohmann::json reuse = nlohmann::json::object();
    for (const auto& [bs, ids] : sol.pattern.bs_slices) reuse[bs] = ids;
    nlohmann::json avs = nlohmann::json::array();
    for (const auto& [av, bs] : sol.association) {
        avs.push_back({{"av_id", av},
                       {"bs_id", bs},
                       {"fraction", sol.fractions.at({bs, av})},
                       {"rate_bps", sol.rates_bps.at(av)},
                       {"min_rate_bps", sol.min_rates_bps.at(av)}});
    }
    return {{"mec_id", sol.mec_id},   {"slices", slices},           {"bs_slices", reuse},
            {"association", avs},     {"utility", sol.utility},     {"feasible", sol.feasible},
            {"diagnostics", sol.diagnostics}};
}

void write_solution_csv(std::ostream& out, const SlicingSolution& sol) {
    out << "av_id,bs_id,fraction,rate_bps\n";
    char buf[96];
    for (const auto& [av, bs] : sol.association) {
        std::snprintf(buf, sizeof buf, "%.12g,%.6f", sol.fractions.at({bs, av}), sol.rates_bps.at(av));
        out << av << ',' << bs << ',' << buf << '\n';
    }
}

}  // namespace avnet
