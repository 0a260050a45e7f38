#include "avnet/mec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "avnet/errors.hpp"
#include "avnet/qos.hpp"

namespace avnet {

namespace {

// Keeps a task whose delay budget rules out every placement off the edge
// servers while still preferring any admissible placement for it.
constexpr double kUnplacedPenalty = 1.0e6;
constexpr double kImproveTol = 1e-12;

// One resource dimension: items onto capacity-bounded servers plus an
// unbounded cloud sink (option index == servers).
struct Packing {
    std::size_t servers{0};
    std::vector<double> cap;
    std::vector<double> size;
    std::vector<std::vector<double>> value;   // [item][option]
    std::vector<std::vector<char>> allowed;   // [item][option]; cloud always placeable
    std::vector<std::size_t> home;

    std::size_t cloud() const { return servers; }
    std::size_t items() const { return size.size(); }
};

class PackingSearch {
public:
    explicit PackingSearch(const Packing& pk) : pk_(pk), place_(pk.items(), pk.cloud()), load_(pk.servers, 0.0) {}

    const std::vector<std::size_t>& placement() const { return place_; }
    const std::vector<double>& trace() const { return trace_; }

    double objective() const {
        double obj = 0.0;
        for (std::size_t k = 0; k < pk_.items(); ++k) obj += pk_.value[k][place_[k]];
        return obj;
    }

    void greedy() {
        std::vector<std::size_t> order(pk_.items());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return pk_.size[a] > pk_.size[b]; });
        for (std::size_t k : order) {
            const std::size_t h = pk_.home[k];
            if (pk_.allowed[k][h] && fits(k, h)) {
                put(k, h);
                continue;
            }
            std::size_t best = pk_.cloud();
            for (std::size_t o = 0; o < pk_.servers; ++o) {
                if (o == h || !pk_.allowed[k][o] || !fits(k, o)) continue;
                if (pk_.value[k][o] > pk_.value[k][best]) best = o;
            }
            put(k, best);
        }
        trace_.push_back(objective());
    }

    void local_search() {
        for (int round = 0; round < 100000; ++round) {
            if (!single_move() && !pair_swap()) break;
        }
    }

    // Exact depth-first branch and bound, seeded with the current placement.
    void branch_and_bound() {
        const std::size_t n = pk_.items();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return pk_.size[a] > pk_.size[b]; });
        std::vector<double> suffix(n + 1, 0.0);
        for (std::size_t i = n; i-- > 0;) {
            const std::size_t k = order[i];
            double best = pk_.value[k][pk_.cloud()];
            for (std::size_t o = 0; o < pk_.servers; ++o) {
                if (pk_.allowed[k][o]) best = std::max(best, pk_.value[k][o]);
            }
            suffix[i] = suffix[i + 1] + best;
        }

        double incumbent = objective();
        std::vector<std::size_t> best_place = place_;
        std::vector<std::size_t> cur(n, pk_.cloud());
        std::vector<double> load(pk_.servers, 0.0);

        auto dfs = [&](auto&& self, std::size_t i, double obj) -> void {
            if (obj + suffix[i] <= incumbent + kImproveTol) return;
            if (i == n) {
                incumbent = obj;
                best_place = cur;
                return;
            }
            const std::size_t k = order[i];
            std::vector<std::size_t> opts;
            for (std::size_t o = 0; o <= pk_.servers; ++o) {
                if (o == pk_.cloud() || (pk_.allowed[k][o] && load[o] + pk_.size[k] <= pk_.cap[o])) opts.push_back(o);
            }
            std::stable_sort(opts.begin(), opts.end(),
                             [&](std::size_t a, std::size_t b) { return pk_.value[k][a] > pk_.value[k][b]; });
            for (std::size_t o : opts) {
                cur[k] = o;
                if (o != pk_.cloud()) load[o] += pk_.size[k];
                self(self, i + 1, obj + pk_.value[k][o]);
                if (o != pk_.cloud()) load[o] -= pk_.size[k];
                cur[k] = pk_.cloud();
            }
        };
        dfs(dfs, 0, 0.0);

        if (best_place != place_) {
            std::fill(load_.begin(), load_.end(), 0.0);
            for (std::size_t k = 0; k < n; ++k) {
                place_[k] = best_place[k];
                if (place_[k] != pk_.cloud()) load_[place_[k]] += pk_.size[k];
            }
            trace_.push_back(objective());
        }
    }

private:
    bool fits(std::size_t k, std::size_t o) const { return o == pk_.cloud() || load_[o] + pk_.size[k] <= pk_.cap[o]; }

    void put(std::size_t k, std::size_t o) {
        place_[k] = o;
        if (o != pk_.cloud()) load_[o] += pk_.size[k];
    }

    void take(std::size_t k) {
        if (place_[k] != pk_.cloud()) load_[place_[k]] -= pk_.size[k];
        place_[k] = pk_.cloud();
    }

    bool single_move() {
        bool moved = false;
        for (std::size_t k = 0; k < pk_.items(); ++k) {
            const std::size_t from = place_[k];
            std::size_t best = from;
            double best_delta = kImproveTol;
            for (std::size_t o = 0; o <= pk_.servers; ++o) {
                if (o == from) continue;
                if (o != pk_.cloud() && (!pk_.allowed[k][o] || !fits(k, o))) continue;
                const double delta = pk_.value[k][o] - pk_.value[k][from];
                if (delta > best_delta) {
                    best_delta = delta;
                    best = o;
                }
            }
            if (best == from) continue;
            take(k);
            put(k, best);
            trace_.push_back(objective());
            moved = true;
        }
        return moved;
    }

    bool pair_swap() {
        const std::size_t n = pk_.items();
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                const std::size_t oa = place_[a];
                const std::size_t ob = place_[b];
                if (oa == ob) continue;
                if (ob != pk_.cloud() && !pk_.allowed[a][ob]) continue;
                if (oa != pk_.cloud() && !pk_.allowed[b][oa]) continue;
                if (oa != pk_.cloud() && load_[oa] - pk_.size[a] + pk_.size[b] > pk_.cap[oa]) continue;
                if (ob != pk_.cloud() && load_[ob] - pk_.size[b] + pk_.size[a] > pk_.cap[ob]) continue;
                const double delta =
                    pk_.value[a][ob] + pk_.value[b][oa] - pk_.value[a][oa] - pk_.value[b][ob];
                if (delta <= kImproveTol) continue;
                take(a);
                take(b);
                put(a, ob);
                put(b, oa);
                trace_.push_back(objective());
                return true;
            }
        }
        return false;
    }

    const Packing& pk_;
    std::vector<std::size_t> place_;
    std::vector<double> load_;
    std::vector<double> trace_;
};

}  // namespace

double processing_delay(const TaskDemand& t, const MecServer& server, const MecParams& params) {
    double d = 0.0;
    if (t.workload_cycles > 0.0) {
        if (!(t.compute > 0.0)) {
            throw ContractViolation("vehicle " + std::to_string(t.av_id) + ": workload without compute rate");
        }
        d = t.workload_cycles / t.compute;
    }
    if (server.id != t.home_server) d += server.backhaul_delay_s * params.backhaul_hop_multiplier;
    return d;
}

double cloud_processing_delay(const TaskDemand& t, const MecParams& params) {
    double d = 0.0;
    if (t.workload_cycles > 0.0) {
        if (!(t.compute > 0.0)) {
            throw ContractViolation("vehicle " + std::to_string(t.av_id) + ": workload without compute rate");
        }
        d = t.workload_cycles / t.compute;
    }
    return d + params.cloud_delay_s;
}

double assignment_utility(const MecAssignment& a, const MecWeights& weights) {
    double u = 0.0;
    for (const auto& [id, util] : a.per_server_compute_util) u += weights.w_compute * util;
    for (const auto& [id, util] : a.per_server_storage_util) u += weights.w_storage * util;
    return u - weights.kappa * a.migrated_volume;
}

MecAssignment solve_assignment(std::span<const TaskDemand> tasks, std::span<const MecServer> servers,
                               const MecWeights& weights, const MecParams& params) {
    if (servers.empty()) throw ContractViolation("solve_assignment needs at least one MEC server");
    if (weights.w_compute < 0.0 || weights.w_storage < 0.0 || weights.kappa < 0.0) {
        throw ContractViolation("MEC weights must be >= 0");
    }

    std::vector<const MecServer*> srv;
    for (const auto& s : servers) srv.push_back(&s);
    std::stable_sort(srv.begin(), srv.end(), [](const MecServer* a, const MecServer* b) { return a->id < b->id; });
    auto index_of = [&](const std::string& id) {
        for (std::size_t i = 0; i < srv.size(); ++i) {
            if (srv[i]->id == id) return i;
        }
        throw ContractViolation("unknown home server '" + id + "'");
    };

    double mean_compute = 0.0;
    double mean_storage = 0.0;
    for (const auto* s : srv) {
        mean_compute += s->compute_capacity;
        mean_storage += s->storage_capacity;
    }
    mean_compute /= static_cast<double>(srv.size());
    mean_storage /= static_cast<double>(srv.size());

    std::vector<const TaskDemand*> sorted;
    for (const auto& t : tasks) sorted.push_back(&t);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const TaskDemand* a, const TaskDemand* b) { return a->av_id < b->av_id; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i]->av_id == sorted[i - 1]->av_id) {
            throw ContractViolation("duplicate task for vehicle " + std::to_string(sorted[i]->av_id));
        }
    }

    Packing compute;
    Packing storage;
    compute.servers = storage.servers = srv.size();
    for (const auto* s : srv) {
        compute.cap.push_back(s->compute_capacity);
        storage.cap.push_back(s->storage_capacity);
    }
    std::vector<const TaskDemand*> compute_tasks;
    std::vector<const TaskDemand*> storage_tasks;
    std::set<VehicleId> infeasible;

    for (const auto* t : sorted) {
        const std::size_t home = index_of(t->home_server);
        auto budget = [&](double processing) {
            return DelayBudget{t->av_id, processing, t->transmission_delay_s, t->response_threshold_s,
                               t->latency_threshold_s};
        };
        if (t->compute > 0.0 || t->workload_cycles > 0.0) {
            std::vector<double> value(srv.size() + 1, 0.0);
            std::vector<char> allowed(srv.size() + 1, 1);
            for (std::size_t i = 0; i < srv.size(); ++i) {
                value[i] = weights.w_compute * t->compute / srv[i]->compute_capacity;
                if (i != home) value[i] -= weights.kappa * t->compute / mean_compute;
                allowed[i] = check_delay_constraints(budget(processing_delay(*t, *srv[i], params))) ? 1 : 0;
            }
            if (!check_delay_constraints(budget(cloud_processing_delay(*t, params)))) {
                allowed[srv.size()] = 0;
                value[srv.size()] = -kUnplacedPenalty;
            }
            compute.size.push_back(t->compute);
            compute.value.push_back(std::move(value));
            compute.allowed.push_back(std::move(allowed));
            compute.home.push_back(home);
            compute_tasks.push_back(t);
        }
        if (t->storage > 0.0) {
            std::vector<double> value(srv.size() + 1, 0.0);
            for (std::size_t i = 0; i < srv.size(); ++i) {
                value[i] = weights.w_storage * t->storage / srv[i]->storage_capacity;
                if (i != home) value[i] -= weights.kappa * t->storage / mean_storage;
            }
            storage.size.push_back(t->storage);
            storage.value.push_back(std::move(value));
            storage.allowed.emplace_back(srv.size() + 1, 1);
            storage.home.push_back(home);
            storage_tasks.push_back(t);
            // Storage adds no processing delay; only the downlink must fit.
            if (!(t->compute > 0.0) && !check_delay_constraints(budget(0.0))) infeasible.insert(t->av_id);
        }
    }

    PackingSearch cs(compute);
    PackingSearch ss(storage);
    cs.greedy();
    ss.greedy();
    const double storage_seed = ss.objective();
    cs.local_search();
    if (static_cast<int>(compute.items()) <= params.exact_task_limit) cs.branch_and_bound();
    const double compute_final = cs.objective();
    ss.local_search();
    if (static_cast<int>(storage.items()) <= params.exact_task_limit) ss.branch_and_bound();

    MecAssignment a;
    for (const auto& v : cs.trace()) a.search_trace.push_back(v + storage_seed);
    for (std::size_t i = 1; i < ss.trace().size(); ++i) a.search_trace.push_back(compute_final + ss.trace()[i]);

    for (const auto* s : srv) {
        a.per_server_compute_util[s->id] = 0.0;
        a.per_server_storage_util[s->id] = 0.0;
    }
    for (std::size_t k = 0; k < compute_tasks.size(); ++k) {
        const auto* t = compute_tasks[k];
        const std::size_t o = cs.placement()[k];
        if (o == compute.cloud()) {
            a.compute_server[t->av_id] = kCloud;
            if (!compute.allowed[k][o]) infeasible.insert(t->av_id);
            continue;
        }
        a.compute_server[t->av_id] = srv[o]->id;
        a.per_server_compute_util[srv[o]->id] += t->compute / srv[o]->compute_capacity;
        if (o != compute.home[k]) a.migrated_volume += t->compute / mean_compute;
    }
    for (std::size_t k = 0; k < storage_tasks.size(); ++k) {
        const auto* t = storage_tasks[k];
        const std::size_t o = ss.placement()[k];
        if (o == storage.cloud()) {
            a.storage_server[t->av_id] = kCloud;
            continue;
        }
        a.storage_server[t->av_id] = srv[o]->id;
        a.per_server_storage_util[srv[o]->id] += t->storage / srv[o]->storage_capacity;
        if (o != storage.home[k]) a.migrated_volume += t->storage / mean_storage;
    }
    for (const auto* s : srv) {
        if (a.per_server_compute_util[s->id] > 1.0 + 1e-9 || a.per_server_storage_util[s->id] > 1.0 + 1e-9) {
            throw ContractViolation("server " + s->id + " packed beyond capacity");
        }
    }
    a.infeasible_tasks.assign(infeasible.begin(), infeasible.end());
    a.utility = assignment_utility(a, weights);
    return a;
}

nlohmann::json to_json(const MecAssignment& a) {
    std::set<VehicleId> ids;
    for (const auto& [id, s] : a.compute_server) ids.insert(id);
    for (const auto& [id, s] : a.storage_server) ids.insert(id);
    nlohmann::json tasks = nlohmann::json::array();
    for (VehicleId id : ids) {
        nlohmann::json t = {{"av_id", id}};
        if (auto it = a.compute_server.find(id); it != a.compute_server.end()) t["compute_server"] = it->second;
        if (auto it = a.storage_server.find(id); it != a.storage_server.end()) t["storage_server"] = it->second;
        tasks.push_back(std::move(t));
    }
    nlohmann::json servers = nlohmann::json::array();
    for (const auto& [id, util] : a.per_server_compute_util) {
        servers.push_back({{"id", id}, {"compute_util", util}, {"storage_util", a.per_server_storage_util.at(id)}});
    }
    return {{"tasks", tasks},
            {"servers", servers},
            {"migrated_volume", a.migrated_volume},
            {"utility", a.utility},
            {"infeasible_tasks", a.infeasible_tasks}};
}

void write_summary_csv(std::ostream& out, const MecAssignment& a, std::span<const TaskDemand> tasks) {
    std::map<VehicleId, const TaskDemand*> by_id;
    for (const auto& t : tasks) by_id[t.av_id] = &t;

    std::map<std::string, std::set<VehicleId>> hosted;
    std::map<std::string, std::set<VehicleId>> migrated;
    auto tally = [&](const std::map<VehicleId, std::string>& placement) {
        for (const auto& [id, server] : placement) {
            hosted[server].insert(id);
            auto it = by_id.find(id);
            if (server != kCloud && it != by_id.end() && it->second->home_server != server) migrated[server].insert(id);
        }
    };
    tally(a.compute_server);
    tally(a.storage_server);

    out << "server_id,compute_util,storage_util,n_tasks,n_migrated\n";
    char buf[64];
    for (const auto& [id, util] : a.per_server_compute_util) {
        std::snprintf(buf, sizeof buf, "%.9f,%.9f", util, a.per_server_storage_util.at(id));
        out << id << ',' << buf << ',' << hosted[id].size() << ',' << migrated[id].size() << '\n';
    }
    out << kCloud << ",0.000000000,0.000000000," << hosted[kCloud].size() << ",0\n";
}

}  // namespace avnet
