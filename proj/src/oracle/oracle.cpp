#include "avnet/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "avnet/qos.hpp"

namespace avnet::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int pick(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Compositions of n into `dims` non-negative parts, lexicographic.
void compositions(int n, std::size_t dims, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (cur.size() + 1 == dims) {
        cur.push_back(n);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int k = 0; k <= n; ++k) {
        cur.push_back(k);
        compositions(n - k, dims, cur, out);
        cur.pop_back();
    }
}

double rx_mw(const BaseStation& bs, double d, double d_min) {
    const double dbm = bs.tx_power_dbm + bs.pathloss_a_db + bs.pathloss_b_db * std::log10(std::max(d, d_min));
    return std::pow(10.0, dbm / 10.0);
}

// Link table for one MEC server: eff[av][bs][slice], 0 where unusable.
struct Links {
    std::vector<std::string> slices;
    std::vector<const BaseStation*> bss;
    std::vector<const Vehicle*> avs;
    std::vector<std::vector<std::vector<double>>> eff;
    std::vector<std::vector<char>> covers;
};

Links build_links(const Scenario& s, const MecServer& mec, const RadioParams& radio) {
    Links L;
    std::vector<std::string> ids = mec.bs_ids;
    std::sort(ids.begin(), ids.end());
    bool any_ap = false;
    for (const auto& id : ids) {
        const auto& bs = s.base_station(id);
        L.bss.push_back(&bs);
        if (bs.kind == BsKind::ENB) L.slices.push_back(id);
        else any_ap = true;
    }
    if (any_ap) L.slices.push_back(kWifiSlice);

    auto on_slice = [&](const BaseStation& bs, const std::string& slice) {
        if (bs.kind == BsKind::ENB) return slice == bs.id;
        if (slice == kWifiSlice) return true;
        const auto& enb = s.base_station(slice);
        return std::hypot(bs.position_m.x - enb.position_m.x, bs.position_m.y - enb.position_m.y) >=
               bs.range_m + enb.reuse_protection_m;
    };

    for (const auto& v : s.vehicles) {
        const auto home = serving_mec(s, v);
        if (!home || *home != mec.id) continue;
        L.avs.push_back(&v);
        std::vector<std::vector<double>> per_bs;
        std::vector<char> cov;
        for (const auto* bs : L.bss) {
            std::vector<double> e(L.slices.size(), 0.0);
            const double d = std::hypot(bs->position_m.x - v.position_m.x, bs->position_m.y - v.position_m.y);
            cov.push_back(d <= bs->range_m);
            if (d <= bs->range_m) {
                for (std::size_t sl = 0; sl < L.slices.size(); ++sl) {
                    if (!on_slice(*bs, L.slices[sl])) continue;
                    double interference = std::pow(10.0, s.noise_dbm / 10.0);
                    for (const auto* other : L.bss) {
                        if (other == bs || !on_slice(*other, L.slices[sl])) continue;
                        const double od =
                            std::hypot(other->position_m.x - v.position_m.x, other->position_m.y - v.position_m.y);
                        if (od <= radio.interference_radius_factor * other->range_m) {
                            interference += rx_mw(*other, od, radio.min_distance_m);
                        }
                    }
                    e[sl] = bs->mac_efficiency * std::log2(1.0 + rx_mw(*bs, d, radio.min_distance_m) / interference);
                }
            }
            per_bs.push_back(std::move(e));
        }
        L.eff.push_back(std::move(per_bs));
        L.covers.push_back(std::move(cov));
    }
    return L;
}

// max sum ln(c_k f_k), sum f = 1, f_k >= m_k / c_k; -inf when infeasible.
double waterfill_utility(const std::vector<double>& caps, const std::vector<double>& floors) {
    std::vector<double> fmin(caps.size());
    double need = 0.0;
    for (std::size_t k = 0; k < caps.size(); ++k) {
        if (!(caps[k] > 0.0)) return -kInf;
        fmin[k] = floors[k] / caps[k];
        need += fmin[k];
    }
    if (need > 1.0 + 1e-12) return -kInf;
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        double sum = 0.0;
        for (double f : fmin) sum += std::max(f, mid);
        (sum > 1.0 ? hi : lo) = mid;
    }
    double u = 0.0;
    for (std::size_t k = 0; k < caps.size(); ++k) u += std::log(caps[k] * std::max(fmin[k], lo));
    return u;
}

}  // namespace

QueueSimResult simulate_mm1(double arrival_pps, double mean_packet_bits, double rate_bps, double bound_s,
                            std::uint64_t packets, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(arrival_pps);
    std::exponential_distribution<double> service(rate_bps / mean_packet_bits);
    QueueSimResult r;
    double wait = 0.0;  // Lindley recursion on the queueing delay
    double total = 0.0;
    for (std::uint64_t n = 0; n < packets; ++n) {
        const double s = service(rng);
        const double sojourn = wait + s;
        total += sojourn;
        if (sojourn > bound_s) ++r.late;
        wait = std::max(0.0, sojourn - gap(rng));
    }
    r.packets = packets;
    r.mean_delay_s = packets ? total / static_cast<double>(packets) : 0.0;
    return r;
}

SlicingOptimum exhaustive_slicing(const Scenario& s, const MecServer& mec, double grid_step, const RateFloors& floors,
                                  const RadioParams& radio) {
    SlicingOptimum best;
    const Links L = build_links(s, mec, radio);
    if (L.avs.empty() || L.slices.empty()) {
        best.feasible = true;
        return best;
    }
    std::vector<double> floor(L.avs.size());
    for (std::size_t k = 0; k < L.avs.size(); ++k) {
        floor[k] = required_rate(*L.avs[k]).min_rate_bps;
        if (auto it = floors.find(L.avs[k]->id); it != floors.end()) floor[k] = std::max(floor[k], it->second);
    }

    const int n = static_cast<int>(std::lround(1.0 / grid_step));
    std::vector<std::vector<int>> grid;
    std::vector<int> cur;
    compositions(n, L.slices.size(), cur, grid);

    double best_u = -kInf;
    std::vector<std::size_t> choice(L.avs.size(), 0);
    for (const auto& g : grid) {
        std::vector<double> beta(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) beta[i] = static_cast<double>(g[i]) / n;
        // Odometer over the BS choice of every AV.
        std::fill(choice.begin(), choice.end(), 0);
        while (true) {
            bool valid = true;
            for (std::size_t k = 0; k < L.avs.size() && valid; ++k) valid = L.covers[k][choice[k]];
            if (valid) {
                double u = 0.0;
                for (std::size_t b = 0; b < L.bss.size() && std::isfinite(u); ++b) {
                    std::vector<double> caps;
                    std::vector<double> fl;
                    for (std::size_t k = 0; k < L.avs.size(); ++k) {
                        if (choice[k] != b) continue;
                        double c = 0.0;
                        for (std::size_t sl = 0; sl < beta.size(); ++sl) c += beta[sl] * L.eff[k][b][sl];
                        caps.push_back(c * mec.bandwidth_hz);
                        fl.push_back(floor[k]);
                    }
                    if (!caps.empty()) u += waterfill_utility(caps, fl);
                }
                if (u > best_u) {
                    best_u = u;
                    best.beta = beta;
                    best.association.clear();
                    for (std::size_t k = 0; k < L.avs.size(); ++k) best.association[L.avs[k]->id] = L.bss[choice[k]]->id;
                }
            }
            std::size_t k = 0;
            while (k < choice.size() && ++choice[k] == L.bss.size()) choice[k++] = 0;
            if (k == choice.size()) break;
        }
    }
    best.feasible = std::isfinite(best_u);
    best.utility = best.feasible ? best_u : 0.0;
    return best;
}

Scenario make_tiny_slicing_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Scenario s;
    s.road = {400.0, 2, 3.5};
    s.seed = seed;

    const int n_bs = pick(rng, 1, 3);
    MecServer mec{"M1", 1e10, 1e10, uniform(rng, 2e6, 1e7), {}, 0.01};
    for (int b = 0; b < n_bs; ++b) {
        BaseStation bs;
        const bool enb = b == 0 || pick(rng, 0, 1) == 0;
        bs.kind = enb ? BsKind::ENB : BsKind::WIFI_AP;
        bs.id = (enb ? "E" : "A") + std::to_string(b);
        bs.position_m = {uniform(rng, 0.0, s.road.length_m), -10.0};
        if (enb) {
            bs.tx_power_dbm = 40.0;
            bs.range_m = 600.0;
            bs.pathloss_a_db = -30.0;
            bs.mac_efficiency = 1.0;
            bs.reuse_protection_m = 150.0;
        } else {
            bs.tx_power_dbm = 28.45;
            bs.range_m = 180.0;
            bs.pathloss_a_db = -40.0;
            bs.mac_efficiency = 0.8;
        }
        bs.pathloss_b_db = -35.0;
        mec.bs_ids.push_back(bs.id);
        s.base_stations.push_back(bs);
    }
    s.mec_servers.push_back(mec);

    ApplicationProfile safety{AppKind::DELAY_SENSITIVE, 4.0, 1048.0, 0.1, 1e-3, std::nullopt};
    ApplicationProfile hd{AppKind::DELAY_TOLERANT, 20.0, 9000.0, 0.0, 0.0, std::nullopt};
    const int n_av = pick(rng, 2, 6);
    for (int k = 0; k < n_av; ++k) {
        Vehicle v;
        v.id = static_cast<VehicleId>(k);
        v.lane = pick(rng, 0, s.road.lanes - 1);
        v.position_m = {uniform(rng, 0.0, s.road.length_m), s.road.lane_width_m * (v.lane + 0.5)};
        v.app = uniform(rng, 0.0, 1.0) < 0.8 ? safety : hd;
        v.response_threshold_s = 1.0;
        s.vehicles.push_back(v);
    }
    return s;
}

PlacementOptimum brute_force_assignment(const std::vector<TaskDemand>& tasks, const std::vector<MecServer>& servers,
                                        const MecWeights& weights, const MecParams& params) {
    const std::size_t m = servers.size();
    double mean_c = 0.0;
    double mean_s = 0.0;
    for (const auto& sv : servers) {
        mean_c += sv.compute_capacity;
        mean_s += sv.storage_capacity;
    }
    mean_c /= static_cast<double>(m);
    mean_s /= static_cast<double>(m);

    auto meets = [](const TaskDemand& t, double d) {
        const double total = d + t.transmission_delay_s;
        return total <= t.response_threshold_s && (!t.latency_threshold_s || total <= *t.latency_threshold_s);
    };

    // One dimension: sizes, caps, and whether each (task, option) is usable.
    auto solve_dim = [&](bool compute) {
        std::vector<const TaskDemand*> items;
        for (const auto& t : tasks) {
            if (compute ? (t.compute > 0.0 || t.workload_cycles > 0.0) : t.storage > 0.0) items.push_back(&t);
        }
        std::vector<std::size_t> home(items.size());
        for (std::size_t k = 0; k < items.size(); ++k) {
            for (std::size_t i = 0; i < m; ++i) {
                if (servers[i].id == items[k]->home_server) home[k] = i;
            }
        }
        std::pair<int, double> best{std::numeric_limits<int>::max(), -kInf};
        std::vector<std::size_t> opt(items.size(), 0);
        while (true) {
            std::vector<double> load(m, 0.0);
            bool ok = true;
            int violations = 0;
            double u = 0.0;
            for (std::size_t k = 0; k < items.size() && ok; ++k) {
                const auto& t = *items[k];
                const double size = compute ? t.compute : t.storage;
                const double proc = compute && t.workload_cycles > 0.0 ? t.workload_cycles / t.compute : 0.0;
                if (opt[k] == m) {
                    if (compute && !meets(t, proc + params.cloud_delay_s)) ++violations;
                    continue;
                }
                const auto& sv = servers[opt[k]];
                const bool migrated = opt[k] != home[k];
                if (compute && !meets(t, proc + (migrated ? sv.backhaul_delay_s * params.backhaul_hop_multiplier : 0.0))) {
                    ok = false;
                    break;
                }
                load[opt[k]] += size;
                const double cap = compute ? sv.compute_capacity : sv.storage_capacity;
                u += (compute ? weights.w_compute : weights.w_storage) * size / cap;
                if (migrated) u -= weights.kappa * size / (compute ? mean_c : mean_s);
            }
            for (std::size_t i = 0; i < m && ok; ++i) {
                ok = load[i] <= (compute ? servers[i].compute_capacity : servers[i].storage_capacity);
            }
            if (ok && (violations < best.first || (violations == best.first && u > best.second))) best = {violations, u};
            std::size_t k = 0;
            while (k < opt.size() && ++opt[k] == m + 1) opt[k++] = 0;
            if (k == opt.size()) break;
        }
        return best;
    };

    const auto c = solve_dim(true);
    const auto st = solve_dim(false);
    return {c.first, c.second + st.second};
}

MecInstance make_tiny_mec_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    MecInstance inst;
    const int n_servers = pick(rng, 1, 3);
    for (int i = 0; i < n_servers; ++i) {
        MecServer sv;
        sv.id = "M" + std::to_string(i + 1);
        sv.compute_capacity = pick(rng, 5, 20);
        sv.storage_capacity = pick(rng, 5, 20);
        sv.bandwidth_hz = 1e6;
        sv.backhaul_delay_s = 0.005 * pick(rng, 1, 6);
        inst.servers.push_back(sv);
    }
    const int n_tasks = pick(rng, 1, 8);
    for (int k = 0; k < n_tasks; ++k) {
        TaskDemand t;
        t.av_id = static_cast<VehicleId>(k);
        t.home_server = inst.servers[static_cast<std::size_t>(pick(rng, 0, n_servers - 1))].id;
        const bool has_compute = pick(rng, 0, 4) != 0;
        if (has_compute) {
            t.compute = pick(rng, 1, 10);
            t.workload_cycles = t.compute * 0.01 * pick(rng, 1, 6);
        }
        t.storage = (!has_compute || pick(rng, 0, 1)) ? pick(rng, 1, 10) : 0.0;
        t.transmission_delay_s = 0.005 * pick(rng, 0, 8);
        t.response_threshold_s = 0.01 * pick(rng, 4, 20);
        if (pick(rng, 0, 1)) t.latency_threshold_s = std::min(t.response_threshold_s, 0.01 * pick(rng, 3, 12));
        inst.tasks.push_back(t);
    }
    static constexpr double kKappas[] = {0.0, 0.25, 0.5, 1.0, 2.0, 10.0};
    inst.weights.kappa = kKappas[pick(rng, 0, 5)];
    inst.weights.w_compute = 0.5 * pick(rng, 1, 3);
    inst.weights.w_storage = 0.5 * pick(rng, 1, 3);
    return inst;
}

JointOptimum brute_force_joint(const Scenario& s, double grid_step, const MecWeights& weights,
                               const MecParams& params) {
    std::vector<const Vehicle*> avs;
    for (const auto& v : s.vehicles) {
        if (v.compute_demand > 0.0 || v.storage_demand > 0.0) avs.push_back(&v);
    }
    std::vector<MecServer> servers = s.mec_servers;
    std::sort(servers.begin(), servers.end(), [](const MecServer& a, const MecServer& b) { return a.id < b.id; });
    const std::size_t m = servers.size();

    std::vector<const Vehicle*> compute_avs;
    for (const auto* v : avs) {
        if (v->compute_demand > 0.0) compute_avs.push_back(v);
    }

    auto budget_of = [](const Vehicle& v) {
        return v.latency_threshold_s ? std::min(v.response_threshold_s, *v.latency_threshold_s) : v.response_threshold_s;
    };

    JointOptimum best{std::numeric_limits<int>::max(), -kInf, -kInf};
    std::vector<std::size_t> opt(compute_avs.size(), 0);
    while (true) {
        // Processing delay of every task under this compute placement.
        std::map<VehicleId, double> proc;
        std::map<VehicleId, std::string> where;
        bool ok = true;
        int violations = 0;
        for (const auto* v : avs) proc[v->id] = 0.0;
        for (std::size_t k = 0; k < compute_avs.size(); ++k) {
            const auto& v = *compute_avs[k];
            const std::string home = *serving_mec(s, v);
            double d = v.workload_cycles / v.compute_demand;
            if (opt[k] == m) {
                d += params.cloud_delay_s;
                where[v.id] = kCloud;
                if (!(d < budget_of(v))) ++violations;
            } else {
                if (servers[opt[k]].id != home) d += servers[opt[k]].backhaul_delay_s * params.backhaul_hop_multiplier;
                where[v.id] = servers[opt[k]].id;
                if (!(d < budget_of(v))) ok = false;
            }
            proc[v.id] = d;
        }

        if (ok) {
            RateFloors floors;
            for (const auto* v : avs) {
                const double left = budget_of(*v) - proc[v->id];
                if (left > 0.0) floors[v->id] = v->app.packet_size_bits * (v->app.arrival_rate_pps + 1.0 / left);
            }
            double us = 0.0;
            for (const auto& sv : servers) {
                const auto so = exhaustive_slicing(s, sv, grid_step, floors);
                if (!so.feasible) ok = false;
                us += so.utility;
            }
            if (ok) {
                // Rates meet the delay floors, so only capacity and the
                // placement value matter from here; storage is delay-free.
                std::vector<TaskDemand> tasks;
                for (const auto* v : avs) {
                    TaskDemand t;
                    t.av_id = v->id;
                    t.home_server = *serving_mec(s, *v);
                    t.compute = v->compute_demand;
                    t.storage = v->storage_demand;
                    t.workload_cycles = v->workload_cycles;
                    t.response_threshold_s = 1e9;
                    tasks.push_back(t);
                }
                std::vector<double> load(m, 0.0);
                double mean_c = 0.0;
                for (const auto& sv : servers) mean_c += sv.compute_capacity;
                mean_c /= static_cast<double>(m);
                double uc = 0.0;
                for (std::size_t k = 0; k < compute_avs.size(); ++k) {
                    if (opt[k] == m) continue;
                    const auto& v = *compute_avs[k];
                    load[opt[k]] += v.compute_demand;
                    uc += weights.w_compute * v.compute_demand / servers[opt[k]].compute_capacity;
                    if (servers[opt[k]].id != *serving_mec(s, v)) uc -= weights.kappa * v.compute_demand / mean_c;
                }
                for (std::size_t i = 0; i < m; ++i) ok = ok && load[i] <= servers[i].compute_capacity;
                if (ok) {
                    for (auto& t : tasks) {
                        t.compute = 0.0;
                        t.workload_cycles = 0.0;
                    }
                    const double um = uc + brute_force_assignment(tasks, servers, weights, params).utility;
                    const auto tol = [](double a) { return 1e-9 * std::max(1.0, std::abs(a)); };
                    bool better = violations < best.violations;
                    if (violations == best.violations) {
                        if (us > best.slicing_utility + tol(us)) better = true;
                        else if (us >= best.slicing_utility - tol(us) && um > best.mec_utility + tol(um)) better = true;
                    }
                    if (better) best = {violations, us, um};
                }
            }
        }
        std::size_t k = 0;
        while (k < opt.size() && ++opt[k] == m + 1) opt[k++] = 0;
        if (k == opt.size()) break;
    }
    return best;
}

Scenario make_tiny_joint_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
    Scenario s = make_tiny_slicing_instance(seed);
    // Rebuild the radio side with exactly one eNB and one AP.
    s.base_stations.clear();
    BaseStation enb{"E1", BsKind::ENB, {uniform(rng, 0.0, 400.0), -10.0}, 40.0, 600.0, -30.0, -35.0, 1.0, 150.0};
    BaseStation ap{"A1", BsKind::WIFI_AP, {uniform(rng, 0.0, 400.0), -10.0}, 28.45, 180.0, -40.0, -35.0, 0.8, 0.0};
    s.base_stations = {enb, ap};
    s.mec_servers.clear();
    s.mec_servers.push_back({"M1", 2.5e8, 6e7, 5e6, {"E1", "A1"}, 0.01});
    s.mec_servers.push_back({"M2", 1e8 * pick(rng, 1, 3), 1e8, 5e6, {}, 0.01});

    s.vehicles.resize(4);
    for (std::size_t k = 0; k < 4; ++k) {
        auto& v = s.vehicles[k];
        v.id = static_cast<VehicleId>(k);
        v.lane = pick(rng, 0, s.road.lanes - 1);
        v.position_m = {uniform(rng, 0.0, 400.0), s.road.lane_width_m * (v.lane + 0.5)};
        const bool sensitive = pick(rng, 0, 3) != 0;
        v.app = sensitive ? ApplicationProfile{AppKind::DELAY_SENSITIVE, 4.0, 1048.0, 0.1, 1e-3, std::nullopt}
                          : ApplicationProfile{AppKind::DELAY_TOLERANT, 20.0, 9000.0, 0.0, 0.0, std::nullopt};
        v.compute_demand = sensitive ? 1e8 : 0.0;
        v.workload_cycles = sensitive ? 2e6 : 0.0;
        v.storage_demand = sensitive ? 1e7 : 5e7;
        v.response_threshold_s = 5.0;
        v.latency_threshold_s = sensitive ? std::optional<double>(0.1) : std::nullopt;
    }
    return s;
}

}  // namespace avnet::oracle
