#include "avnet/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "avnet/config.hpp"
#include "avnet/errors.hpp"
#include "avnet/generator.hpp"
#include "avnet/joint.hpp"
#include "avnet/sweep.hpp"
#include "avnet/verify.hpp"

namespace avnet {

namespace {

namespace fs = std::filesystem;

struct Common {
    std::string config;
    std::optional<double> grid_step;
    std::optional<std::uint64_t> seed;
};

ScenarioConfig resolve_config(const Common& c) {
    ScenarioConfig cfg = c.config.empty() ? case_study_config() : load_config(c.config);
    if (c.grid_step) cfg.solver.grid_step = *c.grid_step;
    if (c.seed) cfg.base_seed = *c.seed;
    validate(cfg);
    return cfg;
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw ValidationError("cannot write '" + p.string() + "'");
    return f;
}

void add_config(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "Scenario config JSON (built-in case study when absent)")
        ->envname("AVNET_CONFIG");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bandwidth slicing and MEC placement for autonomous vehicular networks", "avnet"};
    app.require_subcommand(1);

    Common common;
    double density = 0.0;
    std::string out_path;
    std::string scenario_path;
    std::string in_path;
    std::string size = "tiny";
    int jobs = 1;
    std::optional<double> only_density;

    auto* gen = app.add_subcommand("generate", "Write one scenario snapshot as JSON");
    add_config(gen, common);
    gen->add_option("--density", density, "AVs per metre")->required();
    gen->add_option("--seed", common.seed, "Generator seed (default: config base_seed)");
    gen->add_option("--out", out_path, "Output file (stdout when absent)");

    auto* solve = app.add_subcommand("solve", "Solve one scenario and write solution documents");
    add_config(solve, common);
    solve->add_option("--scenario", scenario_path, "Scenario JSON (generated from --density/--seed when absent)");
    solve->add_option("--density", density, "AVs per metre for a generated scenario");
    solve->add_option("--seed", common.seed, "Generator seed");
    solve->add_option("--grid-step", common.grid_step, "Slicing ratio grid step");
    solve->add_option("--out", out_path, "Output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "Run the seeded density sweep");
    add_config(sweep, common);
    sweep->add_option("--out", out_path, "Sweep CSV path")->required();
    sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    sweep->add_option("--grid-step", common.grid_step, "Slicing ratio grid step");
    sweep->add_option("--seed", common.seed, "Base seed override");
    sweep->add_option("--density", only_density, "Run this density only");

    auto* verify = app.add_subcommand("verify", "Compare the solvers against brute-force oracles");
    verify->add_option("--size", size, "tiny or full")->check(CLI::IsMember({"tiny", "full"}));

    auto* plot = app.add_subcommand("plotdata", "Aggregate a sweep CSV into per-figure CSVs");
    plot->add_option("--in", in_path, "Sweep CSV")->required();
    plot->add_option("--out", out_path, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (gen->parsed()) {
            const auto cfg = resolve_config(common);
            const Scenario s = generate_case_study(density, common.seed.value_or(cfg.base_seed), cfg);
            nlohmann::json j = s;
            if (out_path.empty()) {
                out << j.dump(2) << '\n';
            } else {
                open_out(out_path) << j.dump(2) << '\n';
            }
            return 0;
        }

        if (solve->parsed()) {
            const auto cfg = resolve_config(common);
            Scenario s;
            if (!scenario_path.empty()) {
                std::ifstream in(scenario_path);
                if (!in) throw ValidationError("cannot open scenario '" + scenario_path + "'");
                try {
                    s = nlohmann::json::parse(in).get<Scenario>();
                } catch (const nlohmann::json::exception& e) {
                    throw ValidationError("scenario '" + scenario_path + "': " + e.what());
                }
                validate(s);
            } else {
                if (solve->count("--density") == 0) throw ValidationError("solve needs --scenario or --density");
                s = generate_case_study(density, common.seed.value_or(cfg.base_seed), cfg);
            }
            const auto opts = joint_options(cfg.solver);
            const auto joint = joint_solve(s, opts);
            nlohmann::json baseline = nlohmann::json::array();
            bool baseline_ok = true;
            for (const auto& mec : s.mec_servers) {
                SlicingProblem problem(s, mec, opts.slicing, joint.floors);
                if (problem.members().empty()) continue;
                const auto sol = problem.solve_max_sinr(problem.baseline_beta());
                baseline_ok = baseline_ok && sol.feasible;
                baseline.push_back(to_json(sol));
            }
            const fs::path dir = out_path;
            open_out(dir / "joint.json") << to_json(joint).dump(2) << '\n';
            open_out(dir / "baseline.json") << baseline.dump(2) << '\n';
            {
                auto f = open_out(dir / "mec_summary.csv");
                write_summary_csv(f, joint.assignment, joint.tasks);
            }
            for (const auto& sol : joint.slicing) {
                auto f = open_out(dir / ("slicing_" + sol.mec_id + ".csv"));
                write_solution_csv(f, sol);
            }
            out << "slicing utility " << joint.slicing_utility() << ", placement utility " << joint.assignment.utility
                << (joint.converged ? "" : " (not converged)") << ", Wi-Fi coverage rate " << wifi_coverage_rate(s)
                << '\n';
            const bool feasible = joint.slicing_feasible() && joint.assignment.infeasible_tasks.empty();
            return feasible ? 0 : 2;
        }

        if (sweep->parsed()) {
            auto cfg = resolve_config(common);
            if (only_density) {
                cfg.densities = {*only_density};
                validate(cfg);
            }
            const auto rows = run_sweep(cfg, jobs);
            {
                auto f = open_out(out_path);
                write_sweep_csv(f, rows);
            }
            {
                auto f = open_out(baseline_csv_path(out_path));
                write_baseline_csv(f, rows);
            }
            int feasible = 0;
            for (const auto& r : rows) feasible += r.feasible;
            out << rows.size() << " rows, " << feasible << " feasible, written to " << out_path << '\n';
            return (!rows.empty() && feasible == 0) ? 2 : 0;
        }

        if (verify->parsed()) {
            bool ok = true;
            for (const auto& c : run_verification(size)) {
                out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
                ok = ok && c.passed;
            }
            return ok ? 0 : 3;
        }

        if (plot->parsed()) {
            for (const auto& p : write_plot_data(in_path, out_path)) out << p.string() << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace avnet
