#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "penaflow/acceptance.hpp"
#include "penaflow/io.hpp"
#include "penaflow/residuals.hpp"

namespace fs = std::filesystem;
using namespace penaflow;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitVerdict = 3;

struct Common {
    std::string out = "out";
    int cadence = 0;
    int threads = 0;
    long seed = 0;
};

void apply_threads(int threads)
{
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

fs::path prepare_out(const std::string& requested)
{
    const fs::path dir = resolve_output_dir(requested);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create output directory " + dir.string());
    return dir;
}

json record_json(const DiagnosticsRecord& r)
{
    return {{"time", r.time},         {"mass", r.mass},           {"energy", r.energy},   {"dissipation_cum", r.dissipation_cum},
            {"penalty_cum", r.penalty_cum}, {"solid_mass", r.solid_mass}, {"h1_sq", r.h1_sq}, {"max_rho", r.max_rho},
            {"clipped_mass", r.clipped_mass}, {"local_pressure", r.local_pressure}};
}

json residual_report(const ScenarioConfig& cfg, const RunResult& res)
{
    const Trajectory traj{res.snapshots, res.levelsets, cfg.fluid, cfg.reg};
    const Grid& g = cfg.grid;
    const double r0 = 0.9 * g.half_width;
    const double dt = res.snapshots.size() > 1 ? res.snapshots[1].time - res.snapshots[0].time : 0.0;
    json rows = json::array();
    auto add = [&](const std::string& kind, const std::string& id, double value) {
        rows.push_back({{"test", id}, {"identity", kind}, {"value", value}, {"grid", g.n}, {"dt", dt}});
    };
    double rho_max = 0.0;
    for (double v : res.snapshots.front().rho) rho_max = std::max(rho_max, v);
    const ScalarTest phi{"wide_bump", {}, r0, 1.0, {}, 0.0};
    add("continuity", phi.id, continuity_residual(traj, phi));
    add("renormalized_truncation", phi.id, renormalized_residual(traj, {Renormalization::truncation, 0.8 * rho_max}, phi));
    const VectorTest w = admissible_vector_test(
        "extended_linear", [r0](double, const Vec& x) { return bump(norm(x) / r0) * Vec{1.0 + x[1], 0.5 - x[0], 0.0}; }, {}, r0);
    add("momentum", w.id, weak_momentum_residual(traj, w));
    return rows;
}

int cmd_run(const std::string& config, const Common& opt, bool residuals)
{
    ConfigFile file = parse_config_file(config);
    ScenarioConfig& cfg = file.scenario;
    if (opt.cadence > 0) cfg.output_cadence = opt.cadence;
    if (residuals) cfg.output_cadence = 1;
    const fs::path dir = prepare_out(opt.out);

    OutputWriter writer;
    int index = 0;
    RunOptions ro;
    ro.keep_snapshots = residuals;
    ro.on_snapshot = [&](const FlowState& s, const LevelSetField& d) {
        char name[64];
        std::snprintf(name, sizeof name, "_%05d.vtk", index++);
        const fs::path path = dir / (cfg.name + name);
        // the job owns copies; the solver keeps mutating its own state
        writer.submit([path, s, d, fp = cfg.fluid, rp = cfg.reg] { write_vtk(path, s, d, fp, rp); });
    };
    const RunResult res = run(cfg, ro);
    writer.submit([path = dir / (cfg.name + ".csv"), rec = res.records] { write_csv(path, rec); });
    json summary = {{"scenario", cfg.name},
                    {"steps", res.steps},
                    {"last_dt", res.last_dt},
                    {"max_viscous_iterations", res.max_viscous_iterations},
                    {"initial", record_json(res.records.front())},
                    {"final", record_json(res.records.back())}};
    if (residuals) summary["residuals"] = residual_report(cfg, res);
    writer.submit([path = dir / (cfg.name + "_summary.json"), summary] { write_json(path, summary); });
    writer.finish();
    std::printf("%s: %d steps to t=%.6g, output in %s\n", cfg.name.c_str(), res.steps, res.records.back().time, dir.string().c_str());
    return 0;
}

int cmd_sweep(const std::string& config, const std::string& param, std::vector<double> values, const Common& opt)
{
    ConfigFile file = parse_config_file(config);
    ScenarioConfig& cfg = file.scenario;
    if (opt.cadence > 0) cfg.output_cadence = opt.cadence;
    if (values.empty() && file.sweep && file.sweep->parameter == param) values = file.sweep->values;
    if (values.empty()) {
        if (param == "epsilon") values = {1e-1, 1e-2, 1e-3, 1e-4};
        else if (param == "omega") values = {1.0, 0.1, 0.01, 0.001};
        else values = {1e-2, 1e-3, 1e-4};
    }
    const fs::path dir = prepare_out(opt.out);
    OutputWriter writer;
    const SweepReport rep = sweep(cfg, param, values, [&](const std::string& p, const SweepRun& r) {
        char name[96];
        std::snprintf(name, sizeof name, "%s_%s_%g.csv", cfg.name.c_str(), p.c_str(), r.value);
        writer.submit([path = dir / name, rec = r.records] { write_csv(path, rec); });
        std::printf("%s = %g: %d steps\n", p.c_str(), r.value, r.steps);
        std::fflush(stdout);
    });
    writer.submit([path = dir / (cfg.name + "_" + param + "_sweep.json"), j = to_json(rep)] { write_json(path, j); });
    writer.finish();
    std::printf("slope(%s) = %.4g, verdict %s\n", rep.fitted_metric.c_str(), rep.slope, rep.verdict.c_str());
    for (const auto& [k, v] : rep.checks) std::printf("  %-32s %s\n", k.c_str(), v ? "ok" : "FAILED");
    return rep.verdict == "fail" ? kExitVerdict : 0;
}

int cmd_verify(const std::string& tolerances, const std::vector<int>& only, const std::string& cache, const Common& opt)
{
    VerifyRequest req;
    if (!tolerances.empty()) req = parse_verify_request(read_json(tolerances));
    if (!only.empty()) req.criteria = only;
    if (req.criteria.empty())
        for (int i = 1; i <= kCriterionCount; ++i) req.criteria.push_back(i);
    std::optional<fs::path> cache_dir;
    if (!cache.empty()) cache_dir = cache;
    AcceptanceSuite suite(req.tolerances, cache_dir);
    bool all = true;
    json results = json::array();
    for (int id : req.criteria) {
        const CriterionResult r = suite.run(id);
        std::printf("%s\n", r.line().c_str());
        std::fflush(stdout);
        all = all && r.passed;
        results.push_back({{"criterion", r.id}, {"name", r.name}, {"passed", r.passed}, {"seconds", r.seconds}, {"detail", r.detail}});
    }
    const fs::path dir = prepare_out(opt.out);
    write_json(dir / "verify.json", {{"tolerances", to_json(req.tolerances)}, {"results", results}});
    return all ? 0 : kExitVerdict;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Penalized compressible flow solver around moving bodies"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", common.out, "Output directory (PENAFLOW_OUT overrides)");
        sub->add_option("--cadence", common.cadence, "Steps between snapshots and diagnostics rows")->check(CLI::PositiveNumber);
        sub->add_option("--threads", common.threads, "OpenMP threads")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", common.seed, "Reserved; the solver is deterministic");
    };

    std::string config;
    bool residuals = false;
    auto* run_cmd = app.add_subcommand("run", "Run one configuration and write CSV, VTK and a summary");
    run_cmd->add_option("config", config, "Configuration JSON")->required();
    run_cmd->add_flag("--residuals", residuals, "Also evaluate weak residuals (keeps every step)");
    add_common(run_cmd);

    std::string param;
    std::vector<double> values;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep and write a JSON report");
    sweep_cmd->add_option("config", config, "Configuration JSON")->required();
    sweep_cmd->add_option("--param", param, "Swept parameter")->required()->check(CLI::IsMember({"epsilon", "omega", "delta"}));
    sweep_cmd->add_option("--values", values, "Strictly decreasing values")->delimiter(',');
    add_common(sweep_cmd);

    std::string tolerances, cache;
    std::vector<int> only;
    auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance suite");
    verify_cmd->add_option("tolerances", tolerances, "Tolerance JSON (optional)");
    verify_cmd->add_option("--criteria", only, "Criterion numbers")->delimiter(',')->check(CLI::Range(1, kCriterionCount));
    verify_cmd->add_option("--cache", cache, "Directory caching the shared epsilon sweep");
    add_common(verify_cmd);

    auto* dump_cmd = app.add_subcommand("dump-defaults", "Print the default configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        apply_threads(common.threads);
        if (*run_cmd) return cmd_run(config, common, residuals);
        if (*sweep_cmd) return cmd_sweep(config, param, values, common);
        if (*verify_cmd) return cmd_verify(tolerances, only, cache, common);
        if (*dump_cmd) {
            std::cout << default_config().dump(2) << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error:\n" << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
