#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "penaflow/acceptance.hpp"
#include "penaflow/io.hpp"

using namespace penaflow;
namespace fs = std::filesystem;

namespace {

const fs::path work = fs::current_path() / "cli_io_work";

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const fs::path& p, const std::string& text)
{
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
}

int cli(const std::string& args, const std::string& log = "cli.log")
{
    unsetenv("PENAFLOW_OUT");
    fs::create_directories(work);
    const std::string cmd = std::string(PENAFLOW_CLI_PATH) + " " + args + " > " + (work / log).string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* tiny_run = R"({"schema_version": 1, "base": "rest_disk", "name": "tiny",
  "grid": {"n": 16}, "end_time": 0.05, "output_cadence": 5})";

std::vector<ConfigIssue> issues_of(const json& doc)
{
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.issues();
    }
    return {};
}

} // namespace

TEST_CASE("parse_config fills defaults")
{
    const auto cfg = parse_config(json::parse(R"({"schema_version": 1})"));
    const ScenarioConfig def;
    CHECK(cfg.scenario.grid == def.grid);
    CHECK(cfg.scenario.fluid.gamma == def.fluid.gamma);
    CHECK(cfg.scenario.reg.epsilon == def.reg.epsilon);
    CHECK(!cfg.sweep);

    const auto based = parse_config(json::parse(R"({"schema_version": 1, "base": "translating_disk", "end_time": 0.5})"));
    CHECK(based.scenario.grid.n == 128);
    CHECK(based.scenario.end_time == 0.5);
    CHECK(!based.scenario.boundary_velocity.is_zero());
}

TEST_CASE("parse_config reports violations by location")
{
    auto gamma = issues_of(json::parse(R"({"schema_version": 1, "fluid": {"gamma": 1.2}})"));
    REQUIRE(gamma.size() == 1);
    CHECK(gamma[0].pointer == "/fluid/gamma");
    CHECK(gamma[0].message.find("gamma") != std::string::npos);
    try {
        parse_config(json::parse(R"({"schema_version": 1, "fluid": {"gamma": 1.2}})"));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::schema_violation);
        CHECK(std::string(e.what()).find("gamma") != std::string::npos);
    }

    auto eps = issues_of(json::parse(R"({"schema_version": 1, "regularization": {"epsilon": -1e-3}})"));
    REQUIRE(eps.size() == 1);
    CHECK(eps[0].pointer == "/regularization/epsilon");

    CHECK(issues_of(json::parse(R"({"schema_version": 1, "colour": "red"})")).size() == 1);
    CHECK(issues_of(json::parse(R"({"grid": {"n": 32}})")).front().pointer == "/schema_version");
    CHECK(issues_of(json::parse(R"({"schema_version": 1, "base": "nope"})")).size() == 1);
    CHECK(issues_of(json::parse(R"({"schema_version": 1, "fluid": {"gamma": "two"}})")).size() == 1);
    // several problems are reported together
    CHECK(issues_of(json::parse(R"({"schema_version": 1, "fluid": {"mu": 0}, "regularization": {"beta": 1}})")).size() == 2);

    const auto sw = parse_config(json::parse(R"({"schema_version": 1, "sweep": {"parameter": "omega", "values": [1, 0.1]}})"));
    REQUIRE(sw.sweep);
    CHECK(sw.sweep->parameter == "omega");
    CHECK(sw.sweep->values.size() == 2);
}

TEST_CASE("configuration round trip")
{
    for (const auto& c : scenario_library()) {
        const json j = to_json(c);
        const ScenarioConfig back = parse_config(j).scenario;
        CHECK(to_json(back) == j);
    }
    const json def = default_config();
    CHECK(to_json(parse_config(def).scenario) == def);

    ScenarioConfig c = scenario("rotating_ellipse");
    c.boundary_velocity = VelocityFieldSpec::sum({VelocityFieldSpec::ramped(VelocityFieldSpec::translation({0.1, 0, 0}, 0.9, 0.1), 0.2),
                                                  VelocityFieldSpec::rotation({0.1, 0, 0}, 0.5, 0.8, 0.1)});
    c.shape = Shape::unite({Shape::disk({-0.2, 0, 0}, 0.2), Shape::box({0, -0.1, 0}, {0.3, 0.1, 0})});
    const json j = to_json(c);
    CHECK(to_json(parse_config(j).scenario) == j);
}

TEST_CASE("csv and vtk writers")
{
    DiagnosticsRecord r;
    r.time = 0.1;
    r.mass = 1.0 / 3.0;
    const std::string row = csv_row(r);
    CHECK(row.find("0.33333333333333331") != std::string::npos);
    const std::string header = csv_header();
    CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));

    ScenarioConfig cfg = scenario("rest_disk");
    cfg.grid = Grid(2, 8, 1.0);
    const auto d = initial_levelset(cfg);
    const auto s = initial_state(cfg, d);
    const fs::path p = work / "field.vtk";
    fs::create_directories(work);
    write_vtk(p, s, d, cfg.fluid, cfg.reg);
    const std::string vtk = slurp(p);
    CHECK(vtk.rfind("# vtk DataFile Version", 0) == 0);
    for (const char* key : {"STRUCTURED_POINTS", "DIMENSIONS 8 8 1", "POINT_DATA 64", "SCALARS rho", "VECTORS mom", "SCALARS levelset", "SCALARS mu_omega"})
        CHECK_MESSAGE(vtk.find(key) != std::string::npos, key);
}

TEST_CASE("json reports")
{
    SweepReport rep;
    rep.parameter = "epsilon";
    rep.values = {0.1, 0.01};
    rep.fitted_metric = "penalty";
    rep.slope = std::nan("");
    rep.verdict = "insufficient";
    rep.dt = 1e-3;
    rep.checks["penalty_monotone"] = true;
    SweepRun run;
    run.value = 0.1;
    run.metrics["penalty"] = 2e-3;
    run.steps = 7;
    rep.runs.push_back(run);
    const json j = to_json(rep);
    CHECK(j.at("slope").is_null());
    const SweepReport back = sweep_report_from_json(j);
    CHECK(std::isnan(back.slope));
    CHECK(back.runs.at(0).metrics.at("penalty") == 2e-3);
    CHECK(back.checks.at("penalty_monotone"));
    CHECK(to_json(back) == j);

    const auto req = parse_verify_request(json::parse(R"({"schema_version": 1, "tolerances": {"mass_drift": 1e-9}, "criteria": [2, 4]})"));
    CHECK(req.tolerances.mass_drift == 1e-9);
    CHECK(req.tolerances.rest_deviation == Tolerances{}.rest_deviation);
    CHECK(req.criteria == std::vector<int>{2, 4});
    CHECK_THROWS_AS(parse_verify_request(json::parse(R"({"schema_version": 1, "tolerances": {"bogus": 1}})")), ConfigError);
    CHECK_THROWS_AS(parse_verify_request(json::parse(R"({"schema_version": 1, "criteria": [13]})")), ConfigError);
}

TEST_CASE("output writer")
{
    OutputWriter w(2);
    std::vector<int> order;
    for (int i = 0; i < 10; ++i) w.submit([&order, i] { order.push_back(i); });
    w.finish();
    REQUIRE(order.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(order[i] == i);

    OutputWriter bad;
    bad.submit([] { throw Error(ErrorCode::io_error, "disk full"); });
    CHECK_THROWS_AS(bad.finish(), Error);
}

TEST_CASE("cli usage and defaults")
{
    CHECK(cli("") == 2);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("run") == 2);
    CHECK(cli("--help") == 0);

    REQUIRE(cli("dump-defaults", "defaults.json") == 0);
    const auto cfg = parse_config_file(work / "defaults.json");
    CHECK(to_json(cfg.scenario) == default_config());

    put(work / "bad_gamma.json", R"({"schema_version": 1, "fluid": {"gamma": 1.2}})");
    CHECK(cli("run " + (work / "bad_gamma.json").string(), "bad.log") == 1);
    CHECK(slurp(work / "bad.log").find("/fluid/gamma") != std::string::npos);
}

TEST_CASE("cli run writes reproducible output")
{
    put(work / "tiny.json", tiny_run);
    const fs::path a = work / "run_a", b = work / "run_b", c = work / "run_c";
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(c);
    REQUIRE(cli("run " + (work / "tiny.json").string() + " --threads 1 --out " + a.string()) == 0);
    REQUIRE(cli("run " + (work / "tiny.json").string() + " --threads 1 --out " + b.string()) == 0);
    REQUIRE(cli("run " + (work / "tiny.json").string() + " --threads 3 --out " + c.string()) == 0);

    CHECK(fs::exists(a / "tiny.csv"));
    CHECK(fs::exists(a / "tiny_00000.vtk"));
    CHECK(fs::exists(a / "tiny_summary.json"));
    int files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        ++files;
        CHECK_MESSAGE(slurp(e.path()) == slurp(b / e.path().filename()), e.path().filename().string());
    }
    CHECK(files >= 4);
    CHECK(slurp(a / "tiny.csv") == slurp(c / "tiny.csv"));

    const std::string csv = slurp(a / "tiny.csv");
    CHECK(csv.rfind(csv_header(), 0) == 0);
}

TEST_CASE("cli verify returns the verdict")
{
    put(work / "broken.json", R"({"schema_version": 1, "tolerances": {"rest_deviation": -1}, "criteria": [1]})");
    CHECK(cli("verify " + (work / "broken.json").string() + " --out " + (work / "verify_broken").string(), "verify.log") == 3);
    CHECK(slurp(work / "verify.log").find("criterion 1") != std::string::npos);
    const json report = read_json(work / "verify_broken" / "verify.json");
    CHECK(report.at("results").at(0).at("passed") == false);

    put(work / "ok.json", R"({"schema_version": 1, "criteria": [1]})");
    CHECK(cli("verify " + (work / "ok.json").string() + " --out " + (work / "verify_ok").string(), "verify_ok.log") == 0);

    put(work / "unknown.json", R"({"schema_version": 1, "tolerances": {"nope": 1}})");
    CHECK(cli("verify " + (work / "unknown.json").string(), "verify_bad.log") == 1);
}

TEST_CASE("cli sweep writes one csv per run and a report")
{
    put(work / "sweep.json", R"({"schema_version": 1, "base": "decay_disk", "name": "sw", "grid": {"n": 16}, "end_time": 0.02,
      "sweep": {"parameter": "delta", "values": [0.01, 0.001]}})");
    const fs::path out = work / "sweep_out";
    fs::remove_all(out);
    const int code = cli("sweep " + (work / "sweep.json").string() + " --param delta --out " + out.string(), "sweep.log");
    CHECK((code == 0 || code == 3));
    CHECK(fs::exists(out / "sw_delta_0.01.csv"));
    CHECK(fs::exists(out / "sw_delta_0.001.csv"));
    const json rep = read_json(out / "sw_delta_sweep.json");
    CHECK(rep.at("runs").size() == 2);
    CHECK(cli("sweep " + (work / "sweep.json").string() + " --param viscosity", "sweep_bad.log") == 2);
}
