#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "suvlab/config.hpp"
#include "suvlab/errors.hpp"
#include "suvlab/plotdata.hpp"
#include "suvlab/runner.hpp"

using namespace suvlab;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

const char* kMinimalEnsemble = R"(
[ensemble]
theta0 = "pi/3"
M = 10000

[noise]
kind = "white"
)";

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("suvlab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string config_error(std::string_view text, Subcommand sub,
                         const std::vector<std::string>& overrides = {}) {
  try {
    parse_config_text(text, sub, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal ensemble config resolves documented defaults") {
  const RunConfig cfg = parse_config_text(kMinimalEnsemble, Subcommand::kEnsemble);
  CHECK(cfg.ensemble.theta0 == Approx(kPi / 3.0).epsilon(1e-15));
  CHECK(cfg.ensemble.M == 10000);
  CHECK(cfg.integrator.dt == 1e-4);
  CHECK(cfg.integrator.pole_epsilon == 1e-3);
  CHECK(cfg.integrator.scheme == Scheme::kStratonovichHeun);
  CHECK(std::holds_alternative<WhiteNoise>(cfg.noise));
  CHECK(cfg.params.J == 1.0);
  CHECK(cfg.params.G == 1.0);
  CHECK(cfg.seed == 1);
  CHECK(cfg.format == OutputFormat::kBoth);
}

TEST_CASE("tau_t on white noise is rejected with its key path") {
  const std::string err =
      config_error(kMinimalEnsemble, Subcommand::kEnsemble, {"noise.tau_t=0.5"});
  CHECK(err.find("noise.tau_t") != std::string::npos);
  CHECK(err.find("WhiteNoise") != std::string::npos);
}

TEST_CASE("G_over_J sets G from J") {
  const RunConfig cfg =
      parse_config_text("[params]\nJ = 2.5\nG_over_J = 1\n", Subcommand::kEnsemble);
  CHECK(cfg.params.G == 2.5);
  const std::string err =
      config_error("[params]\nG = 1\nG_over_J = 1\n", Subcommand::kEnsemble);
  CHECK(err.find("params.G_over_J") != std::string::npos);
}

TEST_CASE("overrides win over the file") {
  const RunConfig cfg = parse_config_text(kMinimalEnsemble, Subcommand::kEnsemble,
                                          {"ensemble.M=250", "integrator.scheme=ito_euler",
                                           "run.seed=99", "noise.kind=ou", "noise.tau_t=0.5"});
  CHECK(cfg.ensemble.M == 250);
  CHECK(cfg.integrator.scheme == Scheme::kItoEuler);
  CHECK(cfg.seed == 99);
  CHECK(std::get<OrnsteinUhlenbeck>(cfg.noise).tau_t == 0.5);
}

TEST_CASE("config errors name the key path") {
  CHECK(config_error("[params]\nK = 1\n", Subcommand::kEnsemble).find("params.K") == 0);
  CHECK(config_error("[bogus]\nx = 1\n", Subcommand::kEnsemble).find("bogus.x") == 0);
  CHECK(config_error("[params]\nJ = -1\n", Subcommand::kEnsemble).find("params.J") == 0);
  CHECK(config_error("[params]\nJ = \"one\"\n", Subcommand::kEnsemble).find("params.J") == 0);
  CHECK(config_error("[noise]\nkind = \"ou\"\n", Subcommand::kEnsemble).find("noise.tau_t") ==
        0);
  CHECK(config_error("[noise]\nkind = \"pink\"\n", Subcommand::kEnsemble).find("noise.kind") ==
        0);
  CHECK(config_error("[ensemble]\nM = 0\n", Subcommand::kEnsemble).find("ensemble.M") == 0);
  CHECK(config_error("[ensemble]\ntheta0 = 4.0\n", Subcommand::kEnsemble)
            .find("ensemble.theta0") == 0);
  CHECK(config_error("[integrator]\ndt = 0\n", Subcommand::kEnsemble).find("integrator.dt") ==
        0);
  CHECK(config_error("", Subcommand::kFlowfield).find("noise.kind") == 0);
  CHECK(config_error("", Subcommand::kRabi).find("params.omega_rabi") == 0);
  CHECK(config_error("[limits]\nn_values = [4, 1]\n", Subcommand::kLimits)
            .find("limits.n_values") == 0);
  CHECK(config_error("[wigner]\nsigma_x = 0.1\nsigma_p = 0.1\n", Subcommand::kWigner)
            .find("wigner.sigma_p") == 0);
  CHECK(config_error("", Subcommand::kEnsemble, {"ensemble.M.x=1"}).find("ensemble.M") == 0);
  CHECK(config_error("", Subcommand::kEnsemble, {"novalue"}).find("--set") == 0);
  CHECK(config_error("subcommand = \"rabi\"\n", Subcommand::kEnsemble).find("subcommand") == 0);
  CHECK(config_error("[params\n", Subcommand::kEnsemble).find("<config>:1") == 0);
}

TEST_CASE("angle expressions") {
  auto theta = [](const std::string& expr) {
    return parse_config_text("[trajectory]\ntheta0 = " + expr + "\n", Subcommand::kTrajectory)
        .trajectory.theta0;
  };
  CHECK(theta("\"pi/3\"") == Approx(kPi / 3.0));
  CHECK(theta("\"2*pi/3\"") == Approx(2.0 * kPi / 3.0));
  CHECK(theta("\"pi\"") == Approx(kPi));
  CHECK(theta("0.5") == 0.5);
  CHECK(theta("1") == 1.0);
  CHECK_THROWS_AS(theta("\"tau/3\""), ConfigError);
}

TEST_CASE("resolved config round-trips through TOML") {
  const RunConfig a = parse_config_text(kMinimalEnsemble, Subcommand::kSweepTau,
                                        {"sweep.tau_values=[0.3, 1e-4]", "noise.kind=\"ou\"",
                                         "noise.tau_t=0.123456789012345678"});
  const std::string text = to_toml(a);
  const RunConfig b = parse_config_text(text, Subcommand::kSweepTau);
  CHECK(to_toml(b) == text);
  CHECK(b.ensemble.theta0 == a.ensemble.theta0);
  CHECK(std::get<OrnsteinUhlenbeck>(b.noise).tau_t == std::get<OrnsteinUhlenbeck>(a.noise).tau_t);
  CHECK(b.sweep.tau_values == a.sweep.tau_values);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e10, kPi}) {
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("tables emit CSV with units and matching JSON") {
  const fs::path dir = scratch("tables");
  fs::create_directories(dir);
  Table t{"trajectory", {"t[s]", "theta[rad]", "xi[s^-1/2]"}, {}};
  t.add({0.0, 1.0, 0.5});
  t.add({1e-4, 0.99, -0.25});
  CHECK_THROWS_AS(t.add({1.0}), std::logic_error);
  const auto files = emit_plotdata({t}, OutputFormat::kBoth, dir);
  REQUIRE(files == std::vector<std::string>{"trajectory.csv", "trajectory.json"});
  const std::string csv = read(dir / "trajectory.csv");
  CHECK(csv.rfind("t[s],theta[rad],xi[s^-1/2]\n", 0) == 0);
  CHECK(csv.find("1e-04,0.99,-0.25\n") != std::string::npos);
  const auto doc = nlohmann::json::parse(read(dir / "trajectory.json"));
  CHECK(doc["units"]["xi"] == "s^-1/2");
  CHECK(doc["rows"][1]["theta"] == 0.99);
  CHECK(emit_plotdata({t}, OutputFormat::kCsv, dir).size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("flowfield run reproduces the frozen-field sign structure") {
  RunConfig cfg = parse_config_text(
      "[noise]\nkind = \"constant\"\nxi = 0.30901699437494745\n[flowfield]\npoints = 51\n",
      Subcommand::kFlowfield);
  cfg.output_dir = scratch("flow");
  cfg.format = OutputFormat::kJson;
  const RunManifest m = run(cfg);
  CHECK(m.gates.empty());
  CHECK(exit_code(m) == 0);
  const auto doc = nlohmann::json::parse(read(cfg.output_dir / "flowfield.json"));
  for (const auto& row : doc["rows"]) {
    const double theta = row["theta"];
    const double rate = row["dtheta_dt"];
    if (theta > 1e-9 && theta < 2.0 * kPi / 5.0 - 1e-9) CHECK(rate < 0.0);
    if (theta > 2.0 * kPi / 5.0 + 1e-9 && theta < kPi - 1e-9) CHECK(rate > 0.0);
  }
  const auto summary = nlohmann::json::parse(read(cfg.output_dir / "summary.json"));
  CHECK(summary["repulsive"][0].get<double>() == Approx(2.0 * kPi / 5.0));
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("ensemble run: Born gate passes and the manifest is complete") {
  RunConfig cfg = parse_config_text(kMinimalEnsemble, Subcommand::kEnsemble,
                                    {"integrator.dt=1e-3", "ensemble.M=2000",
                                     "ensemble.record_every=100"});
  cfg.output_dir = scratch("ensemble");
  const RunManifest m = run(cfg);
  CHECK(exit_code(m) == 0);
  REQUIRE(m.gates.size() == 2);
  const auto summary = nlohmann::json::parse(read(cfg.output_dir / "summary.json"));
  CHECK(summary["born_test"]["pass"] == true);
  CHECK(summary["born_test"]["expected_p0"].get<double>() == Approx(0.75));

  const auto manifest = nlohmann::json::parse(read(cfg.output_dir / "manifest.json"));
  CHECK(manifest["version"] == version());
  CHECK(manifest["seed"] == 1);
  CHECK(manifest["resolved_config"] == to_toml(cfg));
  std::set<std::string> listed;
  for (const auto& f : manifest["files"]) {
    listed.insert(f["name"].get<std::string>());
    CHECK(fs::file_size(cfg.output_dir / f["name"].get<std::string>()) ==
          f["bytes"].get<std::uintmax_t>());
  }
  for (const auto& entry : fs::directory_iterator(cfg.output_dir)) {
    const std::string name = entry.path().filename().string();
    if (name != "manifest.json") CHECK(listed.count(name) == 1);
  }
  for (const auto& g : manifest["gates"]) {
    CHECK(g.contains("expected"));
    CHECK(g.contains("empirical"));
    CHECK(g.contains("threshold"));
  }
  const std::string series = read(cfg.output_dir / "ensemble_series.csv");
  CHECK(series.rfind("t[s],mean_sigma_z[1],stderr[1]\n", 0) == 0);
  CHECK(read(cfg.output_dir / "outcomes.csv").rfind("outcome,count\npole0,", 0) == 0);
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("outputs are bit-identical across worker counts and re-runs") {
  RunConfig cfg = parse_config_text(kMinimalEnsemble, Subcommand::kEnsemble,
                                    {"integrator.dt=1e-3", "ensemble.M=700", "run.seed=4242",
                                     "ensemble.record_every=50"});
  cfg.ensemble.workers = 1;
  cfg.output_dir = scratch("repro_a");
  run(cfg);
  // Replay from the emitted config with a different worker count.
  RunConfig replay = parse_config(cfg.output_dir / "resolved_config.toml", Subcommand::kEnsemble,
                                  {"ensemble.workers=4"});
  replay.output_dir = scratch("repro_b");
  run(replay);
  for (const char* name : {"ensemble_series.csv", "ensemble_series.json", "outcomes.csv",
                           "collapse_times.csv", "summary.json"}) {
    CAPTURE(name);
    CHECK(read(cfg.output_dir / name) == read(replay.output_dir / name));
  }
  fs::remove_all(cfg.output_dir);
  fs::remove_all(replay.output_dir);
}

TEST_CASE("wigner run: free spreading gate against the analytic width") {
  RunConfig cfg = parse_config_text(R"(
[grid]
x_min = -8.0
x_max = 8.0
nx = 256
p_min = -3.0
p_max = 3.0
np = 256
[wigner]
snapshots = 2
)",
                                    Subcommand::kWigner);
  cfg.output_dir = scratch("wigner");
  cfg.format = OutputFormat::kCsv;
  const RunManifest m = run(cfg);
  REQUIRE(m.gates.size() == 1);
  CHECK(m.gates[0].name == "free_spreading_variance");
  CHECK(m.gates[0].pass);
  CHECK(m.gates[0].statistic < 0.01);
  CHECK(fs::exists(cfg.output_dir / "wigner_snapshot_2.csv"));
  CHECK(read(cfg.output_dir / "wigner_snapshot_0.csv")
            .rfind("t[a.u.],x[a.u.],p[a.u.],W_re[a.u.],W_im[a.u.]\n", 0) == 0);
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("rabi, trajectory, scaling and limits runs") {
  RunConfig rabi = parse_config_text("[params]\nomega_rabi = 2.0\n", Subcommand::kRabi);
  rabi.output_dir = scratch("rabi");
  const RunManifest mr = run(rabi);
  CHECK(mr.gates.size() == 2);
  CHECK(mr.all_gates_pass());

  RunConfig traj = parse_config_text("[integrator]\nmax_time = 5.0\n", Subcommand::kTrajectory);
  traj.output_dir = scratch("traj");
  traj.format = OutputFormat::kCsv;
  run(traj);
  CHECK(read(traj.output_dir / "trajectory.csv").rfind("t[s],theta[rad],xi[s^-1/2]\n", 0) == 0);

  RunConfig scaling = parse_config_text(
      "[params]\nG = 0.0\n[integrator]\ndt = 1e-3\n[ensemble]\nM = 3\n", Subcommand::kSweepScaling);
  scaling.output_dir = scratch("scaling");
  const RunManifest ms = run(scaling);
  REQUIRE(ms.gates.size() == 1);
  CHECK(ms.gates[0].pass);

  RunConfig limits = parse_config_text(
      "[grid]\nx_min = -6.0\nx_max = 6.0\nnx = 64\np_min = -10.0\np_max = 10.0\nnp = 64\n"
      "[limits]\norder = \"eps_first\"\neps_values = [0.5, 0.05, 0.0]\nn_values = [1.0]\n",
      Subcommand::kLimits);
  limits.output_dir = scratch("limits");
  limits.format = OutputFormat::kCsv;
  const RunManifest ml = run(limits);
  CHECK(ml.all_gates_pass());
  CHECK(read(limits.output_dir / "limits.csv")
            .rfind("eps[1],N[1],sigma_x_eff[a.u.],sigma_p_eff[a.u.]", 0) == 0);
  for (const auto& d : {rabi.output_dir, traj.output_dir, scaling.output_dir, limits.output_dir}) {
    fs::remove_all(d);
  }
}
