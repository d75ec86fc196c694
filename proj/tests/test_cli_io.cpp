#include "doctest.h"

#include "mag/experiment.hpp"
#include "mag/sticky.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace mag;

namespace {

const char* kMinimal = R"(# two particles, near-degenerate endpoints
name = demo
experiment = gamma-sweep
lattice = -1, 1
source = -0.3, 0.3
target = -0.3, 0.3
grid = 64
schedule = 1, 0.5, 0.25
)";

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mag_cli_io_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("load_scenario") {
  SUBCASE("defaults and round trip") {
    Scenario s = parse_scenario(kMinimal);
    CHECK(s.name == "demo");
    CHECK(s.experiment == ExperimentKind::GammaSweep);
    CHECK(s.grid == 64);
    CHECK(s.functional == ActionKind::LambdaEps);
    CHECK(s.schedule.size() == 3);
    auto path = scratch("roundtrip.txt");
    save_scenario(s, path);
    Scenario back = load_scenario(path);
    CHECK(back == s);
    CHECK(to_text(back) == to_text(s));
    std::filesystem::remove(path);
  }
  SUBCASE("awkward doubles survive the text round trip") {
    Scenario s = parse_scenario(kMinimal);
    s.lattice = {-1.0 / 3, 0.1 + 0.2};
    s.eps = 5e-324;
    s.endpoint_tol = 1.7976931348623157e308;
    CHECK(parse_scenario(to_text(s)) == s);
  }
  SUBCASE("unknown key") {
    std::string text = std::string(kMinimal) + "epsilonn = 0.1\n";
    try {
      parse_scenario(text, "x.txt");
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("epsilonn") != std::string::npos);
      CHECK(e.line() == 9);
      CHECK(e.column() == 1);
    }
  }
  SUBCASE("t-gauge window starting at zero") {
    std::string text = "experiment = heatwave\nlattice = 0\nsource = 1\ngauge = t\nstart = 0\nend = 1\n";
    try {
      parse_scenario(text);
      FAIL("expected an error");
    } catch (const ValidationError& e) {
      std::string what = e.what();
      CHECK(what.find("heat kernel requires t>0") != std::string::npos);
      CHECK(what.find("'start'") != std::string::npos);
    }
  }
  SUBCASE("malformed values carry line and column") {
    try {
      parse_scenario("lattice = 0, 1x\nsource = 0, 1\n");
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      CHECK(e.column() == 15);
    }
    try {
      parse_scenario("lattice = 0, 1\n  source 0, 1\n");
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_scenario("lattice = 0, 1\nsource = 0, 1\nlattice = 2, 3\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("lattice = 0, nan\nsource = 0, 1\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("lattice = 0, 1\nsource = 0, 1\ngauge = x\n"), ParseError);
  }
  SUBCASE("field validation") {
    CHECK_THROWS_AS(parse_scenario("lattice = 0, 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("lattice = 0, 1\nsource = 0\ntarget = 0, 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("lattice = 0, 1\nsource = 0, 1\ntarget = 0, 1\nfunctional = Lambda\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("lattice = 0, 1\nsource = 0, 1\ntarget = 0, 1\nschedule = 0.5, 0.5\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_scenario("experiment = sticky\nlattice = 1, 0\nsource = 0, 1\nvelocity = 0, 0\n"),
                    ValidationError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.txt"), ValidationError);
  }
}

TEST_CASE("trajectory csv") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (std::size_t n : {1u, 2u, 5u}) {
    Trajectory tr(Gauge::Theta, -0.25, 1.0 / 3, 17, n, 1);
    for (Eigen::Index i = 0; i < tr.data().size(); ++i) tr.data().data()[i] = std::ldexp(g(rng), static_cast<int>(i % 40) - 20);
    tr.sync_endpoints();
    std::string csv = trajectory_csv(tr);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1 == n + 1);
    CHECK(header.rfind("theta,z_1", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    Trajectory back = parse_trajectory_csv(csv);
    CHECK(back.data() == tr.data());
    CHECK(back.steps() == 17);
    CHECK(back.gauge() == Gauge::Theta);
  }
  Trajectory t2(Gauge::Time, 1, 2, 3, 2, 2);
  CHECK(trajectory_csv(t2).rfind("t,z_1.1,z_1.2,z_2.1,z_2.2\n", 0) == 0);
  CHECK(parse_trajectory_csv(trajectory_csv(t2)).dim() == 2);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("run_experiment") {
  SUBCASE("gamma-sweep emits one summary row per eps, sorted by decreasing eps") {
    Scenario s = parse_scenario(kMinimal);
    Bundle b = run_experiment(s);
    const OutputFile* summary = b.find("summary.csv");
    REQUIRE(summary);
    CHECK(count_lines(summary->content) == 1 + s.schedule.size());
    std::istringstream in(summary->content);
    std::string line;
    std::getline(in, line);
    CHECK(line == "eps,min_value,limit_value,oracle_value,sup_distance,grad_norm,iterations,converged");
    double prev = INFINITY;
    while (std::getline(in, line)) {
      double eps = std::stod(line.substr(0, line.find(',')));
      CHECK(eps < prev);
      prev = eps;
    }
    CHECK(b.find("trajectory_eps_2.csv"));
    CHECK(b.find("oracle.csv"));
    CHECK(b.files.back().name == "manifest.txt");
    CHECK(b.files.back().content.find("grid = 64") != std::string::npos);
  }
  SUBCASE("sticky writes one json line per merge event") {
    Scenario s = parse_scenario(
        "experiment = sticky\nlattice = -1, 0, 2\nsource = -0.6, 0.1, 0.5\nvelocity = 1.2, 0, -0.8\nend = 2\n");
    Bundle b = run_experiment(s);
    StickyRun r = simulate_sticky(s.lattice_points(), s.source_cloud(), s.velocity_cloud(), s.start, s.end, s.grid);
    REQUIRE(b.find("events.jsonl"));
    CHECK(r.events.size() >= 1);
    CHECK(count_lines(b.find("events.jsonl")->content) == r.events.size());
  }
  SUBCASE("identical scenario and seed give identical bytes") {
    Scenario s = parse_scenario(
        "experiment = heatwave\nlattice = -1, 1\nsource = -1.5, 1.5\ngauge = t\nstart = 1\nend = 2\neps = 0.5\n"
        "noise_eta = 0.01\nsamples = 3\ngrid = 50\nseed = 11\n");
    Bundle b1 = run_experiment(s), b2 = run_experiment(s);
    REQUIRE(b1.files.size() == b2.files.size());
    for (std::size_t i = 0; i < b1.files.size(); ++i) CHECK(sha256_hex(b1.files[i].content) == sha256_hex(b2.files[i].content));
    s.seed = 12;
    CHECK(run_experiment(s).find("sample_0.csv")->content != b1.find("sample_0.csv")->content);
  }
  SUBCASE("check-invariants and minimize") {
    Scenario s = parse_scenario(
        "experiment = check-invariants\nlattice = 0, 1\nsource = 0.45, 0.55\ntarget = 0.45, 0.55\nend = 3\ngrid = 1024\n");
    Bundle b = run_experiment(s);
    CHECK(b.find("shocks.jsonl"));
    CHECK(b.files.back().content.find("jump_checks_passed = 2/2") != std::string::npos);
    s.experiment = ExperimentKind::Minimize;
    s.eps = 0.1;
    s.grid = 64;
    Bundle m = run_experiment(s);
    CHECK(count_lines(m.find("summary.csv")->content) == 2);
    CHECK(m.find("trajectory.csv"));
  }
}

TEST_CASE("write_outputs") {
  Scenario s = parse_scenario(kMinimal);
  s.schedule = {0.5};
  Bundle b = run_experiment(s);
  auto dir = scratch("out");
  auto paths = write_outputs(b, dir);
  REQUIRE(paths.size() == b.files.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::ifstream in(paths[i], std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == b.files[i].content);
  }
  CHECK(load_scenario(dir / "scenario.txt") == s);
  Bundle f = failure_bundle(&s, "boom\nsecond line");
  CHECK(f.files.size() == 1);
  CHECK(f.files[0].content.rfind("status = failed\n", 0) == 0);
  CHECK(f.files[0].content.find("error = boom second line") != std::string::npos);
  std::filesystem::remove_all(dir);
  CHECK_THROWS(write_outputs(b, "/proc/definitely/not/writable"));
}
