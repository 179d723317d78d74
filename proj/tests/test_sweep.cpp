#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "golden.hpp"
#include "mixspin/error.hpp"
#include "mixspin/sweep.hpp"

using namespace mixspin;

namespace {

SweepPlan ground_plan(int n, std::vector<double> grid) {
  SweepPlan plan;
  plan.axis = SweepAxis::alpha;
  plan.spec = ChainSpec{n, 1.0, 0.0};
  plan.grid = std::move(grid);
  return plan;
}

SweepPlan thermal_plan(int n, double alpha, std::vector<double> grid) {
  SweepPlan plan;
  plan.axis = SweepAxis::temperature;
  plan.spec = ChainSpec{n, 1.0, alpha};
  plan.grid = std::move(grid);
  return plan;
}

const ResultRow& find(const std::vector<ResultRow>& rows, double x, const std::string& kind, bool by_alpha) {
  for (const auto& r : rows) {
    if ((by_alpha ? r.alpha : r.k_b_t) == x && r.pair_kind == kind) return r;
  }
  throw std::runtime_error("row not found");
}

std::string to_csv(const SweepPlan& plan, const std::vector<ResultRow>& rows, const std::string& command) {
  std::ostringstream out;
  write_header(out, {"mixspin " + command, plan.canonical(command), plan.seed, plan.timestamp});
  write_rows(out, rows);
  return out.str();
}

int run_cli(const std::string& args) {
  const std::string command = std::string(MIXSPIN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mixspin_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("grid parsing") {
  const auto grid = parse_grid("0:1.2:0.1");
  REQUIRE(grid.size() == 13);
  CHECK(grid[3] == 0.3);
  CHECK(grid.back() == 1.2);
  CHECK(parse_grid("0.758,0.768,0.778") == std::vector<double>{0.758, 0.768, 0.778});
  CHECK(parse_grid("0.5") == std::vector<double>{0.5});
  CHECK_THROWS_AS(parse_grid("0:1:0"), ValidationError);
  CHECK_THROWS_AS(parse_grid("a,b"), ValidationError);
  CHECK_THROWS_AS(parse_grid("1:2"), ValidationError);
}

TEST_CASE("pair tokens") {
  const ChainSpec spec{8, 1.0, 0.5};
  const auto pairs = resolve_pairs({"11", "12", "22", "21", "2:7"}, spec);
  CHECK(pairs[0].pair == SitePair::from_one_based(1, 2));
  CHECK(pairs[1].pair == SitePair::from_one_based(2, 3));
  CHECK(pairs[2].pair == SitePair::from_one_based(3, 4));
  CHECK(pairs[3].pair == SitePair::from_one_based(4, 5));
  CHECK(pairs[4].pair == SitePair::from_one_based(2, 7));
  CHECK(resolve_pairs({"21"}, ChainSpec{4, 1.0, 0.5})[0].pair == SitePair::from_one_based(4, 1));
  CHECK_THROWS_AS(resolve_pairs({"33"}, spec), ValidationError);
  CHECK_THROWS_AS(resolve_pairs({"1:9"}, spec), ValidationError);
  CHECK_THROWS_AS(resolve_pairs({}, spec), ValidationError);
}

TEST_CASE("plan validation") {
  auto plan = ground_plan(8, {0.5, 0.3});
  CHECK_THROWS_AS(plan.validate(), ValidationError);
  plan.grid = {};
  CHECK_THROWS_AS(plan.validate(), ValidationError);
  plan = ground_plan(12, {0.5});
  CHECK_THROWS_AS(cmd_ground_sweep(plan), ValidationError);
  plan = thermal_plan(8, 0.5, {0.0, 0.5});
  plan.method = Method::qmc;
  CHECK_THROWS_AS(cmd_thermal_sweep(plan), ValidationError);
}

TEST_CASE("ground sweep: dimer limit and alpha = 1 golden values") {
  for (const int n : {4, 8}) {
    const auto rows = cmd_ground_sweep(ground_plan(n, {0.0}));
    REQUIRE(rows.size() == 2);
    CHECK(std::abs(find(rows, 0.0, "11", true).logneg - 1.0) <= 1e-9);
    CHECK(find(rows, 0.0, "12", true).logneg == 0.0);
  }
  const auto rows = cmd_ground_sweep(ground_plan(8, {1.0}));
  CHECK(find(rows, 1.0, "11", true).logneg == doctest::Approx(golden::value(8, 1.0, "ground_logneg_11")).epsilon(1e-9));
  CHECK(find(rows, 1.0, "12", true).logneg == doctest::Approx(golden::value(8, 1.0, "ground_logneg_12")).epsilon(1e-9));
  for (const auto& r : rows) {
    CHECK(r.k_b_t == 0.0);
    CHECK(r.method == "ed");
    CHECK(r.correlator_err == 0.0);
  }
}

TEST_CASE("Lanczos ground sweep reproduces dense ED") {
  auto plan = ground_plan(8, {0.3, 0.9});
  plan.pairs = {"11", "12", "22"};
  const auto dense = cmd_ground_sweep(plan);
  plan.method = Method::lanczos;
  const auto lanczos = cmd_ground_sweep(plan);
  REQUIRE(dense.size() == lanczos.size());
  for (std::size_t k = 0; k < dense.size(); ++k) {
    CHECK(lanczos[k].correlator == doctest::Approx(dense[k].correlator).epsilon(1e-9));
    CHECK(lanczos[k].logneg == doctest::Approx(dense[k].logneg).epsilon(1e-8));
    CHECK(lanczos[k].method == "lanczos");
  }
}

TEST_CASE("thermal sweep limits") {
  auto plan = thermal_plan(8, 0.5, {0.0, 0.01, 5.0});
  plan.pairs = {"11", "12", "22", "21"};
  const auto rows = cmd_thermal_sweep(plan);
  REQUIRE(rows.size() == 12);
  const auto ground = cmd_ground_sweep([&] {
    auto g = ground_plan(8, {0.5});
    g.pairs = plan.pairs;
    return g;
  }());
  for (const auto& kind : plan.pairs) {
    CHECK(std::abs(find(rows, 0.01, kind, false).logneg - find(ground, 0.5, kind, true).logneg) <= 1e-6);
    CHECK(find(rows, 0.0, kind, false).logneg == doctest::Approx(find(ground, 0.5, kind, true).logneg).epsilon(1e-12));
    CHECK(find(rows, 5.0, kind, false).logneg == 0.0);
  }
  CHECK(std::isnan(find(rows, 0.0, "22", false).g));
}

TEST_CASE("alpha = 0.778 (1,2) curve decreases from its low-temperature value") {
  auto plan = thermal_plan(8, 0.778, parse_grid("0.02:1.0:0.02"));
  plan.pairs = {"12"};
  const auto rows = cmd_thermal_sweep(plan);
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].logneg <= rows[k - 1].logneg + 1e-12);
  CHECK(rows.front().logneg > 0.0);
  CHECK(rows.back().logneg == 0.0);
}

TEST_CASE("QMC sweep rows") {
  auto plan = thermal_plan(8, 0.768, {0.25, 0.5});
  plan.method = Method::qmc;
  plan.sweeps = 3'200;
  plan.pairs = {"11", "12", "22"};
  const auto rows = cmd_thermal_sweep(plan);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    CHECK(r.method == "qmc");
    CHECK(r.correlator_err > 0.0);
    if (r.pair_kind == "22") {
      CHECK(std::isnan(r.logneg));
      CHECK(r.flags == std::vector<std::string>{"correlator-only"});
    } else {
      CHECK(r.logneg_err >= 0.0);
    }
  }
  CHECK(rows[0].seed == point_seed(plan.seed, 0));
  CHECK(rows[3].seed == point_seed(plan.seed, 1));
  CHECK(rows[0].seed != rows[3].seed);
  plan.timestamp = false;
  CHECK(to_csv(plan, rows, "thermal") == to_csv(plan, cmd_thermal_sweep(plan), "thermal"));
  std::istringstream in(to_csv(plan, rows, "thermal"));
  const auto report = verify_rows(read_rows(in));
  CHECK(report.ok());
  CHECK(report.checked == 4);
  CHECK(report.skipped == 2);
}

TEST_CASE("CSV round trip and verification") {
  auto plan = ground_plan(8, {0.0, 0.6, 1.2});
  plan.pairs = {"11", "12", "22", "21"};
  plan.timestamp = false;
  const auto rows = cmd_ground_sweep(plan);
  const auto text = to_csv(plan, rows, "ground");
  CHECK(text.find("# timestamp") == std::string::npos);
  CHECK(text.find("# config_hash: ") != std::string::npos);
  CHECK(text.find(std::string(kResultColumns) + "\n") != std::string::npos);
  std::istringstream in(text);
  const auto back = read_rows(in);
  REQUIRE(back.size() == rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(back[k].correlator == rows[k].correlator);
    CHECK(back[k].site_i == rows[k].site_i);
    CHECK(back[k].flags == rows[k].flags);
  }
  CHECK(verify_rows(back).ok());
  auto tampered = back;
  tampered[4].logneg += 1e-6;
  CHECK_FALSE(verify_rows(tampered).ok());
  tampered = back;
  tampered[5].correlator -= 1e-3;
  CHECK_FALSE(verify_rows(tampered).ok());
  plan.timestamp = true;
  CHECK(to_csv(plan, rows, "ground").find("# timestamp: ") != std::string::npos);
  std::istringstream wrong("a,b,c\n1,2,3\n");
  CHECK_THROWS_AS(read_rows(wrong), ValidationError);
}

TEST_CASE("gap and excited commands") {
  const auto gaps = cmd_gap_sweep(ground_plan(4, {0.0, 0.5}));
  REQUIRE(gaps.size() == 2);
  CHECK(gaps[0].gap == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(gaps[1].gap >= 0.0);
  const ChainSpec spec{8, 1.0, 0.5};
  const auto row = cmd_excited(spec, resolve_pairs({"12"}, spec)[0], 0.0);
  CHECK(row.difference <= 1e-6);
  CHECK(std::abs(row.trace - 1.0) <= 1e-10);
  CHECK(row.multiplet_dim == 3);
  CHECK_THROWS_AS(cmd_excited(spec, resolve_pairs({"12"}, spec)[0], 1.0), NumericalError);
}

TEST_CASE("command-line exit codes and byte-identical output") {
  const auto a = scratch("a.csv");
  const auto b = scratch("b.csv");
  CHECK(run_cli("ground --n 8 --alpha-grid 0,0.5 --no-timestamp --out " + a.string()) == 0);
  CHECK(run_cli("verify " + a.string()) == 0);
  CHECK(run_cli("ground --n 6 --alpha 0.5") == 2);
  CHECK(run_cli("ground --n 12 --alpha 0.5 --method ed") == 2);
  CHECK(run_cli("thermal --n 8 --alpha 0.5 --kbt-grid 0.5,0.2") == 2);
  CHECK(run_cli("excited --n 8 --alpha 0.5 --pair 12 --beta-probe 1") == 3);
  CHECK(run_cli("thermal --n 8 --alpha 0.5 --method qmc --kbt-grid 0.5,1 --sweeps 3200 --pairs 11,12 --no-timestamp --out " + a.string()) == 0);
  CHECK(run_cli("thermal --n 8 --alpha 0.5 --method qmc --kbt-grid 0.5,1 --sweeps 3200 --pairs 11,12 --no-timestamp --out " + b.string()) == 0);
  const auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(!slurp(a).empty());
  CHECK(slurp(a) == slurp(b));
  {
    auto text = slurp(a);
    const auto pos = text.find(",qmc,");
    const auto line_start = text.rfind('\n', pos) + 1;
    // Corrupt the logneg column (ninth field) of the first data row.
    auto begin = line_start;
    for (int k = 0; k < 8; ++k) begin = text.find(',', begin) + 1;
    text.replace(begin, text.find(',', begin) - begin, "0.123");
    std::ofstream(b, std::ios::binary) << text;
  }
  CHECK(run_cli("verify " + b.string()) == 3);
  CHECK(run_cli("verify /nonexistent/file.csv") == 2);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("gap sweep has an interior minimum on [0.1, 1.2] for N = 8 and 12") {
  for (const int n : {8, 12}) {
    const auto rows = cmd_gap_sweep(ground_plan(n, parse_grid("0.1:1.2:0.1")));
    std::size_t best = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      CHECK(rows[k].gap >= 0.0);
      if (rows[k].gap < rows[best].gap) best = k;
    }
    CAPTURE(n);
    CHECK(best > 0);
    CHECK(best + 1 < rows.size());
  }
}
