#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qro/scenario.hpp"
#include "oracles.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace qro;
using oracles::mat2;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes content to a scratch file in the working directory and removes it on
// scope exit, so config parse errors can be exercised against real files.
class TempConfig {
 public:
  explicit TempConfig(const std::string& content) {
    static int counter = 0;
    path_ = "scratch_config_" + std::to_string(counter++) + ".cfg";
    std::ofstream out(path_, std::ios::binary);
    out << content;
  }
  ~TempConfig() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Replaces the unique line starting with `key` by `repl` (empty: delete it).
std::string patch_line(const std::string& text, const std::string& key,
                       const std::string& repl) {
  std::istringstream in(text);
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " ", 0) == 0) {
      if (!repl.empty()) out += repl + "\n";
    } else {
      out += line + "\n";
    }
  }
  return out;
}

}  // namespace

TEST_CASE("builtin scenarios carry the benchmark data") {
  const Scenario t1 = builtin_scenario("anti-harmonic");
  CHECK(t1.name == "anti-harmonic");
  CHECK((t1.model.G - mat2(-0.05, 0, 0, 2)).norm() == 0.0);
  CHECK(t1.model.Ctilde(0).real() == 1.0);
  CHECK(t1.model.Ctilde(0).imag() == 0.0);
  CHECK(t1.model.Ctilde(1) == std::complex<double>(0, 0));
  CHECK((t1.model.B - Vec2(0, 1)).norm() == 0.0);
  CHECK((t1.weights.M - mat2(3, 0, 0, 1)).norm() == 0.0);
  CHECK((t1.weights.N - mat2(2, 0, 0, 0)).norm() == 0.0);
  CHECK(t1.weights.r == 0.2);
  CHECK(t1.mu == 0.3);
  CHECK(!t1.eps1.has_value());
  CHECK(t1.g_grid == std::vector<double>{0.0, 0.2, 0.38, 0.6, 0.8, 0.97});
  CHECK(t1.deltaG_sign == -1.0);
  CHECK(t1.convention == DeltaGConvention::primary);

  const Scenario t2 = builtin_scenario("harmonic");
  CHECK((t2.model.G - mat2(0.05, 0, 0, 2)).norm() == 0.0);
  CHECK(t2.g_grid == std::vector<double>{0.0, 0.2, 0.4, 0.6, 0.8, 1.0});
  CHECK(t2.deltaG_sign == 1.0);

  CHECK_THROWS_AS(builtin_scenario("quartic"), ConfigError);
}

TEST_CASE("bundled configs round-trip through the canonical formatter") {
  for (const char* name : {"table1.cfg", "table2.cfg"}) {
    const std::string path = std::string(QRO_CONFIG_DIR "/") + name;
    const Scenario s = load_config(path);
    CHECK(format_config(s) == slurp(path));
  }
}

TEST_CASE("bundled table1 config equals the builtin scenario") {
  const Scenario file = load_config(QRO_CONFIG_DIR "/table1.cfg");
  const Scenario built = builtin_scenario("anti-harmonic");
  CHECK(format_config(file) == format_config(built));
  CHECK(!file.eps1.has_value());
  CHECK(file.seed == built.seed);
}

TEST_CASE("config parse errors carry the offending line") {
  const std::string base = format_config(builtin_scenario("anti-harmonic"));

  SUBCASE("missing key reports without a line") {
    TempConfig f(patch_line(base, "scenario", ""));
    try {
      load_config(f.path());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line == 0);
      CHECK(std::string(e.what()).find("scenario") != std::string::npos);
    }
  }

  SUBCASE("unknown key") {
    TempConfig f(base + "bogus = 1\n");
    try {
      load_config(f.path());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line == 17);
      CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
  }

  SUBCASE("duplicate key") {
    TempConfig f(base + "r = 0.2\n");
    try {
      load_config(f.path());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line == 17);
      CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
  }

  SUBCASE("non-symmetric hamiltonian matrix") {
    TempConfig f(patch_line(base, "G", "G = 1 2 3 4"));
    try {
      load_config(f.path());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line == 3);
      CHECK(std::string(e.what()).find("symmetric") != std::string::npos);
    }
  }

  SUBCASE("malformed number") {
    TempConfig f(patch_line(base, "hbar", "hbar = abc"));
    CHECK_THROWS_AS(load_config(f.path()), ConfigError);
  }

  SUBCASE("negative grid entry") {
    TempConfig f(patch_line(base, "g_grid", "g_grid = 0,-0.5"));
    try {
      load_config(f.path());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line == 14);
      CHECK(std::string(e.what()).find("g_grid") != std::string::npos);
    }
  }

  SUBCASE("empty value") {
    TempConfig f(patch_line(base, "mu", "mu ="));
    try {
      load_config(f.path());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line == 10);
    }
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_config("no_such_file.cfg"), ConfigError);
  }
}

TEST_CASE("comments and blank lines are tolerated and counted") {
  const std::string base = format_config(builtin_scenario("anti-harmonic"));
  TempConfig ok("# benchmark configuration\n\n" + base);
  const Scenario s = load_config(ok.path());
  CHECK(s.name == "anti-harmonic");

  TempConfig bad("# comment\n\nbogus = 1\n" + base);
  try {
    load_config(bad.path());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("robust cell with pinned tuning reproduces the frozen synthesis") {
  const Scenario s = builtin_scenario("anti-harmonic");
  const RobustSynthesis syn = robust_cell(s, 0.0, 0.125);
  CHECK(syn.trace_bound == doctest::Approx(1.73191220521).epsilon(1e-7));
}

TEST_CASE("eps1 line search settles at the boundary when unconstrained") {
  // At g = 0 the penalty Q2 vanishes, so the bound improves monotonically as
  // eps1 shrinks and the optimum sits on the search floor.
  const Scenario s = builtin_scenario("anti-harmonic");
  const Eps1Result r = optimize_eps1(s, 0.0);
  CHECK(r.eps1_star == doctest::Approx(0.125).epsilon(2e-3));
  CHECK(r.trace_bound == doctest::Approx(1.73191220521).epsilon(1e-3));
}

TEST_CASE("eps1 line search matches a brute-force log grid") {
  const Scenario s = builtin_scenario("anti-harmonic");
  const double g = 0.38;
  const Eps1Result opt = optimize_eps1(s, g);

  double grid_best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 50; ++i) {
    const double e1 = std::pow(10.0, -0.90309 + (2.0 + 0.90309) * i / 49.0);
    try {
      grid_best = std::min(grid_best, robust_cell(s, g, e1).trace_bound);
    } catch (const Error&) {
    }
  }
  REQUIRE(std::isfinite(grid_best));
  CHECK(opt.trace_bound <= grid_best * 1.01);
  CHECK(grid_best <= opt.trace_bound * 1.01);
  CHECK(robust_cell(s, g, opt.eps1_star).trace_bound ==
        doctest::Approx(opt.trace_bound).epsilon(1e-9));
}

TEST_CASE("worst-case realization honors sign and convention") {
  Scenario s = builtin_scenario("anti-harmonic");
  UncertaintyRealization u = worst_case_realization(s, 0.25);
  CHECK((u.deltaG - mat2(-0.5, 0, 0, 0)).norm() == 0.0);
  CHECK(u.deltaC.norm() == 0.0);

  Scenario h = builtin_scenario("harmonic");
  u = worst_case_realization(h, 0.25);
  CHECK((u.deltaG - mat2(0.5, 0, 0, 0)).norm() == 0.0);

  s.convention = DeltaGConvention::alternate;
  u = worst_case_realization(s, 0.25);
  CHECK((u.deltaG - mat2(-1.0, 0, 0, 0)).norm() == 0.0);
}

TEST_CASE("table runs are deterministic and serial-parallel identical") {
  Scenario s = builtin_scenario("anti-harmonic");
  s.g_grid = {0.0, 0.2, 0.38};
  s.eps1 = 0.3;  // pinned to keep this test quick

  const std::string a = format_csv(run_table(s));
  const std::string b = format_csv(run_table(s));
  const std::string c = format_csv(run_table_serial(s));
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("softened-potential table flags exactly the expected NA cells") {
  Scenario s = builtin_scenario("anti-harmonic");
  s.eps1 = 0.2;
  const std::vector<TableRow> rows = run_table(s);
  REQUIRE(rows.size() == 6);

  const bool kal_present[] = {true, true, true, false, false, false};
  for (int i = 0; i < 6; ++i) {
    CHECK(rows[i].g == s.g_grid[i]);
    CHECK(rows[i].kal.has_value() == kal_present[i]);
    CHECK(rows[i].rsk.has_value());
    CHECK(rows[i].rob.has_value());
    REQUIRE(rows[i].eps1_used.has_value());
    CHECK(*rows[i].eps1_used == 0.2);
    if (!kal_present[i]) CHECK(rows[i].notes.find("kal") != std::string::npos);
  }
  CHECK(*rows[0].kal == doctest::Approx(1.43222403017).epsilon(1e-7));
  CHECK(*rows[0].rsk == doctest::Approx(1.47794029202).epsilon(1e-7));
}

TEST_CASE("table csv format") {
  std::vector<TableRow> rows(2);
  rows[0].g = 0.0;
  rows[0].kal = 1.5;
  rows[0].rsk = 2.0;
  rows[0].rob = 2.5;
  rows[0].eps1_used = 0.125;
  rows[1].g = 0.6;
  rows[1].rsk = 3.0;
  rows[1].rob = 4.0;
  rows[1].eps1_used = 0.25;

  CHECK(format_csv(rows) ==
        "g,kal,rsk,rob,eps1\n"
        "0,1.5,2,2.5,0.125\n"
        "0.6,NA,3,4,0.25\n");
}

TEST_CASE("plot series format") {
  StatePath p;
  p.t = {0.0, 0.5};
  p.x = {Vec2(1.25, -1), Vec2(-0.5, 2)};
  CHECK(format_series(p) ==
        "t,value\n"
        "0,1.25\n"
        "0.5,-0.5\n");
}
