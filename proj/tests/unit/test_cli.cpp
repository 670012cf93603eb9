#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "qicd/app/csv_writer.hpp"
#include "qicd/version.hpp"

using namespace qicd::app;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Workspace {
 public:
  Workspace() {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("qicd_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }
  const fs::path& dir() const { return dir_; }

  // Runs the binary with a pinned timestamp; `args` is passed through the shell.
  Run run(const std::string& args) const {
    const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = "SOURCE_DATE_EPOCH=0 '" + std::string(QI_CD_EVAL_PATH) + "' " + args + " > '" +
                            out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

 private:
  fs::path dir_;
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("version and usage errors") {
    Workspace w;
    const auto v = w.run("--version");
    CHECK(v.code == 0);
    CHECK(v.out.find(qicd::kVersion) != std::string::npos);
    CHECK(w.run("").code == 1);
    CHECK(w.run("frobnicate").code == 1);
    CHECK(w.run("sweep").code == 1);
  }

  TEST_CASE("unknown figure id lists the valid ones") {
    Workspace w;
    const auto r = w.run("figure fig99 --out '" + w.dir().string() + "'");
    CHECK(r.code == 1);
    CHECK(r.err.find("fig2c") != std::string::npos);
  }

  TEST_CASE("invalid settings exit with status 1") {
    Workspace w;
    CHECK(w.run("figure fig2a --set bogus=1 --out '" + w.dir().string() + "'").code == 1);
    CHECK(w.run("figure fig2a --set kappa=3 --out '" + w.dir().string() + "'").code == 1);
    CHECK(w.run("figure fig2a --config '" + (w.dir() / "missing.json").string() + "'").code == 1);
  }

  TEST_CASE("non-convergence exits with status 2") {
    Workspace w;
    const auto r = w.run("figure fig8 --set 'm_grid=[1000000]' --set numerics.quad_initial_nodes=2 "
                         "--set numerics.quad_max_nodes=4 --set numerics.quad_rel_tol=1e-15 --out '" +
                         w.dir().string() + "'");
    CHECK(r.code == 2);
    CHECK(r.err.find("did not converge") != std::string::npos);
  }

  TEST_CASE("figure output is byte-identical across runs") {
    Workspace w;
    const std::string args = " --set 'm_grid={\"start\":100000,\"stop\":10000000,\"count\":5}' --out '";
    const auto a = w.run("figure fig2a" + args + (w.dir() / "a").string() + "'");
    const auto b = w.run("figure fig2a" + args + (w.dir() / "b").string() + "'");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out.find("fig2a.csv") != std::string::npos);
    const auto text = slurp(w.dir() / "a" / "fig2a.csv");
    CHECK(text == slurp(w.dir() / "b" / "fig2a.csv"));
    CHECK(text.find("# generated: 1970-01-01T00:00:00Z") != std::string::npos);
    const auto t = read_csv(w.dir() / "a" / "fig2a.csv");
    CHECK(t.rows.size() == 5);
    for (const char* c : {"log_pcd_exact", "log_pcd_largeM", "log_pcd_asy", "log_qcb", "log_ng", "log_ci_helstrom",
                          "log_ci_roc"}) {
      CHECK_NOTHROW(t.column(c));
    }
  }

  TEST_CASE("linear companion columns") {
    Workspace w;
    const auto r = w.run("figure fig7 --linear --set 'm_grid=[100000,1000000]' --out '" + w.dir().string() + "'");
    REQUIRE(r.code == 0);
    const auto t = read_csv(w.dir() / "fig7_fixed.csv");
    const auto log_col = t.column("log_ci_helstrom"), lin_col = t.column("ci_helstrom");
    CHECK(lin_col == log_col + 1);
    CHECK(std::stod(t.rows[0][lin_col]) == doctest::Approx(std::exp(std::stod(t.rows[0][log_col]))).epsilon(1e-14));
    CHECK(fs::exists(w.dir() / "fig7_rayleigh.csv"));
  }

  TEST_CASE("fig1 staircase and fixed-threshold curves") {
    Workspace w;
    const auto r = w.run("figure fig1 --set 'm_grid={\"start\":1000000,\"stop\":60000000,\"count\":6,"
                         "\"spacing\":\"linear\"}' --out '" + w.dir().string() + "'");
    REQUIRE(r.code == 0);
    const auto stairs = read_csv(w.dir() / "fig1_threshold.csv");
    CHECK(stairs.columns == std::vector<std::string>{"m", "threshold"});
    const auto curves = read_csv(w.dir() / "fig1_error.csv");
    CHECK_NOTHROW(curves.column("log_threshold_N0"));
    CHECK_NOTHROW(curves.column("log_poisson_N0"));
  }

  TEST_CASE("fig2c carries the reference row and convergence diagnostics") {
    Workspace w;
    const auto r = w.run("figure fig2c --set 'ns_grid=[0.001]' --out '" + w.dir().string() + "'");
    REQUIRE(r.code == 0);
    const auto t = read_csv(w.dir() / "fig2c.csv");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][t.column("label")] == "reference_6dB");
    CHECK(t.rows[1][t.column("ratio_asy_ci")] == "4");
    CHECK(t.rows[0][t.column("ci_converged")] == "1");
    CHECK(t.rows[0][t.column("qcb_converged")] == "1");
    const double ratio = std::stod(t.rows[0][t.column("ratio_asy_ci")]);
    CHECK(ratio > 1.0);
    CHECK(ratio <= 4.0);
  }

  TEST_CASE("fig5 with a reference overlay") {
    Workspace w;
    std::ofstream(w.dir() / "sfg.csv") << "m,p\n100000,0.4\n1000000,0.2\n";
    const auto r = w.run("figure fig5 --set 'm_grid=[100000,1000000]' --set 'sfg_csv=" +
                         (w.dir() / "sfg.csv").string() + "' --out '" + w.dir().string() + "'");
    REQUIRE(r.code == 0);
    const auto main = read_csv(w.dir() / "fig5.csv");
    CHECK_NOTHROW(main.column("log_rayleigh_lb"));
    CHECK_NOTHROW(main.column("log_rayleigh_achievable"));
    const auto overlay = read_csv(w.dir() / "fig5_sfg_overlay.csv");
    CHECK(std::stod(overlay.rows[1][overlay.column("log_sfg")]) == doctest::Approx(std::log(0.2)));
  }

  TEST_CASE("fig8 summary") {
    Workspace w;
    const auto r = w.run("figure fig8 --set 'm_grid=[1000000,20000000]' --out '" + w.dir().string() + "'");
    REQUIRE(r.code == 0);
    const auto t = read_csv(w.dir() / "fig8_summary.csv");
    CHECK(t.rows[0][t.column("points")] == "2");
    CHECK(t.rows[0][t.column("within_tolerance")] == "1");
  }

  TEST_CASE("sweep subcommand") {
    Workspace w;
    std::ofstream(w.dir() / "s.json") << R"({"m_grid": [1000, 100000], "quantities": ["pcd_largeM", "ng"],
                                           "output": "ignored.csv"})";
    const auto out = w.dir() / "sweep.csv";
    const auto r = w.run("sweep --config '" + (w.dir() / "s.json").string() + "' --out '" + out.string() + "'");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("sweep.csv") != std::string::npos);
    CHECK(read_csv(out).columns == std::vector<std::string>{"m", "log_pcd_largeM", "log_ng"});

    std::ofstream(w.dir() / "bad.json") << R"({"m_grid": [1000], "quantities": ["rayleigh_lb"], "output": "x.csv"})";
    const auto bad = w.run("sweep --config '" + (w.dir() / "bad.json").string() + "'");
    CHECK(bad.code == 1);
    CHECK(bad.err.find("rayleigh_lb: requires the rayleigh reflectivity model") != std::string::npos);
  }

  TEST_CASE("selftest") {
    Workspace w;
    const auto list = w.run("selftest --list");
    CHECK(list.code == 0);
    CHECK(list.out.find("cd_module.kennedy_closed_form") != std::string::npos);

    const auto ok = w.run("selftest");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("FAIL") == std::string::npos);
    CHECK(ok.out.find("PASS fading") != std::string::npos);

    const auto broken = w.run("selftest --inject-failure cd_module.kennedy_closed_form");
    CHECK(broken.code == 1);
    CHECK(broken.out.find("FAIL cd_module") != std::string::npos);
    CHECK(broken.out.find("cd_module.kennedy_closed_form") != std::string::npos);
    CHECK(broken.out.find("PASS numerics") != std::string::npos);
  }
}
