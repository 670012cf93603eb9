#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "qicd/app/csv_writer.hpp"
#include "qicd/app/sweep.hpp"
#include "qicd/errors.hpp"

using namespace qicd;
using namespace qicd::app;
namespace fs = std::filesystem;

namespace {

SweepSpec fixed_spec(std::vector<Quantity> qs) {
  SweepSpec s;
  s.m_grid = {100000, 1000000, 10000000};
  s.quantities = std::move(qs);
  s.output_path = "unused.csv";
  return s;
}

std::string validation_message(const SweepSpec& s) {
  try {
    validate(s);
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("sweep") {
  TEST_CASE("quantity names round trip") {
    for (Quantity q : {Quantity::pcd_exact, Quantity::pcd_largeM, Quantity::pcd_asy, Quantity::threshold,
                       Quantity::qcb, Quantity::ng, Quantity::ci_helstrom, Quantity::ci_roc,
                       Quantity::rayleigh_lb, Quantity::rayleigh_achievable, Quantity::exponents}) {
      CHECK(parse_quantity(to_string(q)) == q);
    }
    CHECK_THROWS_AS(parse_quantity("pcd"), UsageError);
  }

  TEST_CASE("validation lists every problem") {
    SweepSpec s = fixed_spec({Quantity::rayleigh_lb, Quantity::ng, Quantity::ng});
    s.output_path.clear();
    const auto msg = validation_message(s);
    CHECK(msg.find("rayleigh_lb: requires the rayleigh reflectivity model") != std::string::npos);
    CHECK(msg.find("ng: listed more than once") != std::string::npos);
    CHECK(msg.find("output: an output path is required") != std::string::npos);

    SweepSpec r = fixed_spec({Quantity::pcd_exact, Quantity::rayleigh_achievable});
    r.scenario.reflectivity = RayleighReflectivity{0.01};
    CHECK(validation_message(r).find("pcd_exact: requires the fixed reflectivity model") != std::string::npos);

    SweepSpec bright = fixed_spec({Quantity::pcd_asy});
    bright.scenario.n_s = 2.0;
    CHECK(validation_message(bright).find("pcd_asy: the asymptote needs n_s < 1") != std::string::npos);

    SweepSpec dark = fixed_spec({Quantity::ci_roc});
    dark.scenario.n_e = 0.0;
    CHECK(validation_message(dark).find("ci_roc: needs a non-zero background") != std::string::npos);

    SweepSpec empty = fixed_spec({});
    empty.m_grid.clear();
    const auto e = validation_message(empty);
    CHECK(e.find("quantities") != std::string::npos);
    CHECK(e.find("m_grid") != std::string::npos);

    SweepSpec unsorted = fixed_spec({Quantity::ng});
    unsorted.m_grid = {10, 5};
    CHECK(validation_message(unsorted).find("strictly increasing") != std::string::npos);

    CHECK(validation_message(fixed_spec({Quantity::ng, Quantity::qcb})).empty());
  }

  TEST_CASE("columns follow the quantity order") {
    auto s = fixed_spec({Quantity::threshold, Quantity::pcd_asy, Quantity::exponents});
    CHECK(sweep_columns(s) ==
          std::vector<std::string>{"m", "threshold", "log_pcd_asy", "n_opt", "r_pcd_largeM", "r_ci_helstrom",
                                   "r_finite_asy", "r_asy"});
    s = fixed_spec({Quantity::ng, Quantity::pcd_exact});
    s.linear = true;
    CHECK(sweep_columns(s) ==
          std::vector<std::string>{"m", "log_ng", "ng", "log_pcd_exact", "pcd_exact", "pcd_exact_nodes",
                                   "pcd_exact_pieces"});
  }

  TEST_CASE("rows have one cell per column") {
    auto s = fixed_spec({Quantity::pcd_largeM, Quantity::pcd_asy, Quantity::threshold, Quantity::qcb,
                         Quantity::ng, Quantity::ci_helstrom, Quantity::ci_roc, Quantity::exponents});
    s.linear = true;
    CHECK(compute_sweep_row(s, 1000000).size() == sweep_columns(s).size());
    auto r = fixed_spec({Quantity::rayleigh_lb, Quantity::rayleigh_achievable, Quantity::ci_roc});
    r.scenario.reflectivity = RayleighReflectivity{0.01};
    CHECK(compute_sweep_row(r, 1000000).size() == sweep_columns(r).size());
  }

  TEST_CASE("no reflection gives log one half in every CD column") {
    auto s = fixed_spec({Quantity::pcd_exact, Quantity::pcd_largeM, Quantity::qcb});
    s.scenario.reflectivity = FixedReflectivity{0.0};
    const auto row = compute_sweep_row(s, 1000);
    for (std::size_t i : {1u, 4u, 5u}) CHECK(std::stod(row[i]) == doctest::Approx(-std::numbers::ln2).epsilon(1e-12));
  }

  TEST_CASE("bound ordering within a row") {
    const auto s = fixed_spec({Quantity::ng, Quantity::pcd_exact, Quantity::qcb, Quantity::ci_helstrom});
    for (std::int64_t m : s.m_grid) {
      const auto row = compute_sweep_row(s, m);
      const double ng = std::stod(row[1]), ex = std::stod(row[2]), qcb = std::stod(row[5]), ci = std::stod(row[6]);
      CHECK(ng <= ex);
      CHECK(ex <= qcb);
      CHECK(ex < ci);
    }
  }

  TEST_CASE("ordered emission under any worker count") {
    for (const char* threads : {"1", "3", "8"}) {
      ::setenv("QI_CD_THREADS", threads, 1);
      CHECK(worker_count() == static_cast<unsigned>(std::atoi(threads)));
      std::vector<std::size_t> order;
      ordered_parallel_rows(
          50,
          [](std::size_t i) {
            std::this_thread::sleep_for(std::chrono::microseconds((50 - i) * 100));
            return std::vector<std::string>{std::to_string(i)};
          },
          [&](std::size_t i, const std::vector<std::string>& row) {
            CHECK(row[0] == std::to_string(i));
            order.push_back(i);
          });
      REQUIRE(order.size() == 50);
      for (std::size_t i = 0; i < 50; ++i) CHECK(order[i] == i);
    }
    ::setenv("QI_CD_THREADS", "junk", 1);
    CHECK(worker_count() >= 1);
    ::unsetenv("QI_CD_THREADS");
  }

  TEST_CASE("a failing row is reported after earlier rows are emitted") {
    ::setenv("QI_CD_THREADS", "4", 1);
    std::vector<std::size_t> emitted;
    CHECK_THROWS_AS(ordered_parallel_rows(
                        20,
                        [](std::size_t i) -> std::vector<std::string> {
                          if (i == 7) throw ConvergenceError("row 7");
                          return {std::to_string(i)};
                        },
                        [&](std::size_t i, const std::vector<std::string>&) { emitted.push_back(i); }),
                    ConvergenceError);
    ::unsetenv("QI_CD_THREADS");
    REQUIRE(emitted.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK(emitted[i] == i);
  }

  TEST_CASE("sweep output does not depend on the worker count") {
    std::random_device rd;
    const auto dir = fs::temp_directory_path() / ("qicd_sweep_" + std::to_string(rd()));
    auto s = fixed_spec({Quantity::pcd_largeM, Quantity::threshold, Quantity::ng});
    s.m_grid = {100000, 300000, 1000000, 3000000, 10000000, 30000000};
    ::setenv("SOURCE_DATE_EPOCH", "0", 1);
    std::vector<std::string> texts;
    for (const char* threads : {"1", "4"}) {
      ::setenv("QI_CD_THREADS", threads, 1);
      s.output_path = dir / (std::string("t") + threads + ".csv");
      texts.push_back(slurp(run_sweep(s, json{{"n_s", 0.001}})));
    }
    ::unsetenv("QI_CD_THREADS");
    ::unsetenv("SOURCE_DATE_EPOCH");
    CHECK(texts[0] == texts[1]);
    const auto t = read_csv(s.output_path);
    CHECK(t.rows.size() == 6);
    CHECK(t.rows[2][0] == "1000000");
    fs::remove_all(dir);
  }

  TEST_CASE("settings map onto a sweep spec") {
    json doc = default_settings();
    doc["reflectivity"] = "rayleigh";
    doc["m_grid"] = json::array({10, 20});
    doc["quantities"] = json::array({"rayleigh_lb"});
    doc["output"] = "x.csv";
    const auto spec = sweep_spec_from_settings(parse_settings(doc));
    CHECK(spec.scenario.is_rayleigh());
    CHECK(spec.m_grid == std::vector<std::int64_t>{10, 20});
    CHECK(spec.quantities == std::vector<Quantity>{Quantity::rayleigh_lb});
    CHECK_NOTHROW(validate(spec));
    doc["quantities"] = json::array({"nonsense"});
    CHECK_THROWS_AS(sweep_spec_from_settings(parse_settings(doc)), UsageError);
  }
}
