#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "qicd/app/config.hpp"
#include "qicd/app/csv_writer.hpp"
#include "qicd/errors.hpp"

using namespace qicd;
using namespace qicd::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
  std::random_device rd;
  const auto dir = fs::temp_directory_path() / ("qicd_" + tag + "_" + std::to_string(rd()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("config_csv") {
  TEST_CASE("defaults parse to the default scenario") {
    const auto s = parse_settings(default_settings());
    CHECK(s.n_s == 0.001);
    CHECK(s.n_e == 20.0);
    CHECK(s.kappa == 0.01);
    CHECK(s.reflectivity == "fixed");
    CHECK(s.numerics.quad_max_nodes == NumericsConfig{}.quad_max_nodes);
    CHECK(s.scenario(7).m == 7);
    CHECK(s.scenario().is_fixed());
  }

  TEST_CASE("layer precedence: defaults < config < overrides") {
    const json config = {{"n_s", 0.002}, {"n_e", 5.0}, {"numerics", {{"kappa_nodes", 16}}}};
    const auto doc = merge_layers(default_settings(), config, {"n_e=7", "numerics.quad_rel_tol=1e-7"});
    const auto s = parse_settings(doc);
    CHECK(s.n_s == 0.002);
    CHECK(s.n_e == 7.0);
    CHECK(s.numerics.kappa_nodes == 16);
    CHECK(s.numerics.quad_rel_tol == 1e-7);
    // Untouched nested keys survive the merge.
    CHECK(s.numerics.quad_max_nodes == NumericsConfig{}.quad_max_nodes);
  }

  TEST_CASE("arrays replace rather than merge") {
    const json defaults = {{"m_grid", {{"start", 10}, {"stop", 1000}, {"count", 3}}}};
    const auto doc = merge_layers(defaults, json{{"m_grid", json::array({5, 6})}}, {});
    CHECK(doc["m_grid"] == json::array({5, 6}));
  }

  TEST_CASE("override values are JSON when they parse") {
    json doc = json::object();
    apply_override(doc, "a.b=3");
    apply_override(doc, "flag=true");
    apply_override(doc, "name=rayleigh");
    apply_override(doc, "list=[1,2]");
    CHECK(doc["a"]["b"] == 3);
    CHECK(doc["flag"] == true);
    CHECK(doc["name"] == "rayleigh");
    CHECK(doc["list"] == json::array({1, 2}));
    CHECK_THROWS_AS(apply_override(doc, "novalue"), UsageError);
    CHECK_THROWS_AS(apply_override(doc, "=3"), UsageError);
    CHECK_THROWS_AS(apply_override(doc, "a..b=3"), UsageError);
  }

  TEST_CASE("unknown keys and wrong types are rejected") {
    CHECK_THROWS_AS(parse_settings(json{{"n_ss", 0.1}}), UsageError);
    CHECK_THROWS_AS(parse_settings(json{{"numerics", {{"bogus", 1}}}}), UsageError);
    CHECK_THROWS_AS(parse_settings(json{{"n_s", "bright"}}), UsageError);
    CHECK_THROWS_AS(parse_settings(json{{"reflectivity", "lognormal"}}), UsageError);
    CHECK_THROWS_AS(parse_settings(json{{"kappa", 2.0}}), UsageError);
    CHECK_THROWS_AS(parse_settings(json{{"numerics", {{"quad_max_nodes", 8}, {"quad_initial_nodes", 64}}}}),
                    UsageError);
    CHECK_THROWS_AS(parse_settings(json{{"ns_grid", {1e-3, -1.0}}}), UsageError);
    CHECK_THROWS_AS(parse_settings(json::array()), UsageError);
    try {
      parse_settings(json{{"n_ss", 0.1}});
    } catch (const UsageError& e) {
      CHECK(std::string(e.what()).find("n_ss") != std::string::npos);
    }
  }

  TEST_CASE("m_grid expansion") {
    CHECK(expand_m_grid(json::array({1, 10, 100})) == std::vector<std::int64_t>{1, 10, 100});
    CHECK(expand_m_grid(json{{"start", 100}, {"stop", 100000}, {"count", 4}}) ==
          std::vector<std::int64_t>{100, 1000, 10000, 100000});
    CHECK(expand_m_grid(json{{"start", 10}, {"stop", 40}, {"count", 4}, {"spacing", "linear"}}) ==
          std::vector<std::int64_t>{10, 20, 30, 40});
    CHECK(expand_m_grid(json{{"start", 5}, {"stop", 5}, {"count", 1}}) == std::vector<std::int64_t>{5});
    CHECK_THROWS_AS(expand_m_grid(json::array({10, 5})), UsageError);
    CHECK_THROWS_AS(expand_m_grid(json::array({1.5})), UsageError);
    CHECK_THROWS_AS(expand_m_grid(json::array({0})), UsageError);
    CHECK_THROWS_AS(expand_m_grid(json::array()), UsageError);
    CHECK_THROWS_AS(expand_m_grid(json{{"start", 1}, {"stop", 2}, {"count", 5}}), UsageError);
    CHECK_THROWS_AS(expand_m_grid(json{{"start", 1}, {"stop", 100}, {"count", 3}, {"spacing", "log"}}), UsageError);
    CHECK_THROWS_AS(expand_m_grid(json{{"start", 1}, {"count", 3}}), UsageError);
    CHECK_THROWS_AS(expand_m_grid(json("1..10")), UsageError);
  }

  TEST_CASE("config files") {
    const auto dir = scratch_dir("cfg");
    std::ofstream(dir / "ok.json") << R"({"n_s": 0.01})";
    std::ofstream(dir / "bad.json") << R"({"n_s": )";
    CHECK(load_json_file(dir / "ok.json")["n_s"] == 0.01);
    CHECK_THROWS_AS(load_json_file(dir / "bad.json"), UsageError);
    CHECK_THROWS_AS(load_json_file(dir / "missing.json"), UsageError);
    fs::remove_all(dir);
  }

  TEST_CASE("number formatting") {
    CHECK(format_real(0.1) == "0.1");
    CHECK(format_real(-2.5e-300) == "-2.5e-300");
    for (double v : {1.0 / 3.0, 6.02214076e23, -7.123456789012345e-5}) CHECK(std::stod(format_real(v)) == v);
    CHECK_THROWS(format_real(std::numeric_limits<double>::quiet_NaN()));
    CHECK_THROWS(format_real(std::numeric_limits<double>::infinity()));
    CHECK(format_linear(0.0) == "1");
    CHECK(format_linear(-800.0) == "");
    CHECK(format_linear(-std::numeric_limits<double>::infinity()) == "0");
  }

  TEST_CASE("SOURCE_DATE_EPOCH pins the timestamp") {
    ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    CHECK(run_timestamp() == "2023-11-14T22:13:20Z");
    ::unsetenv("SOURCE_DATE_EPOCH");
    CHECK(run_timestamp().size() == 20);
  }

  TEST_CASE("CSV header and round trip") {
    ::setenv("SOURCE_DATE_EPOCH", "0", 1);
    const auto dir = scratch_dir("csv");
    const auto path = dir / "sub" / "t.csv";
    {
      CsvWriter w(path, CsvMetadata{json{{"n_s", 0.001}}, numerics_to_json(NumericsConfig{}), {"hello"}},
                  {"m", "log_x"});
      w.write_row({"1", "-0.5"});
      w.write_row({"2", ""});
      CHECK_THROWS(w.write_row({"3"}));
    }
    ::unsetenv("SOURCE_DATE_EPOCH");
    const auto text = slurp(path);
    CHECK(text.rfind("# qi-cd-eval ", 0) == 0);
    CHECK(text.find("# generated: 1970-01-01T00:00:00Z\n") != std::string::npos);
    CHECK(text.find("# params: {\"n_s\":0.001}\n") != std::string::npos);
    CHECK(text.find("# numerics: {") != std::string::npos);
    CHECK(text.find("# note: hello\n") != std::string::npos);
    CHECK(text.find("\nm,log_x\n1,-0.5\n2,\n") != std::string::npos);

    const auto t = read_csv(path);
    CHECK(t.header_comments.size() == 5);
    CHECK(t.columns == std::vector<std::string>{"m", "log_x"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][1].empty());
    CHECK(t.column("log_x") == 1);
    CHECK_THROWS_AS(t.column("nope"), UsageError);
    fs::remove_all(dir);
  }

  TEST_CASE("malformed CSV reports the line") {
    const auto dir = scratch_dir("bad");
    std::ofstream(dir / "bad.csv") << "# c\na,b\n1,2\n3\n";
    try {
      read_csv(dir / "bad.csv");
      FAIL("expected an error");
    } catch (const UsageError& e) {
      CHECK(std::string(e.what()).find(":4:") != std::string::npos);
    }
    std::ofstream(dir / "empty.csv") << "# only comments\n";
    CHECK_THROWS_AS(read_csv(dir / "empty.csv"), UsageError);
    CHECK_THROWS_AS(read_csv(dir / "absent.csv"), UsageError);
    fs::remove_all(dir);
  }
}
