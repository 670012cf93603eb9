// qi-cd-eval: figure data, sweeps and self-tests.
//
// Exit status: 0 success, 1 invalid input or failed self-test, 2 numerical
// non-convergence.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qicd/app/config.hpp"
#include "qicd/app/figures.hpp"
#include "qicd/app/selftest.hpp"
#include "qicd/app/sweep.hpp"
#include "qicd/errors.hpp"
#include "qicd/version.hpp"

namespace {

using qicd::app::json;

json read_config(const std::string& path) {
  return path.empty() ? json() : qicd::app::load_json_file(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Error probabilities for entanglement-assisted detection with the correlation-to-displacement receiver"};
  app.set_version_flag("--version", std::string(qicd::kVersion));
  app.require_subcommand(1);

  std::string figure_id, config_path, out_dir = ".";
  std::vector<std::string> sets;
  bool linear = false;
  auto* figure = app.add_subcommand("figure", "emit the CSV data behind a figure");
  figure->add_option("id", figure_id, "figure id (fig1, fig2a, fig2b, fig2c, fig5, fig7, fig8)")->required();
  figure->add_option("--config", config_path, "JSON settings file");
  figure->add_option("--out", out_dir, "output directory");
  figure->add_option("--set", sets, "override a setting, key=value (repeatable)");
  figure->add_flag("--linear", linear, "add linear-probability columns");

  std::string sweep_config, sweep_out;
  std::vector<std::string> sweep_sets;
  bool sweep_linear = false;
  auto* sweep = app.add_subcommand("sweep", "evaluate a set of quantities over an M grid");
  sweep->add_option("--config", sweep_config, "JSON sweep specification")->required();
  sweep->add_option("--out", sweep_out, "output CSV path (overrides 'output')");
  sweep->add_option("--set", sweep_sets, "override a setting, key=value (repeatable)");
  sweep->add_flag("--linear", sweep_linear, "add linear-probability columns");

  std::vector<std::string> corrupt;
  bool list_invariants = false;
  auto* selftest = app.add_subcommand("selftest", "run the invariant suites");
  selftest->add_option("--inject-failure", corrupt, "force the named invariant to fail (harness check)");
  selftest->add_flag("--list", list_invariants, "list invariant names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*figure) {
      json doc = qicd::app::default_settings();
      doc = qicd::app::merge_layers(doc, qicd::app::figure_defaults(figure_id), {});
      doc = qicd::app::merge_layers(doc, read_config(config_path), sets);
      if (linear) doc["linear"] = true;
      for (const auto& path : qicd::app::run_figure(figure_id, doc, out_dir)) {
        std::cout << path.string() << '\n';
      }
    } else if (*sweep) {
      json doc = qicd::app::merge_layers(qicd::app::default_settings(), read_config(sweep_config), sweep_sets);
      if (!sweep_out.empty()) doc["output"] = sweep_out;
      if (sweep_linear) doc["linear"] = true;
      const auto spec = qicd::app::sweep_spec_from_settings(qicd::app::parse_settings(doc));
      std::cout << qicd::app::run_sweep(spec, doc).string() << '\n';
    } else if (*selftest) {
      if (list_invariants) {
        for (const auto& n : qicd::app::selftest_invariants()) std::cout << n << '\n';
        return 0;
      }
      qicd::app::SelftestOptions opts;
      opts.corrupt.insert(corrupt.begin(), corrupt.end());
      const auto reports = qicd::app::run_selftest(std::cout, opts);
      for (const auto& r : reports) {
        if (!r.failures.empty()) return 1;
      }
    }
  } catch (const qicd::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const qicd::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const qicd::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
