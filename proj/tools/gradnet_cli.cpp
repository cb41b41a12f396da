// Experiment runner CLI.
//
//   gradnet run       --config cfg.json --out dir
//   gradnet compare   --config cfg.json --heads softmax_ce,exp_gb --out dir
//   gradnet check-grad [--seed N]
//   gradnet curvature --s 10 --grid 2.4:3.2:0.1 --out dir
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradnet/curvature.hpp"
#include "gradnet/errors.hpp"
#include "gradnet/fdcheck.hpp"
#include "gradnet/rng.hpp"
#include "gradnet/runner.hpp"

namespace fs = std::filesystem;
using namespace gradnet;

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0 || hi < lo) {
    throw ConfigError("grid must be lo:hi:step with step > 0");
  }
  const std::size_t count = static_cast<std::size_t>((hi - lo) / step + 0.5) + 1;
  std::vector<double> xs;
  for (std::size_t i = 0; i < count; ++i) xs.push_back(lo + static_cast<double>(i) * step);
  return xs;
}

HeadRun head_run_for(const RunConfig& cfg, const std::string& name) {
  const HeadKind kind = head_kind_from_string(name);
  for (const HeadRun& hr : cfg.compare_heads) {
    if (hr.head.kind == kind) return hr;
  }
  HeadRun hr;
  hr.head = HeadSpec::of(kind);
  return hr;  // lr 0 -> inherits optim.lr
}

void print_summary(const TrialSummary& s) {
  std::printf("  trials completed: %zu/%zu%s\n", s.completed, s.statuses.size(),
              s.any_diverged ? "  (warning: divergent trials excluded from medians)" : "");
  std::printf("  median min test error:    %.6g\n", s.median_min_error);
  std::printf("  median convergence epoch: %.6g\n", s.median_convergence_epoch);
  std::printf("  median final test error:  %.6g\n", s.median_final_error);
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const RunConfig cfg = load_config(config_path);
  const RunTrialsResult result = run_trials(cfg);
  write_run_outputs(result, head_kind_name(cfg.head.kind), out_dir);
  std::printf("head %s (lr %g)\n", head_kind_name(cfg.head.kind), cfg.optim.lr);
  print_summary(result.summary);
  std::printf("outputs in %s\n", out_dir.c_str());
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& heads_csv,
                const std::string& out_dir) {
  const RunConfig cfg = load_config(config_path);

  std::vector<HeadRun> heads;
  if (heads_csv.empty()) {
    heads = cfg.compare_heads;
    if (heads.empty()) throw ConfigError("no --heads given and no compare_heads in the config");
  } else {
    for (const std::string& name : split_list(heads_csv)) {
      heads.push_back(head_run_for(cfg, name));
    }
  }

  const HeadComparison cmp = compare_heads(cfg, heads);
  write_comparison_outputs(cmp, out_dir);

  std::printf("%-12s %10s %14s %18s %14s\n", "head", "lr", "median_min_err", "median_conv_epoch",
              "final_err");
  for (const auto& row : cmp.rows) {
    std::printf("%-12s %10g %14.6g %18.6g %14.6g%s\n", row.head_name.c_str(), row.lr,
                row.median_min_error, row.median_convergence_epoch, row.median_final_error,
                row.any_diverged ? "  [divergent trials]" : "");
  }
  std::printf("\npairwise convergence-epoch ratios (row / column):\n");
  std::printf("%-12s", "");
  for (const auto& row : cmp.rows) std::printf(" %12s", row.head_name.c_str());
  std::printf("\n");
  for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
    std::printf("%-12s", cmp.rows[i].head_name.c_str());
    for (std::size_t j = 0; j < cmp.rows.size(); ++j) {
      std::printf(" %12.4g", cmp.convergence_ratios[i][j]);
    }
    std::printf("\n");
  }
  std::printf("outputs in %s\n", out_dir.c_str());
  return 0;
}

int cmd_check_grad(std::uint64_t seed) {
  const CheckReport report = check_gradients(seed);
  for (const CheckEntry& e : report.entries) {
    std::printf("%-44s max rel err %10.3e  (tol %8.1e)  %s\n", e.name.c_str(), e.max_rel_err,
                e.threshold, e.pass ? "ok" : "FAIL");
  }
  if (!report.all_pass()) {
    std::printf("gradient check FAILED\n");
    return 1;
  }
  std::printf("all gradient checks passed\n");
  return 0;
}

int cmd_curvature(double s, const std::string& grid_text, const std::string& out_dir) {
  const std::vector<double> xs = parse_grid(grid_text);
  const OrderingReport report = first_term_ordering(xs, s);

  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "ordering.csv", std::ios::binary | std::ios::trunc);
    out << "x,term_pow3,term_exp,term_softmax,term_linear,chain_holds\n";
    for (const OrderingPoint& p : report.points) {
      out << format_g17(p.x) << ',' << format_g17(p.term_pow3) << ',' << format_g17(p.term_exp)
          << ',' << format_g17(p.term_softmax) << ',' << format_g17(p.term_linear) << ','
          << (p.chain_holds ? 1 : 0) << '\n';
    }
  }
  {
    // closed-form Hessians against the second-difference oracle on a seeded
    // random point set
    std::ofstream out(fs::path(out_dir) / "hessians.csv", std::ios::binary | std::ios::trunc);
    out << "kind,x,t,s,closed_form,finite_difference,rel_err\n";
    Rng rng(1234);
    for (int i = 0; i < 100; ++i) {
      CurvaturePoint p;
      p.x = rng.uniform(-1.5, 1.5);
      p.t = rng.uniform(-2.0, 2.0);
      p.s = rng.uniform(1.0, 10.0);
      struct Row {
        const char* kind;
        double closed;
        std::function<double(double)> f;
      };
      const Row rows[] = {
          {"linear", hessian_linear(p),
           [&](double x) { return 0.5 * (x - p.t) * (x - p.t); }},
          {"softmax", hessian_softmax(p),
           [&](double x) {
             const double y = std::exp(x) / p.s;
             return 0.5 * (y - p.t) * (y - p.t);
           }},
          {"exp", hessian_exp(p),
           [&](double x) {
             const double y = std::exp(x);
             return 0.5 * (y - p.t) * (y - p.t);
           }},
          {"pow3", hessian_pow3(p),
           [&](double x) {
             const double y = x * x * x;
             return 0.5 * (y - p.t) * (y - p.t);
           }},
      };
      for (const Row& r : rows) {
        const double fd = central_second_diff(r.f, p.x, 1e-4);
        out << r.kind << ',' << format_g17(p.x) << ',' << format_g17(p.t) << ','
            << format_g17(p.s) << ',' << format_g17(r.closed) << ',' << format_g17(fd) << ','
            << format_g17(scalar_err(r.closed, fd)) << '\n';
      }
    }
  }

  const std::size_t holding = report.hold_end - report.hold_begin;
  std::printf("s = %g: chain holds at %zu of %zu grid points", s, holding, report.points.size());
  if (holding > 0) {
    std::printf(" (x in [%g, %g])", report.points[report.hold_begin].x,
                report.points[report.hold_end - 1].x);
  }
  std::printf("\noutputs in %s\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic NN training runs with pluggable output heads"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", heads_csv, grid_text = "2.4:3.2:0.1";
  std::uint64_t seed = 42;
  double s_value = 10.0;

  CLI::App* run = app.add_subcommand("run", "train one head from a config");
  run->add_option("--config", config_path, "config JSON")->required();
  run->add_option("--out", out_dir, "output directory");

  CLI::App* compare = app.add_subcommand("compare", "paired multi-head comparison");
  compare->add_option("--config", config_path, "config JSON")->required();
  compare->add_option("--heads", heads_csv, "comma-separated head kinds");
  compare->add_option("--out", out_dir, "output directory");

  CLI::App* check = app.add_subcommand("check-grad", "finite-difference gradient checks");
  check->add_option("--seed", seed, "rng seed");

  CLI::App* curv = app.add_subcommand("curvature", "hessian table and first-term ordering");
  curv->add_option("--s", s_value, "softmax normalization proxy (> 1)");
  curv->add_option("--grid", grid_text, "x grid as lo:hi:step");
  curv->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (compare->parsed()) return cmd_compare(config_path, heads_csv, out_dir);
    if (check->parsed()) return cmd_check_grad(seed);
    if (curv->parsed()) return cmd_curvature(s_value, grid_text, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
