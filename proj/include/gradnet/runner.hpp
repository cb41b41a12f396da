#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gradnet/datasets.hpp"
#include "gradnet/diagnostics.hpp"
#include "gradnet/heads.hpp"
#include "gradnet/layers.hpp"

namespace gradnet {

// ------------------------------------------------------------- configs

struct DatasetConfig {
  std::string source;  // "mnist", "cifar10" or "blobs"
  std::string path;    // dataset directory for the file-backed sources
  std::size_t subset = 0;       // 0 = all; otherwise take-first-n after a seeded shuffle
  std::size_t test_subset = 0;  // same, applied to the test split
  std::uint64_t seed = 1;
  bool standardize = false;  // per-feature standardization from train stats

  // blobs parameters
  std::size_t classes = 4;
  std::size_t per_class = 500;
  std::size_t test_per_class = 100;
  std::size_t dim = 16;
  double spread = 1.0;
};

struct LayerConfig {
  std::string kind;  // dense | conv2d | batchnorm | activation | flatten
  // dense
  std::size_t in = 0, out = 0;
  // conv2d
  std::size_t in_channels = 0, out_channels = 0, kernel = 3, stride = 1, padding = 1;
  // batchnorm
  std::size_t features = 0;
  double eps = 1e-5, momentum = 0.9;
  // activation
  std::string fn = "relu";
};

struct OptimConfig {
  double lr = 0.1;
  double momentum = 0.0;  // in [0, 1)
  std::size_t batch_size = 64;
  std::size_t epochs = 1;
  double divergence_ceiling = 1e6;  // halt when mean |delta| exceeds this
};

struct DiagConfig {
  double hist_lo = -8.0;
  double hist_hi = 12.0;
  std::size_t hist_bins = 100;
};

struct RunSection {
  std::uint64_t seed = 7;
  std::size_t trials = 1;
};

struct HeadRun {
  HeadSpec head;
  double lr = 0.0;  // 0 = inherit optim.lr
};

struct RunConfig {
  DatasetConfig dataset;
  std::vector<LayerConfig> layers;
  HeadSpec head;
  OptimConfig optim;
  DiagConfig diag;
  RunSection run;
  std::vector<HeadRun> compare_heads;  // optional per-head settings for `compare`

  void validate() const;  // ConfigError on violations
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

Network build_network(const std::vector<LayerConfig>& layers);

struct LoadedData {
  Dataset train;
  Dataset test;
};
LoadedData load_data(const DatasetConfig& cfg);

// ------------------------------------------------------------- training

struct SgdState {
  std::vector<Tensor> velocity;  // aligned with Network::parameters()
};

// theta <- theta - lr * (momentum * v_prev + g); v <- momentum * v_prev + g.
// momentum 0 is plain SGD.
void sgd_step(Network& net, const GradientSet& grads, double lr, double momentum,
              SgdState& state);

enum class TrialStatus { ok, diverged };
const char* trial_status_name(TrialStatus s);

struct TrainOutcome {
  Network net;
  DiagnosticsRecord rec;
  TrialStatus status = TrialStatus::ok;
  double min_test_error = 1.0;
  std::size_t convergence_epoch = 0;
  double final_test_error = 1.0;
};

// One full training run, deterministic given (cfg, trial_seed): per batch
// forward -> head delta -> backward -> SGD step, per epoch train/test
// error evaluation plus diagnostics recording (norm term, delta histogram
// and RMS trace at the first batch of every epoch). A mean |delta| above
// the divergence ceiling halts the run with a diverged status.
TrainOutcome train_run(const RunConfig& cfg, const LoadedData& data, std::uint64_t trial_seed);

double evaluate_error(Network& net, const Dataset& ds);

// ---------------------------------------------------------- aggregation

// Median: middle value for odd counts, mean of the two middle values for
// even counts. DomainError on empty input.
double median(std::vector<double> values);

struct TrialSummary {
  std::vector<double> min_errors;              // per completed trial, seed order
  std::vector<std::size_t> convergence_epochs;
  std::vector<double> final_errors;
  std::vector<TrialStatus> statuses;  // all trials, seed order
  double median_min_error = 0.0;
  double median_convergence_epoch = 0.0;
  double median_final_error = 0.0;
  std::size_t completed = 0;
  bool any_diverged = false;
};

struct RunTrialsResult {
  TrialSummary summary;
  std::vector<TrainOutcome> trials;  // seed order
};

// Runs cfg.run.trials independent train_runs with seeds seed+0 ... seed+k-1.
// Trials may execute on parallel threads; aggregation happens in seed order
// after all complete. Medians cover the completed (non-diverged) trials.
RunTrialsResult run_trials(const RunConfig& cfg, const LoadedData& data);
RunTrialsResult run_trials(const RunConfig& cfg);

// --------------------------------------------------------- comparisons

struct HeadComparisonRow {
  std::string head_name;
  double lr = 0.0;
  double median_min_error = 0.0;
  double median_convergence_epoch = 0.0;
  double median_final_error = 0.0;
  bool any_diverged = false;
};

struct HeadComparison {
  std::vector<HeadComparisonRow> rows;
  std::vector<RunTrialsResult> results;  // aligned with rows
  // ratios[i][j] = median convergence epoch of head i / head j.
  std::vector<std::vector<double>> convergence_ratios;

  // Median test error across trials at one epoch (from the error curves).
  double median_test_error_at(std::size_t head_index, std::size_t epoch) const;
};

// Paired comparison: every head trains on identical data with identical
// trial seeds and batch sequences (the batch permutation depends only on
// (seed, epoch), never on the head).
HeadComparison compare_heads(const RunConfig& base, const std::vector<HeadRun>& heads,
                             const LoadedData& data);
HeadComparison compare_heads(const RunConfig& base, const std::vector<HeadRun>& heads);

// --------------------------------------------------------------- output

struct SummaryRow {
  std::string head;
  std::size_t trial = 0;
  double min_error = 0.0;
  std::size_t convergence_epoch = 0;
  std::string status;
};
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

// Writes per-trial diagnostics CSV sets plus summary.csv under out_dir.
void write_run_outputs(const RunTrialsResult& result, const std::string& head_name,
                       const std::string& out_dir);
void write_comparison_outputs(const HeadComparison& cmp, const std::string& out_dir);

// ------------------------------------------------------ gradient checks

struct CheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct CheckReport {
  std::vector<CheckEntry> entries;
  bool all_pass() const;
};

// Builds one report entry from an analytic/numeric gradient pair.
CheckEntry check_entry(std::string name, std::span<const double> analytic,
                       std::span<const double> numeric, double threshold);

// Runs the finite-difference suites for the layer backwards, the head
// deltas, the boosted-head potentials and the curvature formulas.
// Failures become report entries, never exceptions. Deterministic given
// the seed.
CheckReport check_gradients(std::uint64_t seed);

}  // namespace gradnet
