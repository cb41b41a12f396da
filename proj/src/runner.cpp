#include "gradnet/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

#include <json.hpp>

#include "gradnet/curvature.hpp"
#include "gradnet/errors.hpp"
#include "gradnet/fdcheck.hpp"
#include "gradnet/rng.hpp"

namespace gradnet {

namespace fs = std::filesystem;
using nlohmann::json;

// -------------------------------------------------------------- config

void RunConfig::validate() const {
  if (dataset.source != "mnist" && dataset.source != "cifar10" && dataset.source != "blobs") {
    throw ConfigError("dataset.source must be mnist, cifar10 or blobs");
  }
  if (layers.empty()) throw ConfigError("model.layers must not be empty");
  if (!(optim.lr > 0.0)) throw ConfigError("optim.lr must be positive");
  if (!(optim.momentum >= 0.0 && optim.momentum < 1.0)) {
    throw ConfigError("optim.momentum must lie in [0,1)");
  }
  if (optim.batch_size < 1) throw ConfigError("optim.batch_size must be >= 1");
  if (optim.epochs < 1) throw ConfigError("optim.epochs must be >= 1");
  if (run.trials < 1) throw ConfigError("run.trials must be >= 1");
  head.validate();
}

namespace {

HeadSpec head_from_json(const json& jh) {
  HeadSpec spec = HeadSpec::of(head_kind_from_string(jh.at("kind").get<std::string>()));
  if (jh.contains("alpha")) spec.alpha = jh.at("alpha").get<double>();
  if (jh.contains("beta")) spec.beta = jh.at("beta").get<double>();
  if (jh.contains("target_pos")) spec.target_pos = jh.at("target_pos").get<double>();
  if (jh.contains("target_neg")) spec.target_neg = jh.at("target_neg").get<double>();
  return spec;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  RunConfig cfg;
  try {
    const json j = json::parse(json_text);

    const json& jd = j.at("dataset");
    cfg.dataset.source = jd.at("source").get<std::string>();
    cfg.dataset.path = jd.value("path", std::string());
    cfg.dataset.subset = jd.value("subset", std::size_t{0});
    cfg.dataset.test_subset = jd.value("test_subset", std::size_t{0});
    cfg.dataset.seed = jd.value("seed", std::uint64_t{1});
    cfg.dataset.standardize = jd.value("standardize", false);
    cfg.dataset.classes = jd.value("classes", std::size_t{4});
    cfg.dataset.per_class = jd.value("per_class", std::size_t{500});
    cfg.dataset.test_per_class = jd.value("test_per_class", std::size_t{100});
    cfg.dataset.dim = jd.value("dim", std::size_t{16});
    cfg.dataset.spread = jd.value("spread", 1.0);

    for (const json& jl : j.at("model").at("layers")) {
      LayerConfig lc;
      lc.kind = jl.at("kind").get<std::string>();
      if (lc.kind == "dense") {
        lc.in = jl.at("in").get<std::size_t>();
        lc.out = jl.at("out").get<std::size_t>();
      } else if (lc.kind == "conv2d") {
        lc.in_channels = jl.at("in_channels").get<std::size_t>();
        lc.out_channels = jl.at("out_channels").get<std::size_t>();
        lc.kernel = jl.value("kernel", std::size_t{3});
        lc.stride = jl.value("stride", std::size_t{1});
        lc.padding = jl.value("padding", std::size_t{1});
      } else if (lc.kind == "batchnorm") {
        lc.features = jl.at("features").get<std::size_t>();
        lc.eps = jl.value("eps", 1e-5);
        lc.momentum = jl.value("momentum", 0.9);
      } else if (lc.kind == "activation") {
        lc.fn = jl.at("fn").get<std::string>();
      } else if (lc.kind != "flatten") {
        throw ConfigError("unknown layer kind: " + lc.kind);
      }
      cfg.layers.push_back(std::move(lc));
    }

    cfg.head = head_from_json(j.at("head"));

    const json& jo = j.at("optim");
    cfg.optim.lr = jo.at("lr").get<double>();
    cfg.optim.momentum = jo.value("momentum", 0.0);
    cfg.optim.batch_size = jo.at("batch_size").get<std::size_t>();
    cfg.optim.epochs = jo.at("epochs").get<std::size_t>();
    cfg.optim.divergence_ceiling = jo.value("divergence_ceiling", 1e6);

    if (j.contains("diag")) {
      const json& jg = j.at("diag");
      cfg.diag.hist_lo = jg.value("hist_lo", -8.0);
      cfg.diag.hist_hi = jg.value("hist_hi", 12.0);
      cfg.diag.hist_bins = jg.value("hist_bins", std::size_t{100});
    }

    const json& jr = j.at("run");
    cfg.run.seed = jr.value("seed", std::uint64_t{7});
    cfg.run.trials = jr.value("trials", std::size_t{1});

    if (j.contains("compare_heads")) {
      for (const json& jh : j.at("compare_heads")) {
        HeadRun hr;
        hr.head = head_from_json(jh);
        hr.lr = jh.value("lr", 0.0);
        cfg.compare_heads.push_back(hr);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

Network build_network(const std::vector<LayerConfig>& layers) {
  Network net;
  for (const LayerConfig& lc : layers) {
    if (lc.kind == "dense") {
      net.add(std::make_unique<DenseLayer>(lc.in, lc.out));
    } else if (lc.kind == "conv2d") {
      net.add(std::make_unique<Conv2dLayer>(lc.in_channels, lc.out_channels, lc.kernel, lc.stride,
                                            lc.padding));
    } else if (lc.kind == "batchnorm") {
      net.add(std::make_unique<BatchNormLayer>(lc.features, lc.eps, lc.momentum));
    } else if (lc.kind == "activation") {
      net.add(std::make_unique<ActivationLayer>(unary_from_string(lc.fn)));
    } else if (lc.kind == "flatten") {
      net.add(std::make_unique<FlattenLayer>());
    } else {
      throw ConfigError("unknown layer kind: " + lc.kind);
    }
  }
  return net;
}

LoadedData load_data(const DatasetConfig& cfg) {
  LoadedData data;
  if (cfg.source == "mnist") {
    const fs::path dir(cfg.path);
    data.train = load_mnist_idx((dir / "train-images-idx3-ubyte").string(),
                                (dir / "train-labels-idx1-ubyte").string());
    data.test = load_mnist_idx((dir / "t10k-images-idx3-ubyte").string(),
                               (dir / "t10k-labels-idx1-ubyte").string());
  } else if (cfg.source == "cifar10") {
    const fs::path dir(cfg.path);
    std::vector<std::string> train_files;
    for (int i = 1; i <= 5; ++i) {
      const fs::path p = dir / ("data_batch_" + std::to_string(i) + ".bin");
      if (fs::exists(p)) train_files.push_back(p.string());
    }
    if (train_files.empty()) throw IoError("no data_batch_*.bin files under " + cfg.path);
    data.train = load_cifar10(train_files);
    data.test = load_cifar10({(dir / "test_batch.bin").string()});
  } else if (cfg.source == "blobs") {
    data.train = synth_blobs(cfg.classes, cfg.per_class, cfg.dim, cfg.spread, cfg.seed);
    data.test =
        synth_blobs(cfg.classes, cfg.test_per_class, cfg.dim, cfg.spread, mix_seed(cfg.seed, 0x7e57));
  } else {
    throw ConfigError("unknown dataset source: " + cfg.source);
  }
  data.train.split = "train";
  data.test.split = "test";

  if (cfg.subset > 0) data.train = subset(data.train, cfg.subset, cfg.seed);
  if (cfg.test_subset > 0) data.test = subset(data.test, cfg.test_subset, mix_seed(cfg.seed, 2));

  if (cfg.standardize) {
    const FeatureStats stats = feature_stats(data.train);
    standardize(data.train, stats);
    standardize(data.test, stats);
  }
  return data;
}

// ------------------------------------------------------------ training

void sgd_step(Network& net, const GradientSet& grads, double lr, double momentum,
              SgdState& state) {
  std::vector<Tensor*> params = net.parameters();
  std::vector<const Tensor*> gs;
  for (const LayerGrads& lg : grads.layers) {
    for (const Tensor& g : lg.params) gs.push_back(&g);
  }
  if (gs.size() != params.size()) {
    throw DimensionError("gradient set does not match parameter count");
  }
  if (state.velocity.empty()) {
    for (const Tensor* g : gs) state.velocity.emplace_back(g->shape());
  }
  if (state.velocity.size() != params.size()) {
    throw DimensionError("momentum state does not match parameter count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *gs[i];
    Tensor& v = state.velocity[i];
    if (!p.same_shape(g) || !p.same_shape(v)) {
      throw DimensionError("gradient shape does not match parameter shape");
    }
    double* pp = p.data();
    const double* pg = g.data();
    double* pv = v.data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      pv[k] = momentum * pv[k] + pg[k];
      pp[k] -= lr * pv[k];
    }
  }
}

const char* trial_status_name(TrialStatus s) {
  return s == TrialStatus::ok ? "ok" : "diverged";
}

double evaluate_error(Network& net, const Dataset& ds) {
  const std::size_t n = ds.size();
  if (n == 0) throw DomainError("evaluation on an empty dataset");
  constexpr std::size_t kEvalBatch = 256;
  std::size_t wrong = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += kEvalBatch) {
    const std::size_t end = std::min(n, start + kEvalBatch);
    idx.resize(end - start);
    for (std::size_t i = start; i < end; ++i) idx[i - start] = i;
    const Batch b = gather(ds, idx);
    const Tensor logits = net.forward(b.inputs, Mode::eval);
    const std::vector<std::size_t> pred = predict(logits);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] != b.labels[i]) ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(n);
}

namespace {

void fill_test_stats(TrainOutcome& out) {
  std::vector<ErrorPoint> test_curve;
  for (const ErrorPoint& p : out.rec.error_curve) {
    if (p.split == "test") test_curve.push_back(p);
  }
  if (test_curve.empty()) return;
  double best = test_curve.front().error_rate;
  for (const ErrorPoint& p : test_curve) best = std::min(best, p.error_rate);
  out.min_test_error = best;
  out.convergence_epoch = convergence_epoch(test_curve);
  out.final_test_error = test_curve.back().error_rate;
}

}  // namespace

TrainOutcome train_run(const RunConfig& cfg, const LoadedData& data, std::uint64_t trial_seed) {
  cfg.validate();

  TrainOutcome out;
  out.net = build_network(cfg.layers);
  {
    std::vector<std::size_t> sample_shape(data.train.inputs.shape().begin() + 1,
                                          data.train.inputs.shape().end());
    out.net.validate_shapes(sample_shape);
  }
  out.net.init_parameters(InitScheme::he(), trial_seed);

  SgdState state;
  const HeadSpec& head = cfg.head;

  record_epoch_error(out.rec, 0, "train", evaluate_error(out.net, data.train));
  record_epoch_error(out.rec, 0, "test", evaluate_error(out.net, data.test));

  std::size_t global_step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.optim.epochs && out.status == TrialStatus::ok;
       ++epoch) {
    const auto batches =
        batch_indices(data.train.size(), cfg.optim.batch_size, trial_seed, epoch, true);
    bool first_batch_of_epoch = true;
    for (const auto& batch_idx : batches) {
      const Batch b = gather(data.train, batch_idx);
      const Tensor logits = out.net.forward(b.inputs, Mode::train);

      std::size_t clamps = 0;
      const Tensor delta = head_delta(logits, b.labels, head, &clamps);
      out.rec.clamp_count += clamps;

      double mean_abs = 0.0;
      for (std::size_t i = 0; i < delta.size(); ++i) mean_abs += std::fabs(delta[i]);
      mean_abs /= static_cast<double>(delta.size());
      if (!(mean_abs <= cfg.optim.divergence_ceiling)) {  // also catches NaN
        out.status = TrialStatus::diverged;
        break;
      }

      if (first_batch_of_epoch) {
        record_norm_term(out.rec, global_step, logits);
        record_delta_histogram(out.rec, delta, cfg.diag.hist_lo, cfg.diag.hist_hi,
                               cfg.diag.hist_bins);
      }

      // Mean-loss scaling: parameter gradients average over the batch, while
      // the recorded deltas above stay in per-example units.
      Tensor scaled(delta.shape());
      const double inv_batch = 1.0 / static_cast<double>(b.labels.size());
      for (std::size_t i = 0; i < delta.size(); ++i) scaled[i] = delta[i] * inv_batch;

      const GradientSet grads = out.net.backward(scaled);
      if (first_batch_of_epoch) {
        record_rms_gradients(out.rec, epoch, grads, out.net);
        first_batch_of_epoch = false;
      }
      sgd_step(out.net, grads, cfg.optim.lr, cfg.optim.momentum, state);
      ++global_step;
    }
    if (out.status != TrialStatus::ok) break;
    record_epoch_error(out.rec, epoch, "train", evaluate_error(out.net, data.train));
    record_epoch_error(out.rec, epoch, "test", evaluate_error(out.net, data.test));
  }

  fill_test_stats(out);
  return out;
}

// -------------------------------------------------------- aggregation

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

RunTrialsResult run_trials(const RunConfig& cfg, const LoadedData& data) {
  cfg.validate();
  const std::size_t trials = cfg.run.trials;

  RunTrialsResult result;
  result.trials.resize(trials);

  // Each trial owns its network and diagnostics; the dataset is shared
  // read-only. Results land in seed order regardless of scheduling.
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(trials, std::thread::hardware_concurrency()));
  if (workers == 1 || trials == 1) {
    for (std::size_t t = 0; t < trials; ++t) {
      result.trials[t] = train_run(cfg, data, cfg.run.seed + t);
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (std::size_t t = w; t < trials; t += workers) {
            result.trials[t] = train_run(cfg, data, cfg.run.seed + t);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  TrialSummary& s = result.summary;
  for (const TrainOutcome& t : result.trials) {
    s.statuses.push_back(t.status);
    if (t.status == TrialStatus::ok) {
      s.min_errors.push_back(t.min_test_error);
      s.convergence_epochs.push_back(t.convergence_epoch);
      s.final_errors.push_back(t.final_test_error);
    } else {
      s.any_diverged = true;
    }
  }
  s.completed = s.min_errors.size();
  if (s.completed > 0) {
    s.median_min_error = median(s.min_errors);
    std::vector<double> ce(s.convergence_epochs.begin(), s.convergence_epochs.end());
    s.median_convergence_epoch = median(ce);
    s.median_final_error = median(s.final_errors);
  } else {
    s.median_min_error = std::numeric_limits<double>::quiet_NaN();
    s.median_convergence_epoch = std::numeric_limits<double>::quiet_NaN();
    s.median_final_error = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

RunTrialsResult run_trials(const RunConfig& cfg) {
  const LoadedData data = load_data(cfg.dataset);
  return run_trials(cfg, data);
}

// ------------------------------------------------------- comparisons

double HeadComparison::median_test_error_at(std::size_t head_index, std::size_t epoch) const {
  const RunTrialsResult& r = results.at(head_index);
  std::vector<double> vals;
  for (const TrainOutcome& t : r.trials) {
    if (t.status != TrialStatus::ok) continue;
    for (const ErrorPoint& p : t.rec.error_curve) {
      if (p.split == "test" && p.epoch == epoch) {
        vals.push_back(p.error_rate);
        break;
      }
    }
  }
  if (vals.empty()) return std::numeric_limits<double>::quiet_NaN();
  return median(std::move(vals));
}

HeadComparison compare_heads(const RunConfig& base, const std::vector<HeadRun>& heads,
                             const LoadedData& data) {
  if (heads.size() < 2) throw ConfigError("compare_heads needs at least two heads");
  HeadComparison cmp;
  for (const HeadRun& hr : heads) {
    RunConfig cfg = base;
    cfg.head = hr.head;
    if (hr.lr > 0.0) cfg.optim.lr = hr.lr;
    RunTrialsResult r = run_trials(cfg, data);

    HeadComparisonRow row;
    row.head_name = head_kind_name(hr.head.kind);
    row.lr = cfg.optim.lr;
    row.median_min_error = r.summary.median_min_error;
    row.median_convergence_epoch = r.summary.median_convergence_epoch;
    row.median_final_error = r.summary.median_final_error;
    row.any_diverged = r.summary.any_diverged;
    cmp.rows.push_back(std::move(row));
    cmp.results.push_back(std::move(r));
  }

  const std::size_t k = cmp.rows.size();
  cmp.convergence_ratios.assign(k, std::vector<double>(k, 1.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      cmp.convergence_ratios[i][j] =
          cmp.rows[i].median_convergence_epoch / cmp.rows[j].median_convergence_epoch;
    }
  }
  return cmp;
}

HeadComparison compare_heads(const RunConfig& base, const std::vector<HeadRun>& heads) {
  const LoadedData data = load_data(base.dataset);
  return compare_heads(base, heads, data);
}

// -------------------------------------------------------------- output

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "head,trial,min_error,convergence_epoch,status\n";
  for (const SummaryRow& r : rows) {
    out << r.head << ',' << r.trial << ',' << format_g17(r.min_error) << ','
        << r.convergence_epoch << ',' << r.status << '\n';
  }
}

void write_run_outputs(const RunTrialsResult& result, const std::string& head_name,
                       const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir);

  std::vector<SummaryRow> rows;
  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    const TrainOutcome& trial = result.trials[t];
    emit_csv(trial.rec, (fs::path(out_dir) / ("trial_" + std::to_string(t))).string());
    SummaryRow row;
    row.head = head_name;
    row.trial = t;
    row.min_error = trial.min_test_error;
    row.convergence_epoch = trial.convergence_epoch;
    row.status = trial_status_name(trial.status);
    rows.push_back(std::move(row));
  }
  write_summary_csv((fs::path(out_dir) / "summary.csv").string(), rows);
}

void write_comparison_outputs(const HeadComparison& cmp, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir);

  std::vector<SummaryRow> rows;
  for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
    std::string dir_name = cmp.rows[i].head_name;
    for (std::size_t j = 0; j < i; ++j) {
      if (cmp.rows[j].head_name == dir_name) {
        dir_name += "_" + std::to_string(i);  // duplicate kind in the list
        break;
      }
    }
    const RunTrialsResult& r = cmp.results[i];
    for (std::size_t t = 0; t < r.trials.size(); ++t) {
      const TrainOutcome& trial = r.trials[t];
      emit_csv(trial.rec,
               (fs::path(out_dir) / dir_name / ("trial_" + std::to_string(t))).string());
      SummaryRow row;
      row.head = cmp.rows[i].head_name;
      row.trial = t;
      row.min_error = trial.min_test_error;
      row.convergence_epoch = trial.convergence_epoch;
      row.status = trial_status_name(trial.status);
      rows.push_back(std::move(row));
    }
  }
  write_summary_csv((fs::path(out_dir) / "summary.csv").string(), rows);
}

// ----------------------------------------------------- gradient checks

bool CheckReport::all_pass() const {
  for (const CheckEntry& e : entries) {
    if (!e.pass) return false;
  }
  return true;
}

CheckEntry check_entry(std::string name, std::span<const double> analytic,
                       std::span<const double> numeric, double threshold) {
  CheckEntry e;
  e.name = std::move(name);
  e.max_rel_err = max_grad_err(analytic, numeric);
  e.threshold = threshold;
  e.pass = e.max_rel_err < threshold;
  return e;
}

namespace {

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double lo, double hi) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// FD gradient of `loss` wrt every element of `t` (t is restored).
std::vector<double> fd_grad(Tensor& t, const std::function<double()>& loss, double h) {
  std::vector<double> g(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double saved = t[i];
    t[i] = saved + h;
    const double lp = loss();
    t[i] = saved - h;
    const double lm = loss();
    t[i] = saved;
    g[i] = (lp - lm) / (2.0 * h);
  }
  return g;
}

std::vector<double> flat(const Tensor& t) {
  return std::vector<double>(t.data(), t.data() + t.size());
}

double half_sq_err(const Tensor& y, const Tensor& target) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - target[i];
    acc += 0.5 * d * d;
  }
  return acc;
}

void check_layer_suite(CheckReport& report, Rng& rng) {
  constexpr double kH = 1e-4;
  constexpr double kTol = 1e-5;

  {  // dense
    Tensor x = random_tensor(rng, {4, 5}, -1.0, 1.0);
    Tensor w = random_tensor(rng, {5, 3}, -1.0, 1.0);
    Tensor b = random_tensor(rng, {3}, -0.5, 0.5);
    Tensor target = random_tensor(rng, {4, 3}, -1.0, 1.0);
    auto loss = [&]() { return half_sq_err(dense_forward(x, w, b), target); };

    Tensor y = dense_forward(x, w, b);
    Tensor delta(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) delta[i] = y[i] - target[i];
    const DenseBackward g = dense_backward(x, w, delta);

    report.entries.push_back(check_entry("dense.dw", flat(g.dw), fd_grad(w, loss, kH), kTol));
    report.entries.push_back(check_entry("dense.db", flat(g.db), fd_grad(b, loss, kH), kTol));
    report.entries.push_back(check_entry("dense.dx", flat(g.dx), fd_grad(x, loss, kH), kTol));
  }

  {  // conv2d, stride 1 and stride 2
    for (const std::size_t stride : {std::size_t{1}, std::size_t{2}}) {
      Tensor x = random_tensor(rng, {2, 3, 6, 6}, -1.0, 1.0);
      Tensor k = random_tensor(rng, {4, 3, 3, 3}, -0.7, 0.7);
      Tensor bias = random_tensor(rng, {4}, -0.3, 0.3);
      Conv2dCache cache;
      Tensor y0 = conv2d_forward(x, k, bias, stride, 1, &cache);
      Tensor target = random_tensor(rng, y0.shape(), -1.0, 1.0);
      auto loss = [&]() { return half_sq_err(conv2d_forward(x, k, bias, stride, 1), target); };

      Tensor delta(y0.shape());
      for (std::size_t i = 0; i < y0.size(); ++i) delta[i] = y0[i] - target[i];
      const Conv2dBackward g = conv2d_backward(cache, k, delta);

      const std::string tag = "conv2d.s" + std::to_string(stride);
      report.entries.push_back(
          check_entry(tag + ".dkernels", flat(g.dkernels), fd_grad(k, loss, kH), kTol));
      report.entries.push_back(
          check_entry(tag + ".dbias", flat(g.dbias), fd_grad(bias, loss, kH), kTol));
      report.entries.push_back(check_entry(tag + ".dx", flat(g.dx), fd_grad(x, loss, kH), kTol));
    }
  }

  {  // batchnorm on rank-2 and rank-4 inputs
    for (const bool conv_input : {false, true}) {
      Tensor x = conv_input ? random_tensor(rng, {3, 2, 4, 4}, -1.0, 1.0)
                            : random_tensor(rng, {6, 5}, -1.0, 1.0);
      const std::size_t features = x.dim(1);
      Tensor gamma = random_tensor(rng, {features}, 0.5, 1.5);
      Tensor shift = random_tensor(rng, {features}, -0.5, 0.5);
      RunningStats running{Tensor({features}), Tensor::full({features}, 1.0)};

      BatchNormCache cache;
      Tensor y0 = batchnorm_forward(x, gamma, shift, Mode::train, running, 0.9, 1e-5, &cache);
      Tensor target = random_tensor(rng, y0.shape(), -1.0, 1.0);
      auto loss = [&]() {
        RunningStats rs{Tensor({features}), Tensor::full({features}, 1.0)};
        return half_sq_err(batchnorm_forward(x, gamma, shift, Mode::train, rs, 0.9, 1e-5), target);
      };

      Tensor delta(y0.shape());
      for (std::size_t i = 0; i < y0.size(); ++i) delta[i] = y0[i] - target[i];
      const BatchNormBackward g = batchnorm_backward(cache, gamma, delta);

      const std::string tag = conv_input ? "batchnorm.nchw" : "batchnorm.nf";
      report.entries.push_back(
          check_entry(tag + ".dgamma", flat(g.dgamma), fd_grad(gamma, loss, kH), kTol));
      report.entries.push_back(
          check_entry(tag + ".dshift", flat(g.dshift), fd_grad(shift, loss, kH), kTol));
      report.entries.push_back(check_entry(tag + ".dx", flat(g.dx), fd_grad(x, loss, kH), kTol));
    }
  }

  {  // whole network: 3 dense layers with ReLUs
    Network net = [] {
      Network n;
      n.add(std::make_unique<DenseLayer>(6, 8));
      n.add(std::make_unique<ActivationLayer>(Unary::relu));
      n.add(std::make_unique<DenseLayer>(8, 7));
      n.add(std::make_unique<ActivationLayer>(Unary::relu));
      n.add(std::make_unique<DenseLayer>(7, 5));
      return n;
    }();
    net.init_parameters(InitScheme::he(), rng.next_u64());
    Tensor x = random_tensor(rng, {4, 6}, -1.0, 1.0);
    Tensor target = random_tensor(rng, {4, 5}, -1.0, 1.0);
    auto loss = [&]() { return half_sq_err(net.forward(x, Mode::train), target); };

    Tensor y0 = net.forward(x, Mode::train);
    Tensor delta(y0.shape());
    for (std::size_t i = 0; i < y0.size(); ++i) delta[i] = y0[i] - target[i];
    const GradientSet gs = net.backward(delta);

    std::vector<double> analytic;
    for (const LayerGrads& lg : gs.layers) {
      for (const Tensor& g : lg.params) {
        analytic.insert(analytic.end(), g.data(), g.data() + g.size());
      }
    }
    std::vector<double> numeric;
    for (Tensor* p : net.parameters()) {
      const std::vector<double> fd = fd_grad(*p, loss, kH);
      numeric.insert(numeric.end(), fd.begin(), fd.end());
    }
    report.entries.push_back(check_entry("network.mlp3.params", analytic, numeric, kTol));
  }
}

void check_head_suite(CheckReport& report, Rng& rng, std::size_t pairs) {
  constexpr double kH = 1e-5;
  constexpr double kTol = 1e-6;
  constexpr std::size_t kClasses = 5;

  const HeadKind consistent[] = {HeadKind::softmax_ce, HeadKind::linear_mse,
                                 HeadKind::sigmoid_mse, HeadKind::tanh_mse};
  for (HeadKind kind : consistent) {
    const HeadSpec spec = HeadSpec::of(kind);
    double worst = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
      Tensor logits = random_tensor(rng, {1, kClasses}, -2.0, 2.0);
      const std::size_t label = rng.index(kClasses);
      const Tensor delta = head_delta(logits, std::span<const std::size_t>(&label, 1), spec);

      std::vector<double> numeric(kClasses);
      for (std::size_t j = 0; j < kClasses; ++j) {
        const double saved = logits[j];
        auto f = [&](double v) {
          logits[j] = v;
          return loss_value(logits, std::span<const std::size_t>(&label, 1), spec);
        };
        numeric[j] = central_diff(f, saved, kH);
        logits[j] = saved;
      }
      worst = std::max(worst, max_grad_err(flat(delta), numeric));
    }
    CheckEntry e;
    e.name = std::string("head.") + head_kind_name(kind) + ".delta_vs_loss";
    e.max_rel_err = worst;
    e.threshold = kTol;
    e.pass = worst < kTol;
    report.entries.push_back(std::move(e));
  }

  // Boosted heads: the delta is the exact derivative of the potential
  //   exp_gb:  P(x) = alpha e^x - t x
  //   pow3_gb: P(x) = alpha x^4/4 + (beta - t) x
  for (HeadKind kind : {HeadKind::exp_gb, HeadKind::pow3_gb}) {
    const HeadSpec spec = HeadSpec::of(kind);
    double worst = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
      Tensor logits = random_tensor(rng, {1, kClasses}, -2.0, 2.0);
      const std::size_t label = rng.index(kClasses);
      const Tensor delta = head_delta(logits, std::span<const std::size_t>(&label, 1), spec);

      std::vector<double> numeric(kClasses);
      for (std::size_t j = 0; j < kClasses; ++j) {
        const double t = (j == label) ? spec.target_pos : spec.target_neg;
        auto potential = [&](double v) {
          if (kind == HeadKind::exp_gb) return spec.alpha * std::exp(v) - t * v;
          return spec.alpha * v * v * v * v / 4.0 + (spec.beta - t) * v;
        };
        numeric[j] = central_diff(potential, logits[j], kH);
      }
      worst = std::max(worst, max_grad_err(flat(delta), numeric));
    }
    CheckEntry e;
    e.name = std::string("head.") + head_kind_name(kind) + ".delta_vs_potential";
    e.max_rel_err = worst;
    e.threshold = kTol;
    e.pass = worst < kTol;
    report.entries.push_back(std::move(e));
  }
}

void check_curvature_suite(CheckReport& report, Rng& rng, std::size_t points) {
  constexpr double kH = 1e-4;
  constexpr double kTol = 1e-4;

  struct Case {
    const char* name;
    std::function<double(const CurvaturePoint&)> hessian;
    std::function<double(const CurvaturePoint&, double)> error;  // E(x) with x overridden
  };
  const Case cases[] = {
      {"curvature.hessian_linear", hessian_linear,
       [](const CurvaturePoint& p, double x) { return 0.5 * (x - p.t) * (x - p.t); }},
      {"curvature.hessian_softmax", hessian_softmax,
       [](const CurvaturePoint& p, double x) {
         const double y = std::exp(x) / p.s;  // s held constant
         return 0.5 * (y - p.t) * (y - p.t);
       }},
      {"curvature.hessian_exp", hessian_exp,
       [](const CurvaturePoint& p, double x) {
         const double y = std::exp(x);
         return 0.5 * (y - p.t) * (y - p.t);
       }},
      {"curvature.hessian_pow3", hessian_pow3,
       [](const CurvaturePoint& p, double x) {
         const double y = x * x * x;
         return 0.5 * (y - p.t) * (y - p.t);
       }},
  };

  for (const Case& c : cases) {
    double worst = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
      CurvaturePoint p;
      p.x = rng.uniform(-1.5, 1.5);
      p.t = rng.uniform(-2.0, 2.0);
      p.s = rng.uniform(1.0, 10.0);
      const double analytic = c.hessian(p);
      auto f = [&](double x) { return c.error(p, x); };
      const double numeric = central_second_diff(f, p.x, kH);
      worst = std::max(worst, scalar_err(analytic, numeric));
    }
    CheckEntry e;
    e.name = c.name;
    e.max_rel_err = worst;
    e.threshold = kTol;
    e.pass = worst < kTol;
    report.entries.push_back(std::move(e));
  }

  // Second derivative of the boosted deltas = first derivative of head_delta.
  for (HeadKind kind : {HeadKind::exp_gb, HeadKind::pow3_gb}) {
    const HeadSpec spec = HeadSpec::of(kind);
    double worst = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
      const double x = rng.uniform(-1.5, 1.5);
      const double analytic = gb_second_derivative(kind, x, spec.alpha);
      auto delta_at = [&](double v) {
        Tensor logits({1, 1}, {v});
        const std::size_t label = 0;  // t = target_pos; constant in x
        return head_delta(logits, std::span<const std::size_t>(&label, 1), spec)[0];
      };
      const double numeric = central_diff(delta_at, x, 1e-5);
      worst = std::max(worst, scalar_err(analytic, numeric, 1e-3));
    }
    CheckEntry e;
    e.name = std::string("curvature.gb_second_derivative.") + head_kind_name(kind);
    e.max_rel_err = worst;
    e.threshold = 1e-6;
    e.pass = worst < 1e-6;
    report.entries.push_back(std::move(e));
  }
}

}  // namespace

CheckReport check_gradients(std::uint64_t seed) {
  CheckReport report;
  Rng rng(seed);
  check_layer_suite(report, rng);
  check_head_suite(report, rng, 200);
  check_curvature_suite(report, rng, 100);
  return report;
}

}  // namespace gradnet
