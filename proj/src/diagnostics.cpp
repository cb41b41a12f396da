#include "gradnet/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "gradnet/errors.hpp"
#include "gradnet/heads.hpp"

namespace gradnet {

void record_epoch_error(DiagnosticsRecord& rec, std::size_t epoch, const std::string& split,
                        double error_rate) {
  if (!(error_rate >= 0.0 && error_rate <= 1.0)) {
    throw RecordingError("error rate " + std::to_string(error_rate) + " outside [0,1]");
  }
  for (auto it = rec.error_curve.rbegin(); it != rec.error_curve.rend(); ++it) {
    if (it->split == split) {
      if (epoch <= it->epoch) {
        throw RecordingError("epoch " + std::to_string(epoch) +
                             " not strictly increasing for split " + split);
      }
      break;
    }
  }
  rec.error_curve.push_back({epoch, split, error_rate});
}

std::size_t convergence_epoch(const std::vector<ErrorPoint>& curve) {
  if (curve.empty()) throw DomainError("convergence epoch of an empty curve");
  // Scan in epoch order so ties resolve to the earliest epoch regardless of
  // the recording order of the points.
  std::size_t best_epoch = 0;
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  std::vector<const ErrorPoint*> pts;
  pts.reserve(curve.size());
  for (const auto& p : curve) pts.push_back(&p);
  std::sort(pts.begin(), pts.end(),
            [](const ErrorPoint* a, const ErrorPoint* b) { return a->epoch < b->epoch; });
  for (const ErrorPoint* p : pts) {
    if (p->error_rate < best) {
      best = p->error_rate;
      best_epoch = p->epoch;
      found = true;
    }
  }
  if (!found) throw DomainError("convergence epoch of an empty curve");
  return best_epoch;
}

void record_delta_histogram(DiagnosticsRecord& rec, const Tensor& deltas, double range_lo,
                            double range_hi, std::size_t num_bins) {
  if (!(range_lo < range_hi) || num_bins < 1) {
    throw DomainError("histogram needs range_lo < range_hi and num_bins >= 1");
  }
  HistogramRecord h;
  h.checkpoint = rec.delta_histograms.size();
  h.range_lo = range_lo;
  h.range_hi = range_hi;
  h.counts.assign(num_bins + 2, 0);
  const double width = (range_hi - range_lo) / static_cast<double>(num_bins);
  const double* p = deltas.data();
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double v = p[i];
    std::size_t bin;
    if (v < range_lo) {
      bin = 0;
    } else if (v >= range_hi) {
      bin = num_bins + 1;
    } else {
      std::size_t k = static_cast<std::size_t>((v - range_lo) / width);
      if (k >= num_bins) k = num_bins - 1;  // right edge round-off
      bin = k + 1;
    }
    ++h.counts[bin];
  }
  rec.delta_histograms.push_back(std::move(h));
}

void record_rms_gradients(DiagnosticsRecord& rec, std::size_t epoch, const GradientSet& grads,
                          const Network& net) {
  if (grads.layers.size() != net.layer_count()) {
    throw RecordingError("gradient set does not match network layer count");
  }
  if (!rec.rms_trace.empty()) {
    // All epochs must describe the same stack.
    std::size_t prev_layers = 0;
    const std::size_t first_epoch = rec.rms_trace.front().epoch;
    for (const auto& p : rec.rms_trace) {
      if (p.epoch == first_epoch) ++prev_layers;
    }
    if (prev_layers != grads.layers.size()) {
      throw RecordingError("layer count changed between rms recordings");
    }
  }
  for (std::size_t i = 0; i < grads.layers.size(); ++i) {
    const LayerGrads& lg = grads.layers[i];
    RmsPoint pt;
    pt.epoch = epoch;
    pt.layer_index = i;
    pt.layer_kind = net.layer(i).kind();
    pt.rms_delta = lg.input_delta.size() ? rms(lg.input_delta) : 0.0;
    double acc = 0.0;
    std::size_t count = 0;
    for (const Tensor& g : lg.params) {
      const double* p = g.data();
      for (std::size_t k = 0; k < g.size(); ++k) acc += p[k] * p[k];
      count += g.size();
    }
    pt.rms_param_grad = count ? std::sqrt(acc / static_cast<double>(count)) : 0.0;
    rec.rms_trace.push_back(std::move(pt));
  }
}

void record_norm_term(DiagnosticsRecord& rec, std::size_t step, const Tensor& logits_batch) {
  if (logits_batch.rank() != 2 || logits_batch.dim(0) == 0) {
    throw DomainError("norm-term recording needs a non-empty [batch, classes] tensor");
  }
  const std::size_t rows = logits_batch.dim(0), n = logits_batch.dim(1);
  const double* p = logits_batch.data();
  double acc_log = 0.0;
  double mx = p[0];
  for (std::size_t r = 0; r < rows; ++r) {
    const NormTerm nt = normalization_term(std::span<const double>(p + r * n, n));
    acc_log += nt.log_s;
    for (std::size_t j = 0; j < n; ++j) {
      if (p[r * n + j] > mx) mx = p[r * n + j];
    }
  }
  NormTermPoint pt;
  pt.step = step;
  pt.log_s = acc_log / static_cast<double>(rows);
  pt.s = std::exp(pt.log_s);
  pt.saturated = std::isinf(pt.s);
  pt.max_logit = mx;
  rec.norm_term_trace.push_back(pt);
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_csv(const DiagnosticsRecord& rec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir + ": " + ec.message());

  auto open = [&](const char* name) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(std::string("cannot write ") + name + " in " + out_dir);
    return out;
  };

  {
    auto out = open("errors.csv");
    out << "epoch,split,error_rate\n";
    for (const auto& p : rec.error_curve) {
      out << p.epoch << ',' << p.split << ',' << format_g17(p.error_rate) << '\n';
    }
  }
  {
    auto out = open("rms.csv");
    out << "epoch,layer_index,layer_kind,rms_delta,rms_param_grad\n";
    for (const auto& p : rec.rms_trace) {
      out << p.epoch << ',' << p.layer_index << ',' << p.layer_kind << ','
          << format_g17(p.rms_delta) << ',' << format_g17(p.rms_param_grad) << '\n';
    }
  }
  {
    auto out = open("hist.csv");
    out << "checkpoint,bin_lo,bin_hi,count\n";
    for (const auto& h : rec.delta_histograms) {
      const std::size_t num_bins = h.counts.size() - 2;
      const double width = (h.range_hi - h.range_lo) / static_cast<double>(num_bins);
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        double lo, hi;
        if (b == 0) {
          lo = -std::numeric_limits<double>::infinity();
          hi = h.range_lo;
        } else if (b == h.counts.size() - 1) {
          lo = h.range_hi;
          hi = std::numeric_limits<double>::infinity();
        } else {
          lo = h.range_lo + static_cast<double>(b - 1) * width;
          hi = h.range_lo + static_cast<double>(b) * width;
        }
        out << h.checkpoint << ',' << format_g17(lo) << ',' << format_g17(hi) << ','
            << h.counts[b] << '\n';
      }
    }
  }
  {
    auto out = open("normterm.csv");
    out << "step,log_s,s,saturated\n";
    for (const auto& p : rec.norm_term_trace) {
      out << p.step << ',' << format_g17(p.log_s) << ',' << format_g17(p.s) << ','
          << (p.saturated ? 1 : 0) << '\n';
    }
  }
}

}  // namespace gradnet
