#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradnet/layers.hpp"
#include "gradnet/tensor.hpp"

namespace gradnet {

// Instrumentation gathered over one training run: per-epoch error curves,
// per-layer RMS traces of the backpropagated deltas and parameter
// gradients, output-delta histograms at checkpoints and the softmax
// normalization-term trace. One record per run, single writer.
struct ErrorPoint {
  std::size_t epoch = 0;
  std::string split;
  double error_rate = 0.0;
};

struct RmsPoint {
  std::size_t epoch = 0;
  std::size_t layer_index = 0;
  std::string layer_kind;
  double rms_delta = 0.0;
  double rms_param_grad = 0.0;
};

struct HistogramRecord {
  std::size_t checkpoint = 0;
  double range_lo = 0.0;
  double range_hi = 0.0;
  // counts[0] is the underflow bin, counts[1..num_bins] the uniform bins,
  // counts[num_bins+1] the overflow bin.
  std::vector<std::uint64_t> counts;
};

struct NormTermPoint {
  std::size_t step = 0;
  double log_s = 0.0;  // batch mean of per-row log-sum-exp
  double s = 0.0;      // exp(log_s), +inf when saturated
  bool saturated = false;
  double max_logit = 0.0;  // batch max, kept in memory only (not in the CSV)
};

struct DiagnosticsRecord {
  std::vector<ErrorPoint> error_curve;
  std::vector<RmsPoint> rms_trace;
  std::vector<HistogramRecord> delta_histograms;
  std::vector<NormTermPoint> norm_term_trace;
  std::uint64_t clamp_count = 0;  // exp-head overflow clamps
};

// Appends one error point. Rates must lie in [0,1] and epochs must be
// strictly increasing within a split (RecordingError otherwise).
void record_epoch_error(DiagnosticsRecord& rec, std::size_t epoch, const std::string& split,
                        double error_rate);

// Epoch of the minimum error in the curve; ties break to the earliest
// epoch. DomainError on an empty curve.
std::size_t convergence_epoch(const std::vector<ErrorPoint>& curve);

// Bins `deltas` into num_bins uniform bins over [range_lo, range_hi] plus
// an underflow and an overflow bin; the total count always equals the
// number of delta components.
void record_delta_histogram(DiagnosticsRecord& rec, const Tensor& deltas, double range_lo,
                            double range_hi, std::size_t num_bins);

// One RMS pair per layer for this epoch: the RMS of the layer's input
// delta and of its concatenated parameter gradients (0 for layers without
// parameters). The layer count must stay constant across epochs.
void record_rms_gradients(DiagnosticsRecord& rec, std::size_t epoch, const GradientSet& grads,
                          const Network& net);

// Records the softmax normalization term of a logits batch: the batch mean
// of the per-row log-sum-exp, s = exp of that mean, and a saturation flag.
// Saturation is flagged, never an error.
void record_norm_term(DiagnosticsRecord& rec, std::size_t step, const Tensor& logits_batch);

// Writes errors.csv, rms.csv, hist.csv and normterm.csv into out_dir
// (created if missing). Overwrites are idempotent and byte-deterministic:
// numeric fields are printed with 17 significant digits.
void emit_csv(const DiagnosticsRecord& rec, const std::string& out_dir);

// "%.17g" formatting used by every CSV writer.
std::string format_g17(double v);

}  // namespace gradnet
