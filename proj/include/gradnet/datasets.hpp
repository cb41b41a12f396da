#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gradnet/tensor.hpp"

namespace gradnet {

// Labeled dataset. Inputs are [n, features] or [n, C, H, W]; immutable
// after load and safe to share across threads.
struct Dataset {
  Tensor inputs;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
  std::string split;  // "train" or "test"

  std::size_t size() const { return labels.size(); }
};

// MNIST-style IDX pair. Headers are big-endian regardless of host:
// images file starts with magic 0x00000803 then count, rows, cols; labels
// file starts with 0x00000801 then count. File lengths must match the
// headers exactly and the two counts must agree. Pixels come out as
// [n, rows*cols] doubles scaled by exactly value/255.
Dataset load_mnist_idx(const std::string& images_file, const std::string& labels_file);

// CIFAR-10 binary batches: concatenated 3073-byte records, one label byte
// then 1024 red, 1024 green, 1024 blue bytes. Output is [n, 3, 32, 32]
// doubles in [0, 1]. A file length that is not a multiple of 3073 or a
// label byte >= 10 is a FormatError naming the record.
Dataset load_cifar10(const std::vector<std::string>& batch_files);

// Gaussian clusters around fixed per-class centers: point = center +
// spread * N(0, I). The centers depend only on (num_classes, dim); the
// user seed only drives the per-point noise and label order, so the same
// seed reproduces the dataset bit for bit.
Dataset synth_blobs(std::size_t num_classes, std::size_t per_class, std::size_t dim,
                    double spread, std::uint64_t seed);

// The centers synth_blobs draws around (one row per class).
Tensor blob_centers(std::size_t num_classes, std::size_t dim);

// Batch index plan for one epoch. With shuffle the permutation is a pure
// function of (seed, epoch); the last partial batch is kept. Every index
// appears exactly once.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch,
                                                    bool shuffle);

// Materializes the rows `idx` of a dataset as one batch.
struct Batch {
  Tensor inputs;
  std::vector<std::size_t> labels;
};
Batch gather(const Dataset& ds, std::span<const std::size_t> idx);

// Keeps `n` examples chosen by a seeded shuffle (take-first-n after the
// shuffle). n >= size leaves the dataset unchanged.
Dataset subset(const Dataset& ds, std::size_t n, std::uint64_t seed);

// Per-feature standardization statistics (mean, stddev floor 1e-12),
// computed on one dataset and applied to others.
struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};
FeatureStats feature_stats(const Dataset& ds);
void standardize(Dataset& ds, const FeatureStats& stats);

}  // namespace gradnet
