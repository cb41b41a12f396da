#include "gradnet/datasets.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "gradnet/errors.hpp"
#include "gradnet/rng.hpp"

namespace gradnet {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  in.seekg(0, std::ios::end);
  const auto len = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(len));
  if (len > 0) in.read(reinterpret_cast<char*>(bytes.data()), len);
  if (!in) throw IoError("short read on " + path);
  return bytes;
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t offset,
                   const std::string& path) {
  if (offset + 4 > b.size()) {
    throw FormatError(path + ": truncated header at offset " + std::to_string(offset));
  }
  return (static_cast<std::uint32_t>(b[offset]) << 24) |
         (static_cast<std::uint32_t>(b[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(b[offset + 2]) << 8) |
         static_cast<std::uint32_t>(b[offset + 3]);
}

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
constexpr std::size_t kCifarRecord = 3073;  // 1 label byte + 3*32*32 pixels

}  // namespace

Dataset load_mnist_idx(const std::string& images_file, const std::string& labels_file) {
  const auto img = read_file(images_file);
  const auto lbl = read_file(labels_file);

  if (img.empty()) throw FormatError(images_file + ": empty file, format error at offset 0");
  if (lbl.empty()) throw FormatError(labels_file + ": empty file, format error at offset 0");

  const std::uint32_t img_magic = be32(img, 0, images_file);
  if (img_magic != kIdxImagesMagic) {
    throw FormatError(images_file + ": bad magic number at offset 0");
  }
  const std::uint32_t n = be32(img, 4, images_file);
  const std::uint32_t rows = be32(img, 8, images_file);
  const std::uint32_t cols = be32(img, 12, images_file);
  const std::size_t expected_img =
      16 + static_cast<std::size_t>(n) * rows * cols;
  if (img.size() != expected_img) {
    throw FormatError(images_file + ": length " + std::to_string(img.size()) +
                      " does not match header (expected " + std::to_string(expected_img) +
                      "), format error at offset 4");
  }

  const std::uint32_t lbl_magic = be32(lbl, 0, labels_file);
  if (lbl_magic != kIdxLabelsMagic) {
    throw FormatError(labels_file + ": bad magic number at offset 0");
  }
  const std::uint32_t n_lbl = be32(lbl, 4, labels_file);
  if (lbl.size() != 8 + static_cast<std::size_t>(n_lbl)) {
    throw FormatError(labels_file + ": length does not match header, format error at offset 4");
  }
  if (n != n_lbl) {
    throw FormatError("image count " + std::to_string(n) + " != label count " +
                      std::to_string(n_lbl) + " (" + images_file + " vs " + labels_file + ")");
  }

  Dataset ds;
  const std::size_t features = static_cast<std::size_t>(rows) * cols;
  ds.inputs = Tensor({n, features});
  double* p = ds.inputs.data();
  for (std::size_t i = 0; i < static_cast<std::size_t>(n) * features; ++i) {
    p[i] = static_cast<double>(img[16 + i]) / 255.0;
  }
  ds.labels.resize(n);
  ds.num_classes = 10;
  for (std::size_t i = 0; i < n; ++i) {
    if (lbl[8 + i] >= 10) {
      throw FormatError(labels_file + ": label byte " + std::to_string(int(lbl[8 + i])) +
                        " out of range at record " + std::to_string(i));
    }
    ds.labels[i] = lbl[8 + i];
  }
  return ds;
}

Dataset load_cifar10(const std::vector<std::string>& batch_files) {
  if (batch_files.empty()) throw ConfigError("load_cifar10 needs at least one batch file");

  std::size_t total = 0;
  std::vector<std::vector<std::uint8_t>> blobs;
  blobs.reserve(batch_files.size());
  for (const auto& path : batch_files) {
    auto bytes = read_file(path);
    if (bytes.empty() || bytes.size() % kCifarRecord != 0) {
      const std::size_t full = bytes.size() / kCifarRecord;
      throw FormatError(path + ": length " + std::to_string(bytes.size()) +
                        " is not a multiple of the 3073-byte record size (truncated record " +
                        std::to_string(full) + ")");
    }
    total += bytes.size() / kCifarRecord;
    blobs.push_back(std::move(bytes));
  }

  Dataset ds;
  ds.inputs = Tensor({total, 3, 32, 32});
  ds.labels.resize(total);
  ds.num_classes = 10;
  double* p = ds.inputs.data();
  std::size_t rec = 0;
  // Resulting order is input-file order, then record order within a file.
  for (std::size_t f = 0; f < blobs.size(); ++f) {
    const auto& bytes = blobs[f];
    const std::size_t count = bytes.size() / kCifarRecord;
    for (std::size_t r = 0; r < count; ++r, ++rec) {
      const std::uint8_t* record = bytes.data() + r * kCifarRecord;
      if (record[0] >= 10) {
        throw FormatError(batch_files[f] + ": label byte " + std::to_string(int(record[0])) +
                          " out of range at record " + std::to_string(r));
      }
      ds.labels[rec] = record[0];
      double* out = p + rec * 3072;
      for (std::size_t i = 0; i < 3072; ++i) {
        out[i] = static_cast<double>(record[1 + i]) / 255.0;
      }
    }
  }
  return ds;
}

Tensor blob_centers(std::size_t num_classes, std::size_t dim) {
  // Fixed internal seed: centers are a function of (num_classes, dim) only.
  Rng rng(0xb10b5ULL + 1315423911ULL * num_classes + 2654435761ULL * dim);
  Tensor centers({num_classes, dim});
  double* p = centers.data();
  for (std::size_t i = 0; i < centers.size(); ++i) p[i] = rng.uniform(-4.0, 4.0);
  return centers;
}

Dataset synth_blobs(std::size_t num_classes, std::size_t per_class, std::size_t dim,
                    double spread, std::uint64_t seed) {
  if (num_classes == 0 || per_class == 0 || dim == 0) {
    throw ConfigError("synth_blobs needs positive class count, per-class count and dimension");
  }
  const Tensor centers = blob_centers(num_classes, dim);
  const std::size_t n = num_classes * per_class;

  Dataset ds;
  ds.inputs = Tensor({n, dim});
  ds.labels.resize(n);
  ds.num_classes = num_classes;

  Rng rng(seed);
  // Interleave classes (0,1,...,k-1,0,1,...) so any prefix is balanced.
  double* p = ds.inputs.data();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % num_classes;
    ds.labels[i] = cls;
    const double* c = centers.data() + cls * dim;
    double* row = p + i * dim;
    for (std::size_t d = 0; d < dim; ++d) row[d] = c[d] + spread * rng.normal();
  }
  return ds;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch,
                                                    bool shuffle) {
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    Rng rng(mix_seed(seed, epoch));
    rng.shuffle(order);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

Batch gather(const Dataset& ds, std::span<const std::size_t> idx) {
  const std::size_t n = ds.size();
  const std::size_t row = ds.inputs.size() / (n == 0 ? 1 : n);
  std::vector<std::size_t> shape = ds.inputs.shape();
  shape[0] = idx.size();
  Batch b;
  b.inputs = Tensor(std::move(shape));
  b.labels.resize(idx.size());
  double* out = b.inputs.data();
  const double* in = ds.inputs.data();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= n) throw DomainError("batch index out of range");
    const double* src = in + idx[i] * row;
    double* dst = out + i * row;
    for (std::size_t j = 0; j < row; ++j) dst[j] = src[j];
    b.labels[i] = ds.labels[idx[i]];
  }
  return b;
}

Dataset subset(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  if (n >= ds.size()) {
    Dataset copy = ds;
    return copy;
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0x5b5e7));
  rng.shuffle(order);
  order.resize(n);

  Dataset out;
  Batch b = gather(ds, order);
  out.inputs = std::move(b.inputs);
  out.labels = std::move(b.labels);
  out.num_classes = ds.num_classes;
  out.split = ds.split;
  return out;
}

FeatureStats feature_stats(const Dataset& ds) {
  const std::size_t n = ds.size();
  if (n == 0) throw DomainError("feature_stats of an empty dataset");
  const std::size_t row = ds.inputs.size() / n;
  FeatureStats st;
  st.mean.assign(row, 0.0);
  st.stddev.assign(row, 0.0);
  const double* p = ds.inputs.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < row; ++j) st.mean[j] += p[i * row + j];
  }
  for (std::size_t j = 0; j < row; ++j) st.mean[j] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < row; ++j) {
      const double d = p[i * row + j] - st.mean[j];
      st.stddev[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < row; ++j) {
    st.stddev[j] = std::sqrt(st.stddev[j] / static_cast<double>(n));
    if (st.stddev[j] < 1e-12) st.stddev[j] = 1e-12;
  }
  return st;
}

void standardize(Dataset& ds, const FeatureStats& stats) {
  const std::size_t n = ds.size();
  const std::size_t row = ds.inputs.size() / (n == 0 ? 1 : n);
  if (stats.mean.size() != row) throw DimensionError("feature stats do not match dataset width");
  double* p = ds.inputs.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < row; ++j) {
      p[i * row + j] = (p[i * row + j] - stats.mean[j]) / stats.stddev[j];
    }
  }
}

}  // namespace gradnet
