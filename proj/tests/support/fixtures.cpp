#include "support/fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gradnet/errors.hpp"
#include "gradnet/rng.hpp"

namespace gradnet::testsupport {

namespace {

void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint8_t to_byte(double v) {
  if (v < 0.0) v = 0.0;
  if (v > 1.0) v = 1.0;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

}  // namespace

std::vector<std::uint8_t> idx_image_bytes(const std::vector<std::vector<std::uint8_t>>& images,
                                          std::uint32_t rows, std::uint32_t cols) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.size() * rows * cols);
  push_be32(out, 0x00000803);
  push_be32(out, static_cast<std::uint32_t>(images.size()));
  push_be32(out, rows);
  push_be32(out, cols);
  for (const auto& img : images) out.insert(out.end(), img.begin(), img.end());
  return out;
}

std::vector<std::uint8_t> idx_label_bytes(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  push_be32(out, 0x00000801);
  push_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

std::vector<std::uint8_t> cifar_batch_bytes(const std::vector<std::uint8_t>& labels,
                                            const std::vector<std::vector<std::uint8_t>>& pixels) {
  std::vector<std::uint8_t> out;
  out.reserve(labels.size() * 3073);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.push_back(labels[i]);
    out.insert(out.end(), pixels[i].begin(), pixels[i].end());
  }
  return out;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw gradnet::IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

namespace {

// 28x28 grayscale class template: signed Gaussian bumps cut at zero, which
// yields distinct glyph-like shapes instead of one centered blob.
std::vector<double> digit_template(std::size_t cls, std::uint64_t seed) {
  constexpr int kSize = 28;
  Rng rng(mix_seed(seed, 1000 + cls));
  std::vector<double> t(kSize * kSize, 0.0);
  for (int bump = 0; bump < 6; ++bump) {
    const double cx = rng.uniform(4.0, 24.0);
    const double cy = rng.uniform(4.0, 24.0);
    const double sigma = rng.uniform(1.8, 3.5);
    const double amp = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    for (int y = 0; y < kSize; ++y) {
      for (int x = 0; x < kSize; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        t[y * kSize + x] += amp * std::exp(-d2 / (2.0 * sigma * sigma));
      }
    }
  }
  double mx = 0.0;
  for (double& v : t) {
    if (v < 0.0) v = 0.0;
    mx = std::max(mx, v);
  }
  if (mx > 0.0) {
    for (double& v : t) v /= mx;
  }
  return t;
}

// 8x8 random grid bilinearly upsampled to 32x32: a smooth random field.
std::vector<double> smooth_field(Rng& rng) {
  constexpr int kSize = 32, kGrid = 8;
  double grid[kGrid][kGrid];
  for (auto& row : grid) {
    for (double& v : row) v = rng.uniform(0.0, 1.0);
  }
  std::vector<double> t(kSize * kSize, 0.0);
  for (int y = 0; y < kSize; ++y) {
    for (int x = 0; x < kSize; ++x) {
      const double gy = y * (kGrid - 1.0) / (kSize - 1.0);
      const double gx = x * (kGrid - 1.0) / (kSize - 1.0);
      const int y0 = static_cast<int>(gy), x0 = static_cast<int>(gx);
      const int y1 = std::min(y0 + 1, kGrid - 1), x1 = std::min(x0 + 1, kGrid - 1);
      const double fy = gy - y0, fx = gx - x0;
      t[y * kSize + x] = grid[y0][x0] * (1 - fy) * (1 - fx) + grid[y0][x1] * (1 - fy) * fx +
                         grid[y1][x0] * fy * (1 - fx) + grid[y1][x1] * fy * fx;
    }
  }
  return t;
}

// 3x32x32 color class template: a class-specific smooth field blended with
// a base field all classes share. The shared part plus the per-sample
// shifts keep nearest-centroid matching well below a trained CNN.
std::vector<double> color_template(std::size_t cls, std::uint64_t seed, double base_mix) {
  constexpr int kSize = 32;
  std::vector<double> t(3 * kSize * kSize, 0.0);
  for (int ch = 0; ch < 3; ++ch) {
    Rng base_rng(mix_seed(seed, 3000 + ch));
    const std::vector<double> base = smooth_field(base_rng);
    Rng dev_rng(mix_seed(seed, 2000 + cls * 3 + ch));
    const std::vector<double> dev = smooth_field(dev_rng);
    for (int i = 0; i < kSize * kSize; ++i) {
      t[ch * kSize * kSize + i] = base_mix * base[i] + (1.0 - base_mix) * dev[i];
    }
  }
  return t;
}

}  // namespace

ByteImageSet make_digit_like_set(std::size_t count, const ImageSetOptions& opt) {
  constexpr int kSize = 28;
  std::vector<std::vector<double>> templates;
  for (std::size_t c = 0; c < opt.classes; ++c) templates.push_back(digit_template(c, opt.seed));

  ByteImageSet set;
  set.rows = kSize;
  set.cols = kSize;
  set.channels = 1;
  Rng rng(mix_seed(opt.seed, 99 + opt.sample_salt));
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t cls = rng.index(opt.classes);
    const auto& t = templates[cls];
    const int span = 2 * opt.max_shift + 1;
    const int dx = static_cast<int>(rng.index(span)) - opt.max_shift;
    const int dy = static_cast<int>(rng.index(span)) - opt.max_shift;
    const double gain = rng.uniform(0.7, 1.3);
    std::vector<std::uint8_t> img(kSize * kSize);
    for (int y = 0; y < kSize; ++y) {
      for (int x = 0; x < kSize; ++x) {
        const int sy = y - dy, sx = x - dx;
        double v = 0.0;
        if (sy >= 0 && sy < kSize && sx >= 0 && sx < kSize) v = gain * t[sy * kSize + sx];
        v += opt.noise * rng.normal();
        img[y * kSize + x] = to_byte(v);
      }
    }
    set.images.push_back(std::move(img));
    set.labels.push_back(static_cast<std::uint8_t>(cls));
  }
  return set;
}

ByteImageSet make_color_image_set(std::size_t count, const ImageSetOptions& opt) {
  constexpr int kSize = 32;
  std::vector<std::vector<double>> templates;
  for (std::size_t c = 0; c < opt.classes; ++c) {
    templates.push_back(color_template(c, opt.seed, opt.base_mix));
  }

  ByteImageSet set;
  set.rows = kSize;
  set.cols = kSize;
  set.channels = 3;
  Rng rng(mix_seed(opt.seed, 77 + opt.sample_salt));
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t cls = rng.index(opt.classes);
    const auto& t = templates[cls];
    const int span = 2 * opt.max_shift + 1;
    const int dx = static_cast<int>(rng.index(span)) - opt.max_shift;
    const int dy = static_cast<int>(rng.index(span)) - opt.max_shift;
    std::vector<std::uint8_t> img(3 * kSize * kSize);
    for (int ch = 0; ch < 3; ++ch) {
      const double gain = rng.uniform(0.8, 1.2);
      for (int y = 0; y < kSize; ++y) {
        for (int x = 0; x < kSize; ++x) {
          // circular shift keeps the full pattern in frame
          const int sy = ((y - dy) % kSize + kSize) % kSize;
          const int sx = ((x - dx) % kSize + kSize) % kSize;
          double v = gain * t[(ch * kSize + sy) * kSize + sx];
          v += opt.noise * rng.normal();
          img[(ch * kSize + y) * kSize + x] = to_byte(v);
        }
      }
    }
    set.images.push_back(std::move(img));
    set.labels.push_back(static_cast<std::uint8_t>(cls));
  }
  return set;
}

void write_mnist_fixture(const std::string& dir, std::size_t n_train, std::size_t n_test,
                         const ImageSetOptions& opt) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  ImageSetOptions train_opt = opt;
  ImageSetOptions test_opt = opt;
  test_opt.sample_salt = opt.sample_salt + 1;  // same templates, new samples

  const ByteImageSet train = make_digit_like_set(n_train, train_opt);
  const ByteImageSet test = make_digit_like_set(n_test, test_opt);
  write_bytes((fs::path(dir) / "train-images-idx3-ubyte").string(),
              idx_image_bytes(train.images, train.rows, train.cols));
  write_bytes((fs::path(dir) / "train-labels-idx1-ubyte").string(),
              idx_label_bytes(train.labels));
  write_bytes((fs::path(dir) / "t10k-images-idx3-ubyte").string(),
              idx_image_bytes(test.images, test.rows, test.cols));
  write_bytes((fs::path(dir) / "t10k-labels-idx1-ubyte").string(), idx_label_bytes(test.labels));
}

void write_cifar_fixture(const std::string& dir, std::size_t n_train, std::size_t n_test,
                         const ImageSetOptions& opt) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  ImageSetOptions test_opt = opt;
  test_opt.sample_salt = opt.sample_salt + 1;  // same templates, new samples

  const ByteImageSet train = make_color_image_set(n_train, opt);
  const ByteImageSet test = make_color_image_set(n_test, test_opt);
  write_bytes((fs::path(dir) / "data_batch_1.bin").string(),
              cifar_batch_bytes(train.labels, train.images));
  write_bytes((fs::path(dir) / "test_batch.bin").string(),
              cifar_batch_bytes(test.labels, test.images));
}

}  // namespace gradnet::testsupport
