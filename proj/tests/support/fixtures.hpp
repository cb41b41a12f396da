#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gradnet::testsupport {

// Raw IDX / CIFAR-10 writers. These build the byte stream independently of
// the parsers so round-trip tests compare against ground truth.

// images: one vector of rows*cols bytes per image.
std::vector<std::uint8_t> idx_image_bytes(const std::vector<std::vector<std::uint8_t>>& images,
                                          std::uint32_t rows, std::uint32_t cols);
std::vector<std::uint8_t> idx_label_bytes(const std::vector<std::uint8_t>& labels);

// records: label byte + 3072 pixel bytes each.
std::vector<std::uint8_t> cifar_batch_bytes(const std::vector<std::uint8_t>& labels,
                                            const std::vector<std::vector<std::uint8_t>>& pixels);

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

// ----------------------------------------------------------------------
// Synthetic desk-scale image corpora. Each class gets a fixed smooth
// template (Gaussian bumps for the 28x28 set, a low-frequency color field
// for the 32x32 set); samples are shifted, gain-jittered and noised copies.
// Deterministic given the seed.
// ----------------------------------------------------------------------

struct ImageSetOptions {
  std::size_t classes = 10;
  double noise = 0.25;    // additive pixel noise stddev (in [0,1] units)
  int max_shift = 3;      // per-sample translation in pixels
  std::uint64_t seed = 123;       // drives the class templates
  std::uint64_t sample_salt = 0;  // varies the sample stream (train vs test)
  // color set only: fraction of a shared base field mixed into every class
  // template; higher values make the classes harder to tell apart
  double base_mix = 0.9;
};

struct ByteImageSet {
  std::vector<std::vector<std::uint8_t>> images;
  std::vector<std::uint8_t> labels;
  std::uint32_t rows = 0, cols = 0, channels = 1;
};

ByteImageSet make_digit_like_set(std::size_t count, const ImageSetOptions& opt);
ByteImageSet make_color_image_set(std::size_t count, const ImageSetOptions& opt);

// Writes train-images-idx3-ubyte / train-labels-idx1-ubyte /
// t10k-images-idx3-ubyte / t10k-labels-idx1-ubyte under dir.
void write_mnist_fixture(const std::string& dir, std::size_t n_train, std::size_t n_test,
                         const ImageSetOptions& opt);

// Writes data_batch_1.bin and test_batch.bin under dir.
void write_cifar_fixture(const std::string& dir, std::size_t n_train, std::size_t n_test,
                         const ImageSetOptions& opt);

}  // namespace gradnet::testsupport
