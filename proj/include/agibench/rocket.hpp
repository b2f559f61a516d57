#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "agibench/common.hpp"
#include "agibench/tabular.hpp"

namespace agibench {

/// One random dilated convolution over the sum of a channel subset.
struct RocketKernel {
  int length = 1;
  std::vector<double> weights;
  double bias = 0.0;
  int dilation = 1;
  int padding = 0;
  std::vector<std::size_t> channels;

  bool operator==(const RocketKernel&) const = default;
};

/// Random kernel bank for n x C series. Kernel i is drawn from its own
/// stream derived from (seed, i), so growing the bank keeps earlier kernels.
struct KernelBank {
  std::uint64_t seed = 0;
  std::size_t series_length = 1;
  std::size_t channels = 1;
  std::vector<RocketKernel> kernels;

  static KernelBank generate(std::uint64_t seed, std::size_t count, std::size_t series_length, std::size_t channels);

  std::size_t feature_count() const noexcept { return 2 * kernels.size(); }
  std::string to_json() const;
  static KernelBank from_json(const std::string& text);

  bool operator==(const KernelBank&) const = default;
};

/// PPV and max per kernel: [ppv_0, max_0, ppv_1, max_1, ...].
void rocket_transform(const KernelBank& bank, const Matrix& series, std::span<double> out);
std::vector<double> rocket_transform(const KernelBank& bank, const Matrix& series);

/// Transforms every series; OpenMP-parallel across samples.
Matrix rocket_transform_batch(const KernelBank& bank, std::span<const Matrix> series, int threads = 1);

struct SequenceModel {
  KernelBank bank;
  FittedClassifier head;
};

SequenceModel fit_sequence_model(const KernelBank& bank, const ClassifierSpec& head, std::span<const Matrix> samples,
                                 std::span<const std::uint8_t> labels, std::span<const double> weights = {},
                                 int threads = 1);

std::vector<double> predict_sequence(const SequenceModel& model, std::span<const Matrix> samples, int threads = 1);

}  // namespace agibench
