#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agibench {

// Error classes map onto CLI exit codes: config 2, data 3, model 4.
enum class ErrorKind { config, data, model };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Short machine-readable tag such as "header-mismatch".
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string code, const std::string& message) {
  throw Error(kind, std::move(code), message);
}

int exit_code_for(ErrorKind kind) noexcept;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void append_row(std::span<const double> values);
  Matrix select_rows(std::span<const std::size_t> indices) const;

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded generator with platform-independent distributions. The standard
/// library's distribution objects are implementation-defined, so draws are
/// computed here from raw 64-bit output to keep reports byte-identical.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() noexcept;
  double uniform() noexcept;  // [0, 1)
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  std::size_t index(std::size_t n) noexcept;  // uniform in [0, n)
  int poisson(double lambda) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stable 64-bit FNV-1a hash used for config and spec provenance.
std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 14695981039346656037ULL) noexcept;
std::string hex64(std::uint64_t v);

// Naive local time in seconds since 1970-01-01 00:00:00. No timezone arithmetic.
using Timestamp = std::int64_t;
inline constexpr Timestamp kSecondsPerHour = 3600;
inline constexpr Timestamp kSecondsPerDay = 86400;

/// Accepts "YYYY-MM-DD HH:MM:SS", "YYYY-MM-DDTHH:MM:SS" (optional trailing Z or
/// fractional seconds, which are truncated) and bare "YYYY-MM-DD".
bool parse_timestamp(std::string_view text, Timestamp& out);
std::string format_timestamp(Timestamp t);
Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour = 0, int minute = 0,
                         int second = 0);

constexpr Timestamp floor_div(Timestamp a, Timestamp b) noexcept {
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}
constexpr Timestamp day_start(Timestamp t) noexcept { return floor_div(t, kSecondsPerDay) * kSecondsPerDay; }
constexpr int hour_of_day(Timestamp t) noexcept {
  return static_cast<int>((t - day_start(t)) / kSecondsPerHour);
}

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
// Lowercase, spaces and underscores to hyphens.
std::string normalize_token(std::string_view s);

/// Deterministic text form of a double: shortest round-trip representation.
std::string format_double(double v);

}  // namespace agibench
