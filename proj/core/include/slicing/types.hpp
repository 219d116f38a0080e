#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

namespace slicing {

/// Stable identifier of a user across the whole run.
struct UserId {
  int value = 0;
  friend auto operator<=>(const UserId&, const UserId&) = default;
  friend std::ostream& operator<<(std::ostream& os, UserId id) { return os << id.value; }
};

/// Dense row-major matrix; rows are users, columns are PRBs throughout.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// Independent, reproducible RNG streams keyed by (seed, purpose, index).
// Purposes keep placement, fading and Monte-Carlo draws from sharing state.
enum class StreamPurpose : std::uint32_t { Placement = 1, Fading = 2, Traffic = 3, Oracle = 4 };

inline std::mt19937_64 make_stream(std::uint64_t seed, StreamPurpose purpose,
                                   std::uint64_t a = 0, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace slicing
