#pragma once

#include <cmath>
#include <vector>

#include "ace/array.hpp"
#include "ace/rng.hpp"

namespace ace::testing {

inline Array random_array(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0,
                          double hi = 1.0) {
  Array a(std::move(shape));
  for (auto& v : a.values()) v = rng.uniform(lo, hi);
  return a;
}

// Random values bounded away from zero, for kinked ops like relu.
inline Array random_array_nonzero(std::vector<std::size_t> shape, Rng& rng,
                                  double margin = 0.05) {
  Array a(std::move(shape));
  for (auto& v : a.values()) {
    double x = rng.uniform(margin, 1.0);
    v = rng.uniform() < 0.5 ? -x : x;
  }
  return a;
}

// Rows of positive weights summing to one (valid cross-entropy targets).
inline Array random_simplex_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  Array t({rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      t.at(r, c) = rng.uniform(0.05, 1.0);
      sum += t.at(r, c);
    }
    for (std::size_t c = 0; c < cols; ++c) t.at(r, c) /= sum;
  }
  return t;
}

inline bool bitwise_equal(const Array& a, const Array& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
  }
  return true;
}

inline double max_abs_diff(const Array& a, const Array& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace ace::testing
