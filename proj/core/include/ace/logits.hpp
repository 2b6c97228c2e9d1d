#pragma once

#include <vector>

#include "ace/array.hpp"
#include "ace/planner.hpp"

namespace ace {

// Per-expert raw logits for one batch, the squared Frobenius norms of the
// classifier weights, and the norm-rescaled logits derived from them.
//
// In standard mode every expert emits all C categories. Under the
// split-specific classifier each expert i emits only its |TC_i| target
// columns, starting at tc_start[i]; expert 1 always spans all categories.
struct LogitBundle {
  std::vector<Array> raw;
  std::vector<double> weight_sq_norms;
  std::vector<Array> scaled;
  std::vector<CategoryId> tc_start;
  bool ssc = false;

  int experts() const { return static_cast<int>(raw.size()); }
  std::size_t batch_size() const { return raw.front().rows(); }
  int num_categories() const { return static_cast<int>(raw.front().cols()); }

  // Does expert (0-based ordinal) emit a logit for category c?
  bool covers(int expert, CategoryId c) const {
    return c >= tc_start[static_cast<std::size_t>(expert)] && c <= num_categories();
  }

  // Column of category c within expert's logit rows. Only valid when covers().
  std::size_t col(int expert, CategoryId c) const {
    return static_cast<std::size_t>(c - tc_start[static_cast<std::size_t>(expert)]);
  }

  double raw_logit(int expert, std::size_t row, CategoryId c) const {
    return raw[static_cast<std::size_t>(expert)].at(row, col(expert, c));
  }
  double scaled_logit(int expert, std::size_t row, CategoryId c) const {
    return scaled[static_cast<std::size_t>(expert)].at(row, col(expert, c));
  }
};

}  // namespace ace
