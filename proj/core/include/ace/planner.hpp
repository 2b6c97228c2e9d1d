#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ace {

// Categories are 1-based and sorted by descending training count, so
// category 1 is the most frequent and category C the rarest.
using CategoryId = std::int32_t;

// Per-category training-sample counts, descending. Source of every
// distribution-aware decision (expert splits, learning rates, frequency
// splits).
struct ClassProfile {
  std::vector<std::int64_t> counts;

  int num_categories() const { return static_cast<int>(counts.size()); }
  std::int64_t count(CategoryId c) const { return counts[static_cast<std::size_t>(c - 1)]; }
  std::int64_t total() const;
  void validate() const;  // throws ConfigError if empty, zero, or not descending
};

// One expert's category split. target is always the suffix {start..C},
// interfering the complementary prefix; expert 1 targets everything.
struct ExpertAssignment {
  int expert_index = 1;  // 1..K
  std::vector<CategoryId> target;
  std::vector<CategoryId> interfering;

  CategoryId target_start() const { return target.front(); }
  CategoryId last_category() const { return target.back(); }
  bool targets(CategoryId c) const { return c >= target.front() && c <= target.back(); }
};

// Nested target/interfering splits for K experts over C categories: expert i
// targets {floor((i-1)*C/K)+1 .. C}. K=1 degenerates to a plain classifier.
std::vector<ExpertAssignment> assign_experts(int num_categories, int num_experts);

// Row indices of the batch samples whose label lies in the assignment's
// target set, in batch order. May be empty.
std::vector<std::size_t> sub_batch_indices(std::span<const CategoryId> labels,
                                           const ExpertAssignment& assignment);

// Mixed-pair variant: a row qualifies only when both constituent labels are
// target categories, so interfering supervision never leaks into an expert.
std::vector<std::size_t> sub_batch_indices(std::span<const CategoryId> labels_a,
                                           std::span<const CategoryId> labels_b,
                                           const ExpertAssignment& assignment);

// The experts trained with class c, ascending. By nesting this is a prefix
// {1..j} of expert indices that grows as c gets rarer; never empty.
std::vector<int> expert_set_for_class(CategoryId c,
                                      std::span<const ExpertAssignment> assignments);

}  // namespace ace
