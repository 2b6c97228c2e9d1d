#include "ace/planner.hpp"

#include <numeric>
#include <string>

#include "ace/errors.hpp"

namespace ace {

std::int64_t ClassProfile::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

void ClassProfile::validate() const {
  if (counts.empty()) throw ConfigError("ClassProfile: no categories");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 1) {
      throw ConfigError("ClassProfile: count " + std::to_string(counts[i]) + " for category " +
                        std::to_string(i + 1));
    }
    if (i > 0 && counts[i] > counts[i - 1]) {
      throw ConfigError("ClassProfile: counts not descending at category " + std::to_string(i + 1));
    }
  }
}

std::vector<ExpertAssignment> assign_experts(int num_categories, int num_experts) {
  if (num_experts < 1 || num_experts > num_categories) {
    throw ConfigError("assign_experts: need 1 <= K <= C, got K=" + std::to_string(num_experts) +
                      " C=" + std::to_string(num_categories));
  }
  std::vector<ExpertAssignment> out(static_cast<std::size_t>(num_experts));
  for (int i = 1; i <= num_experts; ++i) {
    // Slice start: floor((i-1)*C/K) + 1. Exact for K | C, floor otherwise.
    int start = static_cast<int>((static_cast<std::int64_t>(i - 1) * num_categories) /
                                 num_experts) + 1;
    ExpertAssignment& a = out[static_cast<std::size_t>(i - 1)];
    a.expert_index = i;
    a.target.reserve(static_cast<std::size_t>(num_categories - start + 1));
    for (CategoryId c = start; c <= num_categories; ++c) a.target.push_back(c);
    a.interfering.reserve(static_cast<std::size_t>(start - 1));
    for (CategoryId c = 1; c < start; ++c) a.interfering.push_back(c);
  }
  return out;
}

namespace {

void check_label(CategoryId y, CategoryId num_categories) {
  if (y < 1 || y > num_categories) {
    throw ContractError("sub_batch: label " + std::to_string(y) + " outside 1.." +
                        std::to_string(num_categories));
  }
}

}  // namespace

std::vector<std::size_t> sub_batch_indices(std::span<const CategoryId> labels,
                                           const ExpertAssignment& assignment) {
  CategoryId C = assignment.last_category();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    check_label(labels[i], C);
    if (assignment.targets(labels[i])) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> sub_batch_indices(std::span<const CategoryId> labels_a,
                                           std::span<const CategoryId> labels_b,
                                           const ExpertAssignment& assignment) {
  if (labels_a.size() != labels_b.size()) {
    throw ContractError("sub_batch: label vectors differ in length");
  }
  CategoryId C = assignment.last_category();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    check_label(labels_a[i], C);
    check_label(labels_b[i], C);
    if (assignment.targets(labels_a[i]) && assignment.targets(labels_b[i])) rows.push_back(i);
  }
  return rows;
}

std::vector<int> expert_set_for_class(CategoryId c,
                                      std::span<const ExpertAssignment> assignments) {
  if (assignments.empty()) throw ContractError("expert_set_for_class: no assignments");
  CategoryId C = assignments.front().last_category();
  if (c < 1 || c > C) {
    throw ContractError("expert_set_for_class: category " + std::to_string(c) + " outside 1.." +
                        std::to_string(C));
  }
  std::vector<int> experts;
  for (const auto& a : assignments)
    if (a.targets(c)) experts.push_back(a.expert_index);
  return experts;
}

}  // namespace ace
