#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ace/logits.hpp"

namespace ace {

// Fused inference output: per-category logits, softmax confidences, and the
// argmax label per row (ties broken toward the lowest category index).
struct Prediction {
  Array logits;
  Array confidences;
  std::vector<CategoryId> labels;
};

enum class AggregatorKind { AvgScaled, Max, Concat, AvgRaw };

AggregatorKind aggregator_from_name(std::string_view name);
std::string aggregator_name(AggregatorKind kind);

// Logits rescaled by classifier weight norms relative to expert 1:
// scaled_i = (|w_i|^2 / |w_1|^2) * raw_i. Expert 1 passes through unchanged.
std::vector<Array> rescale(const LogitBundle& bundle);

// Per-category mean of the scaled logits over the experts trained on that
// category.
Prediction group_average(const LogitBundle& bundle,
                         std::span<const ExpertAssignment> assignments);

// Per-category max of the scaled logits over the experts trained on it.
Prediction group_max(const LogitBundle& bundle, std::span<const ExpertAssignment> assignments);

// Each category slice is read from the expert for which it is the newest
// addition (slice j -> expert j), using raw logits.
Prediction group_concat(const LogitBundle& bundle, std::span<const ExpertAssignment> assignments);

// group_average over raw logits, skipping the weight-norm rescaling.
Prediction group_average_unscaled(const LogitBundle& bundle,
                                  std::span<const ExpertAssignment> assignments);

Prediction aggregate(AggregatorKind kind, const LogitBundle& bundle,
                     std::span<const ExpertAssignment> assignments);

}  // namespace ace
