#include "ace/aggregate.hpp"

#include <algorithm>
#include <cmath>

#include "ace/errors.hpp"

namespace ace {

AggregatorKind aggregator_from_name(std::string_view name) {
  if (name == "avg_scaled") return AggregatorKind::AvgScaled;
  if (name == "max") return AggregatorKind::Max;
  if (name == "concat") return AggregatorKind::Concat;
  if (name == "avg_raw") return AggregatorKind::AvgRaw;
  throw ConfigError("unknown aggregator '" + std::string(name) +
                    "' (avg_scaled|max|concat|avg_raw)");
}

std::string aggregator_name(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::AvgScaled: return "avg_scaled";
    case AggregatorKind::Max: return "max";
    case AggregatorKind::Concat: return "concat";
    case AggregatorKind::AvgRaw: return "avg_raw";
  }
  return "?";
}

std::vector<Array> rescale(const LogitBundle& bundle) {
  if (bundle.raw.empty()) throw ContractError("rescale: empty bundle");
  double base = bundle.weight_sq_norms.front();
  if (!(base > 0.0)) throw ContractError("rescale: first expert weight norm must be positive");
  std::vector<Array> scaled;
  scaled.reserve(bundle.raw.size());
  scaled.push_back(bundle.raw.front());
  for (std::size_t i = 1; i < bundle.raw.size(); ++i) {
    double ratio = bundle.weight_sq_norms[i] / base;
    Array z = bundle.raw[i];
    for (auto& v : z.values()) v *= ratio;
    scaled.push_back(std::move(z));
  }
  return scaled;
}

namespace {

Prediction finish(Array fused) {
  Prediction p;
  std::size_t rows = fused.rows(), cols = fused.cols();
  p.confidences = Array({rows, cols});
  p.labels.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    double m = fused.at(r, 0);
    for (std::size_t c = 1; c < cols; ++c) {
      if (fused.at(r, c) > m) {
        m = fused.at(r, c);
        best = c;
      }
    }
    double denom = 0.0;
    for (std::size_t c = 0; c < cols; ++c) denom += std::exp(fused.at(r, c) - m);
    for (std::size_t c = 0; c < cols; ++c)
      p.confidences.at(r, c) = std::exp(fused.at(r, c) - m) / denom;
    p.labels[r] = static_cast<CategoryId>(best + 1);
  }
  p.logits = std::move(fused);
  return p;
}

void check_bundle(const LogitBundle& bundle, std::span<const ExpertAssignment> assignments) {
  if (bundle.raw.empty() || assignments.empty() ||
      bundle.raw.size() != assignments.size()) {
    throw ContractError("aggregate: bundle and assignments disagree on expert count");
  }
}

// Average (or max) of per-expert logits over S^c, reading raw or scaled.
Prediction group_reduce(const LogitBundle& bundle, std::span<const ExpertAssignment> assignments,
                        bool scaled, bool take_max) {
  check_bundle(bundle, assignments);
  std::size_t rows = bundle.batch_size();
  int C = bundle.num_categories();
  Array fused({rows, static_cast<std::size_t>(C)});
  for (CategoryId c = 1; c <= C; ++c) {
    std::vector<int> seen;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i].targets(c)) seen.push_back(static_cast<int>(i));
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = take_max ? -HUGE_VAL : 0.0;
      for (int i : seen) {
        double v = scaled ? bundle.scaled_logit(i, r, c) : bundle.raw_logit(i, r, c);
        acc = take_max ? std::max(acc, v) : acc + v;
      }
      if (!take_max) acc /= static_cast<double>(seen.size());
      fused.at(r, static_cast<std::size_t>(c - 1)) = acc;
    }
  }
  return finish(std::move(fused));
}

}  // namespace

Prediction group_average(const LogitBundle& bundle,
                         std::span<const ExpertAssignment> assignments) {
  return group_reduce(bundle, assignments, /*scaled=*/true, /*take_max=*/false);
}

Prediction group_max(const LogitBundle& bundle, std::span<const ExpertAssignment> assignments) {
  return group_reduce(bundle, assignments, /*scaled=*/true, /*take_max=*/true);
}

Prediction group_average_unscaled(const LogitBundle& bundle,
                                  std::span<const ExpertAssignment> assignments) {
  return group_reduce(bundle, assignments, /*scaled=*/false, /*take_max=*/false);
}

Prediction group_concat(const LogitBundle& bundle,
                        std::span<const ExpertAssignment> assignments) {
  check_bundle(bundle, assignments);
  std::size_t rows = bundle.batch_size();
  int C = bundle.num_categories();
  int K = bundle.experts();
  Array fused({rows, static_cast<std::size_t>(C)});
  for (int i = 0; i < K; ++i) {
    CategoryId from = assignments[static_cast<std::size_t>(i)].target_start();
    CategoryId to = (i + 1 < K) ? assignments[static_cast<std::size_t>(i + 1)].target_start() - 1
                                : static_cast<CategoryId>(C);
    for (CategoryId c = from; c <= to; ++c)
      for (std::size_t r = 0; r < rows; ++r)
        fused.at(r, static_cast<std::size_t>(c - 1)) = bundle.raw_logit(i, r, c);
  }
  return finish(std::move(fused));
}

Prediction aggregate(AggregatorKind kind, const LogitBundle& bundle,
                     std::span<const ExpertAssignment> assignments) {
  switch (kind) {
    case AggregatorKind::AvgScaled: return group_average(bundle, assignments);
    case AggregatorKind::Max: return group_max(bundle, assignments);
    case AggregatorKind::Concat: return group_concat(bundle, assignments);
    case AggregatorKind::AvgRaw: return group_average_unscaled(bundle, assignments);
  }
  throw ConfigError("aggregate: bad kind");
}

}  // namespace ace
