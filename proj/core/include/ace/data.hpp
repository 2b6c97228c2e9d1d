#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ace/array.hpp"
#include "ace/planner.hpp"
#include "ace/rng.hpp"

namespace ace {

enum class Split { Train, Test };

struct Dataset {
  Array features;                  // N x d
  std::vector<CategoryId> labels;  // 1..C; category 1 is the most frequent in train
  ClassProfile profile;            // train counts (shared by the matching test set)
  Split split = Split::Train;
  // Mapping back to the labels of the source data: original_labels[c-1] is
  // the source label of internal category c.
  std::vector<std::int64_t> original_labels;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }
  int num_categories() const { return profile.num_categories(); }
};

enum class FrequencyTag { Many, Medium, Few };

// Many/medium/few membership per category: many above the many threshold,
// few below the few threshold, medium in between (inclusive).
struct FrequencySplits {
  std::int64_t many_threshold = 100;
  std::int64_t few_threshold = 20;
  std::vector<FrequencyTag> membership;

  FrequencyTag tag(CategoryId c) const { return membership[static_cast<std::size_t>(c - 1)]; }
};

const char* frequency_tag_name(FrequencyTag tag);

// Exponentially decaying counts: counts[i] = round(n_max * IF^(-(i-1)/(C-1))),
// clamped at 1. The realized largest/smallest ratio approximates IF up to
// rounding.
ClassProfile exponential_profile(std::int64_t n_max, double imbalance_factor, int num_categories);

// Endpoint-anchored power-law counts: counts[i] = round(n_max * i^-gamma)
// with gamma solved so counts[C] = n_min.
ClassProfile pareto_profile(std::int64_t n_max, std::int64_t n_min, int num_categories);

// Largest class count divided by smallest.
double imbalance_factor(const ClassProfile& profile);

FrequencySplits frequency_splits(const ClassProfile& profile, std::int64_t many_threshold = 100,
                                 std::int64_t few_threshold = 20);

struct BlobSpec {
  int dim = 16;
  double separation = 1.0;    // distance of each category mean from the origin
  double noise = 0.5;         // isotropic Gaussian sigma around the mean
  int test_per_class = 100;   // balanced test split
};

// Synthetic separable data: deterministic unit-direction category means
// scaled by `separation`, train rows per the profile, balanced test split.
// Pure function of (spec, profile, seed).
std::pair<Dataset, Dataset> make_blobs(const BlobSpec& spec, const ClassProfile& profile,
                                       std::uint64_t seed);

// A mini-batch, possibly mixed: row i is lambda[i]*x_a + (1-lambda[i])*x_b
// with constituent labels labels_a[i]/labels_b[i]. Unmixed rows have
// labels_b == labels_a and lambda == 1.
struct MixedBatch {
  Array features;
  std::vector<CategoryId> labels_a;
  std::vector<CategoryId> labels_b;
  std::vector<double> lambda;

  std::size_t size() const { return labels_a.size(); }
};

MixedBatch gather_batch(const Dataset& data, std::span<const std::size_t> rows);

// Mixup with per-row Beta(alpha, alpha) weights and a random in-batch
// partner permutation. alpha = 0 returns the batch unchanged.
MixedBatch mixup(const MixedBatch& batch, double alpha, Rng& rng);

// One epoch of uniform sampling without replacement: a random permutation of
// all rows consumed in batch_size chunks (the final chunk may be short).
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t num_rows, std::size_t batch_size,
                                                    Rng& rng);

// Numeric CSV, one row per sample: d feature values then an integer label.
// Categories are re-indexed by descending training count; the source labels
// are kept in Dataset::original_labels.
Dataset load_csv_train(const std::string& path);
Dataset load_csv_test(const std::string& path, const Dataset& train);
void write_csv(const Dataset& data, const std::string& path);

// JSON list of per-category counts.
void write_profile_json(const ClassProfile& profile, const std::string& path);
ClassProfile load_profile_json(const std::string& path);

}  // namespace ace
