#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ace/aggregate.hpp"
#include "ace/config.hpp"
#include "ace/data.hpp"
#include "ace/metrics.hpp"
#include "ace/model.hpp"

namespace ace {

struct EpochLog {
  int epoch = 0;
  std::vector<double> mean_loss;          // per expert; NaN when it never ran
  std::vector<double> lr;                 // per expert, post-schedule
  double wall_ms = 0.0;

  std::string to_json() const;
};

struct TrainResult {
  std::unique_ptr<AceModel> model;
  std::vector<EpochLog> log;
  Dataset train_data;
  Dataset test_data;
  bool aborted = false;          // non-finite loss; model restored to last good epoch
  std::string abort_reason;
};

// Train/test datasets for a config: synthesized blobs or CSV files.
// Blob generation draws from the run's "data" stream only.
std::pair<Dataset, Dataset> build_datasets(const RunConfig& config);

// Model sized for the config and dataset, initialized from the "init" stream.
std::unique_ptr<AceModel> build_model(const RunConfig& config, int num_categories, int dim);

// Full training loop: per batch, one shared forward pass, then per expert the
// sub-batch losses and a backward each; trunk steps at expert 1's rate, each
// branch at its own scheme-scaled rate. Pure function of the config.
TrainResult train(const RunConfig& config);

// Stratified evaluation with the chosen fusion rule; also reports each
// expert's solo accuracy (argmax over its target categories) and its mean
// absolute interfering-category logit.
MetricsReport evaluate(AceModel& model, const Dataset& test, AggregatorKind aggregator,
                       const FrequencySplits& splits);

// Epochs at the tail of the run that train without mixup (5% of the total).
int mixup_cutoff_epoch(int epochs);

struct AblationGrid {
  std::vector<std::string> variants = {"ace", "no_com", "ssc"};
  std::vector<std::string> schemes = {"linear", "sqrt", "uniform"};
  std::vector<std::string> aggregators = {"avg_scaled", "max", "concat", "avg_raw"};
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  int jobs = 1;
};

// Trains one model per (variant, scheme, seed) cell and evaluates it under
// every requested aggregator: one MetricsRow per grid point, in grid order.
std::vector<MetricsRow> run_ablation_suite(const RunConfig& base, const AblationGrid& grid);

// Applies an ablation variant name (ace | no_com | ssc) to a config.
RunConfig apply_variant(const RunConfig& base, const std::string& variant);

}  // namespace ace
