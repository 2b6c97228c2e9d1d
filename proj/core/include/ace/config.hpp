#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ace/model.hpp"
#include "ace/optim.hpp"

namespace ace {

// Full experiment configuration. A run is a pure function of this struct;
// every field maps 1:1 to a `section.key` in the flat key=value config file
// and to an identically named CLI flag.
struct RunConfig {
  struct Data {
    std::string source = "blobs";         // blobs | csv
    std::string profile = "exponential";  // exponential | pareto
    int classes = 10;
    int dim = 16;
    std::int64_t n_max = 500;
    double if_factor = 100.0;       // key: data.imbalance_factor
    std::int64_t pareto_n_min = 5;
    double separation = 1.0;
    double noise = 0.5;
    int test_per_class = 100;
    std::string train_csv;
    std::string test_csv;
    std::int64_t many_threshold = 100;
    std::int64_t few_threshold = 20;
  } data;

  struct Model {
    int experts = 3;
    int hidden = 32;
    int branch_width = 32;
    bool ssc = false;
  } model;

  double lambda_com = 1.0;  // key: loss.lambda_com

  OptimConfig optim;  // keys: optim.base_lr, .momentum, .scheme, .milestones, .decay, .weight_decay

  struct Train {
    int epochs = 60;
    int batch_size = 128;
    double mixup_alpha = 0.3;
    std::uint64_t seed = 0;
  } train;

  std::string aggregator = "avg_scaled";  // key: eval.aggregator
  std::string output_dir = "runs/out";    // key: output.dir

  void validate() const;
};

// One settable key of the flat config schema.
struct ConfigKey {
  std::string name;
  std::string help;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
  bool affects_model;  // participates in the checkpoint-compatibility hash
};

const std::vector<ConfigKey>& config_schema();

// key = value text, one line per key in schema order.
std::string serialize_config(const RunConfig& config);
void apply_config_line(RunConfig& config, const std::string& line, const std::string& where);
RunConfig load_config_file(const std::string& path);
void save_config_file(const RunConfig& config, const std::string& path);

// FNV-1a over the serialized model-affecting keys; stored in checkpoints so
// evaluation can detect an incompatible configuration.
std::uint64_t config_model_hash(const RunConfig& config);

}  // namespace ace
