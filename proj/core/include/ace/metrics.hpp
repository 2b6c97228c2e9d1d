#pragma once

#include <string>
#include <vector>

#include "ace/data.hpp"

namespace ace {

// Stratified evaluation output. Accuracies are percentages in [0, 100].
struct MetricsReport {
  double overall = 0.0;
  double many = 0.0;
  double medium = 0.0;
  double few = 0.0;
  std::vector<double> per_category;

  // Expert-alone diagnostics (raw logits restricted to the expert's target
  // categories) plus the mean absolute interfering-category logit.
  struct ExpertDiag {
    double overall = 0.0;
    double many = 0.0;
    double medium = 0.0;
    double few = 0.0;
    double mean_ic_logit = 0.0;
  };
  std::vector<ExpertDiag> experts;

  std::vector<std::int64_t> test_counts;       // rows per category
  std::vector<FrequencyTag> category_tags;     // many/medium/few per category

  std::string to_json() const;
  static MetricsReport from_json(const std::string& text);
};

// CSV rows for a family of runs. Leading label columns identify the cell.
struct MetricsRow {
  std::string variant;
  std::string scheme;
  std::string aggregator;
  std::uint64_t seed = 0;
  MetricsReport metrics;
};

std::string metrics_csv_header(int num_categories, int num_experts);
std::string metrics_csv_row(const MetricsRow& row);
void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path);

}  // namespace ace
