#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ace/graph.hpp"
#include "ace/logits.hpp"
#include "ace/planner.hpp"

namespace ace {

struct ModelConfig {
  int input_dim = 16;
  int trunk_width = 32;   // both trunk layers
  int branch_width = 32;  // per-expert branch layer
  int num_categories = 10;
  int num_experts = 3;
  bool ssc = false;  // split-specific classifier: branch i emits |TC_i| logits

  void validate() const;
};

// Shared two-layer relu trunk with K expert branches. Each branch is a relu
// layer followed by an unbiased linear classifier whose outputs pass through
// a learnable per-category scale. Branches beyond the first read the trunk
// through a stop-gradient barrier, so only expert 1 updates the trunk.
class AceModel {
public:
  AceModel(const ModelConfig& config, std::uint64_t init_seed);
  AceModel(const AceModel&) = delete;
  AceModel& operator=(const AceModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  std::span<const ExpertAssignment> assignments() const { return assignments_; }

  struct Forward {
    graph::Var features;              // trunk output as expert 1 sees it
    std::vector<graph::Var> logits;   // raw z_i per expert, on the tape
    LogitBundle bundle;               // plain-value snapshot incl. scaled logits
  };
  Forward forward(graph::Tape& tape, const Array& inputs);

  // Parameters in fixed declaration order (trunk first, then each branch).
  std::vector<graph::Parameter*> parameters();
  std::vector<graph::Parameter*> trunk_parameters();
  // Branch layer + classifier + scale of one expert (0-based ordinal).
  std::vector<graph::Parameter*> branch_parameters(int ordinal);

  // Logit width of one expert: C, or |TC_i| under ssc.
  int expert_width(int ordinal) const;

  std::vector<Array> snapshot_values() const;
  void restore_values(const std::vector<Array>& values);

private:
  ModelConfig cfg_;
  std::vector<ExpertAssignment> assignments_;
  std::vector<graph::Parameter> params_;  // fixed layout, stable addresses
  std::size_t branch_base(int ordinal) const;
};

// Classification loss of one expert: softmax cross-entropy of the sub-batch
// logits against target rows over the same columns, mean-reduced.
graph::Var expert_cls_loss(graph::Var sub_logits, const Array& targets);

// Complement loss: mean over sub-batch rows of the summed squared logits of
// the interfering categories. Exactly zero for expert 1 and under ssc.
graph::Var expert_com_loss(graph::Var sub_logits, const ExpertAssignment& assignment,
                           bool ssc);

// cls + lambda_com * com. lambda_com = 0 drops the complement term.
graph::Var expert_total_loss(graph::Var sub_logits, const Array& targets,
                             const ExpertAssignment& assignment, double lambda_com, bool ssc);

// Target rows for the selected sub-batch rows of one expert, over the
// expert's logit columns. Mixed pairs contribute lambda to label_a's column
// and 1-lambda to label_b's.
Array expert_targets(std::span<const CategoryId> labels_a, std::span<const CategoryId> labels_b,
                     std::span<const double> lambda, std::span<const std::size_t> rows,
                     const ExpertAssignment& assignment, bool ssc);

}  // namespace ace
