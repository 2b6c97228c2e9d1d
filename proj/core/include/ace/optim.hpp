#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ace/graph.hpp"
#include "ace/planner.hpp"

namespace ace {

// Per-expert learning-rate scaling: linear multiplies the base rate by the
// fraction of training samples in the expert's target set, sqrt by its square
// root, uniform not at all.
enum class LrScheme { Linear, Sqrt, Uniform };

LrScheme lr_scheme_from_name(std::string_view name);
std::string lr_scheme_name(LrScheme scheme);

struct OptimConfig {
  double base_lr = 0.1;
  double momentum = 0.9;
  LrScheme scheme = LrScheme::Linear;
  std::vector<double> milestones = {0.8, 0.9};  // epoch fractions in (0,1)
  double decay = 0.1;
  int epochs = 60;  // schedule horizon
  double weight_decay = 0.0;

  void validate() const;
};

// Base learning rate scaled for one expert by the configured scheme. Expert 1
// always trains at the base rate.
double expert_lr(LrScheme scheme, double base_lr, const ClassProfile& profile,
                 const ExpertAssignment& assignment);

// Step decay: lr * decay^(milestones passed), where milestone epochs are
// floor(fraction * epochs).
double scheduled_lr(double lr, int epoch, const OptimConfig& config);

// SGD with momentum: v <- momentum*v + g, p <- p - lr*v, gradients zeroed.
// Verifies every gradient is finite before touching any parameter; a
// non-finite gradient aborts the whole step.
void sgd_step(std::span<graph::Parameter* const> params, double lr, double momentum,
              double weight_decay = 0.0);

}  // namespace ace
