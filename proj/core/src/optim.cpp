#include "ace/optim.hpp"

#include <cmath>

#include "ace/errors.hpp"

namespace ace {

LrScheme lr_scheme_from_name(std::string_view name) {
  if (name == "linear") return LrScheme::Linear;
  if (name == "sqrt") return LrScheme::Sqrt;
  if (name == "uniform") return LrScheme::Uniform;
  throw ConfigError("unknown lr scheme '" + std::string(name) + "' (linear|sqrt|uniform)");
}

std::string lr_scheme_name(LrScheme scheme) {
  switch (scheme) {
    case LrScheme::Linear: return "linear";
    case LrScheme::Sqrt: return "sqrt";
    case LrScheme::Uniform: return "uniform";
  }
  return "?";
}

void OptimConfig::validate() const {
  if (base_lr <= 0.0) throw ConfigError("optim: base_lr must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("optim: momentum outside [0,1)");
  if (decay <= 0.0 || decay >= 1.0) throw ConfigError("optim: decay outside (0,1)");
  if (epochs < 0) throw ConfigError("optim: negative epoch count");
  if (weight_decay < 0.0) throw ConfigError("optim: negative weight decay");
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    if (milestones[i] <= 0.0 || milestones[i] >= 1.0) {
      throw ConfigError("optim: milestone fractions must lie in (0,1)");
    }
    if (i > 0 && milestones[i] <= milestones[i - 1]) {
      throw ConfigError("optim: milestones must be strictly increasing");
    }
  }
}

double expert_lr(LrScheme scheme, double base_lr, const ClassProfile& profile,
                 const ExpertAssignment& assignment) {
  profile.validate();
  if (assignment.last_category() != profile.num_categories()) {
    throw ConfigError("expert_lr: assignment covers " +
                      std::to_string(assignment.last_category()) + " categories, profile has " +
                      std::to_string(profile.num_categories()));
  }
  if (scheme == LrScheme::Uniform) return base_lr;
  std::int64_t in_target = 0;
  for (CategoryId c : assignment.target) in_target += profile.count(c);
  double ratio = static_cast<double>(in_target) / static_cast<double>(profile.total());
  return scheme == LrScheme::Linear ? base_lr * ratio : base_lr * std::sqrt(ratio);
}

double scheduled_lr(double lr, int epoch, const OptimConfig& config) {
  if (epoch < 0 || epoch >= config.epochs) {
    throw ContractError("scheduled_lr: epoch " + std::to_string(epoch) + " outside 0.." +
                        std::to_string(config.epochs - 1));
  }
  int passed = 0;
  for (double frac : config.milestones) {
    int at = static_cast<int>(frac * config.epochs);
    if (epoch >= at) ++passed;
  }
  double out = lr;
  for (int i = 0; i < passed; ++i) out *= config.decay;
  return out;
}

void sgd_step(std::span<graph::Parameter* const> params, double lr, double momentum,
              double weight_decay) {
  for (auto* p : params) {
    if (!p->gradient.all_finite()) {
      throw ContractError("sgd_step: non-finite gradient in '" + p->name + "'; step aborted");
    }
  }
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      double g = p->gradient[i];
      if (weight_decay != 0.0) g += weight_decay * p->value[i];
      p->velocity[i] = momentum * p->velocity[i] + g;
      p->value[i] -= lr * p->velocity[i];
    }
    p->zero_grad();
  }
}

}  // namespace ace
