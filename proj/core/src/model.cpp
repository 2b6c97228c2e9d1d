#include "ace/model.hpp"

#include <cmath>
#include <string>

#include "ace/aggregate.hpp"
#include "ace/errors.hpp"
#include "ace/rng.hpp"

namespace ace {

void ModelConfig::validate() const {
  if (input_dim < 1) throw ConfigError("model: input_dim must be positive");
  if (trunk_width < 1 || branch_width < 1) throw ConfigError("model: widths must be positive");
  if (num_categories < 2) throw ConfigError("model: need at least 2 categories");
  if (num_experts < 1 || num_experts > num_categories) {
    throw ConfigError("model: need 1 <= K <= C");
  }
}

namespace {

Array init_uniform(std::size_t rows, std::size_t cols, int fan_in, Rng& rng) {
  double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  Array a(rows ? std::vector<std::size_t>{rows, cols} : std::vector<std::size_t>{cols});
  for (auto& v : a.values()) v = rng.uniform(-bound, bound);
  return a;
}

}  // namespace

AceModel::AceModel(const ModelConfig& config, std::uint64_t init_seed) : cfg_(config) {
  cfg_.validate();
  assignments_ = assign_experts(cfg_.num_categories, cfg_.num_experts);

  std::size_t d = static_cast<std::size_t>(cfg_.input_dim);
  std::size_t t = static_cast<std::size_t>(cfg_.trunk_width);
  std::size_t b = static_cast<std::size_t>(cfg_.branch_width);

  Rng rng(init_seed);
  params_.reserve(4 + 4 * static_cast<std::size_t>(cfg_.num_experts));
  params_.emplace_back("trunk.w1", init_uniform(d, t, cfg_.input_dim, rng));
  params_.emplace_back("trunk.b1", init_uniform(0, t, cfg_.input_dim, rng));
  params_.emplace_back("trunk.w2", init_uniform(t, t, cfg_.trunk_width, rng));
  params_.emplace_back("trunk.b2", init_uniform(0, t, cfg_.trunk_width, rng));
  for (int i = 0; i < cfg_.num_experts; ++i) {
    std::string prefix = "expert" + std::to_string(i + 1) + ".";
    std::size_t out = static_cast<std::size_t>(expert_width(i));
    params_.emplace_back(prefix + "branch_w", init_uniform(t, b, cfg_.trunk_width, rng));
    params_.emplace_back(prefix + "branch_b", init_uniform(0, b, cfg_.trunk_width, rng));
    params_.emplace_back(prefix + "cls_w", init_uniform(b, out, cfg_.branch_width, rng));
    params_.emplace_back(prefix + "scale", Array::full({out}, 1.0));
  }
}

int AceModel::expert_width(int ordinal) const {
  if (!cfg_.ssc) return cfg_.num_categories;
  const auto& a = assignments_[static_cast<std::size_t>(ordinal)];
  return static_cast<int>(a.target.size());
}

std::size_t AceModel::branch_base(int ordinal) const {
  return 4 + 4 * static_cast<std::size_t>(ordinal);
}

std::vector<graph::Parameter*> AceModel::parameters() {
  std::vector<graph::Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<graph::Parameter*> AceModel::trunk_parameters() {
  return {&params_[0], &params_[1], &params_[2], &params_[3]};
}

std::vector<graph::Parameter*> AceModel::branch_parameters(int ordinal) {
  std::size_t base = branch_base(ordinal);
  return {&params_[base], &params_[base + 1], &params_[base + 2], &params_[base + 3]};
}

AceModel::Forward AceModel::forward(graph::Tape& tape, const Array& inputs) {
  if (inputs.rank() != 2 || inputs.cols() != static_cast<std::size_t>(cfg_.input_dim)) {
    throw DimensionError("forward: inputs " + inputs.shape_string() + ", expected Bx" +
                         std::to_string(cfg_.input_dim));
  }
  using namespace graph;
  Var x = tape.input(inputs);
  Var h1 = relu(add(matmul(x, tape.param(params_[0])), tape.param(params_[1])));
  Var h = relu(add(matmul(h1, tape.param(params_[2])), tape.param(params_[3])));

  Forward fwd;
  fwd.features = h;
  fwd.bundle.ssc = cfg_.ssc;
  for (int i = 0; i < cfg_.num_experts; ++i) {
    std::size_t base = branch_base(i);
    Var hi = (i == 0) ? h : stop_gradient(h);
    Var gi = relu(add(matmul(hi, tape.param(params_[base])), tape.param(params_[base + 1])));
    Var zi = mul(matmul(gi, tape.param(params_[base + 2])), tape.param(params_[base + 3]));
    fwd.logits.push_back(zi);

    const Array& w = params_[base + 2].value;
    double sq = 0.0;
    for (double v : w.values()) sq += v * v;
    fwd.bundle.raw.push_back(zi.value());
    fwd.bundle.weight_sq_norms.push_back(sq);
    fwd.bundle.tc_start.push_back(
        cfg_.ssc ? assignments_[static_cast<std::size_t>(i)].target_start() : 1);
  }
  fwd.bundle.scaled = rescale(fwd.bundle);
  return fwd;
}

std::vector<Array> AceModel::snapshot_values() const {
  std::vector<Array> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.value);
  return out;
}

void AceModel::restore_values(const std::vector<Array>& values) {
  if (values.size() != params_.size()) throw ContractError("restore_values: size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i].same_shape(params_[i].value)) {
      throw ContractError("restore_values: shape mismatch for " + params_[i].name);
    }
    params_[i].value = values[i];
  }
}

graph::Var expert_cls_loss(graph::Var sub_logits, const Array& targets) {
  graph::Tape& tape = *sub_logits.tape();
  return softmax_cross_entropy(sub_logits, tape.input(targets));
}

graph::Var expert_com_loss(graph::Var sub_logits, const ExpertAssignment& assignment, bool ssc) {
  graph::Tape& tape = *sub_logits.tape();
  if (ssc || assignment.interfering.empty()) return tape.input(Array::scalar(0.0));
  const Array& z = sub_logits.value();
  Array mask({z.cols()});
  for (CategoryId c : assignment.interfering) mask[static_cast<std::size_t>(c - 1)] = 1.0;
  graph::Var masked = mul(sub_logits, tape.input(mask));
  return scale(sum_squares(masked), 1.0 / static_cast<double>(z.rows()));
}

graph::Var expert_total_loss(graph::Var sub_logits, const Array& targets,
                             const ExpertAssignment& assignment, double lambda_com, bool ssc) {
  if (lambda_com < 0.0) throw ConfigError("expert_total_loss: lambda_com must be >= 0");
  graph::Var cls = expert_cls_loss(sub_logits, targets);
  if (ssc || assignment.interfering.empty() || lambda_com == 0.0) return cls;
  graph::Var com = expert_com_loss(sub_logits, assignment, ssc);
  return add(cls, scale(com, lambda_com));
}

Array expert_targets(std::span<const CategoryId> labels_a, std::span<const CategoryId> labels_b,
                     std::span<const double> lambda, std::span<const std::size_t> rows,
                     const ExpertAssignment& assignment, bool ssc) {
  CategoryId start = ssc ? assignment.target_start() : 1;
  std::size_t width = ssc ? assignment.target.size()
                          : static_cast<std::size_t>(assignment.last_category());
  Array t({rows.size(), width});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t r = rows[i];
    CategoryId a = labels_a[r];
    CategoryId b = labels_b[r];
    if (!assignment.targets(a) || !assignment.targets(b)) {
      throw ContractError("expert_targets: sub-batch row with non-target label");
    }
    double lam = lambda[r];
    t.at(i, static_cast<std::size_t>(a - start)) += lam;
    t.at(i, static_cast<std::size_t>(b - start)) += 1.0 - lam;
  }
  return t;
}

}  // namespace ace
