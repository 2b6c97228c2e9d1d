#include "ace/graph.hpp"

#include <algorithm>
#include <cmath>

#include "ace/errors.hpp"

namespace ace::graph {

namespace {

const char* op_name(EwOp op) {
  switch (op) {
    case EwOp::Add: return "add";
    case EwOp::Sub: return "sub";
    case EwOp::Mul: return "mul";
  }
  return "?";
}

// Elementwise operands combine three ways: same shape, scalar against
// anything, or a single row against a matrix with matching columns.
enum class Bcast { None, Scalar, Row };

Bcast broadcast_kind(const Array& small, const Array& big) {
  if (small.same_shape(big)) return Bcast::None;
  if (small.size() == 1) return Bcast::Scalar;
  if (small.rows() == 1 && small.cols() == big.cols() && big.rank() == 2) return Bcast::Row;
  throw DimensionError(std::string("elementwise: incompatible shapes ") + small.shape_string() +
                       " vs " + big.shape_string());
}

std::size_t bcast_index(const Array& a, std::size_t r, std::size_t c, std::size_t cols) {
  if (a.size() == 1) return 0;
  if (a.rows() == 1 && a.size() == cols) return c;
  return r * cols + c;
}

}  // namespace

const Array& Var::value() const { return tape_->value(*this); }

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Tape::Node& Tape::node(Var v) const { return nodes_[static_cast<std::size_t>(v.id())]; }

void Tape::check_owned(Var v, const char* op) const {
  if (v.tape() != this || v.id() < 0 || v.id() >= static_cast<int>(nodes_.size())) {
    throw ContractError(std::string(op) + ": operand does not belong to this tape");
  }
}

const Array& Tape::value(Var v) const {
  check_owned(v, "value");
  return node(v).value;
}

const Array& Tape::adjoint(Var v) const {
  check_owned(v, "adjoint");
  return node(v).adjoint;
}

Var Tape::input(Array v) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(v);
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  Var v = input(p.value);
  bindings_.emplace_back(v.id(), &p);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  check_owned(a, "matmul");
  check_owned(b, "matmul");
  const Array& A = node(a).value;
  const Array& B = node(b).value;
  if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows()) {
    throw DimensionError("matmul: " + A.shape_string() + " x " + B.shape_string());
  }
  std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Array C({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double aip = A.at(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) C.at(i, j) += aip * B.at(p, j);
    }
  }
  Node nd;
  nd.op = Op::MatMul;
  nd.value = std::move(C);
  nd.in = {a.id(), b.id()};
  return push(std::move(nd));
}

Var Tape::elementwise(EwOp op, Var a, Var b) {
  check_owned(a, op_name(op));
  check_owned(b, op_name(op));
  const Array& A = node(a).value;
  const Array& B = node(b).value;
  const Array& big = (A.size() >= B.size()) ? A : B;
  // Validates compatibility for whichever side is smaller.
  (void)broadcast_kind(A.size() >= B.size() ? B : A, big);

  std::size_t rows = big.rows(), cols = big.cols();
  Array out(big.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double x = A[bcast_index(A, r, c, cols)];
      double y = B[bcast_index(B, r, c, cols)];
      double v = 0.0;
      switch (op) {
        case EwOp::Add: v = x + y; break;
        case EwOp::Sub: v = x - y; break;
        case EwOp::Mul: v = x * y; break;
      }
      out[r * cols + c] = v;
    }
  }
  Node nd;
  nd.op = (op == EwOp::Add) ? Op::Add : (op == EwOp::Sub) ? Op::Sub : Op::Mul;
  nd.value = std::move(out);
  nd.in = {a.id(), b.id()};
  return push(std::move(nd));
}

Var Tape::relu(Var a) {
  check_owned(a, "relu");
  Array out = node(a).value;
  for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
  Node nd;
  nd.op = Op::Relu;
  nd.value = std::move(out);
  nd.in = {a.id(), -1};
  return push(std::move(nd));
}

Var Tape::scale(Var a, double c) {
  check_owned(a, "scale");
  Array out = node(a).value;
  for (auto& v : out.values()) v *= c;
  Node nd;
  nd.op = Op::Scale;
  nd.value = std::move(out);
  nd.in = {a.id(), -1};
  nd.aux = c;
  return push(std::move(nd));
}

Var Tape::reduce(ReduceOp op, Var a, int axis) {
  check_owned(a, "reduce");
  const Array& A = node(a).value;
  if (axis != kReduceAll && (axis < 0 || axis >= static_cast<int>(A.rank()))) {
    throw DimensionError("reduce: axis " + std::to_string(axis) + " invalid for " +
                         A.shape_string());
  }
  auto term = [&](double v) { return op == ReduceOp::SumSquares ? v * v : v; };

  Array out;
  if (axis == kReduceAll || A.rank() <= 1) {
    double acc = 0.0;
    for (double v : A.values()) acc += term(v);
    if (op == ReduceOp::Mean) acc /= static_cast<double>(A.size());
    out = Array::scalar(acc);
    axis = kReduceAll;
  } else if (axis == 0) {
    out = Array({A.cols()});
    for (std::size_t r = 0; r < A.rows(); ++r)
      for (std::size_t c = 0; c < A.cols(); ++c) out[c] += term(A.at(r, c));
    if (op == ReduceOp::Mean)
      for (auto& v : out.values()) v /= static_cast<double>(A.rows());
  } else {
    out = Array({A.rows()});
    for (std::size_t r = 0; r < A.rows(); ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < A.cols(); ++c) acc += term(A.at(r, c));
      out[r] = (op == ReduceOp::Mean) ? acc / static_cast<double>(A.cols()) : acc;
    }
  }
  Node nd;
  nd.op = (op == ReduceOp::Sum) ? Op::Sum : (op == ReduceOp::Mean) ? Op::Mean : Op::SumSquares;
  nd.value = std::move(out);
  nd.in = {a.id(), -1};
  nd.axis = axis;
  return push(std::move(nd));
}

Var Tape::softmax_cross_entropy(Var logits, Var targets) {
  check_owned(logits, "softmax_cross_entropy");
  check_owned(targets, "softmax_cross_entropy");
  const Array& Z = node(logits).value;
  const Array& T = node(targets).value;
  if (Z.rank() != 2 || !Z.same_shape(T)) {
    throw DimensionError("softmax_cross_entropy: logits " + Z.shape_string() + " vs targets " +
                         T.shape_string());
  }
  std::size_t B = Z.rows(), C = Z.cols();
  if (C < 2) throw DimensionError("softmax_cross_entropy: needs at least 2 classes");

  Array probs({B, C});
  double loss = 0.0;
  for (std::size_t r = 0; r < B; ++r) {
    double trow = 0.0;
    for (std::size_t c = 0; c < C; ++c) trow += T.at(r, c);
    if (std::abs(trow - 1.0) > 1e-9) {
      throw ContractError("softmax_cross_entropy: target row " + std::to_string(r) +
                          " sums to " + std::to_string(trow));
    }
    double m = Z.at(r, 0);
    for (std::size_t c = 1; c < C; ++c) m = std::max(m, Z.at(r, c));
    double denom = 0.0;
    for (std::size_t c = 0; c < C; ++c) denom += std::exp(Z.at(r, c) - m);
    double lse = m + std::log(denom);
    double dot = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      probs.at(r, c) = std::exp(Z.at(r, c) - m) / denom;
      dot += T.at(r, c) * Z.at(r, c);
    }
    loss += lse - dot;
  }
  loss /= static_cast<double>(B);

  Node nd;
  nd.op = Op::SoftmaxXent;
  nd.value = Array::scalar(loss);
  nd.in = {logits.id(), targets.id()};
  nd.cached = std::move(probs);
  return push(std::move(nd));
}

Var Tape::stop_gradient(Var a) {
  check_owned(a, "stop_gradient");
  Node nd;
  nd.op = Op::StopGrad;
  nd.value = node(a).value;
  nd.in = {a.id(), -1};
  return push(std::move(nd));
}

Var Tape::take_rows(Var a, std::vector<std::size_t> rows) {
  check_owned(a, "take_rows");
  const Array& A = node(a).value;
  if (A.rank() != 2) throw DimensionError("take_rows: needs a matrix, got " + A.shape_string());
  if (rows.empty()) throw ContractError("take_rows: empty row list");
  Array out({rows.size(), A.cols()});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= A.rows()) {
      throw ContractError("take_rows: row " + std::to_string(rows[i]) + " out of range");
    }
    for (std::size_t c = 0; c < A.cols(); ++c) out.at(i, c) = A.at(rows[i], c);
  }
  Node nd;
  nd.op = Op::TakeRows;
  nd.value = std::move(out);
  nd.in = {a.id(), -1};
  nd.rows = std::move(rows);
  return push(std::move(nd));
}

void Tape::backward(Var loss) {
  check_owned(loss, "backward");
  if (node(loss).value.size() != 1) {
    throw ContractError("backward: loss must be scalar, got " +
                        node(loss).value.shape_string());
  }

  // Ancestors of the loss; stop_gradient is an opaque leaf for this walk, so
  // everything upstream of a barrier keeps a bitwise-zero adjoint.
  std::vector<bool> live(nodes_.size(), false);
  std::vector<int> stack{loss.id()};
  live[static_cast<std::size_t>(loss.id())] = true;
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    const Node& nd = nodes_[static_cast<std::size_t>(id)];
    if (nd.op == Op::StopGrad || nd.op == Op::Leaf) continue;
    for (int in : nd.in) {
      if (in >= 0 && !live[static_cast<std::size_t>(in)]) {
        live[static_cast<std::size_t>(in)] = true;
        stack.push_back(in);
      }
    }
  }

  for (auto& nd : nodes_) nd.adjoint = Array::zeros(nd.value.shape());
  nodes_[static_cast<std::size_t>(loss.id())].adjoint.fill(1.0);

  auto spread = [&](int small_id, const Array& g, const Array& big) {
    // Accumulate into a possibly-broadcast operand: sum the incoming adjoint
    // over the broadcast dimensions.
    Array& acc = nodes_[static_cast<std::size_t>(small_id)].adjoint;
    std::size_t rows = big.rows(), cols = big.cols();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        acc[bcast_index(acc, r, c, cols)] += g[r * cols + c];
  };

  for (int id = loss.id(); id >= 0; --id) {
    if (!live[static_cast<std::size_t>(id)]) continue;
    Node& nd = nodes_[static_cast<std::size_t>(id)];
    const Array& g = nd.adjoint;
    switch (nd.op) {
      case Op::Leaf:
      case Op::StopGrad:
        break;
      case Op::MatMul: {
        const Array& A = nodes_[static_cast<std::size_t>(nd.in[0])].value;
        const Array& B = nodes_[static_cast<std::size_t>(nd.in[1])].value;
        Array& ga = nodes_[static_cast<std::size_t>(nd.in[0])].adjoint;
        Array& gb = nodes_[static_cast<std::size_t>(nd.in[1])].adjoint;
        std::size_t m = A.rows(), k = A.cols(), n = B.cols();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            double gij = g[i * n + j];
            if (gij == 0.0) continue;
            for (std::size_t p = 0; p < k; ++p) {
              ga.at(i, p) += gij * B.at(p, j);
              gb.at(p, j) += gij * A.at(i, p);
            }
          }
        break;
      }
      case Op::Add:
      case Op::Sub:
      case Op::Mul: {
        const Array& big = nd.value;
        if (nd.op == Op::Add) {
          spread(nd.in[0], g, big);
          spread(nd.in[1], g, big);
        } else if (nd.op == Op::Sub) {
          spread(nd.in[0], g, big);
          Array neg = g;
          for (auto& v : neg.values()) v = -v;
          spread(nd.in[1], neg, big);
        } else {
          const Array& A = nodes_[static_cast<std::size_t>(nd.in[0])].value;
          const Array& B = nodes_[static_cast<std::size_t>(nd.in[1])].value;
          std::size_t rows = big.rows(), cols = big.cols();
          Array ga(big.shape()), gb(big.shape());
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
              double gv = g[r * cols + c];
              ga[r * cols + c] = gv * B[bcast_index(B, r, c, cols)];
              gb[r * cols + c] = gv * A[bcast_index(A, r, c, cols)];
            }
          spread(nd.in[0], ga, big);
          spread(nd.in[1], gb, big);
        }
        break;
      }
      case Op::Relu: {
        const Array& A = nodes_[static_cast<std::size_t>(nd.in[0])].value;
        Array& ga = nodes_[static_cast<std::size_t>(nd.in[0])].adjoint;
        for (std::size_t i = 0; i < A.size(); ++i)
          if (A[i] > 0.0) ga[i] += g[i];
        break;
      }
      case Op::Scale: {
        Array& ga = nodes_[static_cast<std::size_t>(nd.in[0])].adjoint;
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += nd.aux * g[i];
        break;
      }
      case Op::Sum:
      case Op::Mean:
      case Op::SumSquares: {
        const Array& A = nodes_[static_cast<std::size_t>(nd.in[0])].value;
        Array& ga = nodes_[static_cast<std::size_t>(nd.in[0])].adjoint;
        std::size_t rows = A.rows(), cols = A.cols();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) {
            double gv;
            if (nd.axis == kReduceAll) gv = g[0];
            else if (nd.axis == 0) gv = g[c];
            else gv = g[r];
            std::size_t i = r * cols + c;
            if (nd.op == Op::SumSquares) {
              ga[i] += 2.0 * A[i] * gv;
            } else if (nd.op == Op::Mean) {
              std::size_t n = (nd.axis == kReduceAll) ? A.size()
                              : (nd.axis == 0)        ? rows
                                                      : cols;
              ga[i] += gv / static_cast<double>(n);
            } else {
              ga[i] += gv;
            }
          }
        break;
      }
      case Op::SoftmaxXent: {
        const Array& T = nodes_[static_cast<std::size_t>(nd.in[1])].value;
        Array& gz = nodes_[static_cast<std::size_t>(nd.in[0])].adjoint;
        const Array& P = nd.cached;
        double g0 = g[0];
        std::size_t B = P.rows(), C = P.cols();
        for (std::size_t r = 0; r < B; ++r)
          for (std::size_t c = 0; c < C; ++c)
            gz.at(r, c) += g0 * (P.at(r, c) - T.at(r, c)) / static_cast<double>(B);
        break;
      }
      case Op::TakeRows: {
        Array& ga = nodes_[static_cast<std::size_t>(nd.in[0])].adjoint;
        std::size_t cols = nd.value.cols();
        for (std::size_t i = 0; i < nd.rows.size(); ++i)
          for (std::size_t c = 0; c < cols; ++c) ga.at(nd.rows[i], c) += g[i * cols + c];
        break;
      }
    }
  }

  for (auto& [id, param] : bindings_) {
    if (!live[static_cast<std::size_t>(id)]) continue;
    const Array& adj = nodes_[static_cast<std::size_t>(id)].adjoint;
    for (std::size_t i = 0; i < adj.size(); ++i) param->gradient[i] += adj[i];
  }
}

double check_gradients(const std::function<Var(Tape&)>& build_loss,
                       std::span<Parameter* const> params, double step) {
  auto eval = [&]() {
    Tape t;
    Var f = build_loss(t);
    const Array& v = f.value();
    if (v.size() != 1) throw ContractError("check_gradients: loss is not scalar");
    if (!std::isfinite(v[0])) throw ContractError("check_gradients: non-finite loss");
    return v[0];
  };
  (void)eval();

  for (auto* p : params) p->zero_grad();
  {
    Tape t;
    Var f = build_loss(t);
    t.backward(f);
  }
  std::vector<Array> analytic;
  analytic.reserve(params.size());
  for (auto* p : params) analytic.push_back(p->gradient);

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      double orig = p.value[i];
      p.value[i] = orig + step;
      double fp = eval();
      p.value[i] = orig - step;
      double fm = eval();
      p.value[i] = orig;
      double numeric = (fp - fm) / (2.0 * step);
      double rel = std::abs(analytic[pi][i] - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, rel);
    }
  }
  for (auto* p : params) p->zero_grad();
  return worst;
}

}  // namespace ace::graph
