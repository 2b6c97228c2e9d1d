#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ace/array.hpp"

namespace ace::graph {

// A learnable tensor: value plus gradient and momentum buffers of equal shape.
struct Parameter {
  std::string name;
  Array value;
  Array gradient;
  Array velocity;

  Parameter(std::string n, Array v)
      : name(std::move(n)),
        value(std::move(v)),
        gradient(Array::zeros(value.shape())),
        velocity(Array::zeros(value.shape())) {}

  void zero_grad() { gradient.fill(0.0); }
};

class Tape;

// Handle to a value recorded on a tape.
class Var {
public:
  Var() = default;
  const Array& value() const;
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

private:
  friend class Tape;
  Var(Tape* t, int id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

enum class EwOp { Add, Sub, Mul };
enum class ReduceOp { Sum, Mean, SumSquares };
constexpr int kReduceAll = -1;

// Records primitives as they execute; replaying the record in reverse yields
// gradients for every Parameter reachable from the loss. A tape lives for one
// forward/backward round and is rebuilt per step.
class Tape {
public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf holding a constant (inputs, targets, masks). No gradient is kept.
  Var input(Array v);

  // Leaf bound to a Parameter: the current value is copied onto the tape and
  // backward() accumulates the leaf's adjoint into p.gradient.
  Var param(Parameter& p);

  Var matmul(Var a, Var b);
  Var elementwise(EwOp op, Var a, Var b);
  Var relu(Var a);
  Var scale(Var a, double c);
  Var reduce(ReduceOp op, Var a, int axis = kReduceAll);
  Var softmax_cross_entropy(Var logits, Var targets);
  Var stop_gradient(Var a);
  Var take_rows(Var a, std::vector<std::size_t> rows);

  // Reverse sweep from a scalar loss. Adjoints are reset first, so separate
  // losses on one tape can be walked independently; Parameter gradients
  // accumulate across calls until zero_grad.
  void backward(Var loss);

  const Array& value(Var v) const;
  // Adjoint recorded by the most recent backward() (zeros if unreached).
  const Array& adjoint(Var v) const;

  std::size_t node_count() const { return nodes_.size(); }

private:
  enum class Op : std::uint8_t {
    Leaf,
    MatMul,
    Add,
    Sub,
    Mul,
    Relu,
    Scale,
    Sum,
    Mean,
    SumSquares,
    SoftmaxXent,
    StopGrad,
    TakeRows,
  };

  struct Node {
    Op op;
    Array value;
    Array adjoint;
    std::array<int, 2> in{-1, -1};
    double aux = 0.0;                // scale constant
    int axis = kReduceAll;           // reductions
    std::vector<std::size_t> rows;   // take_rows gather list
    Array cached;                    // softmax probabilities for CE backward
  };

  Var push(Node n);
  const Node& node(Var v) const;
  void check_owned(Var v, const char* op) const;

  std::vector<Node> nodes_;
  std::vector<std::pair<int, Parameter*>> bindings_;
};

inline Var matmul(Var a, Var b) { return a.tape()->matmul(a, b); }
inline Var add(Var a, Var b) { return a.tape()->elementwise(EwOp::Add, a, b); }
inline Var sub(Var a, Var b) { return a.tape()->elementwise(EwOp::Sub, a, b); }
inline Var mul(Var a, Var b) { return a.tape()->elementwise(EwOp::Mul, a, b); }
inline Var relu(Var a) { return a.tape()->relu(a); }
inline Var scale(Var a, double c) { return a.tape()->scale(a, c); }
inline Var sum(Var a, int axis = kReduceAll) { return a.tape()->reduce(ReduceOp::Sum, a, axis); }
inline Var mean(Var a, int axis = kReduceAll) { return a.tape()->reduce(ReduceOp::Mean, a, axis); }
inline Var sum_squares(Var a, int axis = kReduceAll) {
  return a.tape()->reduce(ReduceOp::SumSquares, a, axis);
}
inline Var softmax_cross_entropy(Var logits, Var targets) {
  return logits.tape()->softmax_cross_entropy(logits, targets);
}
inline Var stop_gradient(Var a) { return a.tape()->stop_gradient(a); }
inline Var take_rows(Var a, std::vector<std::size_t> rows) {
  return a.tape()->take_rows(a, std::move(rows));
}

// Central-difference gradient check. Builds the scalar-valued graph through
// `build_loss` (once for the analytic pass, twice per parameter entry for the
// numeric one) and returns max over entries of |analytic - numeric| /
// max(1, |numeric|). Parameters are restored; gradients end up zeroed.
double check_gradients(const std::function<Var(Tape&)>& build_loss,
                       std::span<Parameter* const> params, double step = 1e-5);

}  // namespace ace::graph
