#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gnnfuse/matrix.hpp"

namespace gnnfuse {

// A trainable array. `grad` is written by Tape::backward.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}
};

// Handle to a node recorded on a Tape. Only meaningful for the tape that
// produced it.
struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

// Append-only record of primitive operations for reverse-mode
// differentiation. Nodes are stored in creation order, which is a
// topological order because every operand must exist before it is used.
//
// Single-threaded; build one tape per forward pass.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var constant(Matrix value);
  // Registers `p` (once) and returns its leaf node. The tape keeps a
  // pointer, so `p` must outlive backward().
  Var param(Parameter& p);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  // Adds the column vector `bias` to every column of `m`.
  Var add_bias(Var m, Var bias);
  Var scale(Var a, double factor);
  Var relu(Var a);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var reshape(Var a, std::size_t rows, std::size_t cols);
  Var concat_rows(std::span<const Var> parts);
  Var sum(Var a);
  // Mean binary cross-entropy over all entries; predictions are clamped to
  // [kBceClamp, 1 - kBceClamp] before the logs.
  Var bce(Var predictions, const Matrix& targets);

  static constexpr double kBceClamp = 1e-7;

  const Matrix& value(Var v) const;
  // Adjoint of any node from the last backward sweep.
  const Matrix& gradient(Var v) const;

  // Zeroes the gradient of every registered parameter, then accumulates
  // d(loss)/d(parameter) in reverse creation order.
  void backward(Var loss);

  std::span<Parameter* const> parameters() const { return params_; }
  std::size_t node_count() const { return nodes_.size(); }

  // One flag per ReLU input entry (x > 0) and per clamped BCE prediction, in
  // recording order. Two evaluations with equal patterns sit on the same
  // smooth piece of the loss.
  std::vector<bool> kink_pattern() const;

  // Test hook: replaces the tanh derivative 1 - y^2 with 1 - y so that
  // gradient checking has a known-bad code path to reject.
  void set_fault_injection(bool enabled) { fault_injection_ = enabled; }

 private:
  enum class Op : std::uint8_t {
    Leaf,
    MatMul,
    Add,
    AddBias,
    Scale,
    Relu,
    Tanh,
    Sigmoid,
    Reshape,
    ConcatRows,
    Sum,
    Bce,
  };

  struct Node {
    Op op = Op::Leaf;
    std::vector<std::uint32_t> args;
    double scalar = 0.0;
    Matrix value;
    Matrix aux;  // BCE targets
    Parameter* param = nullptr;
  };

  Var push(Node node);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  std::vector<Matrix> adjoints_;
  std::vector<Parameter*> params_;
  std::unordered_map<const Parameter*, std::uint32_t> param_nodes_;
  bool fault_injection_ = false;
};

}  // namespace gnnfuse
