#include "gnnfuse/tape.hpp"

#include <algorithm>
#include <cmath>

#include "gnnfuse/errors.hpp"

namespace gnnfuse {

namespace {

void accumulate(Matrix& into, const Matrix& delta) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += delta[i];
}

double clamp_probability(double p) {
  return std::clamp(p, Tape::kBceClamp, 1.0 - Tape::kBceClamp);
}

}  // namespace

Var Tape::push(Node node) {
  if (nodes_.size() >= UINT32_MAX - 1) throw Error("tape is full");
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw Error("variable does not belong to this tape");
  return nodes_[v.id];
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

const Matrix& Tape::gradient(Var v) const {
  node(v);
  if (v.id >= adjoints_.size()) throw Error("gradient requested before backward()");
  return adjoints_[v.id];
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{it->second};
  Node n;
  n.value = p.value;
  n.param = &p;
  Var v = push(std::move(n));
  params_.push_back(&p);
  param_nodes_.emplace(&p, v.id);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  Node n;
  n.op = Op::MatMul;
  n.value = gnnfuse::matmul(value(a), value(b));
  n.args = {a.id, b.id};
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  Node n;
  n.op = Op::Add;
  n.value = gnnfuse::add(value(a), value(b));
  n.args = {a.id, b.id};
  return push(std::move(n));
}

Var Tape::add_bias(Var m, Var bias) {
  const Matrix& mv = value(m);
  const Matrix& bv = value(bias);
  if (bv.cols() != 1 || bv.rows() != mv.rows()) {
    throw ShapeError("add_bias: bias " + bv.shape_string() + " does not fit " +
                     mv.shape_string());
  }
  Node n;
  n.op = Op::AddBias;
  n.value = mv;
  for (std::size_t r = 0; r < mv.rows(); ++r)
    for (std::size_t c = 0; c < mv.cols(); ++c) n.value(r, c) += bv[r];
  n.args = {m.id, bias.id};
  return push(std::move(n));
}

Var Tape::scale(Var a, double factor) {
  Node n;
  n.op = Op::Scale;
  n.value = gnnfuse::scale(value(a), factor);
  n.scalar = factor;
  n.args = {a.id};
  return push(std::move(n));
}

Var Tape::relu(Var a) {
  Node n;
  n.op = Op::Relu;
  n.value = gnnfuse::relu(value(a));
  n.args = {a.id};
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  Node n;
  n.op = Op::Tanh;
  n.value = gnnfuse::tanh(value(a));
  n.args = {a.id};
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::Sigmoid;
  n.value = gnnfuse::sigmoid(value(a));
  n.args = {a.id};
  return push(std::move(n));
}

Var Tape::reshape(Var a, std::size_t rows, std::size_t cols) {
  Node n;
  n.op = Op::Reshape;
  n.value = gnnfuse::reshape(value(a), rows, cols);
  n.args = {a.id};
  return push(std::move(n));
}

Var Tape::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no operands");
  const std::size_t cols = value(parts.front()).cols();
  std::size_t rows = 0;
  for (Var p : parts) {
    if (value(p).cols() != cols) throw ShapeError("concat_rows: column counts differ");
    rows += value(p).rows();
  }
  Node n;
  n.op = Op::ConcatRows;
  n.value = Matrix(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Matrix& pv = value(p);
    std::copy(pv.values().begin(), pv.values().end(), n.value.values().begin() + offset);
    offset += pv.size();
    n.args.push_back(p.id);
  }
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  const Matrix& av = value(a);
  double total = 0.0;
  for (double v : av.values()) total += v;
  Node n;
  n.op = Op::Sum;
  n.value = Matrix(1, 1, total);
  n.args = {a.id};
  return push(std::move(n));
}

Var Tape::bce(Var predictions, const Matrix& targets) {
  const Matrix& p = value(predictions);
  if (!p.same_shape(targets)) {
    throw ShapeError("bce: predictions " + p.shape_string() + " vs targets " +
                     targets.shape_string());
  }
  if (p.empty()) throw ShapeError("bce: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = clamp_probability(p[i]);
    total += targets[i] * std::log(q) + (1.0 - targets[i]) * std::log1p(-q);
  }
  Node n;
  n.op = Op::Bce;
  n.value = Matrix(1, 1, -total / static_cast<double>(p.size()));
  n.aux = targets;
  n.args = {predictions.id};
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  const Node& root = node(loss);
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw ShapeError("backward: loss must be a scalar, got " + root.value.shape_string());
  }
  adjoints_.clear();
  adjoints_.reserve(nodes_.size());
  for (const Node& n : nodes_) adjoints_.emplace_back(n.value.rows(), n.value.cols());
  for (Parameter* p : params_) p->grad = Matrix(p->value.rows(), p->value.cols());

  adjoints_[loss.id](0, 0) = 1.0;

  for (std::size_t idx = loss.id + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    const Matrix& g = adjoints_[idx];
    switch (n.op) {
      case Op::Leaf:
        if (n.param != nullptr) accumulate(n.param->grad, g);
        break;
      case Op::MatMul: {
        const Matrix& a = nodes_[n.args[0]].value;
        const Matrix& b = nodes_[n.args[1]].value;
        accumulate(adjoints_[n.args[0]], gnnfuse::matmul(g, transpose(b)));
        accumulate(adjoints_[n.args[1]], gnnfuse::matmul(transpose(a), g));
        break;
      }
      case Op::Add:
        accumulate(adjoints_[n.args[0]], g);
        accumulate(adjoints_[n.args[1]], g);
        break;
      case Op::AddBias: {
        accumulate(adjoints_[n.args[0]], g);
        Matrix& gb = adjoints_[n.args[1]];
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c) gb[r] += g(r, c);
        break;
      }
      case Op::Scale: {
        Matrix& ga = adjoints_[n.args[0]];
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += n.scalar * g[i];
        break;
      }
      case Op::Relu: {
        const Matrix& x = nodes_[n.args[0]].value;
        Matrix& ga = adjoints_[n.args[0]];
        for (std::size_t i = 0; i < g.size(); ++i)
          if (x[i] > 0.0) ga[i] += g[i];
        break;
      }
      case Op::Tanh: {
        Matrix& ga = adjoints_[n.args[0]];
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = n.value[i];
          const double dy = fault_injection_ ? 1.0 - y : 1.0 - y * y;
          ga[i] += g[i] * dy;
        }
        break;
      }
      case Op::Sigmoid: {
        Matrix& ga = adjoints_[n.args[0]];
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = n.value[i];
          ga[i] += g[i] * y * (1.0 - y);
        }
        break;
      }
      case Op::Reshape: {
        Matrix& ga = adjoints_[n.args[0]];
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        break;
      }
      case Op::ConcatRows: {
        std::size_t offset = 0;
        for (std::uint32_t arg : n.args) {
          Matrix& ga = adjoints_[arg];
          for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[offset + i];
          offset += ga.size();
        }
        break;
      }
      case Op::Sum: {
        Matrix& ga = adjoints_[n.args[0]];
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
        break;
      }
      case Op::Bce: {
        const Matrix& p = nodes_[n.args[0]].value;
        Matrix& ga = adjoints_[n.args[0]];
        const double inv = 1.0 / static_cast<double>(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (p[i] <= kBceClamp || p[i] >= 1.0 - kBceClamp) continue;
          const double t = n.aux[i];
          ga[i] += g[0] * inv * ((1.0 - t) / (1.0 - p[i]) - t / p[i]);
        }
        break;
      }
    }
  }
}

std::vector<bool> Tape::kink_pattern() const {
  std::vector<bool> pattern;
  for (const Node& n : nodes_) {
    if (n.op == Op::Relu) {
      for (double x : nodes_[n.args[0]].value.values()) pattern.push_back(x > 0.0);
    } else if (n.op == Op::Bce) {
      for (double p : nodes_[n.args[0]].value.values())
        pattern.push_back(p <= kBceClamp || p >= 1.0 - kBceClamp);
    }
  }
  return pattern;
}

}  // namespace gnnfuse
