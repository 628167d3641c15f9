#include "hpinn/autodiff.hpp"

#include <cmath>
#include <sstream>

namespace hpinn::ad {

const char* op_name(Op op) noexcept {
  switch (op) {
    case Op::constant: return "constant";
    case Op::input: return "input";
    case Op::parameter: return "parameter";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::neg: return "neg";
    case Op::add_const: return "add_const";
    case Op::mul_const: return "mul_const";
    case Op::const_div: return "const_div";
    case Op::tanh: return "tanh";
    case Op::square: return "square";
    case Op::pow: return "pow";
    case Op::linear_combination: return "linear_combination";
  }
  return "unknown";
}

void Graph::check(Var v, const char* where) const {
  if (!owns(v)) {
    std::ostringstream msg;
    msg << where << ": node " << v.id << " does not belong to this graph";
    throw std::invalid_argument(msg.str());
  }
}

Var Graph::push(Node node) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(node);
  compute(id);
  return Var{this, id};
}

Var Graph::constant(double value) { return push({.op = Op::constant, .value = value}); }

Var Graph::input(double value) { return push({.op = Op::input, .value = value}); }

Var Graph::parameter(double value) {
  Var v = push({.op = Op::parameter, .value = value});
  parameters_.push_back(v);
  return v;
}

void Graph::set_value(Var leaf, double value) {
  check(leaf, "set_value");
  Node& n = nodes_[leaf.id];
  if (n.op != Op::input && n.op != Op::parameter) {
    throw std::invalid_argument("set_value: node is not an input or parameter leaf");
  }
  n.value = value;
}

Var Graph::add(Var a, Var b) {
  check(a, "add");
  check(b, "add");
  return push({.op = Op::add, .a = a.id, .b = b.id});
}

Var Graph::sub(Var a, Var b) {
  check(a, "sub");
  check(b, "sub");
  return push({.op = Op::sub, .a = a.id, .b = b.id});
}

Var Graph::mul(Var a, Var b) {
  check(a, "mul");
  check(b, "mul");
  return push({.op = Op::mul, .a = a.id, .b = b.id});
}

Var Graph::div(Var a, Var b) {
  check(a, "div");
  check(b, "div");
  return push({.op = Op::div, .a = a.id, .b = b.id});
}

Var Graph::neg(Var a) {
  check(a, "neg");
  return push({.op = Op::neg, .a = a.id});
}

Var Graph::add_const(Var a, double c) {
  check(a, "add_const");
  return push({.op = Op::add_const, .a = a.id, .c = c});
}

Var Graph::mul_const(Var a, double c) {
  check(a, "mul_const");
  return push({.op = Op::mul_const, .a = a.id, .c = c});
}

Var Graph::const_div(double c, Var a) {
  check(a, "const_div");
  return push({.op = Op::const_div, .a = a.id, .c = c});
}

Var Graph::tanh(Var a) {
  check(a, "tanh");
  return push({.op = Op::tanh, .a = a.id});
}

Var Graph::square(Var a) {
  check(a, "square");
  return push({.op = Op::square, .a = a.id});
}

Var Graph::pow(Var a, double exponent) {
  check(a, "pow");
  return push({.op = Op::pow, .a = a.id, .c = exponent});
}

Var Graph::linear_combination(std::span<const double> coeffs, std::span<const Var> terms) {
  if (coeffs.size() != terms.size()) {
    throw std::invalid_argument("linear_combination: coefficient/term count mismatch");
  }
  const auto offset = operands_.size();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    check(terms[k], "linear_combination");
    operands_.push_back(terms[k].id);
    coefficients_.push_back(coeffs[k]);
  }
  return push({.op = Op::linear_combination,
               .c = static_cast<double>(offset),
               .count = static_cast<std::uint32_t>(terms.size())});
}

Var Graph::sum(std::span<const Var> terms) {
  std::vector<double> ones(terms.size(), 1.0);
  return linear_combination(ones, terms);
}

void Graph::compute(std::uint32_t id) {
  Node& n = nodes_[id];
  const auto va = [&] { return nodes_[n.a].value; };
  const auto vb = [&] { return nodes_[n.b].value; };
  switch (n.op) {
    case Op::constant:
    case Op::input:
    case Op::parameter:
      break;
    case Op::add:
      n.value = va() + vb();
      n.da = 1.0;
      n.db = 1.0;
      break;
    case Op::sub:
      n.value = va() - vb();
      n.da = 1.0;
      n.db = -1.0;
      break;
    case Op::mul: {
      const double a = va();
      const double b = vb();
      n.value = a * b;
      n.da = b;
      n.db = a;
      break;
    }
    case Op::div: {
      const double a = va();
      const double b = vb();
      if (std::abs(b) < kMinDenominator) {
        throw EvaluationError(id, "node " + std::to_string(id) + " (div): denominator below 1e-300");
      }
      n.value = a / b;
      n.da = 1.0 / b;
      n.db = -n.value / b;
      break;
    }
    case Op::neg:
      n.value = -va();
      n.da = -1.0;
      break;
    case Op::add_const:
      n.value = va() + n.c;
      n.da = 1.0;
      break;
    case Op::mul_const:
      n.value = va() * n.c;
      n.da = n.c;
      break;
    case Op::const_div: {
      const double a = va();
      if (std::abs(a) < kMinDenominator) {
        throw EvaluationError(id,
                              "node " + std::to_string(id) + " (const_div): denominator below 1e-300");
      }
      n.value = n.c / a;
      n.da = -n.value / a;
      break;
    }
    case Op::tanh: {
      const double s = std::tanh(va());
      n.value = s;
      n.da = 1.0 - s * s;
      break;
    }
    case Op::square: {
      const double a = va();
      n.value = a * a;
      n.da = 2.0 * a;
      break;
    }
    case Op::pow: {
      const double a = va();
      n.value = std::pow(a, n.c);
      n.da = n.c * std::pow(a, n.c - 1.0);
      break;
    }
    case Op::linear_combination: {
      const auto offset = static_cast<std::size_t>(n.c);
      double acc = 0.0;
      for (std::uint32_t k = 0; k < n.count; ++k) {
        acc += coefficients_[offset + k] * nodes_[operands_[offset + k]].value;
      }
      n.value = acc;
      break;
    }
  }
  if (!std::isfinite(n.value) || !std::isfinite(n.da) || !std::isfinite(n.db)) {
    throw EvaluationError(id, "node " + std::to_string(id) + " (" + op_name(n.op) +
                                  "): non-finite value");
  }
}

void Graph::evaluate() {
  for (std::uint32_t id = 0; id < nodes_.size(); ++id) {
    compute(id);
  }
}

double Graph::value(Var v) const {
  check(v, "value");
  return nodes_[v.id].value;
}

Op Graph::op(Var v) const {
  check(v, "op");
  return nodes_[v.id].op;
}

Adjoints Graph::gradient(Var seed) const {
  std::vector<double> adj;
  gradient(seed, adj);
  return Adjoints(std::move(adj));
}

void Graph::gradient(Var seed, std::vector<double>& adj) const {
  check(seed, "gradient");
  adj.assign(nodes_.size(), 0.0);
  adj[seed.id] = 1.0;
  for (std::uint32_t id = seed.id + 1; id-- > 0;) {
    const double g = adj[id];
    if (g == 0.0) continue;
    const Node& n = nodes_[id];
    switch (n.op) {
      case Op::constant:
      case Op::input:
      case Op::parameter:
        break;
      case Op::add:
      case Op::sub:
      case Op::mul:
      case Op::div:
        adj[n.a] += g * n.da;
        adj[n.b] += g * n.db;
        break;
      case Op::neg:
      case Op::add_const:
      case Op::mul_const:
      case Op::const_div:
      case Op::tanh:
      case Op::square:
      case Op::pow:
        adj[n.a] += g * n.da;
        break;
      case Op::linear_combination: {
        const auto offset = static_cast<std::size_t>(n.c);
        for (std::uint32_t k = 0; k < n.count; ++k) {
          adj[operands_[offset + k]] += g * coefficients_[offset + k];
        }
        break;
      }
    }
  }
}

std::vector<double> Graph::parameter_gradient(Var seed) const {
  const Adjoints adj = gradient(seed);
  std::vector<double> out;
  out.reserve(parameters_.size());
  for (Var p : parameters_) out.push_back(adj[p]);
  return out;
}

}  // namespace hpinn::ad
