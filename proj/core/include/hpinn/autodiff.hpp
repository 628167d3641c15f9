#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpinn::ad {

class Graph;

/// Raised when a forward sweep produces a non-finite value or hits a
/// near-zero denominator.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(std::uint32_t node, const std::string& what)
      : std::runtime_error(what), node_(node) {}
  std::uint32_t node() const noexcept { return node_; }

 private:
  std::uint32_t node_;
};

/// Handle to a scalar node. Cheap to copy; only valid together with the
/// graph that created it.
struct Var {
  Graph* graph = nullptr;
  std::uint32_t id = 0;

  double value() const;
};

enum class Op : std::uint8_t {
  constant,
  input,
  parameter,
  add,
  sub,
  mul,
  div,
  neg,
  add_const,
  mul_const,
  const_div,  // c / a
  tanh,
  square,
  pow,
  linear_combination,
};

const char* op_name(Op op) noexcept;

/// Adjoint values for every node after a reverse sweep.
class Adjoints {
 public:
  explicit Adjoints(std::vector<double> values) : values_(std::move(values)) {}
  double operator[](Var v) const { return values_.at(v.id); }
  std::span<const double> raw() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Scalar computation graph recorded in creation order (which is a valid
/// topological order). Values are computed eagerly as nodes are added and
/// can be refreshed with evaluate() after leaf values change.
class Graph {
 public:
  static constexpr double kMinDenominator = 1e-300;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(double value);
  Var input(double value);
  Var parameter(double value);

  /// Leaf nodes only (input or parameter).
  void set_value(Var leaf, double value);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var add_const(Var a, double c);
  Var mul_const(Var a, double c);
  Var const_div(double c, Var a);
  Var tanh(Var a);
  Var square(Var a);
  Var pow(Var a, double exponent);

  /// sum_k coeffs[k] * terms[k] as a single node.
  Var linear_combination(std::span<const double> coeffs, std::span<const Var> terms);
  Var sum(std::span<const Var> terms);

  /// Full forward sweep over every node.
  void evaluate();

  double value(Var v) const;
  Op op(Var v) const;

  /// Reverse sweep seeded at `seed`; cost proportional to seed.id.
  Adjoints gradient(Var seed) const;

  /// Same sweep writing into a caller-owned buffer (resized to size()).
  void gradient(Var seed, std::vector<double>& adjoints) const;

  /// d(seed)/d(p) for every parameter leaf, in registration order.
  std::vector<double> parameter_gradient(Var seed) const;

  std::span<const Var> parameters() const { return parameters_; }
  std::size_t size() const { return nodes_.size(); }
  bool owns(Var v) const { return v.graph == this && v.id < nodes_.size(); }

 private:
  struct Node {
    Op op;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double c = 0.0;  // constant operand, or operand offset for n-ary nodes
    std::uint32_t count = 0;
    double value = 0.0;
    double da = 0.0;
    double db = 0.0;
  };

  Var push(Node node);
  void compute(std::uint32_t id);
  void check(Var v, const char* where) const;

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> operands_;
  std::vector<double> coefficients_;
  std::vector<Var> parameters_;
};

inline double Var::value() const { return graph->value(*this); }

inline Var operator+(Var a, Var b) { return a.graph->add(a, b); }
inline Var operator-(Var a, Var b) { return a.graph->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.graph->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.graph->div(a, b); }
inline Var operator-(Var a) { return a.graph->neg(a); }
inline Var operator+(Var a, double c) { return a.graph->add_const(a, c); }
inline Var operator+(double c, Var a) { return a.graph->add_const(a, c); }
inline Var operator-(Var a, double c) { return a.graph->add_const(a, -c); }
inline Var operator-(double c, Var a) { return a.graph->add_const(a.graph->neg(a), c); }
inline Var operator*(Var a, double c) { return a.graph->mul_const(a, c); }
inline Var operator*(double c, Var a) { return a.graph->mul_const(a, c); }
inline Var operator/(Var a, double c) { return a.graph->mul_const(a, 1.0 / c); }
inline Var operator/(double c, Var a) { return a.graph->const_div(c, a); }
inline Var tanh(Var a) { return a.graph->tanh(a); }
inline Var square(Var a) { return a.graph->square(a); }
inline Var pow(Var a, double exponent) { return a.graph->pow(a, exponent); }

/// Value and first/second derivative with respect to a single spatial
/// input. With T = Var every entry is a graph node, so parameter gradients
/// of expressions built from dx and dxx come out of the ordinary reverse
/// sweep.
template <class T>
struct DerivativeBundle {
  T value;
  T dx;
  T dxx;
};

using NodeBundle = DerivativeBundle<Var>;

// Second-order forward propagation rules.
inline NodeBundle operator+(const NodeBundle& a, const NodeBundle& b) {
  return {a.value + b.value, a.dx + b.dx, a.dxx + b.dxx};
}
inline NodeBundle operator+(const NodeBundle& a, Var v) {
  return {a.value + v, a.dx, a.dxx};
}
inline NodeBundle operator+(const NodeBundle& a, double c) {
  return {a.value + c, a.dx, a.dxx};
}
inline NodeBundle operator*(const NodeBundle& a, const NodeBundle& b) {
  return {a.value * b.value, a.dx * b.value + a.value * b.dx,
          a.dxx * b.value + 2.0 * (a.dx * b.dx) + a.value * b.dxx};
}
inline NodeBundle operator*(const NodeBundle& a, Var w) {
  return {a.value * w, a.dx * w, a.dxx * w};
}
inline NodeBundle operator*(const NodeBundle& a, double c) {
  return {a.value * c, a.dx * c, a.dxx * c};
}
inline NodeBundle tanh(const NodeBundle& a) {
  Var s = tanh(a.value);
  Var s1 = 1.0 - square(s);
  return {s, s1 * a.dx, s1 * a.dxx - 2.0 * (s * s1) * square(a.dx)};
}

/// Seeds x with dx = 1, dxx = 0 and applies f to the bundle; f may return
/// a single bundle or a collection of them.
template <class F>
auto input_derivatives(Graph& graph, Var x, F&& f) {
  NodeBundle seed{x, graph.constant(1.0), graph.constant(0.0)};
  return f(seed);
}

}  // namespace hpinn::ad
