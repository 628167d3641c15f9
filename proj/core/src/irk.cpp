#include "hpinn/irk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace hpinn::irk {

namespace {

struct LegendreValue {
  double p;   // P_q(x)
  double dp;  // P_q'(x)
};

LegendreValue legendre(int q, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (q == 0) return {1.0, 0.0};
  for (int k = 2; k <= q; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  const double dp = q * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
void gauss_nodes(int q, std::vector<double>& x, std::vector<double>& w) {
  x.assign(q, 0.0);
  w.assign(q, 0.0);
  for (int i = 0; i < q; ++i) {
    double root = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(q, root);
      const double step = p / dp;
      root -= step;
      if (std::abs(step) < 1e-14) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw std::runtime_error("Legendre root " + std::to_string(i) + " did not converge for q=" +
                               std::to_string(q));
    }
    const auto [p, dp] = legendre(q, root);
    (void)p;
    // Roots come out descending; store ascending.
    x[q - 1 - i] = root;
    w[q - 1 - i] = 2.0 / ((1.0 - root * root) * dp * dp);
  }
}

}  // namespace

ButcherTableau gauss_legendre_tableau(int q) {
  if (q < 1 || q > kMaxStages) {
    throw std::invalid_argument("stage count q=" + std::to_string(q) + " outside [1, " +
                                std::to_string(kMaxStages) + "]");
  }
  std::vector<double> x;
  std::vector<double> w;
  gauss_nodes(q, x, w);

  ButcherTableau t;
  t.q = q;
  t.c.resize(q);
  t.b.resize(q);
  for (int i = 0; i < q; ++i) {
    t.c[i] = 0.5 * (1.0 + x[i]);
    t.b[i] = 0.5 * w[i];
  }
  // Symmetrize away last-bit asymmetry of the Newton roots.
  for (int i = 0; i < q / 2; ++i) {
    const int j = q - 1 - i;
    const double c = 0.5 * (t.c[i] + 1.0 - t.c[j]);
    t.c[i] = c;
    t.c[j] = 1.0 - c;
    const double bw = 0.5 * (t.b[i] + t.b[j]);
    t.b[i] = bw;
    t.b[j] = bw;
  }
  if (q % 2 == 1) t.c[q / 2] = 0.5;

  // Barycentric weights of the nodes c.
  std::vector<double> bary(q, 1.0);
  for (int j = 0; j < q; ++j)
    for (int k = 0; k < q; ++k)
      if (k != j) bary[j] /= (t.c[j] - t.c[k]);

  // a_ij = int_0^{c_i} l_j(s) ds, with the same Gauss rule mapped to [0, c_i]
  // (exact because l_j has degree q-1).
  t.a.assign(static_cast<std::size_t>(q) * q, 0.0);
  std::vector<double> basis(q);
  for (int i = 0; i < q; ++i) {
    const double ci = t.c[i];
    for (int m = 0; m < q; ++m) {
      const double s = 0.5 * ci * (1.0 + x[m]);
      const double ws = 0.5 * ci * w[m];
      double denom = 0.0;
      int exact = -1;
      for (int j = 0; j < q; ++j) {
        const double diff = s - t.c[j];
        if (diff == 0.0) {
          exact = j;
          break;
        }
        basis[j] = bary[j] / diff;
        denom += basis[j];
      }
      for (int j = 0; j < q; ++j) {
        const double lj = exact >= 0 ? (j == exact ? 1.0 : 0.0) : basis[j] / denom;
        t.a[static_cast<std::size_t>(i) * q + j] += ws * lj;
      }
    }
  }

  const double residual = stage_order_residual(t);
  if (!(residual < 1e-8)) {
    std::ostringstream msg;
    msg << "Gauss-Legendre tableau for q=" << q << " ill-conditioned: stage-order residual "
        << residual;
    throw std::runtime_error(msg.str());
  }
  return t;
}

std::vector<double> verify_order_conditions(const ButcherTableau& t, int max_order) {
  std::vector<double> residuals;
  for (int k = 1; k <= max_order; ++k) {
    double acc = 0.0;
    for (int j = 0; j < t.q; ++j) acc += t.b[j] * std::pow(t.c[j], k - 1);
    residuals.push_back(acc - 1.0 / k);
  }
  return residuals;
}

double stage_order_residual(const ButcherTableau& t) {
  double worst = 0.0;
  for (int i = 0; i < t.q; ++i) {
    for (int k = 1; k <= t.q; ++k) {
      double acc = 0.0;
      for (int j = 0; j < t.q; ++j) acc += t.a_at(i, j) * std::pow(t.c[j], k - 1);
      worst = std::max(worst, std::abs(acc - std::pow(t.c[i], k) / k));
    }
  }
  return worst;
}

std::string ButcherTableau::to_json() const {
  std::ostringstream out;
  out.precision(17);
  const auto list = [&out](const std::vector<double>& v, std::size_t from, std::size_t n) {
    out << '[';
    for (std::size_t k = 0; k < n; ++k) out << (k ? ", " : "") << v[from + k];
    out << ']';
  };
  out << "{\"q\": " << q << ", \"a\": [";
  for (int i = 0; i < q; ++i) {
    if (i) out << ", ";
    list(a, static_cast<std::size_t>(i) * q, q);
  }
  out << "], \"b\": ";
  list(b, 0, b.size());
  out << ", \"c\": ";
  list(c, 0, c.size());
  out << '}';
  return out.str();
}

}  // namespace hpinn::irk
