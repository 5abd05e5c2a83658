#include "jointscert/gp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "jointscert/error.hpp"

namespace jointscert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kCentringSteps = 200;

struct Barrier {
  const GpProblem& problem;
  std::size_t n;  // index of tau

  // log-sum-exp of a group, with the softmax weights written to `p` if given.
  double lse(const GpProblem::Group& g, const Eigen::VectorXd& z,
             std::vector<double>* p = nullptr) const {
    double top = -kInf;
    for (const auto& term : g.terms) top = std::max(top, z[term.var] + term.coef);
    double sum = 0;
    if (p) p->resize(g.terms.size());
    for (std::size_t i = 0; i < g.terms.size(); ++i) {
      const double e = std::exp(z[g.terms[i].var] + g.terms[i].coef - top);
      sum += e;
      if (p) (*p)[i] = e;
    }
    if (p) {
      for (auto& x : *p) x /= sum;
    }
    return top + std::log(sum);
  }

  double slack(const GpProblem::Row& r, const Eigen::VectorXd& z) const {
    double s = -r.rhs;
    for (const auto& term : r.terms) s += term.coef * z[term.var];
    return s;
  }

  // Barrier state at a point, reused to evaluate changes accurately.
  struct Local {
    std::vector<double> slacks, heights;
    std::vector<std::vector<double>> softmax;
  };

  Local local(const Eigen::VectorXd& z) const {
    Local out;
    for (const auto& r : problem.rows) out.slacks.push_back(slack(r, z));
    out.softmax.resize(problem.groups.size());
    for (std::size_t k = 0; k < problem.groups.size(); ++k) {
      out.heights.push_back(z[n] - lse(problem.groups[k], z, &out.softmax[k]));
    }
    return out;
  }

  // f(z + dz) - f(z) for f = t * tau - sum log(slacks), computed from
  // relative changes so that it stays accurate when f itself is huge.
  // +inf when z + dz leaves the domain.
  double change(const Local& at, const Eigen::VectorXd& dz, double t) const {
    double out = t * dz[n];
    for (std::size_t i = 0; i < problem.rows.size(); ++i) {
      double ds = 0;
      for (const auto& term : problem.rows[i].terms) ds += term.coef * dz[term.var];
      const double ratio = ds / at.slacks[i];
      if (!(ratio > -1)) return kInf;
      out -= std::log1p(ratio);
    }
    for (std::size_t k = 0; k < problem.groups.size(); ++k) {
      const auto& terms = problem.groups[k].terms;
      double top = -kInf;
      for (const auto& term : terms) top = std::max(top, dz[term.var]);
      double sum = 0;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        sum += at.softmax[k][i] * std::exp(dz[terms[i].var] - top);
      }
      const double dh = dz[n] - (top + std::log(sum));
      const double ratio = dh / at.heights[k];
      if (!(ratio > -1)) return kInf;
      out -= std::log1p(ratio);
    }
    return out;
  }

  void derivatives(const Eigen::VectorXd& z, double t, Eigen::VectorXd& grad,
                   std::vector<Eigen::Triplet<double>>& hess) const {
    grad.setZero(n + 1);
    hess.clear();
    grad[n] = t;
    for (const auto& r : problem.rows) {
      const double s = slack(r, z);
      for (const auto& a : r.terms) {
        grad[a.var] -= a.coef / s;
        for (const auto& b : r.terms) {
          hess.emplace_back(a.var, b.var, a.coef * b.coef / (s * s));
        }
      }
    }
    std::vector<double> p;
    for (const auto& g : problem.groups) {
      const double h = z[n] - lse(g, z, &p);
      const double ih = 1.0 / h;
      const double ih2 = ih * ih;
      grad[n] -= ih;
      for (std::size_t i = 0; i < g.terms.size(); ++i) {
        const int vi = g.terms[i].var;
        grad[vi] += p[i] * ih;
        hess.emplace_back(vi, vi, p[i] * ih);
        for (std::size_t j = 0; j < g.terms.size(); ++j) {
          hess.emplace_back(vi, g.terms[j].var, p[i] * p[j] * (ih2 - ih));
        }
        hess.emplace_back(vi, static_cast<int>(n), -p[i] * ih2);
        hess.emplace_back(static_cast<int>(n), vi, -p[i] * ih2);
      }
      hess.emplace_back(static_cast<int>(n), static_cast<int>(n), ih2);
    }
    for (std::size_t i = 0; i <= n; ++i) {
      hess.emplace_back(static_cast<int>(i), static_cast<int>(i), 1e-13);
    }
  }
};

}  // namespace

GpResult solve_gp(const GpProblem& problem, const GpOptions& options) {
  const std::size_t n = problem.num_vars;
  if (problem.groups.empty()) throw InputError("geometric program without objective groups");
  for (const auto& r : problem.rows) {
    for (const auto& a : r.terms) {
      if (!(a.coef > 0)) throw InputError("linear coefficients must be positive");
    }
  }
  Barrier barrier{problem, n};

  // Strictly feasible start: every row gets slack at least its coefficient sum.
  double start = 0;
  for (const auto& r : problem.rows) {
    double weight = 0;
    for (const auto& a : r.terms) weight += a.coef;
    start = std::max(start, r.rhs / weight);
  }
  Eigen::VectorXd z = Eigen::VectorXd::Constant(n + 1, start + 1.0);
  double top = -kInf;
  for (const auto& g : problem.groups) top = std::max(top, barrier.lse(g, z));
  z[n] = top + 1.0;

  const double m = static_cast<double>(problem.rows.size() + problem.groups.size());
  double t = options.t_initial;
  GpResult result;
  Eigen::VectorXd grad;
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::SparseMatrix<double> H(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n + 1));
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analysed = false;

  while (true) {
    ++result.outer_steps;
    // A loosely centred iterate still yields a valid bound, so each
    // centring gets a bounded share of the budget.
    for (std::size_t inner = 0; inner < kCentringSteps; ++inner) {
      if (result.newton_steps >= options.max_newton) {
        const double lower = z[n] - m / t;
        throw ConvergenceError("barrier method exceeded its Newton budget", std::exp(lower),
                               std::exp(z[n]));
      }
      ++result.newton_steps;
      barrier.derivatives(z, t, grad, triplets);
      H.setFromTriplets(triplets.begin(), triplets.end());
      if (!analysed) {
        ldlt.analyzePattern(H);
        analysed = true;
      }
      ldlt.factorize(H);
      if (ldlt.info() != Eigen::Success) {
        throw ConvergenceError("Newton system is singular", std::exp(z[n] - m / t),
                               std::exp(z[n]));
      }
      const Eigen::VectorXd step = ldlt.solve(-grad);
      const double decrement = -grad.dot(step);
      if (!(decrement >= 0) || decrement / 2 < 1e-8) break;
      const auto at = barrier.local(z);
      double alpha = 1.0;
      bool moved = false;
      for (int k = 0; k < 60; ++k, alpha *= 0.5) {
        if (barrier.change(at, alpha * step, t) <= -0.25 * alpha * decrement) {
          z += alpha * step;
          moved = true;
          break;
        }
      }
      if (!moved) break;  // stalled at working precision
    }
    if (m / t <= options.tolerance) break;
    t *= options.t_growth;
  }

  result.u.assign(z.data(), z.data() + n);
  result.tau = z[n];
  result.gap = m / t;
  result.group_weight.reserve(problem.groups.size());
  double total = 0;
  for (const auto& g : problem.groups) {
    result.group_weight.push_back(1.0 / (t * (z[n] - barrier.lse(g, z))));
    total += result.group_weight.back();
  }
  for (auto& w : result.group_weight) w /= total;
  for (const auto& r : problem.rows) result.row_weight.push_back(1.0 / (t * barrier.slack(r, z)));
  return result;
}

}  // namespace jointscert
