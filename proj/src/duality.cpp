#include "jointscert/duality.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include "jointscert/error.hpp"
#include "jointscert/field.hpp"
#include "jointscert/gp_solver.hpp"

namespace jointscert {

namespace {

mpq_class pow_q(const mpq_class& base, std::size_t e) {
  mpq_class out = 1;
  for (std::size_t i = 0; i < e; ++i) out *= base;
  return out;
}

// Rounds a positive double to a 30-bit mantissa so lifted tables stay short.
mpq_class short_rational(double v, int bits = 30) {
  if (!(v > 0)) return 0;
  int e = 0;
  const double m = std::frexp(v, &e);
  mpq_class out(mpz_class(static_cast<long>(std::llround(std::ldexp(m, bits)))));
  const int shift = e - bits;
  if (shift >= 0) {
    mpq_mul_2exp(out.get_mpq_t(), out.get_mpq_t(), static_cast<mp_bitcnt_t>(shift));
  } else {
    mpq_div_2exp(out.get_mpq_t(), out.get_mpq_t(), static_cast<mp_bitcnt_t>(-shift));
  }
  return out;
}

std::size_t num_tables(const DiscreteInstance& inst) { return inst.symmetric ? 1 : inst.d; }

std::size_t table_of(const DiscreteInstance& inst, std::size_t slot) {
  return inst.symmetric ? 0 : slot;
}

// log of M(x)^d K, the right-hand side of a log-domain constraint.
double log_rhs(const DiscreteInstance& inst, const KernelEntry& e) {
  return static_cast<double>(inst.d) * log_rational(inst.M[e.x]) + log_rational(e.value);
}

struct VarIndex {
  std::unordered_map<std::uint64_t, int> index;
  std::vector<std::array<std::size_t, 3>> keys;  // (table, x, y)

  int get(std::size_t j, std::size_t x, std::size_t y) {
    const std::uint64_t key = (static_cast<std::uint64_t>(j) << 48) |
                              (static_cast<std::uint64_t>(x) << 24) | y;
    auto [it, fresh] = index.emplace(key, static_cast<int>(keys.size()));
    if (fresh) keys.push_back({j, x, y});
    return it->second;
  }
};

// One row per entry, merging repeated variables of a symmetric multiset.
GpProblem::Row make_row(const DiscreteInstance& inst, const KernelEntry& e, VarIndex& vars,
                        std::size_t x_key) {
  std::map<int, double> coef;
  for (std::size_t s = 0; s < inst.d; ++s) coef[vars.get(table_of(inst, s), x_key, e.y[s])] += 1;
  GpProblem::Row row;
  for (const auto& [v, c] : coef) row.terms.push_back({v, c});
  row.rhs = log_rhs(inst, e);
  return row;
}

FactorTables empty_tables(const DiscreteInstance& inst) {
  FactorTables t;
  t.symmetric = inst.symmetric;
  t.g.resize(num_tables(inst));
  for (std::size_t j = 0; j < t.g.size(); ++j) {
    t.g[j].assign(inst.num_points(), std::vector<mpq_class>(inst.y_size(j), mpq_class(0)));
  }
  t.value = 0;
  return t;
}

mpq_class tuple_product(const DiscreteInstance& inst, const FactorTables& t,
                        const KernelEntry& e) {
  mpq_class prod = 1;
  for (std::size_t s = 0; s < inst.d; ++s) prod *= t.table(s)[e.x][e.y[s]];
  return prod;
}

// Exponentiated-gradient polish of the dual test functions.
double polish_dual(const DiscreteInstance& inst, DualWeights& f, double current,
                   std::size_t steps, double primal, std::vector<std::pair<double, double>>* trace) {
  const std::size_t T = num_tables(inst);
  double eta = 0.5;
  for (std::size_t step = 0; step < steps; ++step) {
    std::vector<std::vector<double>> grad(T);
    for (std::size_t j = 0; j < T; ++j) grad[j].assign(f[j].size(), 0.0);
    for (std::size_t x = 0; x < inst.num_points(); ++x) {
      const InnerResult r = inner_min(inst, x, f);
      const double mu = inst.mu[x].get_d();
      for (std::size_t j = 0; j < T; ++j) {
        for (std::size_t y = 0; y < f[j].size(); ++y) grad[j][y] += mu * r.S[j][y];
      }
    }
    double scale = 0;
    for (std::size_t j = 0; j < T; ++j) {
      for (std::size_t y = 0; y < f[j].size(); ++y) {
        if (f[j][y] > 0) scale = std::max(scale, grad[j][y] / inst.w[j][y].get_d());
      }
    }
    if (!(scale > 0)) break;
    DualWeights trial = f;
    double total = 0;
    for (std::size_t j = 0; j < T; ++j) {
      for (std::size_t y = 0; y < f[j].size(); ++y) {
        if (f[j][y] <= 0) continue;
        const double w = inst.w[j][y].get_d();
        const double c = w * f[j][y] * std::exp(eta * grad[j][y] / (w * scale));
        trial[j][y] = c;
        total += c;
      }
    }
    for (std::size_t j = 0; j < T; ++j) {
      for (std::size_t y = 0; y < f[j].size(); ++y) trial[j][y] /= total * inst.w[j][y].get_d();
    }
    const double value = dual_value(inst, trial);
    if (trace) trace->emplace_back(std::max(value, current), primal);
    if (value > current) {
      current = value;
      f = std::move(trial);
    } else {
      eta *= 0.25;
    }
  }
  return current;
}

}  // namespace

void DiscreteInstance::validate() {
  if (d < 1) throw InputError("d must be at least 1");
  if (symmetric && w.size() == 1 && d > 1) w.assign(d, w.front());
  if (w.size() != d) throw InputError("expected " + std::to_string(d) + " index sets");
  for (std::size_t j = 0; j < d; ++j) {
    if (w[j].empty()) throw InputError("index set Y_" + std::to_string(j + 1) + " is empty");
    for (std::size_t y = 0; y < w[j].size(); ++y) {
      if (sgn(w[j][y]) <= 0) {
        throw InputError("weight w_" + std::to_string(j + 1) + "(" + std::to_string(y) +
                         ") must be positive");
      }
    }
    if (symmetric && w[j] != w[0]) throw InputError("symmetric instance needs equal Y weights");
  }
  if (M.empty()) M.assign(mu.size(), mpq_class(1));
  if (M.size() != mu.size()) throw InputError("M and mu have different lengths");
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (sgn(mu[x]) <= 0) throw InputError("mu(" + std::to_string(x) + ") must be positive");
    if (sgn(M[x]) < 0) throw InputError("M(" + std::to_string(x) + ") is negative");
  }
  if (q < 1) throw InputError("q must be at least 1");
  std::vector<KernelEntry> kept;
  std::set<std::pair<std::size_t, std::vector<std::size_t>>> seen;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    KernelEntry e = kernel[i];
    const std::string where = "kernel entry " + std::to_string(i);
    if (e.x >= mu.size()) throw InputError(where + ": point index out of range");
    if (e.y.size() != d) throw InputError(where + ": expected " + std::to_string(d) + " indices");
    for (std::size_t s = 0; s < d; ++s) {
      if (e.y[s] >= w[s].size()) throw InputError(where + ": index out of range");
    }
    if (sgn(e.value) < 0) throw InputError(where + ": negative kernel value");
    if (sgn(e.value) == 0) continue;
    if (symmetric) std::sort(e.y.begin(), e.y.end());
    if (!seen.emplace(e.x, e.y).second) throw InputError(where + ": duplicate tuple");
    kept.push_back(std::move(e));
  }
  kernel = std::move(kept);
}

DiscreteInstance DiscreteInstance::as_multilinear() const {
  if (!symmetric) return *this;
  DiscreteInstance out = *this;
  out.symmetric = false;
  out.kernel.clear();
  for (const auto& e : kernel) {
    KernelEntry p = e;
    do {
      out.kernel.push_back(p);
    } while (std::next_permutation(p.y.begin(), p.y.end()));
  }
  return out;
}

std::vector<std::size_t> DiscreteInstance::unsaturated() const {
  std::vector<bool> hit(mu.size(), false);
  for (const auto& e : kernel) hit[e.x] = true;
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (!hit[x] && sgn(M[x]) > 0) out.push_back(x);
  }
  return out;
}

double density_norm(const DiscreteInstance& inst) {
  double top = 0;
  for (const auto& m : inst.M) top = std::max(top, m.get_d());
  if (inst.q == 1) return top;
  // q' = q / (q - 1); scale by the maximum to avoid overflow.
  if (top == 0) return 0;
  const double qd = inst.q.get_d();
  const double qp = qd / (qd - 1);
  double sum = 0;
  for (std::size_t x = 0; x < inst.num_points(); ++x) {
    sum += inst.mu[x].get_d() * std::pow(inst.M[x].get_d() / top, qp);
  }
  return top * std::pow(sum, 1 / qp);
}

ReducedInstance reduce_to_q1(const DiscreteInstance& inst) {
  ReducedInstance out;
  out.density_norm = density_norm(inst);
  std::vector<std::size_t> position(inst.num_points(), SIZE_MAX);
  DiscreteInstance& r = out.instance;
  r.d = inst.d;
  r.w = inst.w;
  r.q = 1;
  r.symmetric = inst.symmetric;
  for (std::size_t x = 0; x < inst.num_points(); ++x) {
    if (sgn(inst.M[x]) == 0) continue;
    position[x] = out.kept.size();
    out.kept.push_back(x);
    r.mu.push_back(inst.mu[x] * inst.M[x]);
    r.M.push_back(1);
  }
  if (out.kept.empty()) throw InputError("vacuous instance");
  for (const auto& e : inst.kernel) {
    if (position[e.x] == SIZE_MAX) continue;
    KernelEntry k = e;
    k.x = position[e.x];
    r.kernel.push_back(std::move(k));
  }
  return out;
}

FactorTables lift_from_q1(const ReducedInstance& reduced, const DiscreteInstance& original,
                          const FactorTables& tables) {
  FactorTables out = empty_tables(original);
  for (std::size_t j = 0; j < out.g.size(); ++j) {
    for (std::size_t i = 0; i < reduced.kept.size(); ++i) {
      const std::size_t x = reduced.kept[i];
      for (std::size_t y = 0; y < out.g[j][x].size(); ++y) {
        out.g[j][x][y] = original.M[x] * tables.g[j][i][y];
      }
    }
  }
  out.value = table_value(original, out);
  return out;
}

mpq_class table_value(const DiscreteInstance& inst, const FactorTables& tables) {
  mpq_class best = 0;
  for (std::size_t j = 0; j < tables.g.size(); ++j) {
    for (std::size_t y = 0; y < inst.y_size(j); ++y) {
      mpq_class sum = 0;
      for (std::size_t x = 0; x < inst.num_points(); ++x) sum += inst.mu[x] * tables.g[j][x][y];
      sum /= inst.w[j][y];
      if (sum > best) best = sum;
    }
  }
  return best;
}

std::optional<std::string> find_violation(const DiscreteInstance& inst,
                                          const FactorTables& tables) {
  for (const auto& e : inst.kernel) {
    const mpq_class lhs = pow_q(inst.M[e.x], inst.d) * e.value;
    const mpq_class rhs = tuple_product(inst, tables, e);
    if (lhs > rhs) {
      std::string tuple;
      for (std::size_t s = 0; s < e.y.size(); ++s) tuple += (s ? "," : "") + std::to_string(e.y[s]);
      return "x=" + std::to_string(e.x) + " y=(" + tuple + "): M^d K = " +
             rational_to_string(lhs) + " > prod g = " + rational_to_string(rhs);
    }
  }
  return std::nullopt;
}

void rational_lift(const DiscreteInstance& inst, FactorTables& tables, int bits) {
  mpq_class worst = 0;
  bool any = false;
  for (const auto& e : inst.kernel) {
    if (sgn(inst.M[e.x]) == 0) continue;
    const mpq_class prod = tuple_product(inst, tables, e);
    if (sgn(prod) == 0) throw MathError("table vanishes on a constrained tuple");
    const mpq_class ratio = pow_q(inst.M[e.x], inst.d) * e.value / prod;
    if (!any || ratio > worst) worst = ratio;
    any = true;
  }
  if (any) {
    mpq_class c = short_rational(
        std::exp(log_rational(worst) / static_cast<double>(inst.d)) * (1 + 1e-15), bits);
    mpq_class bump = 1;
    mpq_div_2exp(bump.get_mpq_t(), bump.get_mpq_t(), static_cast<mp_bitcnt_t>(bits));
    bump += 1;
    while (pow_q(c, inst.d) < worst) c *= bump;
    for (auto& table : tables.g) {
      for (auto& row : table) {
        for (auto& v : row) v *= c;
      }
    }
  }
  tables.value = table_value(inst, tables);
}

InnerResult inner_min(const DiscreteInstance& inst, std::size_t x, const DualWeights& f) {
  const std::size_t T = num_tables(inst);
  if (f.size() != T) throw InputError("expected " + std::to_string(T) + " test functions");
  if (x >= inst.num_points()) throw InputError("point index out of range");
  InnerResult out;
  out.S.resize(T);
  for (std::size_t j = 0; j < T; ++j) {
    if (f[j].size() != inst.y_size(j)) throw InputError("test function has the wrong length");
    for (double v : f[j]) {
      if (v < 0) throw InputError("test functions must be nonnegative");
    }
    out.S[j].assign(f[j].size(), 0.0);
  }
  if (sgn(inst.M[x]) == 0) return out;

  VarIndex vars;
  GpProblem gp;
  for (const auto& e : inst.kernel) {
    if (e.x != x) continue;
    bool alive = true;
    for (std::size_t s = 0; s < inst.d && alive; ++s) alive = f[table_of(inst, s)][e.y[s]] > 0;
    if (alive) gp.rows.push_back(make_row(inst, e, vars, 0));
  }
  if (gp.rows.empty()) return out;
  gp.num_vars = vars.keys.size();
  GpProblem::Group group;
  for (std::size_t v = 0; v < vars.keys.size(); ++v) {
    group.terms.push_back({static_cast<int>(v), std::log(f[vars.keys[v][0]][vars.keys[v][2]])});
  }
  gp.groups.push_back(std::move(group));
  GpOptions options;
  options.tolerance = 1e-11;
  const GpResult r = solve_gp(gp, options);
  out.value = std::exp(r.tau);
  out.lower = std::exp(r.tau - r.gap);
  for (std::size_t v = 0; v < vars.keys.size(); ++v) {
    out.S[vars.keys[v][0]][vars.keys[v][2]] = std::exp(r.u[v]);
  }
  return out;
}

double dual_value(const DiscreteInstance& inst, const DualWeights& f) {
  double total = 0;
  for (std::size_t x = 0; x < inst.num_points(); ++x) {
    total += inst.mu[x].get_d() * inner_min(inst, x, f).lower;
  }
  return total;
}

PrimalResult primal_solve(const DiscreteInstance& input, const PrimalOptions& options) {
  DiscreteInstance inst = input;
  inst.validate();
  if (auto bad = inst.unsaturated(); !bad.empty()) {
    throw InputError("saturation violated at x=" + std::to_string(bad.front()));
  }
  const std::size_t T = num_tables(inst);
  PrimalResult result;
  result.tables = empty_tables(inst);
  result.f.resize(T);
  for (std::size_t j = 0; j < T; ++j) result.f[j].assign(inst.y_size(j), 0.0);
  result.report.tolerance = options.tolerance;

  VarIndex vars;
  GpProblem gp;
  for (const auto& e : inst.kernel) {
    if (sgn(inst.M[e.x]) == 0) continue;
    gp.rows.push_back(make_row(inst, e, vars, e.x));
  }
  if (gp.rows.empty()) {
    result.report.lifted_exact = true;
    return result;
  }
  gp.num_vars = vars.keys.size();
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> group_of;
  std::vector<std::pair<std::size_t, std::size_t>> group_key;
  for (std::size_t v = 0; v < vars.keys.size(); ++v) {
    const auto [j, x, y] = vars.keys[v];
    auto [it, fresh] = group_of.emplace(std::make_pair(j, y), gp.groups.size());
    if (fresh) {
      gp.groups.emplace_back();
      group_key.emplace_back(j, y);
    }
    gp.groups[it->second].terms.push_back(
        {static_cast<int>(v), log_rational(inst.mu[x]) - log_rational(inst.w[j][y])});
  }
  GpOptions gp_options;
  gp_options.tolerance = options.tolerance;
  const GpResult r = solve_gp(gp, gp_options);
  result.report.iterations = r.newton_steps;

  for (std::size_t v = 0; v < vars.keys.size(); ++v) {
    const auto [j, x, y] = vars.keys[v];
    result.tables.g[j][x][y] = short_rational(std::exp(r.u[v]));
  }
  rational_lift(inst, result.tables);
  result.report.lifted_exact = !find_violation(inst, result.tables).has_value();
  result.report.primal = result.tables.value.get_d();

  // Multipliers of slack groups are pure barrier noise; dropping them only
  // relaxes the inner problems, so the dual stays a valid lower bound.
  const double heaviest = *std::max_element(r.group_weight.begin(), r.group_weight.end());
  for (std::size_t k = 0; k < gp.groups.size(); ++k) {
    const auto [j, y] = group_key[k];
    if (r.group_weight[k] < 1e-9 * heaviest) continue;
    result.f[j][y] = r.group_weight[k] / inst.w[j][y].get_d();
  }
  double dual = dual_value(inst, result.f);
  result.report.trace.emplace_back(dual, result.report.primal);
  dual = polish_dual(inst, result.f, dual, options.polish_steps, result.report.primal,
                     &result.report.trace);
  result.report.dual = dual;
  const double P = result.report.primal;
  result.report.gap = std::abs(P - dual) / std::max({P, dual, 1.0});
  return result;
}

double dual_solve(const DiscreteInstance& inst, DualWeights* best) {
  PrimalResult r = primal_solve(inst);
  if (best) *best = r.f;
  return r.report.dual;
}

double minimax_gap(const DiscreteInstance& inst) { return primal_solve(inst).report.gap; }

FactorTables symmetrize_tables(const DiscreteInstance& inst, const FactorTables& tables) {
  if (!inst.symmetric) throw InputError("symmetrization needs a symmetric kernel");
  if (tables.symmetric) return tables;
  if (tables.g.size() != inst.d) throw InputError("expected one table per slot");
  FactorTables out = empty_tables(inst);
  for (std::size_t x = 0; x < inst.num_points(); ++x) {
    for (std::size_t y = 0; y < inst.y_size(0); ++y) {
      double log_sum = 0;
      bool zero = false;
      for (std::size_t j = 0; j < inst.d && !zero; ++j) {
        const mpq_class& v = tables.g[j][x][y];
        if (sgn(v) == 0) {
          zero = true;
        } else {
          log_sum += log_rational(v);
        }
      }
      if (!zero) {
        out.g[0][x][y] = short_rational(std::exp(log_sum / static_cast<double>(inst.d)), 50);
      }
    }
  }
  // Rounding the geometric means may break a tight constraint; only then rescale.
  if (find_violation(inst, out)) {
    rational_lift(inst, out, 50);
  } else {
    out.value = table_value(inst, out);
  }
  return out;
}

double t_norm(const DiscreteInstance& inst, const DualWeights& f) {
  const DiscreteInstance full = inst.as_multilinear();
  std::vector<double> T(inst.num_points(), 0.0);
  for (const auto& e : full.kernel) {
    double prod = e.value.get_d();
    for (std::size_t s = 0; s < inst.d; ++s) prod *= f[inst.symmetric ? 0 : s][e.y[s]];
    T[e.x] += prod;
  }
  double total = 0;
  for (std::size_t x = 0; x < T.size(); ++x) {
    total += inst.mu[x].get_d() * std::pow(T[x], 1.0 / static_cast<double>(inst.d));
  }
  return total;
}

double DiagOffdiag::diag_power() const { return std::pow(a_diag, static_cast<double>(d)); }
double DiagOffdiag::offdiag_power() const { return std::pow(a_offdiag, static_cast<double>(d)); }

namespace {

struct NormObjective {
  std::size_t d;
  double q;
  std::vector<double> mu;
  std::vector<double> w;
  // per point: (tuple, K)
  std::vector<std::vector<std::pair<std::vector<std::size_t>, double>>> entries;

  double T(std::size_t x, const std::vector<std::vector<double>>& c) const {
    double total = 0;
    for (const auto& [y, k] : entries[x]) {
      double prod = k;
      for (std::size_t s = 0; s < d; ++s) prod *= c[s][y[s]] / w[y[s]];
      total += prod;
    }
    return total;
  }

  // sum_x mu T^{q/d}; its 1/q power is the norm.
  double psi(const std::vector<std::vector<double>>& c) const {
    double total = 0;
    for (std::size_t x = 0; x < entries.size(); ++x) {
      const double t = T(x, c);
      if (t > 0) total += mu[x] * std::pow(t, q / static_cast<double>(d));
    }
    return total;
  }

  double norm(const std::vector<std::vector<double>>& c) const { return std::pow(psi(c), 1 / q); }

  std::vector<std::vector<double>> gradient(const std::vector<std::vector<double>>& c) const {
    std::vector<std::vector<double>> g(d, std::vector<double>(w.size(), 0.0));
    for (std::size_t x = 0; x < entries.size(); ++x) {
      const double t = T(x, c);
      const double outer =
          mu[x] * (q / static_cast<double>(d)) *
          std::pow(std::max(t, 1e-300), q / static_cast<double>(d) - 1);
      for (const auto& [y, k] : entries[x]) {
        for (std::size_t s = 0; s < d; ++s) {
          double prod = k;
          for (std::size_t r = 0; r < d; ++r) {
            if (r != s) prod *= c[r][y[r]] / w[y[r]];
          }
          g[s][y[s]] += outer * prod / w[y[s]];
        }
      }
    }
    return g;
  }
};

// Exponentiated gradient ascent; `tied` keeps every slot equal.
double ascend(const NormObjective& obj, std::vector<std::vector<double>>& c, bool tied) {
  double value = obj.psi(c);
  double eta = 1.0;
  for (int iter = 0; iter < 400 && eta > 1e-12; ++iter) {
    auto g = obj.gradient(c);
    if (tied) {
      for (std::size_t s = 1; s < obj.d; ++s) {
        for (std::size_t y = 0; y < g[0].size(); ++y) g[0][y] += g[s][y];
      }
      for (std::size_t s = 1; s < obj.d; ++s) g[s] = g[0];
    }
    auto trial = c;
    for (std::size_t s = 0; s < obj.d; ++s) {
      double top = 0;
      for (std::size_t y = 0; y < g[s].size(); ++y) {
        if (c[s][y] > 0) top = std::max(top, g[s][y]);
      }
      if (!(top > 0)) continue;
      double total = 0;
      for (std::size_t y = 0; y < g[s].size(); ++y) {
        trial[s][y] = c[s][y] * std::exp(eta * (g[s][y] / top - 1));
        total += trial[s][y];
      }
      for (auto& v : trial[s]) v /= total;
    }
    const double next = obj.psi(trial);
    if (next > value) {
      const double gain = next - value;
      c = std::move(trial);
      value = next;
      eta = std::min(eta * 1.5, 8.0);
      if (gain < 1e-16 * std::max(1.0, value)) break;
    } else {
      eta *= 0.3;
    }
  }
  return value;
}

void simplex_grid(std::size_t n, std::size_t resolution,
                  const std::function<void(const std::vector<double>&)>& visit) {
  std::vector<std::size_t> parts(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == n) {
      parts[i] = left;
      std::vector<double> c(n);
      for (std::size_t k = 0; k < n; ++k) c[k] = static_cast<double>(parts[k]) / resolution;
      visit(c);
      return;
    }
    for (std::size_t a = 0; a <= left; ++a) {
      parts[i] = a;
      rec(i + 1, left - a);
    }
  };
  rec(0, resolution);
}

}  // namespace

DiagOffdiag diag_offdiag_constants(const DiscreteInstance& input) {
  DiscreteInstance inst = input;
  inst.validate();
  if (!inst.symmetric) throw InputError("diagonal constants need a symmetric instance");
  for (const auto& m : inst.M) {
    if (m != 1) throw InputError("diagonal constants need M = 1");
  }
  const DiscreteInstance full = inst.as_multilinear();
  NormObjective obj;
  obj.d = inst.d;
  obj.q = inst.q.get_d();
  for (const auto& m : inst.mu) obj.mu.push_back(m.get_d());
  for (const auto& v : inst.w[0]) obj.w.push_back(v.get_d());
  obj.entries.resize(inst.num_points());
  for (const auto& e : full.kernel) obj.entries[e.x].emplace_back(e.y, e.value.get_d());
  const std::size_t n = obj.w.size();
  const std::size_t d = inst.d;
  std::mt19937_64 rng(0x5eed);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  auto random_point = [&] {
    std::vector<double> c(n);
    double total = 0;
    for (auto& v : c) total += (v = gamma(rng));
    for (auto& v : c) v /= total;
    return c;
  };

  // Diagonal: grid and random starts, then refinement of the best few.
  std::vector<std::pair<double, std::vector<double>>> starts;
  std::size_t resolution = 1;
  auto grid_size = [&](std::size_t r) {
    double count = 1;
    for (std::size_t k = 1; k < n; ++k) count = count * static_cast<double>(r + k) / k;
    return count;
  };
  while (resolution < 60 && grid_size(resolution + 1) <= 4000) ++resolution;
  simplex_grid(n, resolution, [&](const std::vector<double>& c) {
    starts.emplace_back(obj.psi(std::vector<std::vector<double>>(d, c)), c);
  });
  for (int k = 0; k < 24; ++k) {
    auto c = random_point();
    starts.emplace_back(obj.psi(std::vector<std::vector<double>>(d, c)), c);
  }
  std::sort(starts.begin(), starts.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double best_diag = 0;
  std::vector<double> best_diag_point = starts.front().second;
  for (std::size_t k = 0; k < std::min<std::size_t>(starts.size(), 12); ++k) {
    std::vector<std::vector<double>> c(d, starts[k].second);
    // Interior nudge so that exponentiated steps can move every coordinate.
    auto nudged = c;
    for (auto& slot : nudged) {
      for (auto& v : slot) v = 0.98 * v + 0.02 / static_cast<double>(n);
    }
    const double plain = ascend(obj, c, true);
    const double moved = ascend(obj, nudged, true);
    if (plain > best_diag) {
      best_diag = plain;
      best_diag_point = c[0];
    }
    if (moved > best_diag) {
      best_diag = moved;
      best_diag_point = nudged[0];
    }
  }

  // Off-diagonal: vertex tuples, the diagonal optimum and random tuples.
  double best_off = best_diag;
  std::vector<std::vector<std::vector<double>>> candidates;
  candidates.emplace_back(d, best_diag_point);
  double vertex_count = std::pow(static_cast<double>(n), static_cast<double>(d));
  if (vertex_count <= 4096) {
    std::vector<std::size_t> idx(d, 0);
    while (true) {
      std::vector<std::vector<double>> c(d, std::vector<double>(n, 0.0));
      for (std::size_t s = 0; s < d; ++s) c[s][idx[s]] = 1.0;
      candidates.push_back(std::move(c));
      std::size_t pos = d;
      while (pos > 0 && ++idx[pos - 1] == n) idx[--pos] = 0;
      if (pos == 0) break;
    }
  }
  for (int k = 0; k < 24; ++k) {
    std::vector<std::vector<double>> c;
    for (std::size_t s = 0; s < d; ++s) c.push_back(random_point());
    candidates.push_back(std::move(c));
  }
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < candidates.size(); ++i) ranked.emplace_back(obj.psi(candidates[i]), i);
  std::sort(ranked.begin(), ranked.end(), std::greater<>());
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    best_off = std::max(best_off, ranked[k].first);
    if (k >= 16) continue;
    auto c = candidates[ranked[k].second];
    auto nudged = c;
    for (auto& slot : nudged) {
      for (auto& v : slot) v = 0.98 * v + 0.02 / static_cast<double>(n);
    }
    best_off = std::max({best_off, ascend(obj, c, false), ascend(obj, nudged, false)});
  }

  DiagOffdiag out;
  out.d = d;
  out.a_diag = std::pow(best_diag, 1 / obj.q);
  out.a_offdiag = std::pow(best_off, 1 / obj.q);
  if (out.a_offdiag > static_cast<double>(d) * out.a_diag + 1e-6) {
    throw MathError("off-diagonal constant exceeds d times the diagonal one");
  }
  return out;
}

DiscreteInstance random_instance(std::uint64_t seed, std::size_t d, std::size_t max_points,
                                 std::size_t max_y, bool symmetric) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  DiscreteInstance inst;
  inst.d = d;
  inst.symmetric = symmetric;
  const std::size_t nx = uniform(1, max_points);
  for (std::size_t x = 0; x < nx; ++x) {
    inst.mu.emplace_back(static_cast<long>(uniform(1, 5)));
    inst.M.emplace_back(1);
  }
  std::vector<std::size_t> sizes(d);
  if (symmetric) {
    const std::size_t n = uniform(1, max_y);
    std::vector<mpq_class> w;
    for (std::size_t y = 0; y < n; ++y) w.emplace_back(static_cast<long>(uniform(1, 5)));
    inst.w.assign(d, w);
    sizes.assign(d, n);
  } else {
    for (std::size_t j = 0; j < d; ++j) {
      sizes[j] = uniform(1, max_y);
      std::vector<mpq_class> w;
      for (std::size_t y = 0; y < sizes[j]; ++y) w.emplace_back(static_cast<long>(uniform(1, 5)));
      inst.w.push_back(std::move(w));
    }
  }
  std::bernoulli_distribution keep(0.4);
  for (std::size_t x = 0; x < nx; ++x) {
    std::vector<KernelEntry> mine;
    std::vector<std::size_t> idx(d, 0);
    while (true) {
      if (!symmetric || std::is_sorted(idx.begin(), idx.end())) {
        if (keep(rng)) mine.push_back({x, idx, mpq_class(static_cast<long>(uniform(1, 10)))});
      }
      std::size_t pos = d;
      while (pos > 0 && ++idx[pos - 1] == sizes[pos - 1]) idx[--pos] = 0;
      if (pos == 0) break;
    }
    if (mine.empty()) {
      std::vector<std::size_t> y(d);
      for (std::size_t s = 0; s < d; ++s) y[s] = uniform(0, sizes[s] - 1);
      if (symmetric) std::sort(y.begin(), y.end());
      mine.push_back({x, y, mpq_class(static_cast<long>(uniform(1, 10)))});
    }
    for (auto& e : mine) inst.kernel.push_back(std::move(e));
  }
  inst.validate();
  return inst;
}

}  // namespace jointscert
