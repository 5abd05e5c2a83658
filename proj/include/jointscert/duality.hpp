#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace jointscert {

/// K(x, y_1, ..., y_d) > 0 at one tuple. In a symmetric instance `y` is
/// sorted and stands for every ordering of the multiset, each carrying
/// `value`.
struct KernelEntry {
  std::size_t x = 0;
  std::vector<std::size_t> y;
  mpq_class value;
};

/// A finite multilinear (or symmetric) kernel with weighted l^1 norms on
/// the index sets Y_j.
struct DiscreteInstance {
  std::size_t d = 2;
  std::vector<mpq_class> mu;                   // weight of each x
  std::vector<mpq_class> M;                    // density at each x
  std::vector<std::vector<mpq_class>> w;       // w[j][y]
  std::vector<KernelEntry> kernel;
  mpq_class q = 1;
  bool symmetric = false;

  std::size_t num_points() const { return mu.size(); }
  std::size_t y_size(std::size_t j) const { return w[j].size(); }

  /// Throws InputError on malformed data; sorts symmetric entries.
  void validate();
  /// Every ordered tuple with its value, as a multilinear instance.
  DiscreteInstance as_multilinear() const;
  /// Points with M > 0 and no positive kernel entry.
  std::vector<std::size_t> unsaturated() const;
};

/// One table per j (a single table when symmetric), indexed [j][x][y].
struct FactorTables {
  bool symmetric = false;
  std::vector<std::vector<std::vector<mpq_class>>> g;
  mpq_class value;  // max_j max_y sum_x mu g_j(x, y) / w_j(y)

  const std::vector<std::vector<mpq_class>>& table(std::size_t j) const {
    return g[symmetric ? 0 : j];
  }
};

/// Dual test functions: one vector per j, a single one when symmetric.
using DualWeights = std::vector<std::vector<double>>;

struct SolveReport {
  double primal = 0;
  double dual = 0;
  double gap = 0;  // |primal - dual| / max(primal, dual, 1)
  std::size_t iterations = 0;
  double tolerance = 0;
  bool lifted_exact = false;
  std::vector<std::pair<double, double>> trace;  // (dual, primal) per ascent step
};

struct PrimalResult {
  FactorTables tables;
  DualWeights f;  // barrier multipliers turned into test functions
  SolveReport report;
};

struct InnerResult {
  double value = 0;
  double lower = 0;
  DualWeights S;
};

struct ReducedInstance {
  DiscreteInstance instance;
  std::vector<std::size_t> kept;  // original index of each reduced point
  double density_norm = 0;        // ||M||_{q'}
};

/// mu' = M mu, M' = 1, q' = 1, dropping points with M = 0.
/// Throws InputError("vacuous instance") when M vanishes.
ReducedInstance reduce_to_q1(const DiscreteInstance& inst);
/// g = M g' row by row, with zero rows for dropped points.
FactorTables lift_from_q1(const ReducedInstance& reduced, const DiscreteInstance& original,
                          const FactorTables& tables);
double density_norm(const DiscreteInstance& inst);

/// inf of sum_j sum_y S_j(y) f_j(y) over S with M(x)^d K(x, .) <= prod S_j.
InnerResult inner_min(const DiscreteInstance& inst, std::size_t x, const DualWeights& f);
/// sum_x mu(x) inner_min(x, f).
double dual_value(const DiscreteInstance& inst, const DualWeights& f);

struct PrimalOptions {
  double tolerance = 1e-10;
  std::size_t polish_steps = 12;
};

/// Minimizes the table value subject to M^d K <= prod g_j, lifts the result
/// to exactly feasible rationals and evaluates the dual at the barrier
/// multipliers. Throws InputError("saturation violated ...").
PrimalResult primal_solve(const DiscreteInstance& inst, const PrimalOptions& options = {});

/// Best dual value found (barrier warm start, then mirror ascent).
double dual_solve(const DiscreteInstance& inst, DualWeights* best = nullptr);
double minimax_gap(const DiscreteInstance& inst);

/// First tuple with M^d K > prod g, if any, formatted for reports.
std::optional<std::string> find_violation(const DiscreteInstance& inst,
                                          const FactorTables& tables);
mpq_class table_value(const DiscreteInstance& inst, const FactorTables& tables);

/// Scales tables by the least rational c (up to rounding) with c^d
/// covering the worst residual, so that every constraint holds exactly.
/// `bits` is the binary precision of c.
void rational_lift(const DiscreteInstance& inst, FactorTables& tables, int bits = 30);

/// g = prod_j g_j^{1/d}, lifted to exact feasibility.
FactorTables symmetrize_tables(const DiscreteInstance& inst, const FactorTables& tables);

/// sum_x mu(x) (sum K prod f_j)^{1/d}.
double t_norm(const DiscreteInstance& inst, const DualWeights& f);

struct DiagOffdiag {
  double a_diag = 0;     // sup ||T(f, ..., f)^{1/d}||_q over the unit ball
  double a_offdiag = 0;  // sup ||T(f_1, ..., f_d)^{1/d}||_q
  double diag_power() const;
  double offdiag_power() const;
  std::size_t d = 2;
};

/// Multi-start maximization over the weighted simplices.
DiagOffdiag diag_offdiag_constants(const DiscreteInstance& inst);

/// Random saturated instance with M = 1, q = 1.
DiscreteInstance random_instance(std::uint64_t seed, std::size_t d, std::size_t max_points,
                                 std::size_t max_y, bool symmetric);

}  // namespace jointscert
