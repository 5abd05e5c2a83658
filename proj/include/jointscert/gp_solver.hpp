#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace jointscert {

/// A geometric program in log variables u:
///
///   minimize tau
///   subject to  log sum_i exp(u_{v_i} + c_i) <= tau   for every group,
///               sum_i a_i u_{v_i} >= b                for every linear row,
///
/// where every linear coefficient a_i is positive.
struct GpProblem {
  struct Term {
    int var;
    double coef;
  };
  struct Group {
    std::vector<Term> terms;  // coef = c_i, the log of the term's weight
  };
  struct Row {
    std::vector<Term> terms;  // coef = a_i > 0
    double rhs = 0;
  };

  std::size_t num_vars = 0;
  std::vector<Group> groups;
  std::vector<Row> rows;
};

struct GpOptions {
  double tolerance = 1e-9;   // bound on m / t, the gap in tau
  double t_initial = 1.0;
  double t_growth = 8.0;
  std::size_t max_newton = 4000;
};

struct GpResult {
  std::vector<double> u;
  double tau = 0;
  double gap = 0;                    // m / t; the optimum lies within gap of tau
  std::vector<double> group_weight;  // multipliers of the groups, summing to 1
  std::vector<double> row_weight;    // multipliers of the linear rows
  std::size_t newton_steps = 0;
  std::size_t outer_steps = 0;
};

/// Log-barrier path following with sparse Newton steps. Throws
/// ConvergenceError if the Newton budget runs out.
GpResult solve_gp(const GpProblem& problem, const GpOptions& options = {});

}  // namespace jointscert
