#include <doctest.h>

#include <cmath>
#include <random>

#include "jointscert/duality.hpp"
#include "jointscert/error.hpp"

using namespace jointscert;

namespace {

DiscreteInstance three_axes(bool symmetric) {
  DiscreteInstance inst;
  inst.d = 3;
  inst.symmetric = true;
  inst.mu = {1};
  inst.M = {1};
  inst.w = {{1, 1, 1}};
  inst.kernel = {{0, {0, 1, 2}, 1}};
  inst.validate();
  return symmetric ? inst : inst.as_multilinear();
}

DiscreteInstance off_diagonal(bool symmetric) {
  DiscreteInstance inst;
  inst.d = 2;
  inst.mu = {1};
  inst.M = {1};
  if (symmetric) {
    inst.symmetric = true;
    inst.w = {{1, 1}};
    inst.kernel = {{0, {0, 1}, 1}};
  } else {
    inst.w = {{1, 1}, {1, 1}};
    inst.kernel = {{0, {0, 1}, 1}, {0, {1, 0}, 1}};
  }
  inst.validate();
  return inst;
}

// Sum over ordered tuples of K(x, y) prod_j f_j(y_j).
double kernel_mass(const DiscreteInstance& inst, std::size_t x, const DualWeights& f) {
  double total = 0;
  for (const auto& e : inst.as_multilinear().kernel) {
    if (e.x != x) continue;
    double prod = e.value.get_d();
    for (std::size_t j = 0; j < inst.d; ++j) prod *= f[inst.symmetric ? 0 : j][e.y[j]];
    total += prod;
  }
  return total;
}

DualWeights random_f(std::mt19937_64& rng, const DiscreteInstance& inst) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  DualWeights f(inst.symmetric ? 1 : inst.d);
  for (std::size_t j = 0; j < f.size(); ++j) {
    for (std::size_t y = 0; y < inst.y_size(j); ++y) f[j].push_back(u(rng));
  }
  return f;
}

double norm_of(const DiscreteInstance& inst, std::size_t j, const std::vector<double>& f) {
  double s = 0;
  for (std::size_t y = 0; y < f.size(); ++y) s += inst.w[j][y].get_d() * f[y];
  return s;
}

}  // namespace

TEST_SUITE("duality") {

TEST_CASE("instance validation") {
  DiscreteInstance bad = three_axes(true);
  bad.kernel[0].value = -1;
  CHECK_THROWS_AS(bad.validate(), InputError);
  DiscreteInstance unsat = off_diagonal(false);
  unsat.mu.push_back(1);
  unsat.M.push_back(1);
  unsat.validate();
  CHECK(unsat.unsaturated() == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(primal_solve(unsat), InputError);
}

TEST_CASE("q = 1 reduction") {
  DiscreteInstance inst = off_diagonal(false);
  const auto same = reduce_to_q1(inst);
  CHECK(same.instance.mu == inst.mu);
  CHECK(same.instance.M == inst.M);
  CHECK(same.density_norm == 1);

  inst.mu = {2, 3, 1};
  inst.M = {mpq_class(1, 2), 0, 3};
  inst.w = {{1, 1}, {1, 1}};
  inst.kernel = {{0, {0, 1}, 1}, {1, {1, 0}, 1}, {2, {1, 1}, 2}};
  inst.q = mpq_class(3, 2);
  inst.validate();
  const auto r = reduce_to_q1(inst);
  CHECK(r.kept == std::vector<std::size_t>{0, 2});
  CHECK(r.instance.mu == std::vector<mpq_class>{1, 3});
  CHECK(r.instance.M == std::vector<mpq_class>{1, 1});
  CHECK(r.instance.q == 1);
  // ||M||_3 with q' = 3: (2/8 + 27)^{1/3}.
  CHECK(std::abs(r.density_norm - std::cbrt(0.25 + 27.0)) < 1e-12);

  // Tables for the reduced instance map back to feasible tables.
  const auto solved = primal_solve(r.instance);
  const auto lifted = lift_from_q1(r, inst, solved.tables);
  CHECK_FALSE(find_violation(inst, lifted).has_value());
  for (const auto& e : inst.kernel) {
    const mpq_class lhs = inst.M[e.x] * inst.M[e.x] * e.value;
    CHECK(lhs <= lifted.g[0][e.x][e.y[0]] * lifted.g[1][e.x][e.y[1]]);
  }

  DiscreteInstance vacuous = off_diagonal(false);
  vacuous.M = {0};
  CHECK_THROWS_AS(reduce_to_q1(vacuous), InputError);
}

TEST_CASE("inner problem closed forms") {
  const auto sym = three_axes(true);
  const auto r = inner_min(sym, 0, {{1, 1, 1}});
  CHECK(std::abs(r.value - 3) < 1e-6);
  CHECK(r.lower <= r.value);
  CHECK(r.lower > 3 - 1e-6);
  for (double s : r.S[0]) CHECK(std::abs(s - 1) < 1e-4);

  const auto off = off_diagonal(false);
  CHECK(std::abs(inner_min(off, 0, {{1, 1}, {1, 1}}).value - 4) < 1e-6);

  DiscreteInstance zero = off;
  zero.kernel.clear();
  zero.M = {0};
  CHECK(inner_min(zero, 0, {{1, 1}, {1, 1}}).value == 0);
}

TEST_CASE("inner problem lower bounds and concavity") {
  std::mt19937_64 rng(77);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const bool symmetric = seed % 2 == 1;
    const auto inst = random_instance(seed, 2 + seed % 3 / 2, 3, 4, symmetric);
    const double d = static_cast<double>(inst.d);
    for (std::size_t x = 0; x < inst.num_points(); ++x) {
      const auto f = random_f(rng, inst);
      const auto g = random_f(rng, inst);
      const double mass = kernel_mass(inst, x, f);
      const double v = inner_min(inst, x, f).value;
      if (symmetric) {
        CHECK(v >= std::pow(mass, 1 / d) - 1e-8);
      } else {
        CHECK(v >= d * std::pow(mass, 1 / d) - 1e-8);
      }
      DualWeights mid = f;
      for (std::size_t j = 0; j < f.size(); ++j) {
        for (std::size_t y = 0; y < f[j].size(); ++y) mid[j][y] = (f[j][y] + g[j][y]) / 2;
      }
      const double avg = (v + inner_min(inst, x, g).value) / 2;
      CHECK(inner_min(inst, x, mid).value >= avg - 1e-8 * std::max(1.0, avg));
    }
  }
}

TEST_CASE("three axes: primal equals dual") {
  for (bool symmetric : {true, false}) {
    const auto inst = three_axes(symmetric);
    const auto r = primal_solve(inst);
    CHECK(std::abs(r.report.primal - 1) < 1e-6);
    CHECK(std::abs(r.report.dual - 1) < 1e-6);
    CHECK(r.report.dual <= r.report.primal + 1e-8);
    CHECK(r.report.gap < 1e-4);
    CHECK(r.report.lifted_exact);
    CHECK_FALSE(find_violation(inst, r.tables).has_value());
    CHECK(minimax_gap(inst) < 1e-4);
  }
  DualWeights third = {{1.0 / 3, 1.0 / 3, 1.0 / 3}};
  CHECK(std::abs(dual_value(three_axes(true), third) - 1) < 1e-6);
}

TEST_CASE("vanishing kernel") {
  DiscreteInstance inst = off_diagonal(false);
  inst.kernel.clear();
  inst.M = {0};
  inst.validate();
  const auto r = primal_solve(inst);
  CHECK(r.tables.value == 0);
  for (const auto& table : r.tables.g) {
    for (const auto& row : table) {
      for (const auto& v : row) CHECK(v == 0);
    }
  }
  CHECK(dual_value(inst, {{1, 1}, {1, 1}}) == 0);
  CHECK(minimax_gap(inst) == 0);
}

TEST_CASE("weak duality, exact feasibility and Hoelder on random instances") {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    const auto inst = random_instance(500 + seed, 2 + seed % 2, 4, 5, seed % 4 == 0);
    const auto r = primal_solve(inst);
    CHECK(r.report.lifted_exact);
    CHECK_FALSE(find_violation(inst, r.tables).has_value());
    CHECK(table_value(inst, r.tables) == r.tables.value);
    const double scale = std::max(1.0, r.report.primal);
    CHECK(r.report.dual <= r.report.primal + 1e-8 * scale);
    for (const auto& [dual, primal] : r.report.trace) CHECK(dual <= primal + 1e-8 * scale);
    CHECK(r.report.gap <= 1e-4);

    const double V = r.tables.value.get_d();
    for (int k = 0; k < 5; ++k) {
      const auto f = random_f(rng, inst);
      double norms = 1;
      for (std::size_t j = 0; j < inst.d; ++j) {
        norms *= norm_of(inst, j, f[inst.symmetric ? 0 : j]);
      }
      CHECK(t_norm(inst, f) <= V * std::pow(norms, 1.0 / inst.d) * (1 + 1e-9));
    }
  }
}

TEST_CASE("homogeneity in mu") {
  auto inst = random_instance(42, 2, 3, 3, false);
  const auto base = primal_solve(inst);
  for (auto& m : inst.mu) m *= 3;
  const auto scaled = primal_solve(inst);
  CHECK(std::abs(scaled.report.primal - 3 * base.report.primal) < 1e-6 * scaled.report.primal);
  CHECK(std::abs(scaled.report.dual - 3 * base.report.dual) < 1e-6 * scaled.report.primal);
  CHECK(std::abs(scaled.report.gap - base.report.gap) < 1e-5);
}

TEST_CASE("symmetrization") {
  DiscreteInstance inst;
  inst.d = 2;
  inst.symmetric = true;
  inst.mu = {1};
  inst.M = {1};
  inst.w = {{1}};
  inst.kernel = {{0, {0, 0}, 4}};
  inst.validate();
  FactorTables pair;
  pair.g = {{{4}}, {{1}}};
  pair.value = 4;
  const auto g = symmetrize_tables(inst, pair);
  CHECK(g.symmetric);
  CHECK(std::abs(g.g[0][0][0].get_d() - 2) < 1e-10);
  CHECK_FALSE(find_violation(inst, g).has_value());

  FactorTables equal;
  equal.g = {{{3}}, {{3}}};
  CHECK(std::abs(symmetrize_tables(inst, equal).g[0][0][0].get_d() - 3) < 1e-10);

  CHECK_THROWS_AS(symmetrize_tables(off_diagonal(false), pair), InputError);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sym = random_instance(900 + seed, 2 + seed % 2, 2, 3, true);
    const auto multi = primal_solve(sym.as_multilinear());
    const auto s = symmetrize_tables(sym, multi.tables);
    CHECK_FALSE(find_violation(sym, s).has_value());
    CHECK(s.value.get_d() <= multi.tables.value.get_d() * (1 + 1e-10));
  }
}

TEST_CASE("diagonal and off-diagonal constants") {
  const auto dd = diag_offdiag_constants(off_diagonal(true));
  CHECK(std::abs(dd.diag_power() - 0.5) < 1e-6);
  CHECK(std::abs(dd.offdiag_power() - 1) < 1e-6);

  DiscreteInstance corner;
  corner.d = 2;
  corner.symmetric = true;
  corner.mu = {1};
  corner.M = {1};
  corner.w = {{1, 1}};
  corner.kernel = {{0, {0, 0}, 1}};
  corner.validate();
  CHECK(std::abs(diag_offdiag_constants(corner).diag_power() - 1) < 1e-6);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_instance(300 + seed, 2, 3, 3, true);
    const auto c = diag_offdiag_constants(inst);
    CHECK(c.a_diag <= c.a_offdiag + 1e-6);
    CHECK(c.a_offdiag <= 2 * c.a_diag + 1e-6);
  }
}

}  // TEST_SUITE
