#include <doctest.h>

#include <cmath>
#include <random>

#include "jointscert/error.hpp"
#include "jointscert/heavy.hpp"
#include "oracles.hpp"

using namespace jointscert;

namespace {

DirectionWeights thirty_one(Field F) {
  DirectionWeights f(F, 3);
  f.add(Vector(F, {1, 0, 0}), 10);
  f.add(Vector(F, {0, 1, 0}), 10);
  f.add(Vector(F, {1, 1, 0}), 10);
  f.add(Vector(F, {0, 0, 1}), 1);
  return f;
}

DirectionWeights unit_axes(Field F) {
  DirectionWeights f(F, 3);
  for (std::size_t i = 0; i < 3; ++i) f.add(Vector::unit(F, 3, i), 1);
  return f;
}

DirectionWeights random_weights(std::mt19937_64& rng, Field F, std::size_t max_support,
                                long max_weight) {
  const auto dirs = all_directions(F, 3);
  DirectionWeights f(F, 3);
  const std::size_t count = 1 + rng() % max_support;
  for (std::size_t i = 0; i < count; ++i) {
    f.add(dirs[rng() % dirs.size()], 1 + static_cast<long>(rng() % max_weight));
  }
  return f;
}

// Exact comparison of prod rho^{m} against 1 through d-th powers.
mpq_class root_power(const std::vector<RootValue>& rho, const std::vector<std::size_t>& m) {
  mpq_class out = 1;
  for (std::size_t n = 0; n < rho.size(); ++n) {
    for (std::size_t e = 0; e < m[n] * rho[n].num; ++e) out *= rho[n].radicand;
  }
  return out;
}

}  // namespace

TEST_SUITE("heavy") {

TEST_CASE("alpha doubles") {
  CHECK(heavy_alpha(1) == 1);
  CHECK(heavy_alpha(2) == 2);
  CHECK(heavy_alpha(4) == 8);
}

TEST_CASE("heavy chain examples") {
  for (const Field F : {Field::prime(5), Field::rationals()}) {
    CHECK(find_heavy_chain(unit_axes(F)).size() == 0);

    const auto chain = find_heavy_chain(thirty_one(F));
    REQUIRE(chain.size() == 1);
    CHECK(chain.planes[0].dim() == 2);
    CHECK(chain.planes[0].contains(Vector(F, {1, 1, 0})));
    CHECK_FALSE(chain.planes[0].contains(Vector(F, {0, 0, 1})));
    REQUIRE(chain.layers.size() == 2);
    CHECK(chain.layers[0] == 30);
    CHECK(chain.layers[1] == 1);

    DirectionWeights single(F, 3);
    single.add(Vector(F, {1, 2, 3}), mpq_class(7, 2));
    const auto one = find_heavy_chain(single);
    REQUIRE(one.size() == 1);
    CHECK(one.planes[0].dim() == 1);
    CHECK(one.layers[0] == mpq_class(7, 2));
    CHECK(one.layers[1] == 0);
  }
  CHECK_THROWS_AS(find_heavy_chain(DirectionWeights(Field::prime(3), 3)), InputError);
}

TEST_CASE("heavy chain matches full subspace enumeration over F_2^3") {
  const Field F = Field::prime(2);
  const auto dirs = all_directions(F, 3);
  REQUIRE(dirs.size() == 7);
  const long levels[] = {0, 1, 3};
  std::size_t cases = 0;
  std::vector<int> code(dirs.size(), 0);
  while (true) {
    DirectionWeights f(F, 3);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      if (levels[code[i]] > 0) f.add(dirs[i], levels[code[i]]);
    }
    if (!f.empty()) {
      CHECK(oracle::heavy_chain_agrees(f, 2));
      ++cases;
    }
    std::size_t i = 0;
    while (i < code.size() && ++code[i] == 3) code[i++] = 0;
    if (i == code.size()) break;
  }
  CHECK(cases == 2186);
}

TEST_CASE("heavy chain matches full subspace enumeration over F_3^3") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    CHECK(oracle::heavy_chain_agrees(random_weights(rng, Field::prime(3), 8, 100), 3));
  }
}

TEST_CASE("rho examples") {
  const Field Q = Field::rationals();
  const auto S = build_S(thirty_one(Q));
  REQUIRE(S.rho.size() == 2);
  CHECK(S.rho[0].radicand == mpq_class(1, 30));
  CHECK(S.rho[1].radicand == 900);
  CHECK(S.rho[0].den == 3);
  CHECK(std::abs(S.rho[0].to_double() - std::pow(30.0, -1.0 / 3)) < 1e-12);
  CHECK(std::abs(S.rho[1].to_double() - std::pow(30.0, 2.0 / 3)) < 1e-9);
  CHECK(S.at(Vector(Q, {1, 1, 0})).radicand == mpq_class(1, 30));
  CHECK(S.at(Vector(Q, {0, 0, 1})).radicand == 900);

  DirectionWeights f2(Q, 2);
  f2.add(Vector(Q, {1, 0}), 4);
  f2.add(Vector(Q, {0, 1}), 1);
  const auto S2 = build_S(f2);
  REQUIRE(S2.rho.size() == 2);
  CHECK(S2.rho[0].radicand == mpq_class(1, 4));
  CHECK(S2.rho[1].radicand == 4);
  CHECK(S2.rho[0].den == 2);
  CHECK(root_power(S2.rho, {1, 1}) == 1);

  CHECK_THROWS_AS(rho_weights(find_heavy_chain(unit_axes(Q))), InputError);
}

TEST_CASE("S branches") {
  const Field F = Field::prime(5);
  const auto ones = build_S(unit_axes(F));
  REQUIRE(ones.rho.size() == 1);
  CHECK(ones.rho[0].radicand == 1);
  CHECK(verify_admissibility(ones, unit_axes(F)).pass);

  DirectionWeights flat(F, 3);
  flat.add(Vector(F, {1, 0, 0}), 3);
  flat.add(Vector(F, {0, 1, 0}), 2);
  flat.add(Vector(F, {1, 4, 0}), 5);
  const auto zero = build_S(flat);
  CHECK(zero.all_in_hyperplane);
  for (const auto& [v, w] : flat.weights()) CHECK(zero.at(v).is_zero());
  CHECK(independent_mass(flat) == 0);
  CHECK(main_estimate_ratio(zero, flat) == 0);
  CHECK(verify_admissibility(zero, flat).pass);
}

TEST_CASE("admissibility examples") {
  const Field F = Field::prime(5);
  const auto f = thirty_one(F);
  auto S = build_S(f);
  const auto ok = verify_admissibility(S, f);
  CHECK(ok.pass);
  // Independent triples: one vertical plus two of the three coplanar lines.
  CHECK(ok.tuples_checked == 3);
  CHECK(root_power(S.rho, {2, 1}) == 1);

  S.rho[1].radicand /= 8;  // halves rho_2
  const auto bad = verify_admissibility(S, f);
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.witness.size() == 3);
  CHECK(std::abs(bad.witness_product - 0.5) < 1e-12);
  CHECK(verify_admissibility(S, f, 3).witness == bad.witness);
}

TEST_CASE("main estimate ratios") {
  for (const Field F : {Field::prime(7), Field::rationals()}) {
    CHECK(std::abs(main_estimate_ratio(build_S(unit_axes(F)), unit_axes(F)) -
                   3.0 / std::cbrt(6.0)) < 1e-9);
    const auto f = thirty_one(F);
    CHECK(independent_mass(f) == 1800);
    CHECK(std::abs(main_estimate_ratio(build_S(f), f) -
                   2.0 * std::pow(30.0, 2.0 / 3) / std::cbrt(1800.0)) < 1e-9);
  }
}

TEST_CASE("independent mass agrees with ordered tuple enumeration") {
  std::mt19937_64 rng(8);
  for (long p : {2L, 3L, 5L}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto f = random_weights(rng, Field::prime(p), 7, 9);
      CHECK(independent_mass(f) == oracle::independent_mass(oracle::to_oracle(f), p, 3));
    }
  }
}

TEST_CASE("chain invariants on random weights") {
  const double bound = bound_constant(3);
  std::mt19937_64 rng(2024);
  for (long p : {3L, 5L}) {
    for (int trial = 0; trial < 60; ++trial) {
      const auto f = random_weights(rng, Field::prime(p), 10, 100);
      const auto S = build_S(f);
      const auto& chain = S.chain;
      for (std::size_t n = 1; n <= chain.size(); ++n) {
        CHECK(chain.layers[n - 1] > heavy_alpha(chain.k(n)) * chain.layers[n]);
        if (n > 1) CHECK(chain.planes[n - 1].contains(chain.planes[n - 2]));
      }
      if (!chain.planes.empty() && sgn(chain.layers.back()) > 0) {
        std::vector<std::size_t> m;
        for (std::size_t n = 1; n <= chain.layers.size(); ++n) {
          m.push_back(chain.k(n) - chain.k(n - 1));
        }
        CHECK(root_power(S.rho, m) == 1);
      }
      CHECK(verify_admissibility(S, f).pass);
      const auto ledger = lightness_audit(f, chain);
      for (const auto& level : ledger.levels) {
        CHECK(level.lightness_factor <= level.lightness_bound);
        CHECK(level.gamma_ok);
      }
      CHECK(main_estimate_ratio(S, f) <= bound);

      // Degree-zero homogeneity.
      const auto St = build_S(f.scaled(mpq_class(7, 3)));
      REQUIRE(St.rho.size() == S.rho.size());
      for (std::size_t n = 0; n < S.rho.size(); ++n) {
        CHECK(St.rho[n].radicand == S.rho[n].radicand);
      }
      CHECK(St.chain.planes == chain.planes);
    }
  }
}

TEST_CASE("lightness audit examples") {
  const Field F = Field::prime(5);
  CHECK(lightness_audit(unit_axes(F), find_heavy_chain(unit_axes(F))).levels.size() <= 1);
  const auto f = thirty_one(F);
  const auto ledger = lightness_audit(f, find_heavy_chain(f));
  REQUIRE_FALSE(ledger.levels.empty());
  const auto& first = ledger.levels.front();
  CHECK(first.n == 1);
  CHECK(first.k_next == 2);
  CHECK(first.lightness_factor <= 4);
  // Each coplanar line: 10 <= 4 * alpha_1 * 20.
  CHECK(first.planes_checked >= 3);
  CHECK(first.worst_ratio <= 1);
  CHECK(ledger.instance_bound <= ledger.bound);
}

TEST_CASE("explicit constant") {
  const double b3 = bound_constant(3);
  CHECK(b3 > 1.651);
  CHECK(std::isfinite(b3));
  CHECK(bound_for_profile({}, 3) <= b3);
  CHECK(bound_for_profile({2}, 3) <= b3);
}

}  // TEST_SUITE
