#include <doctest.h>

#include <cmath>
#include <random>

#include "jointscert/commands.hpp"
#include "jointscert/error.hpp"
#include "jointscert/joints.hpp"
#include "oracles.hpp"

using namespace jointscert;

namespace {

struct RawLine {
  oracle::Vec base;
  oracle::Vec dir;
};

Line to_line(Field F, const RawLine& l) {
  return canonical_line(oracle::from_vec(F, l.base), oracle::from_vec(F, l.dir));
}

RawLine random_raw_line(std::mt19937_64& rng, long p, std::size_t d) {
  RawLine l{oracle::Vec(d), oracle::Vec(d)};
  for (auto& c : l.base) c = static_cast<long>(rng() % p);
  do {
    for (auto& c : l.dir) c = static_cast<long>(rng() % p);
  } while (oracle::is_zero(l.dir));
  return l;
}

// Brute force over every point and every ordered tuple of list entries,
// one entry per slot.
std::map<oracle::Vec, mpq_class> brute_T(const std::vector<std::vector<RawLine>>& slots,
                                         const std::vector<std::vector<mpq_class>>& weights,
                                         long p, std::size_t d) {
  std::map<oracle::Vec, mpq_class> out;
  for (const auto& x : oracle::points(p, d)) {
    std::vector<std::vector<std::size_t>> through(d);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < slots[j].size(); ++i) {
        if (oracle::line_points(slots[j][i].base, slots[j][i].dir, p).count(x)) {
          through[j].push_back(i);
        }
      }
    }
    mpq_class total = 0;
    std::vector<std::size_t> idx(d, 0);
    bool empty = false;
    for (const auto& t : through) empty = empty || t.empty();
    if (empty) continue;
    while (true) {
      std::vector<oracle::Vec> dirs;
      mpq_class prod = 1;
      for (std::size_t j = 0; j < d; ++j) {
        dirs.push_back(slots[j][through[j][idx[j]]].dir);
        prod *= weights[j][through[j][idx[j]]];
      }
      if (oracle::independent(dirs, p, d)) total += prod;
      std::size_t j = 0;
      while (j < d && ++idx[j] == through[j].size()) idx[j++] = 0;
      if (j == d) break;
    }
    if (sgn(total) > 0) out[x] = total;
  }
  return out;
}

LineFamily axes(Field F, std::size_t d) {
  LineFamily fam(F, d);
  for (std::size_t i = 0; i < d; ++i) fam.add(canonical_line(Vector(F, d), Vector::unit(F, d, i)));
  return fam;
}

LineFamily grid_family(std::size_t n, std::uint64_t p) {
  const InstanceFile inst = grid_instance(n, 3, p);
  return inst.lines;
}

}  // namespace

TEST_SUITE("joints") {

TEST_CASE("delta on coordinate axes") {
  const Field F = Field::prime(5);
  const std::vector<Line> ax = {canonical_line(Vector(F, {0, 0, 0}), Vector(F, {1, 0, 0})),
                                canonical_line(Vector(F, {0, 0, 0}), Vector(F, {0, 1, 0})),
                                canonical_line(Vector(F, {0, 0, 0}), Vector(F, {0, 0, 1}))};
  CHECK(delta(Vector(F, {0, 0, 0}), ax) == 1);
  CHECK(delta(Vector(F, {1, 0, 0}), ax) == 0);
  const std::vector<Line> flat = {ax[0], ax[1],
                                  canonical_line(Vector(F, {0, 0, 0}), Vector(F, {1, 1, 0}))};
  CHECK(delta(Vector(F, {0, 0, 0}), flat) == 0);
  const std::vector<Line> two = {ax[0], ax[1]};
  CHECK_THROWS_AS(delta(Vector(F, {0, 0, 0}), two), InputError);
}

TEST_CASE("delta is permutation symmetric and vanishes off the lines") {
  const long p = 3;
  const Field F = Field::prime(p);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 150; ++trial) {
    std::vector<Line> ls;
    for (int k = 0; k < 3; ++k) ls.push_back(to_line(F, random_raw_line(rng, p, 3)));
    for (const auto& x : all_points(F, 3)) {
      const int v = delta(x, ls);
      std::vector<Line> perm = ls;
      std::sort(perm.begin(), perm.end());
      do {
        CHECK(delta(x, perm) == v);
      } while (std::next_permutation(perm.begin(), perm.end()));
      bool on_all = true;
      for (const auto& l : ls) on_all = on_all && l.contains(x);
      if (!on_all) CHECK(v == 0);
    }
  }
}

TEST_CASE("joint summaries of small configurations") {
  const Field F = Field::prime(5);
  const auto js = joint_summary(axes(F, 3));
  REQUIRE(js.size() == 1);
  CHECK(js.multiplicity.at(Vector(F, {0, 0, 0})) == 6);

  std::vector<LineFamily> single;
  const LineFamily ax = axes(F, 3);
  for (const auto& [l, m] : ax.lines()) {
    LineFamily fam(F, 3);
    fam.add(l);
    single.push_back(fam);
  }
  const auto mj = joint_summary(MultiFamily(single));
  REQUIRE(mj.size() == 1);
  CHECK(mj.multiplicity.begin()->second == 1);

  const auto grid = joint_summary(grid_family(2, 5));
  CHECK(grid.size() == 8);
  for (const auto& [x, n] : grid.multiplicity) CHECK(n == 6);

  CHECK(joint_summary(LineFamily(F, 3)).size() == 0);
}

TEST_CASE("joint summary agrees with brute force on random families") {
  for (long p : {2L, 3L}) {
    const Field F = Field::prime(p);
    std::mt19937_64 rng(100 + p);
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t count = 3 + rng() % 10;
      std::vector<RawLine> raw;
      LineFamily fam(F, 3);
      for (std::size_t i = 0; i < count; ++i) {
        raw.push_back(random_raw_line(rng, p, 3));
        fam.add(to_line(F, raw.back()));
      }
      // The oracle expands repetitions into separate list entries.
      const std::vector<std::vector<RawLine>> slots(3, raw);
      const std::vector<std::vector<mpq_class>> ones(3, std::vector<mpq_class>(count, 1));
      const auto expected = brute_T(slots, ones, p, 3);
      const auto got = joint_summary(fam);
      REQUIRE(got.size() == expected.size());
      for (const auto& [x, n] : expected) {
        CHECK(got.multiplicity.at(oracle::from_vec(F, x)) == n.get_num().get_ui());
      }
    }
  }
}

TEST_CASE("repeating a line multiplies its tuple contributions") {
  const Field F = Field::prime(5);
  LineFamily fam = axes(F, 3);
  fam.add(canonical_line(Vector(F, {0, 0, 0}), Vector(F, {1, 0, 0})));
  CHECK(fam.size() == 4);
  CHECK(fam.distinct() == 3);
  // Ordered triples from {a, a', b, c} with independent directions: 2 * 3!.
  CHECK(joint_summary(fam).multiplicity.at(Vector(F, {0, 0, 0})) == 12);
  CHECK(joint_summary(MultiFamily::diagonal(fam)).multiplicity.at(Vector(F, {0, 0, 0})) == 12);
}

TEST_CASE("apply_T matches brute force and is multilinear") {
  const long p = 3;
  const Field F = Field::prime(p);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<RawLine>> slots(3);
    std::vector<std::vector<mpq_class>> weights(3);
    std::vector<LineFamily> fams;
    std::vector<LineWeights> lw(3);
    for (std::size_t j = 0; j < 3; ++j) {
      LineFamily fam(F, 3);
      const std::size_t count = 2 + rng() % 5;
      while (slots[j].size() < count) {
        const RawLine r = random_raw_line(rng, p, 3);
        const Line l = to_line(F, r);
        if (fam.multiplicity(l) > 0) continue;
        fam.add(l);
        slots[j].push_back(r);
        mpq_class w(static_cast<long>(rng() % 7), 1 + static_cast<long>(rng() % 4));
        w.canonicalize();
        weights[j].push_back(w);
        lw[j][l] = weights[j].back();
      }
      fams.push_back(fam);
    }
    const MultiFamily mf(fams);
    const auto expected = brute_T(slots, weights, p, 3);
    const auto got = apply_T(mf, lw);
    REQUIRE(got.size() == expected.size());
    for (const auto& [x, v] : expected) CHECK(got.at(oracle::from_vec(F, x)) == v);

    auto doubled = lw;
    for (auto& [l, v] : doubled[0]) v *= 2;
    const auto twice = apply_T(mf, doubled);
    for (const auto& [x, v] : got) CHECK(twice.at(x) == 2 * v);

    // Additivity in the second slot.
    auto a = lw;
    auto b = lw;
    auto sum = lw;
    for (auto& [l, v] : b[1]) v = static_cast<long>(rng() % 5);
    for (auto& [l, v] : sum[1]) v = a[1].at(l) + b[1].at(l);
    for (const auto& x : all_points(F, 3)) {
      CHECK(apply_T_at(mf, sum, x) == apply_T_at(mf, a, x) + apply_T_at(mf, b, x));
    }

    // T at f = 1 recovers N.
    std::vector<LineWeights> ones(3);
    for (std::size_t j = 0; j < 3; ++j) {
      for (const auto& [l, m] : fams[j].lines()) ones[j][l] = 1;
    }
    const auto N = joint_summary(mf);
    const auto T1 = apply_T(mf, ones);
    REQUIRE(N.size() == T1.size());
    for (const auto& [x, v] : T1) CHECK(N.multiplicity.at(x) == v.get_num().get_ui());
  }
}

TEST_CASE("apply_T examples and errors") {
  const Field F = Field::prime(5);
  const auto mf = MultiFamily::diagonal(axes(F, 3));
  std::vector<LineWeights> ones(3);
  for (auto& w : ones) {
    for (const auto& [l, m] : mf[0].lines()) w[l] = 1;
  }
  CHECK(apply_T_at(mf, ones, Vector(F, {0, 0, 0})) == 6);
  CHECK(apply_T_at(mf, ones, Vector(F, {1, 1, 1})) == 0);
  auto neg = ones;
  neg[2].begin()->second = -1;
  CHECK_THROWS_AS(apply_T(mf, neg), InputError);
}

TEST_CASE("Zhang ratio on grids is constant") {
  const double expected = std::sqrt(6.0) / (3.0 * std::sqrt(3.0));
  for (std::size_t n : {2U, 3U, 4U}) {
    const auto r = zhang_report(grid_family(n, 7));
    CHECK(std::abs(r.ratio - expected) < 1e-9);
    CHECK(std::abs(r.lhs - std::pow(n, 3) * std::sqrt(6.0)) < 1e-9);
  }
  const Field F = Field::prime(5);
  const auto empty = zhang_report(LineFamily(F, 3));
  CHECK(empty.lhs == 0);
  CHECK(empty.rhs == 0);
  CHECK(empty.ratio == 0);
  LineFamily one(F, 3);
  one.add(canonical_line(Vector(F, {0, 0, 0}), Vector(F, {1, 2, 3})));
  CHECK(zhang_report(one).lhs == 0);
}

TEST_CASE("independent subsets and tuples") {
  const Field F = Field::prime(3);
  const auto dirs = all_directions(F, 3);
  std::size_t subsets = 0;
  for_each_independent_subset(dirs, 3, [&](std::span<const std::size_t>) { ++subsets; });
  // |GL_3(F_3)| / (2^3 * 3!) unordered projective bases.
  CHECK(subsets == 11232 / (8 * 6));
  std::vector<std::vector<Vector>> slots(3, dirs);
  std::size_t tuples = 0;
  for_each_independent_tuple(slots, [&](std::span<const std::size_t>) { ++tuples; });
  CHECK(tuples == 11232 / 8);
}

}  // TEST_SUITE
