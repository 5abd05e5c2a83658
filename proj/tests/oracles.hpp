#pragma once

// Brute-force reference implementations over small prime fields. They work
// on plain integer tuples and share no code with the library, so agreement
// is evidence rather than a tautology.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include <gmpxx.h>

#include "jointscert/geometry.hpp"
#include "jointscert/heavy.hpp"

namespace oracle {

using Vec = std::vector<long>;

inline long mod(long a, long p) { return ((a % p) + p) % p; }

inline long inverse(long a, long p) {
  for (long b = 1; b < p; ++b) {
    if (mod(a * b, p) == 1) return b;
  }
  return 0;
}

inline Vec to_vec(const jointscert::Vector& v) {
  Vec out;
  for (const auto& c : v.coords()) out.push_back(static_cast<long>(c.residue()));
  return out;
}

inline jointscert::Vector from_vec(jointscert::Field f, const Vec& v) {
  std::vector<jointscert::Scalar> coords;
  for (long c : v) coords.emplace_back(f, c);
  return jointscert::Vector(f, coords);
}

inline Vec add(const Vec& a, const Vec& b, long p) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = mod(a[i] + b[i], p);
  return out;
}

inline Vec scale(long t, const Vec& a, long p) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = mod(t * a[i], p);
  return out;
}

inline bool is_zero(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](long c) { return c == 0; });
}

// Every vector of F_p^d in lexicographic order.
inline std::vector<Vec> points(long p, std::size_t d) {
  std::vector<Vec> out;
  Vec v(d, 0);
  while (true) {
    out.push_back(v);
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (++v[k] < p) break;
      v[k] = 0;
      if (k == 0) return out;
    }
    if (d == 0) return out;
  }
}

// Span as an explicit point set: closure under all linear combinations.
inline std::set<Vec> span_points(const std::vector<Vec>& gens, long p, std::size_t d) {
  std::set<Vec> out{Vec(d, 0)};
  for (const auto& g : gens) {
    std::set<Vec> next;
    for (const auto& s : out) {
      for (long t = 0; t < p; ++t) next.insert(add(s, scale(t, g, p), p));
    }
    out = std::move(next);
  }
  return out;
}

inline std::size_t rank(const std::vector<Vec>& gens, long p, std::size_t d) {
  std::size_t size = span_points(gens, p, d).size();
  std::size_t r = 0;
  while (size > 1) {
    size /= static_cast<std::size_t>(p);
    ++r;
  }
  return r;
}

inline bool independent(const std::vector<Vec>& gens, long p, std::size_t d) {
  return rank(gens, p, d) == gens.size();
}

inline std::set<Vec> line_points(const Vec& base, const Vec& dir, long p) {
  std::set<Vec> out;
  for (long t = 0; t < p; ++t) out.insert(add(base, scale(t, dir, p), p));
  return out;
}

// All subspaces of F_p^d as point sets.
inline std::vector<std::set<Vec>> all_subspaces(long p, std::size_t d) {
  std::set<std::set<Vec>> seen{{Vec(d, 0)}};
  std::vector<std::set<Vec>> queue{{Vec(d, 0)}};
  const auto all = points(p, d);
  for (std::size_t i = 0; i < queue.size(); ++i) {
    for (const auto& v : all) {
      if (queue[i].count(v)) continue;
      std::set<Vec> next;
      for (const auto& s : queue[i]) {
        for (long t = 0; t < p; ++t) next.insert(add(s, scale(t, v, p), p));
      }
      if (seen.insert(next).second) queue.push_back(next);
    }
  }
  return queue;
}

inline std::size_t dim_of(const std::set<Vec>& space, long p) {
  std::size_t size = space.size();
  std::size_t r = 0;
  while (size > 1) {
    size /= static_cast<std::size_t>(p);
    ++r;
  }
  return r;
}

// Every line of F_p^d as a point set, each listed once.
inline std::vector<std::set<Vec>> all_lines(long p, std::size_t d) {
  std::set<std::set<Vec>> seen;
  std::vector<std::set<Vec>> out;
  const auto all = points(p, d);
  for (const auto& dir : all) {
    if (is_zero(dir)) continue;
    for (const auto& base : all) {
      auto pts = line_points(base, dir, p);
      if (seen.insert(pts).second) out.push_back(std::move(pts));
    }
  }
  return out;
}

// Direction of a line given as a point set: difference of two of its points.
inline Vec direction_of(const std::set<Vec>& line, long p) {
  auto it = line.begin();
  const Vec a = *it++;
  const Vec b = *it;
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = mod(b[i] - a[i], p);
  return out;
}

// Weights of f on projective directions, keyed by a representative.
using DirWeights = std::vector<std::pair<Vec, mpq_class>>;

inline bool direction_in(const std::set<Vec>& space, const Vec& dir) { return space.count(dir) > 0; }

// Ordered independent d-tuples from the support, summed product of weights.
inline mpq_class independent_mass(const DirWeights& f, long p, std::size_t d) {
  mpq_class total = 0;
  std::vector<std::size_t> idx(d, 0);
  const std::size_t n = f.size();
  if (n == 0) return 0;
  while (true) {
    std::vector<Vec> dirs;
    mpq_class prod = 1;
    for (std::size_t k : idx) {
      dirs.push_back(f[k].first);
      prod *= f[k].second;
    }
    if (independent(dirs, p, d)) total += prod;
    std::size_t k = 0;
    while (k < d && ++idx[k] == n) idx[k++] = 0;
    if (k == d) return total;
  }
}

// Greedy heavy chain over every subspace of F_p^d, masses computed on point
// sets. `less` breaks ties between heavy planes of the same dimension.
struct HeavyChain {
  std::vector<std::size_t> dims;
  std::vector<std::set<Vec>> planes;
};

inline mpq_class alpha(std::size_t k) { return mpq_class(1L << (k - 1)); }

inline HeavyChain heavy_chain(
    const DirWeights& f, long p, std::size_t d,
    const std::function<bool(const std::set<Vec>&, const std::set<Vec>&)>& less) {
  const auto spaces = all_subspaces(p, d);
  HeavyChain out;
  std::set<Vec> previous{Vec(d, 0)};
  while (true) {
    const std::size_t k0 = dim_of(previous, p);
    std::optional<std::set<Vec>> chosen;
    for (std::size_t k = k0 + 1; k < d && !chosen; ++k) {
      for (const auto& s : spaces) {
        if (dim_of(s, p) != k) continue;
        if (!std::includes(s.begin(), s.end(), previous.begin(), previous.end())) continue;
        mpq_class inside = 0, outside = 0;
        for (const auto& [v, w] : f) {
          if (s.count(v)) {
            if (!previous.count(v)) inside += w;
          } else {
            outside += w;
          }
        }
        if (inside > alpha(k) * outside && (!chosen || less(s, *chosen))) chosen = s;
      }
    }
    if (!chosen) return out;
    previous = *chosen;
    out.dims.push_back(dim_of(previous, p));
    out.planes.push_back(previous);
  }
}

inline DirWeights to_oracle(const jointscert::DirectionWeights& f) {
  DirWeights out;
  for (const auto& [v, w] : f.weights()) out.emplace_back(to_vec(v), w);
  return out;
}

inline std::set<Vec> point_set(const jointscert::Subspace& s, long p) {
  std::vector<Vec> gens;
  for (const auto& b : s.basis()) gens.push_back(to_vec(b));
  return span_points(gens, p, s.ambient_dim());
}

// Library chain versus the full enumeration: same planes, hence the same
// dimensions and layer structure. Ties use the library's basis order.
inline bool heavy_chain_agrees(const jointscert::DirectionWeights& f, long p) {
  const jointscert::Field F = jointscert::Field::prime(p);
  const std::size_t d = f.dim();
  auto less = [&](const std::set<Vec>& a, const std::set<Vec>& b) {
    std::vector<jointscert::Vector> va, vb;
    for (const auto& v : a) va.push_back(from_vec(F, v));
    for (const auto& v : b) vb.push_back(from_vec(F, v));
    return jointscert::span(F, d, va) < jointscert::span(F, d, vb);
  };
  const auto expected = heavy_chain(to_oracle(f), p, d, less);
  const auto chain = jointscert::find_heavy_chain(f);
  if (chain.size() != expected.dims.size()) return false;
  for (std::size_t n = 0; n < chain.size(); ++n) {
    if (chain.planes[n].dim() != expected.dims[n]) return false;
    if (point_set(chain.planes[n], p) != expected.planes[n]) return false;
  }
  return true;
}

}  // namespace oracle
