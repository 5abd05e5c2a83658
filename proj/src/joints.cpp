#include "jointscert/joints.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "jointscert/error.hpp"

namespace jointscert {

void LineFamily::add(const Line& line, std::uint64_t multiplicity) {
  if (line.field() != field_ || line.dim() != dim_) {
    throw InputError("line " + line.to_string() + " does not live in " +
                     field_.to_string() + "^" + std::to_string(dim_));
  }
  if (multiplicity == 0) throw InputError("line multiplicity must be >= 1");
  auto it = std::lower_bound(lines_.begin(), lines_.end(), line,
                             [](const auto& entry, const Line& l) { return entry.first < l; });
  if (it != lines_.end() && it->first == line) {
    it->second += multiplicity;
  } else {
    lines_.insert(it, {line, multiplicity});
  }
}

std::uint64_t LineFamily::size() const {
  std::uint64_t total = 0;
  for (const auto& [line, m] : lines_) total += m;
  return total;
}

std::uint64_t LineFamily::multiplicity(const Line& line) const {
  auto it = std::lower_bound(lines_.begin(), lines_.end(), line,
                             [](const auto& entry, const Line& l) { return entry.first < l; });
  return (it != lines_.end() && it->first == line) ? it->second : 0;
}

MultiFamily::MultiFamily(std::vector<LineFamily> families) : families_(std::move(families)) {
  if (families_.empty()) throw InputError("a multifamily needs d >= 2 families");
  const std::size_t d = families_.front().dim();
  if (families_.size() != d) {
    throw InputError("expected " + std::to_string(d) + " families, got " +
                     std::to_string(families_.size()));
  }
  for (const auto& fam : families_) {
    if (fam.field() != families_.front().field() || fam.dim() != d) {
      throw InputError("families must share field and dimension");
    }
  }
}

MultiFamily MultiFamily::diagonal(const LineFamily& family) {
  return MultiFamily(std::vector<LineFamily>(family.dim(), family));
}

LineFamily MultiFamily::union_family() const {
  LineFamily out(field(), dim());
  for (const auto& fam : families_) {
    for (const auto& [line, m] : fam.lines()) {
      if (out.multiplicity(line) == 0) out.add(line);
    }
  }
  return out;
}

int delta(const Vector& x, std::span<const Line> lines) {
  if (lines.size() != x.dim()) {
    throw InputError("delta expects " + std::to_string(x.dim()) + " lines, got " +
                     std::to_string(lines.size()));
  }
  std::vector<Vector> dirs;
  dirs.reserve(lines.size());
  for (const auto& l : lines) {
    if (!l.contains(x)) return 0;
    dirs.push_back(l.direction());
  }
  return independent(dirs) ? 1 : 0;
}

std::vector<Vector> pairwise_intersections(std::span<const Line> lines) {
  std::set<Vector> points;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (auto p = intersect(lines[i], lines[j])) points.insert(std::move(*p));
    }
  }
  return {points.begin(), points.end()};
}

void for_each_independent_tuple(
    std::span<const std::vector<Vector>> slots,
    const std::function<void(std::span<const std::size_t>)>& visit) {
  if (slots.empty()) return;
  const std::size_t n = slots.size();
  Field field = Field::rationals();
  std::size_t dim = 0;
  bool found = false;
  for (const auto& slot : slots) {
    if (!slot.empty()) {
      field = slot.front().field();
      dim = slot.front().dim();
      found = true;
      break;
    }
  }
  if (!found) return;
  EchelonStack stack(field, dim);
  std::vector<std::size_t> chosen(n, 0);
  std::function<void(std::size_t)> recurse = [&](std::size_t depth) {
    if (depth == n) {
      visit(chosen);
      return;
    }
    for (std::size_t i = 0; i < slots[depth].size(); ++i) {
      if (!stack.push(slots[depth][i])) continue;
      chosen[depth] = i;
      recurse(depth + 1);
      stack.pop();
    }
  };
  recurse(0);
}

void for_each_independent_subset(
    std::span<const Vector> directions, std::size_t size,
    const std::function<void(std::span<const std::size_t>)>& visit) {
  if (size == 0) {
    visit({});
    return;
  }
  if (directions.size() < size) return;
  EchelonStack stack(directions.front().field(), directions.front().dim());
  std::vector<std::size_t> chosen(size, 0);
  std::function<void(std::size_t, std::size_t)> recurse = [&](std::size_t depth,
                                                              std::size_t start) {
    if (depth == size) {
      visit(chosen);
      return;
    }
    for (std::size_t i = start; i + (size - depth) <= directions.size(); ++i) {
      if (!stack.push(directions[i])) continue;
      chosen[depth] = i;
      recurse(depth + 1, i + 1);
      stack.pop();
    }
  };
  recurse(0, 0);
}

namespace {

std::uint64_t factorial(std::size_t n) {
  std::uint64_t out = 1;
  for (std::size_t k = 2; k <= n; ++k) out *= k;
  return out;
}

// Candidate joints with the indices of the distinct lines through each.
std::map<Vector, std::vector<std::size_t>> incidences(std::span<const Line> lines) {
  std::map<Vector, std::set<std::size_t>> acc;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (auto p = intersect(lines[i], lines[j])) {
        auto& s = acc[std::move(*p)];
        s.insert(i);
        s.insert(j);
      }
    }
  }
  std::map<Vector, std::vector<std::size_t>> out;
  for (auto& [x, s] : acc) out.emplace(x, std::vector<std::size_t>(s.begin(), s.end()));
  return out;
}

}  // namespace

JointSummary joint_summary(const LineFamily& family) {
  JointSummary out;
  const std::size_t d = family.dim();
  if (d < 2) throw InputError("joints need dimension >= 2");
  std::vector<Line> lines;
  for (const auto& [l, m] : family.lines()) lines.push_back(l);
  const std::uint64_t orderings = factorial(d);
  for (const auto& [x, through] : incidences(lines)) {
    if (through.size() < d) continue;
    std::vector<Vector> dirs;
    for (std::size_t i : through) dirs.push_back(lines[i].direction());
    std::uint64_t count = 0;
    for_each_independent_subset(dirs, d, [&](std::span<const std::size_t> idx) {
      std::uint64_t w = 1;
      for (std::size_t k : idx) w *= family.lines()[through[k]].second;
      count += w;
    });
    if (count > 0) out.multiplicity.emplace(x, count * orderings);
  }
  return out;
}

JointSummary joint_summary(const MultiFamily& families) {
  std::vector<LineWeights> ones(families.dim());
  for (std::size_t j = 0; j < families.dim(); ++j) {
    for (const auto& [l, m] : families[j].lines()) ones[j][l] = mpq_class(m);
  }
  JointSummary out;
  for (const auto& [x, value] : apply_T(families, ones)) {
    out.multiplicity.emplace(x, value.get_num().get_ui());
  }
  return out;
}

ZhangReport zhang_report(const LineFamily& family) {
  ZhangReport r;
  const double d = static_cast<double>(family.dim());
  for (const auto& [x, n] : joint_summary(family).multiplicity) {
    r.lhs += std::pow(static_cast<double>(n), 1.0 / (d - 1));
  }
  r.rhs = std::pow(static_cast<double>(family.size()), d / (d - 1));
  if (r.rhs == 0 && r.lhs > 0) throw MathError("joints without lines");
  r.ratio = r.rhs > 0 ? r.lhs / r.rhs : 0.0;
  return r;
}

ZhangReport zhang_report(const MultiFamily& families) {
  ZhangReport r;
  const double d = static_cast<double>(families.dim());
  for (const auto& [x, n] : joint_summary(families).multiplicity) {
    r.lhs += std::pow(static_cast<double>(n), 1.0 / (d - 1));
  }
  double product = 1;
  for (const auto& fam : families.families()) product *= static_cast<double>(fam.size());
  r.rhs = std::pow(product, 1.0 / (d - 1));
  if (r.rhs == 0 && r.lhs > 0) throw MathError("multijoints without lines");
  r.ratio = r.rhs > 0 ? r.lhs / r.rhs : 0.0;
  return r;
}

namespace {

void check_weights(std::span<const LineWeights> weights, std::size_t d) {
  if (weights.size() != d) {
    throw InputError("expected " + std::to_string(d) + " weight maps");
  }
  for (const auto& w : weights) {
    for (const auto& [l, v] : w) {
      if (sgn(v) < 0) throw InputError("negative weight on " + l.to_string());
    }
  }
}

mpq_class evaluate_at(const MultiFamily& families, std::span<const LineWeights> weights,
                      const Vector& x) {
  const std::size_t d = families.dim();
  std::vector<std::vector<Vector>> slots(d);
  std::vector<std::vector<const mpq_class*>> values(d);
  for (std::size_t j = 0; j < d; ++j) {
    for (const auto& [l, m] : families[j].lines()) {
      auto it = weights[j].find(l);
      if (it == weights[j].end() || sgn(it->second) == 0) continue;
      if (!l.contains(x)) continue;
      slots[j].push_back(l.direction());
      values[j].push_back(&it->second);
    }
  }
  mpq_class total = 0;
  for_each_independent_tuple(slots, [&](std::span<const std::size_t> idx) {
    mpq_class term = 1;
    for (std::size_t j = 0; j < d; ++j) term *= *values[j][idx[j]];
    total += term;
  });
  return total;
}

}  // namespace

std::map<Vector, mpq_class> apply_T(const MultiFamily& families,
                                    std::span<const LineWeights> weights) {
  check_weights(weights, families.dim());
  std::vector<Line> all;
  const LineFamily merged = families.union_family();
  for (const auto& [l, m] : merged.lines()) all.push_back(l);
  std::map<Vector, mpq_class> out;
  for (const auto& x : pairwise_intersections(all)) {
    mpq_class v = evaluate_at(families, weights, x);
    if (sgn(v) > 0) out.emplace(x, std::move(v));
  }
  return out;
}

mpq_class apply_T_at(const MultiFamily& families, std::span<const LineWeights> weights,
                     const Vector& x) {
  check_weights(weights, families.dim());
  return evaluate_at(families, weights, x);
}

}  // namespace jointscert
