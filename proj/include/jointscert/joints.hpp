#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "jointscert/geometry.hpp"

namespace jointscert {

/// A finite family of canonical lines in F^d with repetitions. `lines` holds
/// each distinct line once, sorted, with its multiplicity (>= 1).
class LineFamily {
 public:
  LineFamily(Field field, std::size_t dim) : field_(field), dim_(dim) {}

  void add(const Line& line, std::uint64_t multiplicity = 1);

  Field field() const { return field_; }
  std::size_t dim() const { return dim_; }
  const std::vector<std::pair<Line, std::uint64_t>>& lines() const { return lines_; }
  /// |L| counted with multiplicity.
  std::uint64_t size() const;
  std::size_t distinct() const { return lines_.size(); }
  std::uint64_t multiplicity(const Line& line) const;

 private:
  Field field_;
  std::size_t dim_;
  std::vector<std::pair<Line, std::uint64_t>> lines_;
};

/// Exactly d families over a common field and dimension.
class MultiFamily {
 public:
  explicit MultiFamily(std::vector<LineFamily> families);
  /// d copies of one family: the joints problem written as a multijoints one.
  static MultiFamily diagonal(const LineFamily& family);

  Field field() const { return families_.front().field(); }
  std::size_t dim() const { return families_.front().dim(); }
  const std::vector<LineFamily>& families() const { return families_; }
  const LineFamily& operator[](std::size_t j) const { return families_[j]; }
  /// All distinct lines of all families, sorted.
  LineFamily union_family() const;

 private:
  std::vector<LineFamily> families_;
};

/// x -> N(x); the key set is the joint set J.
struct JointSummary {
  std::map<Vector, std::uint64_t> multiplicity;
  std::size_t size() const { return multiplicity.size(); }
};

/// 1 iff x lies on every line and the d directions are independent.
int delta(const Vector& x, std::span<const Line> lines);

/// Points where at least two distinct lines of the list meet, sorted.
std::vector<Vector> pairwise_intersections(std::span<const Line> lines);

JointSummary joint_summary(const LineFamily& family);
JointSummary joint_summary(const MultiFamily& families);

struct ZhangReport {
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;
};

ZhangReport zhang_report(const LineFamily& family);
ZhangReport zhang_report(const MultiFamily& families);

using LineWeights = std::map<Line, mpq_class>;

/// T(f_1, ..., f_d)(x) on the points where it is nonzero.
std::map<Vector, mpq_class> apply_T(const MultiFamily& families,
                                    std::span<const LineWeights> weights);
/// T(f_1, ..., f_d)(x) at a single point.
mpq_class apply_T_at(const MultiFamily& families, std::span<const LineWeights> weights,
                     const Vector& x);

/// Calls `visit` with one index per slot for every tuple whose chosen
/// directions are linearly independent. Slots list candidate directions.
/// Tuples are visited in lexicographic index order.
void for_each_independent_tuple(
    std::span<const std::vector<Vector>> slots,
    const std::function<void(std::span<const std::size_t>)>& visit);

/// Same, but over strictly increasing index tuples drawn from one list
/// (the unordered d-subsets with independent directions).
void for_each_independent_subset(
    std::span<const Vector> directions, std::size_t size,
    const std::function<void(std::span<const std::size_t>)>& visit);

}  // namespace jointscert
