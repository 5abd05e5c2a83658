#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jointscert/field.hpp"

namespace jointscert {

/// A point or direction of F^d.
class Vector {
 public:
  Vector(Field field, std::size_t dim);  // zero vector
  Vector(Field field, std::vector<Scalar> coords);
  Vector(Field field, std::initializer_list<long> coords);

  static Vector unit(Field field, std::size_t dim, std::size_t axis);

  Field field() const { return field_; }
  std::size_t dim() const { return coords_.size(); }
  const Scalar& operator[](std::size_t i) const { return coords_[i]; }
  Scalar& operator[](std::size_t i) { return coords_[i]; }
  const std::vector<Scalar>& coords() const { return coords_; }

  bool is_zero() const;
  /// Index of the first nonzero coordinate, or dim() for the zero vector.
  std::size_t pivot() const;

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(const Scalar& s);
  friend Vector operator+(Vector a, const Vector& b) { return a += b; }
  friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
  friend Vector operator*(const Scalar& s, Vector v) { return v *= s; }

  friend bool operator==(const Vector& a, const Vector& b);
  /// Lexicographic.
  friend std::strong_ordering operator<=>(const Vector& a, const Vector& b);

  std::string to_string() const;

 private:
  Field field_;
  std::vector<Scalar> coords_;
};

/// Checks that every vector lives in (field, dim). Throws InputError.
void require_compatible(std::span<const Vector> vectors, Field field, std::size_t dim);

/// A line {base + t * direction} in canonical form: the direction's first
/// nonzero coordinate is 1 and the base point vanishes at that coordinate.
/// Two Line values compare equal iff their point sets coincide.
class Line {
 public:
  const Vector& base() const { return base_; }
  const Vector& direction() const { return direction_; }
  Field field() const { return base_.field(); }
  std::size_t dim() const { return base_.dim(); }

  bool contains(const Vector& point) const;
  /// base + t * direction.
  Vector at(const Scalar& t) const;
  /// All p points of a line over F_p, ordered by parameter t = 0..p-1.
  std::vector<Vector> points() const;

  friend bool operator==(const Line&, const Line&) = default;
  friend std::strong_ordering operator<=>(const Line& a, const Line& b);

  std::string to_string() const;

 private:
  friend Line canonical_line(const Vector& point, const Vector& direction);
  Line(Vector base, Vector direction)
      : base_(std::move(base)), direction_(std::move(direction)) {}

  Vector base_;
  Vector direction_;
};

/// The canonical line through `point` with the given direction.
/// Throws InputError("degenerate direction") for a zero direction and on
/// mixed fields or dimensions.
Line canonical_line(const Vector& point, const Vector& direction);

/// Projective normalization: scales so the first nonzero coordinate is 1.
Vector normalize_direction(const Vector& direction);

/// The unique intersection point of two distinct lines, if any.
std::optional<Vector> intersect(const Line& a, const Line& b);

/// A linear subspace stored by its reduced row-echelon basis, which is the
/// identity key: equal subspaces have equal bases.
class Subspace {
 public:
  /// The zero subspace of F^dim.
  Subspace(Field field, std::size_t dim) : field_(field), ambient_(dim) {}

  Field field() const { return field_; }
  std::size_t ambient_dim() const { return ambient_; }
  std::size_t dim() const { return basis_.size(); }
  const std::vector<Vector>& basis() const { return basis_; }
  /// Pivot column of each basis row, strictly increasing.
  std::vector<std::size_t> pivots() const;

  bool contains(const Vector& v) const;
  bool contains(const Subspace& other) const;

  /// span(this ∪ {v}).
  Subspace with(const Vector& v) const;

  friend bool operator==(const Subspace& a, const Subspace& b);
  /// Orders by dimension, then lexicographically by basis rows.
  friend std::strong_ordering operator<=>(const Subspace& a, const Subspace& b);

  std::string to_string() const;

 private:
  friend Subspace span(Field field, std::size_t dim, std::span<const Vector> vectors);
  Field field_;
  std::size_t ambient_;
  std::vector<Vector> basis_;
};

/// Reduced row-echelon basis of the span. An empty list gives the zero space.
Subspace span(Field field, std::size_t dim, std::span<const Vector> vectors);
Subspace span(std::span<const Vector> vectors);  // requires a nonempty list

/// Rank by Gaussian elimination.
std::size_t rank(std::span<const Vector> vectors);
/// True iff the vectors are linearly independent.
bool independent(std::span<const Vector> vectors);

/// Stack-shaped echelon basis for backtracking enumerations: push() reduces
/// a vector against the current rows and keeps it if it is independent.
class EchelonStack {
 public:
  EchelonStack(Field field, std::size_t dim) : field_(field), dim_(dim) {}
  /// Returns false (and leaves the stack unchanged) if v is in the span.
  bool push(const Vector& v);
  void pop() { rows_.pop_back(); }
  std::size_t size() const { return rows_.size(); }

 private:
  Field field_;
  std::size_t dim_;
  std::vector<Vector> rows_;  // each row has a unit pivot, zero at earlier pivots
};

/// Returns B = A ∪ F where F is a set of standard basis vectors, disjoint
/// from span(A), with span(A ∪ F) = F^d. Every independent subset of B then
/// extends to a basis of F^d using vectors of B only. Duplicates in A are
/// removed; order is A's first occurrences followed by F.
std::vector<Vector> extend_to_basis_pool(Field field, std::size_t dim,
                                         std::span<const Vector> vectors);

/// Every normalized direction of F_p^d (the (p^d - 1)/(p - 1) projective
/// points), in lexicographic order.
std::vector<Vector> all_directions(Field field, std::size_t dim);

/// Every vector of F_p^d in lexicographic order.
std::vector<Vector> all_points(Field field, std::size_t dim);

}  // namespace jointscert
