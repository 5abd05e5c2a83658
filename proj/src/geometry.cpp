#include "jointscert/geometry.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "jointscert/error.hpp"

namespace jointscert {

Vector::Vector(Field field, std::size_t dim)
    : field_(field), coords_(dim, Scalar::zero(field)) {}

Vector::Vector(Field field, std::vector<Scalar> coords)
    : field_(field), coords_(std::move(coords)) {
  for (const auto& c : coords_) {
    if (c.field() != field_) throw InputError("mixed fields in vector");
  }
}

Vector::Vector(Field field, std::initializer_list<long> coords) : field_(field) {
  coords_.reserve(coords.size());
  for (long c : coords) coords_.emplace_back(field, c);
}

Vector Vector::unit(Field field, std::size_t dim, std::size_t axis) {
  Vector v(field, dim);
  v[axis] = Scalar::one(field);
  return v;
}

bool Vector::is_zero() const { return pivot() == dim(); }

std::size_t Vector::pivot() const {
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (!coords_[i].is_zero()) return i;
  }
  return coords_.size();
}

Vector& Vector::operator+=(const Vector& other) {
  if (other.dim() != dim()) throw InputError("dimension mismatch");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += other.coords_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  if (other.dim() != dim()) throw InputError("dimension mismatch");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= other.coords_[i];
  return *this;
}

Vector& Vector::operator*=(const Scalar& s) {
  for (auto& c : coords_) c *= s;
  return *this;
}

bool operator==(const Vector& a, const Vector& b) {
  return a.field_ == b.field_ && a.coords_ == b.coords_;
}

std::strong_ordering operator<=>(const Vector& a, const Vector& b) {
  if (a.field_ != b.field_) throw InputError("mixed fields in comparison");
  return std::lexicographical_compare_three_way(a.coords_.begin(), a.coords_.end(),
                                                b.coords_.begin(), b.coords_.end());
}

std::string Vector::to_string() const {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (i) out << ',';
    out << coords_[i].to_string();
  }
  out << ')';
  return out.str();
}

void require_compatible(std::span<const Vector> vectors, Field field, std::size_t dim) {
  for (const auto& v : vectors) {
    if (v.field() != field) {
      throw InputError("mixed fields: " + v.field().to_string() + " and " +
                       field.to_string());
    }
    if (v.dim() != dim) {
      throw InputError("dimension mismatch: expected " + std::to_string(dim) +
                       ", got " + std::to_string(v.dim()));
    }
  }
}

Vector normalize_direction(const Vector& direction) {
  const std::size_t piv = direction.pivot();
  if (piv == direction.dim()) throw InputError("degenerate direction");
  return direction[piv].inverse() * direction;
}

Line canonical_line(const Vector& point, const Vector& direction) {
  if (point.field() != direction.field()) throw InputError("mixed fields in line");
  if (point.dim() != direction.dim()) throw InputError("dimension mismatch in line");
  Vector dir = normalize_direction(direction);
  const std::size_t piv = dir.pivot();
  Vector base = point - point[piv] * dir;
  return Line(std::move(base), std::move(dir));
}

bool Line::contains(const Vector& point) const {
  if (point.dim() != dim()) throw InputError("dimension mismatch");
  if (point.field() != field()) throw InputError("mixed fields");
  const std::size_t piv = direction_.pivot();
  // The only candidate parameter is read off at the pivot, where base is 0.
  const Scalar t = point[piv];
  return at(t) == point;
}

Vector Line::at(const Scalar& t) const { return base_ + t * direction_; }

std::vector<Vector> Line::points() const {
  if (!field().is_prime()) throw InputError("cannot enumerate points over Q");
  std::vector<Vector> out;
  const long p = field().characteristic();
  out.reserve(static_cast<std::size_t>(p));
  for (long t = 0; t < p; ++t) out.push_back(at(Scalar(field(), t)));
  return out;
}

std::strong_ordering operator<=>(const Line& a, const Line& b) {
  if (auto c = a.direction_ <=> b.direction_; c != 0) return c;
  return a.base_ <=> b.base_;
}

std::string Line::to_string() const {
  return "Line(base=" + base_.to_string() + ", dir=" + direction_.to_string() + ")";
}

std::optional<Vector> intersect(const Line& a, const Line& b) {
  if (a == b || a.direction() == b.direction()) return std::nullopt;
  const std::size_t d = a.dim();
  // Solve s * da - t * db = bb - ba by elimination on a d x 3 augmented matrix.
  std::vector<std::array<Scalar, 3>> rows;
  rows.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    rows.push_back({a.direction()[i], -b.direction()[i], b.base()[i] - a.base()[i]});
  }
  std::size_t r = 0;
  std::array<std::size_t, 2> pivot_row{d, d};
  for (std::size_t c = 0; c < 2 && r < d; ++c) {
    std::size_t sel = r;
    while (sel < d && rows[sel][c].is_zero()) ++sel;
    if (sel == d) continue;
    std::swap(rows[r], rows[sel]);
    const Scalar inv = rows[r][c].inverse();
    for (auto& x : rows[r]) x *= inv;
    for (std::size_t i = 0; i < d; ++i) {
      if (i == r || rows[i][c].is_zero()) continue;
      const Scalar factor = rows[i][c];
      for (std::size_t k = 0; k < 3; ++k) rows[i][k] -= factor * rows[r][k];
    }
    pivot_row[c] = r;
    ++r;
  }
  for (std::size_t i = r; i < d; ++i) {
    if (!rows[i][2].is_zero()) return std::nullopt;
  }
  if (pivot_row[0] == d) return std::nullopt;
  const Scalar s = rows[pivot_row[0]][2];
  return a.at(s);
}

namespace {

// In-place reduced row echelon form; returns the nonzero rows.
std::vector<Vector> rref(std::vector<Vector> rows) {
  if (rows.empty()) return rows;
  const std::size_t d = rows.front().dim();
  std::size_t r = 0;
  for (std::size_t c = 0; c < d && r < rows.size(); ++c) {
    std::size_t sel = r;
    while (sel < rows.size() && rows[sel][c].is_zero()) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[r], rows[sel]);
    rows[r] *= rows[r][c].inverse();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c].is_zero()) continue;
      const Scalar factor = rows[i][c];
      rows[i] -= factor * rows[r];
    }
    ++r;
  }
  rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(r), rows.end());
  return rows;
}

}  // namespace

std::vector<std::size_t> Subspace::pivots() const {
  std::vector<std::size_t> out;
  out.reserve(basis_.size());
  for (const auto& row : basis_) out.push_back(row.pivot());
  return out;
}

bool Subspace::contains(const Vector& v) const {
  if (v.dim() != ambient_) throw InputError("dimension mismatch");
  Vector rest = v;
  for (const auto& row : basis_) {
    const std::size_t piv = row.pivot();
    if (!rest[piv].is_zero()) {
      const Scalar factor = rest[piv];
      rest -= factor * row;
    }
  }
  return rest.is_zero();
}

bool Subspace::contains(const Subspace& other) const {
  return std::all_of(other.basis_.begin(), other.basis_.end(),
                     [this](const Vector& v) { return contains(v); });
}

Subspace Subspace::with(const Vector& v) const {
  std::vector<Vector> rows = basis_;
  rows.push_back(v);
  return span(field_, ambient_, rows);
}

bool operator==(const Subspace& a, const Subspace& b) {
  return a.field_ == b.field_ && a.ambient_ == b.ambient_ && a.basis_ == b.basis_;
}

std::strong_ordering operator<=>(const Subspace& a, const Subspace& b) {
  if (auto c = a.basis_.size() <=> b.basis_.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(a.basis_.begin(), a.basis_.end(),
                                                b.basis_.begin(), b.basis_.end());
}

std::string Subspace::to_string() const {
  std::string out = "span{";
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (i) out += ", ";
    out += basis_[i].to_string();
  }
  return out + "}";
}

Subspace span(Field field, std::size_t dim, std::span<const Vector> vectors) {
  require_compatible(vectors, field, dim);
  Subspace out(field, dim);
  out.basis_ = rref(std::vector<Vector>(vectors.begin(), vectors.end()));
  return out;
}

Subspace span(std::span<const Vector> vectors) {
  if (vectors.empty()) throw InputError("span of an empty list needs a field and dimension");
  return span(vectors.front().field(), vectors.front().dim(), vectors);
}

std::size_t rank(std::span<const Vector> vectors) {
  if (vectors.empty()) return 0;
  return span(vectors).dim();
}

bool independent(std::span<const Vector> vectors) {
  return rank(vectors) == vectors.size();
}

bool EchelonStack::push(const Vector& v) {
  if (v.dim() != dim_ || v.field() != field_) throw InputError("incompatible vector");
  Vector rest = v;
  for (const auto& row : rows_) {
    const std::size_t piv = row.pivot();
    if (!rest[piv].is_zero()) {
      const Scalar factor = rest[piv];
      rest -= factor * row;
    }
  }
  const std::size_t piv = rest.pivot();
  if (piv == dim_) return false;
  rest *= rest[piv].inverse();
  rows_.push_back(std::move(rest));
  return true;
}

std::vector<Vector> extend_to_basis_pool(Field field, std::size_t dim,
                                         std::span<const Vector> vectors) {
  require_compatible(vectors, field, dim);
  std::vector<Vector> pool;
  for (const auto& v : vectors) {
    if (std::find(pool.begin(), pool.end(), v) == pool.end()) pool.push_back(v);
  }
  Subspace current = span(field, dim, pool);
  for (std::size_t axis = 0; axis < dim && current.dim() < dim; ++axis) {
    Vector e = Vector::unit(field, dim, axis);
    if (!current.contains(e)) {
      current = current.with(e);
      pool.push_back(std::move(e));
    }
  }
  return pool;
}

std::vector<Vector> all_points(Field field, std::size_t dim) {
  if (!field.is_prime()) throw InputError("cannot enumerate points over Q");
  const long p = field.characteristic();
  std::vector<Vector> out;
  std::vector<long> digits(dim, 0);
  while (true) {
    std::vector<Scalar> coords;
    coords.reserve(dim);
    for (long x : digits) coords.emplace_back(field, x);
    out.emplace_back(field, std::move(coords));
    std::size_t i = dim;
    while (i > 0) {
      --i;
      if (++digits[i] < p) break;
      digits[i] = 0;
      if (i == 0) return out;
    }
    if (dim == 0) return out;
  }
}

std::vector<Vector> all_directions(Field field, std::size_t dim) {
  std::vector<Vector> out;
  for (auto& v : all_points(field, dim)) {
    const std::size_t piv = v.pivot();
    if (piv < dim && v[piv].is_one()) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace jointscert
