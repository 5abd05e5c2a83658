#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>

#include <gmpxx.h>

namespace jointscert {

/// A coefficient field: either a prime field F_p (p < 2^31) or the rationals.
class Field {
 public:
  /// Throws InputError if p is not a prime below 2^31.
  static Field prime(std::uint64_t p);
  static Field rationals() { return Field(0); }

  bool is_prime() const { return p_ != 0; }
  bool is_rational() const { return p_ == 0; }
  /// The prime p, or 0 for the rationals.
  std::uint32_t characteristic() const { return p_; }

  std::string to_string() const;

  friend bool operator==(Field a, Field b) { return a.p_ == b.p_; }
  friend bool operator!=(Field a, Field b) { return a.p_ != b.p_; }

 private:
  explicit Field(std::uint32_t p) : p_(p) {}
  std::uint32_t p_;
};

bool is_prime_number(std::uint64_t n);

/// An element of a Field. Prime-field elements are stored reduced to [0, p);
/// rationals are kept canonical by GMP.
class Scalar {
 public:
  Scalar() : Scalar(Field::rationals(), 0) {}
  Scalar(Field field, long value);
  /// For F_p the denominator must be invertible mod p.
  Scalar(Field field, const mpq_class& value);

  static Scalar zero(Field field) { return Scalar(field, 0L); }
  static Scalar one(Field field) { return Scalar(field, 1L); }

  Field field() const { return field_; }
  bool is_zero() const;
  bool is_one() const;

  /// The residue in [0, p) for F_p, the value itself for Q.
  mpq_class to_rational() const;
  std::uint32_t residue() const { return std::get<std::uint32_t>(value_); }
  const mpq_class& rational() const { return std::get<mpq_class>(value_); }

  Scalar inverse() const;
  Scalar operator-() const;

  Scalar& operator+=(const Scalar& other);
  Scalar& operator-=(const Scalar& other);
  Scalar& operator*=(const Scalar& other);
  Scalar& operator/=(const Scalar& other);

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }

  friend bool operator==(const Scalar& a, const Scalar& b);
  /// Total order: residue order in F_p, numeric order in Q.
  friend std::strong_ordering operator<=>(const Scalar& a, const Scalar& b);

  std::string to_string() const;

 private:
  void check_same_field(const Scalar& other) const;

  Field field_;
  std::variant<std::uint32_t, mpq_class> value_;
};

/// Parses "a", "-a" or "a/b" into an exact rational. Throws InputError.
mpq_class parse_rational(const std::string& text);
std::string rational_to_string(const mpq_class& value);
/// Natural logarithm of a positive rational without overflowing doubles.
double log_rational(const mpq_class& value);

}  // namespace jointscert
