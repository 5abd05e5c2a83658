#include "jointscert/field.hpp"

#include <cmath>

#include "jointscert/error.hpp"

namespace jointscert {

namespace {

std::uint32_t mod_pow(std::uint64_t base, std::uint64_t exp, std::uint32_t p) {
  std::uint64_t result = 1;
  base %= p;
  while (exp > 0) {
    if (exp & 1U) result = result * base % p;
    base = base * base % p;
    exp >>= 1U;
  }
  return static_cast<std::uint32_t>(result);
}

std::uint32_t reduce(const mpz_class& value, std::uint32_t p) {
  return static_cast<std::uint32_t>(mpz_fdiv_ui(value.get_mpz_t(), p));
}

}  // namespace

bool is_prime_number(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t k = 3; k * k <= n; k += 2) {
    if (n % k == 0) return false;
  }
  return true;
}

Field Field::prime(std::uint64_t p) {
  if (p >= (std::uint64_t{1} << 31)) {
    throw InputError("field characteristic " + std::to_string(p) + " exceeds 2^31");
  }
  if (!is_prime_number(p)) {
    throw InputError(std::to_string(p) + " is not prime");
  }
  return Field(static_cast<std::uint32_t>(p));
}

std::string Field::to_string() const {
  return is_prime() ? "F_" + std::to_string(p_) : "Q";
}

Scalar::Scalar(Field field, long value) : field_(field) {
  if (field.is_prime()) {
    const long p = field.characteristic();
    long r = value % p;
    if (r < 0) r += p;
    value_ = static_cast<std::uint32_t>(r);
  } else {
    value_ = mpq_class(value);
  }
}

Scalar::Scalar(Field field, const mpq_class& value) : field_(field) {
  if (field.is_prime()) {
    const std::uint32_t p = field.characteristic();
    const std::uint32_t den = reduce(value.get_den(), p);
    if (den == 0) {
      throw InputError("denominator of " + value.get_str() + " vanishes in " +
                       field.to_string());
    }
    const std::uint64_t num = reduce(value.get_num(), p);
    value_ = static_cast<std::uint32_t>(num * mod_pow(den, p - 2, p) % p);
  } else {
    mpq_class canonical = value;
    canonical.canonicalize();
    value_ = std::move(canonical);
  }
}

bool Scalar::is_zero() const {
  if (field_.is_prime()) return residue() == 0;
  return sgn(rational()) == 0;
}

bool Scalar::is_one() const {
  if (field_.is_prime()) return residue() == 1;
  return rational() == 1;
}

mpq_class Scalar::to_rational() const {
  if (field_.is_prime()) return mpq_class(static_cast<unsigned long>(residue()));
  return rational();
}

void Scalar::check_same_field(const Scalar& other) const {
  if (field_ != other.field_) {
    throw InputError("mixed fields: " + field_.to_string() + " and " +
                     other.field_.to_string());
  }
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw InputError("division by zero");
  Scalar out = *this;
  if (field_.is_prime()) {
    const std::uint32_t p = field_.characteristic();
    out.value_ = mod_pow(residue(), p - 2, p);
  } else {
    out.value_ = mpq_class(1) / rational();
  }
  return out;
}

Scalar Scalar::operator-() const {
  Scalar out = *this;
  if (field_.is_prime()) {
    const std::uint32_t r = residue();
    out.value_ = r == 0 ? 0U : field_.characteristic() - r;
  } else {
    out.value_ = mpq_class(-rational());
  }
  return out;
}

Scalar& Scalar::operator+=(const Scalar& other) {
  check_same_field(other);
  if (field_.is_prime()) {
    const std::uint64_t s = std::uint64_t{residue()} + other.residue();
    value_ = static_cast<std::uint32_t>(s % field_.characteristic());
  } else {
    std::get<mpq_class>(value_) += other.rational();
  }
  return *this;
}

Scalar& Scalar::operator-=(const Scalar& other) { return *this += -other; }

Scalar& Scalar::operator*=(const Scalar& other) {
  check_same_field(other);
  if (field_.is_prime()) {
    const std::uint64_t s = std::uint64_t{residue()} * other.residue();
    value_ = static_cast<std::uint32_t>(s % field_.characteristic());
  } else {
    std::get<mpq_class>(value_) *= other.rational();
  }
  return *this;
}

Scalar& Scalar::operator/=(const Scalar& other) {
  check_same_field(other);
  return *this *= other.inverse();
}

bool operator==(const Scalar& a, const Scalar& b) {
  if (a.field_ != b.field_) return false;
  if (a.field_.is_prime()) return a.residue() == b.residue();
  return a.rational() == b.rational();
}

std::strong_ordering operator<=>(const Scalar& a, const Scalar& b) {
  a.check_same_field(b);
  if (a.field_.is_prime()) return a.residue() <=> b.residue();
  const int c = cmp(a.rational(), b.rational());
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Scalar::to_string() const {
  if (field_.is_prime()) return std::to_string(residue());
  return rational_to_string(rational());
}

mpq_class parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  auto valid_int = [](const std::string& s, bool allow_sign) {
    if (s.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (s[0] == '-' || s[0] == '+')) i = 1;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
  };
  const std::string num = text.substr(0, slash);
  const std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
  if (!valid_int(num, true) || !valid_int(den, false)) {
    throw InputError("malformed rational '" + text + "'");
  }
  mpz_class n(num[0] == '+' ? num.substr(1) : num, 10);
  mpz_class dd(den, 10);
  if (dd == 0) throw InputError("zero denominator in '" + text + "'");
  mpq_class q(n, dd);
  q.canonicalize();
  return q;
}

std::string rational_to_string(const mpq_class& value) {
  if (value.get_den() == 1) return value.get_num().get_str();
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

double log_rational(const mpq_class& value) {
  if (sgn(value) <= 0) return -INFINITY;
  long num_exp = 0;
  long den_exp = 0;
  const double num = mpz_get_d_2exp(&num_exp, value.get_num().get_mpz_t());
  const double den = mpz_get_d_2exp(&den_exp, value.get_den().get_mpz_t());
  return std::log(num) - std::log(den) +
         static_cast<double>(num_exp - den_exp) * std::log(2.0);
}

}  // namespace jointscert
