#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jointscert/joints.hpp"

namespace jointscert {

/// A finitely supported nonnegative function on points of F^d.
class PointMass {
 public:
  PointMass(Field field, std::size_t dim) : field_(field), dim_(dim) {}

  /// Rejects negative values; zero values are dropped.
  void set(const Vector& x, const mpq_class& value);
  mpq_class at(const Vector& x) const;

  Field field() const { return field_; }
  std::size_t dim() const { return dim_; }
  const std::map<Vector, mpq_class>& values() const { return values_; }
  std::vector<Vector> support() const;
  /// sum_x M(x)^d.
  mpq_class power_sum() const;
  PointMass scaled(const mpq_class& t) const;

 private:
  Field field_;
  std::size_t dim_;
  std::map<Vector, mpq_class> values_;
};

struct ClosureFamily {
  std::vector<Line> prime;                       // lines through >= 2 support points
  std::map<Vector, std::vector<Line>> augmented;  // completion lines through each point
  std::vector<Line> lines;                       // the whole family, sorted

  bool contains(const Line& l) const;
  std::optional<std::size_t> index(const Line& l) const;
};

ClosureFamily line_closure(const PointMass& M);

/// A normalized certificate: with Mhat = M / ||M||_d,
///   Mhat(x)^d <= g(x, l_1) ... g(x, l_d)  on every joint tuple,
///   sum_{x in l} g(x, l) <= C           on every line,
/// where g on lines outside the family is C at their single support point.
struct FactorCertificate {
  Field field = Field::rationals();
  std::size_t dim = 0;
  bool all_lines = true;               // default rule active outside `lines`
  std::vector<Line> lines;             // sorted
  std::vector<Vector> points;          // support of M, sorted
  std::vector<mpq_class> mass;         // M(x)
  std::vector<mpq_class> mass_power;   // Mhat(x)^d = M^d / sum M^d
  mpq_class power_sum;                 // sum M^d, so ||M||_d = power_sum^{1/d}
  std::map<std::pair<std::size_t, std::size_t>, mpq_class> g;  // (point, line) -> value
  mpq_class C;
  std::vector<std::vector<std::size_t>> families;  // line indices per family (multijoints)

  double norm() const;  // ||M||_d
  std::optional<std::size_t> point_index(const Vector& x) const;
  std::optional<std::size_t> line_index(const Line& l) const;
};

struct FactoriseOptions {
  double tolerance = 1e-10;
};

/// All-lines mode: closure family of supp M.
FactorCertificate factorise(const PointMass& M, const FactoriseOptions& options = {});
/// Explicit mode: the union of the given families; every support point
/// must be a multijoint of them.
FactorCertificate factorise(const PointMass& M, const MultiFamily& families,
                            const FactoriseOptions& options = {});

/// g(x, l) with the default rule for lines outside the family.
mpq_class evaluate_g(const FactorCertificate& cert, const Vector& x, const Line& l);

enum class VerifyScope { exhaustive, sampled };

struct VerifyOptions {
  VerifyScope scope = VerifyScope::exhaustive;
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

struct VerifyResult {
  bool pass = true;
  std::uint64_t tuples_checked = 0;
  std::uint64_t lines_checked = 0;
  mpq_class max_line_sum = 0;
  std::string witness;  // empty on pass
};

/// Checks dominance, line sums and every joint tuple (mixed with off-family
/// lines in all-lines mode), exactly.
VerifyResult verify_certificate(const FactorCertificate& cert, const VerifyOptions& options = {});

/// Multijoint tables: the union certificate restricted to each family.
struct MultijointCertificate {
  FactorCertificate base;
  /// g_j(x, l) for l in family j, keyed by (point, line index in base.lines).
  std::vector<std::map<std::pair<std::size_t, std::size_t>, mpq_class>> tables;
};

MultijointCertificate multijoint_factorise(const PointMass& M, const MultiFamily& families,
                                           const FactoriseOptions& options = {});
VerifyResult verify_multijoint(const MultijointCertificate& cert, const MultiFamily& families,
                               unsigned jobs = 1);

/// Directions used for mixed tuples: every direction over F_p, or the
/// family directions plus integer directions with entries in {-1, 0, 1}
/// over Q.
std::vector<Vector> verification_directions(const FactorCertificate& cert, const Vector& x);

}  // namespace jointscert
