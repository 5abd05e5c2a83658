#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "jointscert/geometry.hpp"

namespace jointscert {

/// Positive weights on lines through the origin, keyed by normalized direction.
class DirectionWeights {
 public:
  DirectionWeights(Field field, std::size_t dim) : field_(field), dim_(dim) {}

  /// Adds weight to the line spanned by `direction`. Zero weights are dropped,
  /// negative weights are rejected.
  void add(const Vector& direction, const mpq_class& weight);

  Field field() const { return field_; }
  std::size_t dim() const { return dim_; }
  const std::map<Vector, mpq_class>& weights() const { return weights_; }
  bool empty() const { return weights_.empty(); }
  mpq_class total() const;
  DirectionWeights scaled(const mpq_class& t) const;

 private:
  Field field_;
  std::size_t dim_;
  std::map<Vector, mpq_class> weights_;
};

/// alpha_k = 2^(k-1).
mpq_class heavy_alpha(std::size_t k);

struct HeavyChain {
  std::vector<Subspace> planes;    // pi_1 < ... < pi_N
  std::vector<mpq_class> layers;   // F_1 .. F_{N+1}
  std::size_t ambient = 0;

  std::size_t size() const { return planes.size(); }
  /// k_n with k_0 = 0 and k_{N+1} = d.
  std::size_t k(std::size_t n) const;
  /// 0-based layer of a direction: least n with dir in pi_{n+1}, else N.
  std::size_t layer_of(const Vector& direction) const;
};

/// Candidate planes of dimension `k` containing `previous`.
using CandidateGenerator =
    std::function<std::vector<Subspace>(const Subspace& previous, std::size_t k)>;

/// Spans of `previous` with subsets of the support directions.
CandidateGenerator support_span_candidates(const DirectionWeights& f);

/// Greedy heavy chain. Ties at the minimal dimension go to the least
/// reduced basis. Throws InputError("empty weight system").
HeavyChain find_heavy_chain(const DirectionWeights& f);
HeavyChain find_heavy_chain(const DirectionWeights& f, const CandidateGenerator& candidates);

/// radicand^(num/den) for a nonnegative rational radicand.
struct RootValue {
  mpq_class radicand = 1;
  unsigned num = 1;
  unsigned den = 1;

  double to_double() const;
  bool is_zero() const { return sgn(radicand) == 0; }
};

struct SWeights {
  HeavyChain chain;
  std::vector<RootValue> rho;  // one per layer; a single 1 for the empty chain
  bool all_in_hyperplane = false;

  const RootValue& at(const Vector& direction) const;
};

/// rho_n = (F_n^{-d} prod_m F_m^{k_m - k_{m-1}})^{1/d}; all zero when the last
/// layer is empty. Throws InputError for the empty chain.
std::vector<RootValue> rho_weights(const HeavyChain& chain);
SWeights build_S(const DirectionWeights& f);

struct AdmissibilityResult {
  bool pass = true;
  std::uint64_t tuples_checked = 0;
  std::vector<Vector> witness;  // lexicographically least violating d-set
  double witness_product = 0;
};

/// Exact check of S(l_1)...S(l_d) >= 1 over every independent d-set of
/// support directions. `jobs` worker threads split the enumeration.
AdmissibilityResult verify_admissibility(const SWeights& S, const DirectionWeights& f,
                                         unsigned jobs = 1);

/// d! times the sum over independent d-sets of the product of weights.
mpq_class independent_mass(const DirectionWeights& f);

/// (sum_l S(l) f(l)) / T^{1/d}. Throws MathError when T = 0 but the
/// numerator is positive.
double main_estimate_ratio(const SWeights& S, const DirectionWeights& f);

struct LevelAudit {
  std::size_t n = 0;          // 1-based layer index
  std::size_t k_prev = 0;
  std::size_t k_next = 0;
  mpq_class lightness_factor;  // alpha_{k-1} (alpha_k + 1) / (alpha_k - alpha_{k-1})
  mpq_class lightness_bound;   // 4 alpha_{k-1}
  mpq_class worst_ratio;       // worst inside / (4 alpha_{k-1} * remaining mass)
  std::size_t planes_checked = 0;
  std::vector<mpq_class> gamma;  // Gamma_{k+1} .. Gamma_{k+r}
  mpz_class beta;
  bool gamma_ok = true;
};

struct ConstantLedger {
  std::vector<LevelAudit> levels;
  /// (N+1) (prod beta_n)^{1/d} for this chain's dimension profile.
  double instance_bound = 0;
  /// Worst case of the above over every dimension profile.
  double bound = 0;
};

/// beta for a layer of codimension r whose lightness factor is 4 alpha_{top-1}.
mpz_class layer_beta(std::size_t r, std::size_t top);
double bound_for_profile(const std::vector<std::size_t>& dims, std::size_t d);
/// Max over every chain profile in dimension d.
double bound_constant(std::size_t d);

/// Re-checks the lightness inequalities and the Gamma stratification of the
/// chain exactly. Throws MathError on any violation.
ConstantLedger lightness_audit(const DirectionWeights& f, const HeavyChain& chain);

}  // namespace jointscert
