#include "jointscert/heavy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "jointscert/error.hpp"
#include "jointscert/joints.hpp"

namespace jointscert {

namespace {

mpq_class qpow(const mpq_class& base, long exponent) {
  mpz_class num = base.get_num();
  mpz_class den = base.get_den();
  if (exponent < 0) {
    if (sgn(num) == 0) throw MathError("zero raised to a negative power");
    std::swap(num, den);
    exponent = -exponent;
  }
  mpz_class n, d;
  mpz_pow_ui(n.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(exponent));
  mpz_pow_ui(d.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(exponent));
  mpq_class out(n, d);
  out.canonicalize();
  return out;
}

mpz_class binomial(std::size_t n, std::size_t k) {
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

mpz_class alpha_z(std::size_t k) {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), 2, k - 1);
  return out;
}

std::vector<Vector> support(const DirectionWeights& f) {
  std::vector<Vector> out;
  for (const auto& [v, w] : f.weights()) out.push_back(v);
  return out;
}

// Inside and outside masses of a candidate relative to the previous plane.
std::pair<mpq_class, mpq_class> split_mass(const DirectionWeights& f, const Subspace& plane,
                                           const Subspace& previous) {
  mpq_class inside = 0, outside = 0;
  for (const auto& [v, w] : f.weights()) {
    if (plane.contains(v)) {
      if (!previous.contains(v)) inside += w;
    } else {
      outside += w;
    }
  }
  return {inside, outside};
}

}  // namespace

void DirectionWeights::add(const Vector& direction, const mpq_class& weight) {
  if (direction.field() != field_ || direction.dim() != dim_) {
    throw InputError("direction " + direction.to_string() + " does not live in " +
                     field_.to_string() + "^" + std::to_string(dim_));
  }
  if (sgn(weight) < 0) throw InputError("negative weight on " + direction.to_string());
  if (sgn(weight) == 0) return;
  weights_[normalize_direction(direction)] += weight;
}

mpq_class DirectionWeights::total() const {
  mpq_class out = 0;
  for (const auto& [v, w] : weights_) out += w;
  return out;
}

DirectionWeights DirectionWeights::scaled(const mpq_class& t) const {
  DirectionWeights out(field_, dim_);
  for (const auto& [v, w] : weights_) out.add(v, w * t);
  return out;
}

mpq_class heavy_alpha(std::size_t k) {
  if (k == 0) throw InputError("alpha is indexed from 1");
  return mpq_class(alpha_z(k));
}

std::size_t HeavyChain::k(std::size_t n) const {
  if (n == 0) return 0;
  if (n > planes.size()) return ambient;
  return planes[n - 1].dim();
}

std::size_t HeavyChain::layer_of(const Vector& direction) const {
  for (std::size_t n = 0; n < planes.size(); ++n) {
    if (planes[n].contains(direction)) return n;
  }
  return planes.size();
}

CandidateGenerator support_span_candidates(const DirectionWeights& f) {
  std::vector<Vector> dirs = support(f);
  return [dirs](const Subspace& previous, std::size_t k) {
    std::set<Subspace> current{previous};
    for (std::size_t dim = previous.dim(); dim < k && !current.empty(); ++dim) {
      std::set<Subspace> next;
      for (const auto& s : current) {
        for (const auto& v : dirs) {
          if (!s.contains(v)) next.insert(s.with(v));
        }
      }
      current = std::move(next);
    }
    std::vector<Subspace> out;
    for (auto& s : current) {
      if (s.dim() == k) out.push_back(s);
    }
    return out;
  };
}

HeavyChain find_heavy_chain(const DirectionWeights& f) {
  return find_heavy_chain(f, support_span_candidates(f));
}

HeavyChain find_heavy_chain(const DirectionWeights& f, const CandidateGenerator& candidates) {
  if (f.empty()) throw InputError("empty weight system");
  const std::size_t d = f.dim();
  HeavyChain chain;
  chain.ambient = d;
  Subspace previous(f.field(), d);
  while (true) {
    std::optional<Subspace> chosen;
    for (std::size_t k = previous.dim() + 1; k + 1 <= d && !chosen; ++k) {
      const mpq_class alpha = heavy_alpha(k);
      for (auto& plane : candidates(previous, k)) {
        if (plane.dim() != k || !plane.contains(previous)) continue;
        auto [inside, outside] = split_mass(f, plane, previous);
        if (inside > alpha * outside && (!chosen || plane < *chosen)) chosen = std::move(plane);
      }
    }
    if (!chosen) break;
    previous = *chosen;
    chain.planes.push_back(std::move(*chosen));
  }
  chain.layers.assign(chain.planes.size() + 1, mpq_class(0));
  for (const auto& [v, w] : f.weights()) chain.layers[chain.layer_of(v)] += w;
  return chain;
}

double RootValue::to_double() const {
  if (sgn(radicand) == 0) return 0.0;
  return std::exp(log_rational(radicand) * num / den);
}

const RootValue& SWeights::at(const Vector& direction) const {
  return rho[chain.layer_of(direction)];
}

std::vector<RootValue> rho_weights(const HeavyChain& chain) {
  const std::size_t d = chain.ambient;
  const std::size_t layers = chain.layers.size();
  if (chain.planes.empty()) throw InputError("empty chain: use the S = 1 branch");
  std::vector<RootValue> rho(layers);
  for (auto& r : rho) r.den = static_cast<unsigned>(d);
  if (sgn(chain.layers.back()) == 0) {
    for (auto& r : rho) r.radicand = 0;
    return rho;
  }
  mpq_class product = 1;
  for (std::size_t n = 1; n <= layers; ++n) {
    product *= qpow(chain.layers[n - 1], static_cast<long>(chain.k(n) - chain.k(n - 1)));
  }
  for (std::size_t n = 0; n < layers; ++n) {
    rho[n].radicand = qpow(chain.layers[n], -static_cast<long>(d)) * product;
  }
  return rho;
}

SWeights build_S(const DirectionWeights& f) {
  SWeights S;
  S.chain = find_heavy_chain(f);
  if (S.chain.planes.empty()) {
    S.rho.assign(1, RootValue{1, 1, static_cast<unsigned>(f.dim())});
    return S;
  }
  S.rho = rho_weights(S.chain);
  S.all_in_hyperplane = !S.chain.planes.empty() && sgn(S.chain.layers.back()) == 0;
  return S;
}

AdmissibilityResult verify_admissibility(const SWeights& S, const DirectionWeights& f,
                                         unsigned jobs) {
  const std::vector<Vector> dirs = support(f);
  const std::size_t d = f.dim();
  const std::size_t n = dirs.size();
  const unsigned den = S.rho.front().den;
  for (const auto& r : S.rho) {
    if (r.den != den) throw InputError("root values must share a denominator");
  }
  std::vector<mpq_class> value(n);
  for (std::size_t i = 0; i < n; ++i) value[i] = qpow(S.at(dirs[i]).radicand, S.at(dirs[i]).num);

  jobs = std::max(1u, jobs);
  struct Partial {
    std::uint64_t checked = 0;
    std::vector<std::size_t> witness;
  };
  std::vector<Partial> partial(jobs);

  auto work = [&](unsigned t) {
    Partial& out = partial[t];
    EchelonStack stack(f.field(), d);
    std::vector<std::size_t> chosen(d);
    std::function<bool(std::size_t, std::size_t, const mpq_class&)> recurse =
        [&](std::size_t depth, std::size_t start, const mpq_class& prod) {
          if (depth == d) {
            ++out.checked;
            if (prod < 1) {
              out.witness = chosen;
              return true;
            }
            return false;
          }
          for (std::size_t i = start; i + (d - depth) <= n; ++i) {
            if (!stack.push(dirs[i])) continue;
            chosen[depth] = i;
            const bool hit = recurse(depth + 1, i + 1, prod * value[i]);
            stack.pop();
            if (hit) return true;
          }
          return false;
        };
    for (std::size_t first = t; first + d <= n; first += jobs) {
      stack.push(dirs[first]);
      chosen[0] = first;
      const bool hit = recurse(1, first + 1, value[first]);
      stack.pop();
      if (hit) return;
    }
  };

  if (d == 0 || n < d) return {};
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }

  AdmissibilityResult result;
  const std::vector<std::size_t>* best = nullptr;
  for (const auto& p : partial) {
    result.tuples_checked += p.checked;
    if (!p.witness.empty() && (!best || p.witness < *best)) best = &p.witness;
  }
  if (best) {
    result.pass = false;
    double prod = 1;
    for (std::size_t i : *best) {
      result.witness.push_back(dirs[i]);
      prod *= S.at(dirs[i]).to_double();
    }
    result.witness_product = prod;
  }
  return result;
}

mpq_class independent_mass(const DirectionWeights& f) {
  const std::vector<Vector> dirs = support(f);
  std::vector<mpq_class> w;
  for (const auto& [v, x] : f.weights()) w.push_back(x);
  mpq_class total = 0;
  for_each_independent_subset(dirs, f.dim(), [&](std::span<const std::size_t> idx) {
    mpq_class term = 1;
    for (std::size_t i : idx) term *= w[i];
    total += term;
  });
  mpz_class fact = 1;
  for (std::size_t k = 2; k <= f.dim(); ++k) fact *= static_cast<unsigned long>(k);
  return total * fact;
}

double main_estimate_ratio(const SWeights& S, const DirectionWeights& f) {
  double numerator = 0;
  for (const auto& [v, w] : f.weights()) numerator += S.at(v).to_double() * w.get_d();
  const mpq_class T = independent_mass(f);
  if (sgn(T) == 0) {
    if (numerator == 0) return 0.0;
    throw MathError("degenerate: zero independent mass but positive S·f sum");
  }
  return numerator / std::exp(log_rational(T) / static_cast<double>(f.dim()));
}

mpz_class layer_beta(std::size_t r, std::size_t top) {
  if (r <= 1) return 1;
  const mpz_class four_alpha = 4 * alpha_z(top - 1);
  mpz_class beta = 1;
  for (std::size_t i = 1; i < r; ++i) {
    mpz_class term = 1;
    for (std::size_t j = i; j < r; ++j) term *= binomial(r, j) * four_alpha;
    beta += term;
  }
  return beta;
}

double bound_for_profile(const std::vector<std::size_t>& dims, std::size_t d) {
  std::vector<std::size_t> ks{0};
  ks.insert(ks.end(), dims.begin(), dims.end());
  ks.push_back(d);
  double log_beta = 0;
  for (std::size_t n = 1; n < ks.size(); ++n) {
    log_beta += log_rational(mpq_class(layer_beta(ks[n] - ks[n - 1], ks[n])));
  }
  return static_cast<double>(ks.size() - 1) * std::exp(log_beta / static_cast<double>(d));
}

double bound_constant(std::size_t d) {
  if (d < 2) throw InputError("dimension must be at least 2");
  double best = 0;
  const std::size_t inner = d - 1;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << inner); ++mask) {
    std::vector<std::size_t> dims;
    for (std::size_t k = 1; k <= inner; ++k) {
      if (mask & (std::uint64_t{1} << (k - 1))) dims.push_back(k);
    }
    best = std::max(best, bound_for_profile(dims, d));
  }
  return best;
}

ConstantLedger lightness_audit(const DirectionWeights& f, const HeavyChain& chain) {
  ConstantLedger ledger;
  const std::size_t d = chain.ambient;
  const std::size_t N = chain.planes.size();
  const std::vector<Vector> dirs = support(f);
  const auto generate = support_span_candidates(f);
  std::vector<std::size_t> dims;
  for (const auto& p : chain.planes) dims.push_back(p.dim());
  ledger.instance_bound = bound_for_profile(dims, d);
  ledger.bound = bound_constant(d);
  if (N == 0 && f.empty()) return ledger;

  for (std::size_t n = 1; n <= N + 1; ++n) {
    LevelAudit level;
    level.n = n;
    level.k_prev = chain.k(n - 1);
    level.k_next = chain.k(n);
    const std::size_t r = level.k_next - level.k_prev;
    const Subspace previous = n > 1 ? chain.planes[n - 2] : Subspace(f.field(), d);
    const Subspace* top = n <= N ? &chain.planes[n - 1] : nullptr;
    auto in_top = [&](const Vector& v) { return !top || top->contains(v); };

    if (r >= 2) {
      const mpq_class a_hi = heavy_alpha(level.k_next);
      const mpq_class a_lo = heavy_alpha(level.k_next - 1);
      level.lightness_factor = a_lo * (a_hi + 1) / (a_hi - a_lo);
      level.lightness_bound = 4 * a_lo;
      if (level.lightness_factor > level.lightness_bound) {
        throw MathError("lightness factor exceeds 4 alpha at layer " + std::to_string(n));
      }
      level.worst_ratio = 0;
      for (std::size_t k = level.k_prev + 1; k < level.k_next; ++k) {
        for (const auto& plane : generate(previous, k)) {
          if (top && !top->contains(plane)) continue;
          ++level.planes_checked;
          auto [inside, outside] = split_mass(f, plane, previous);
          mpq_class rest = 0;
          for (const auto& [v, w] : f.weights()) {
            if (in_top(v) && !plane.contains(v)) rest += w;
          }
          if (inside > a_lo * outside) {
            throw MathError("light inequality fails for " + plane.to_string());
          }
          if (inside > level.lightness_bound * rest) {
            throw MathError("improved light inequality fails for " + plane.to_string());
          }
          if (sgn(inside) > 0) {
            level.worst_ratio = std::max(level.worst_ratio,
                                         mpq_class(inside / (level.lightness_bound * rest)));
          }
        }
      }
    }

    // Gamma_j: ordered r-tuples of layer lines spanning j together with the
    // previous plane.
    std::vector<Vector> delta;
    std::vector<mpq_class> weight;
    for (const auto& [v, w] : f.weights()) {
      if (in_top(v) && !previous.contains(v)) {
        delta.push_back(v);
        weight.push_back(w);
      }
    }
    level.gamma.assign(r, mpq_class(0));
    mpq_class layer_total = 0;
    for (const auto& w : weight) layer_total += w;
    std::vector<std::size_t> idx(r, 0);
    if (!delta.empty() && r > 0) {
      while (true) {
        std::vector<Vector> rows = previous.basis();
        mpq_class prod = 1;
        for (std::size_t i : idx) {
          rows.push_back(delta[i]);
          prod *= weight[i];
        }
        const std::size_t j = span(f.field(), d, rows).dim();
        level.gamma[j - level.k_prev - 1] += prod;
        std::size_t pos = r;
        while (pos > 0 && ++idx[pos - 1] == delta.size()) idx[--pos] = 0;
        if (pos == 0) break;
      }
    }
    level.beta = layer_beta(r, level.k_next);
    const mpq_class four_alpha = r >= 2 ? 4 * heavy_alpha(level.k_next - 1) : mpq_class(0);
    for (std::size_t i = 1; i < r; ++i) {
      const mpq_class c = mpq_class(binomial(r, i)) * four_alpha;
      if (level.gamma[i - 1] > c * level.gamma[i]) level.gamma_ok = false;
    }
    if (r > 0 && qpow(layer_total, static_cast<long>(r)) > level.beta * level.gamma[r - 1]) {
      level.gamma_ok = false;
    }
    if (!level.gamma_ok) {
      throw MathError("layer stratification bound fails at layer " + std::to_string(n));
    }
    ledger.levels.push_back(std::move(level));
  }
  return ledger;
}

}  // namespace jointscert
