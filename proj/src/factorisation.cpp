#include "jointscert/factorisation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "jointscert/duality.hpp"
#include "jointscert/error.hpp"

namespace jointscert {

namespace {

mpq_class pow_q(const mpq_class& base, std::size_t e) {
  mpq_class out = 1;
  for (std::size_t i = 0; i < e; ++i) out *= base;
  return out;
}

std::string list_lines(const std::vector<Line>& lines) {
  std::string out = "[";
  for (std::size_t i = 0; i < lines.size(); ++i) out += (i ? ", " : "") + lines[i].to_string();
  return out + "]";
}

// Builds and solves the symmetric instance over `lines`, filling the table.
FactorCertificate solve_certificate(const PointMass& M, std::vector<Line> lines, bool all_lines,
                                    const FactoriseOptions& options) {
  FactorCertificate cert;
  cert.field = M.field();
  cert.dim = M.dim();
  cert.all_lines = all_lines;
  std::sort(lines.begin(), lines.end());
  lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
  cert.lines = std::move(lines);
  cert.points = M.support();
  for (const auto& x : cert.points) cert.mass.push_back(M.at(x));
  cert.power_sum = M.power_sum();
  cert.C = 0;
  if (cert.points.empty()) return cert;
  for (const auto& m : cert.mass) cert.mass_power.push_back(pow_q(m, cert.dim) / cert.power_sum);

  const std::size_t d = cert.dim;
  DiscreteInstance inst;
  inst.d = d;
  inst.symmetric = true;
  inst.q = 1;
  inst.w.assign(d, std::vector<mpq_class>(cert.lines.size(), mpq_class(1)));
  for (std::size_t i = 0; i < cert.points.size(); ++i) {
    inst.mu.emplace_back(1);
    inst.M.emplace_back(1);
    std::vector<std::size_t> through;
    std::vector<Vector> dirs;
    for (std::size_t l = 0; l < cert.lines.size(); ++l) {
      if (cert.lines[l].contains(cert.points[i])) {
        through.push_back(l);
        dirs.push_back(cert.lines[l].direction());
      }
    }
    bool joint = false;
    for_each_independent_subset(dirs, d, [&](std::span<const std::size_t> idx) {
      KernelEntry e;
      e.x = i;
      for (std::size_t k : idx) e.y.push_back(through[k]);
      e.value = cert.mass_power[i];
      inst.kernel.push_back(std::move(e));
      joint = true;
    });
    if (!joint) {
      throw InputError("support point " + cert.points[i].to_string() +
                       " is not a joint of the line family");
    }
  }
  PrimalOptions primal;
  primal.tolerance = options.tolerance;
  primal.polish_steps = 0;
  const PrimalResult r = primal_solve(inst, primal);
  if (!r.report.lifted_exact) throw MathError("rational lift failed to reach feasibility");
  for (std::size_t i = 0; i < cert.points.size(); ++i) {
    for (std::size_t l = 0; l < cert.lines.size(); ++l) {
      const mpq_class& v = r.tables.g[0][i][l];
      if (sgn(v) > 0) cert.g.emplace(std::make_pair(i, l), v);
    }
  }
  cert.C = r.tables.value;
  return cert;
}

bool is_multijoint(const MultiFamily& families, const Vector& x) {
  std::vector<std::vector<Vector>> slots(families.dim());
  for (std::size_t j = 0; j < families.dim(); ++j) {
    for (const auto& [l, m] : families[j].lines()) {
      if (l.contains(x)) slots[j].push_back(l.direction());
    }
  }
  bool found = false;
  for_each_independent_tuple(slots, [&](std::span<const std::size_t>) { found = true; });
  return found;
}

template <typename Work>
void run_parallel(std::size_t items, unsigned jobs, Work work) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(items, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < items; ++i) work(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < items; i += jobs) work(i);
    });
  }
  for (auto& th : pool) th.join();
}

// Dominance, line sums and the single-support-point property.
bool check_structure(const FactorCertificate& cert, VerifyResult& out) {
  for (const auto& [key, v] : cert.g) {
    const auto [i, l] = key;
    if (i >= cert.points.size() || l >= cert.lines.size()) {
      out.witness = "table entry refers to an unknown point or line";
      return false;
    }
    if (sgn(v) < 0 || v > cert.C) {
      out.witness = "entry g(" + cert.points[i].to_string() + ", " + cert.lines[l].to_string() +
                    ") = " + rational_to_string(v) + " is outside [0, C = " +
                    rational_to_string(cert.C) + "]";
      return false;
    }
  }
  for (std::size_t l = 0; l < cert.lines.size(); ++l) {
    mpq_class sum = 0;
    for (std::size_t i = 0; i < cert.points.size(); ++i) {
      if (!cert.lines[l].contains(cert.points[i])) continue;
      auto it = cert.g.find({i, l});
      if (it != cert.g.end()) sum += it->second;
    }
    ++out.lines_checked;
    if (sum > out.max_line_sum) out.max_line_sum = sum;
    if (sum > cert.C) {
      out.witness = "line sum on " + cert.lines[l].to_string() + " is " + rational_to_string(sum) +
                    " > C = " + rational_to_string(cert.C);
      return false;
    }
  }
  if (cert.all_lines) {
    for (std::size_t i = 0; i < cert.points.size(); ++i) {
      for (std::size_t k = i + 1; k < cert.points.size(); ++k) {
        const Line l = canonical_line(cert.points[i], cert.points[k] - cert.points[i]);
        if (!cert.line_index(l)) {
          out.witness = "off-family line " + l.to_string() + " meets two support points";
          return false;
        }
      }
    }
  }
  return true;
}

struct PointReport {
  std::uint64_t checked = 0;
  std::string witness;
};

}  // namespace

void PointMass::set(const Vector& x, const mpq_class& value) {
  if (x.field() != field_ || x.dim() != dim_) {
    throw InputError("point " + x.to_string() + " does not live in " + field_.to_string() + "^" +
                     std::to_string(dim_));
  }
  if (sgn(value) < 0) throw InputError("negative mass at " + x.to_string());
  if (sgn(value) == 0) {
    values_.erase(x);
  } else {
    values_[x] = value;
  }
}

mpq_class PointMass::at(const Vector& x) const {
  auto it = values_.find(x);
  return it == values_.end() ? mpq_class(0) : it->second;
}

std::vector<Vector> PointMass::support() const {
  std::vector<Vector> out;
  for (const auto& [x, v] : values_) out.push_back(x);
  return out;
}

mpq_class PointMass::power_sum() const {
  mpq_class total = 0;
  for (const auto& [x, v] : values_) total += pow_q(v, dim_);
  return total;
}

PointMass PointMass::scaled(const mpq_class& t) const {
  PointMass out(field_, dim_);
  for (const auto& [x, v] : values_) out.set(x, v * t);
  return out;
}

bool ClosureFamily::contains(const Line& l) const { return index(l).has_value(); }

std::optional<std::size_t> ClosureFamily::index(const Line& l) const {
  auto it = std::lower_bound(lines.begin(), lines.end(), l);
  if (it == lines.end() || !(*it == l)) return std::nullopt;
  return static_cast<std::size_t>(it - lines.begin());
}

ClosureFamily line_closure(const PointMass& M) {
  ClosureFamily out;
  const std::vector<Vector> pts = M.support();
  std::set<Line> prime;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t k = i + 1; k < pts.size(); ++k) {
      prime.insert(canonical_line(pts[i], pts[k] - pts[i]));
    }
  }
  out.prime.assign(prime.begin(), prime.end());
  std::set<Line> all(prime);
  for (const auto& x : pts) {
    std::vector<Vector> dirs;
    for (const auto& l : out.prime) {
      if (l.contains(x)) dirs.push_back(l.direction());
    }
    std::vector<Line>& mine = out.augmented[x];
    for (const auto& v : extend_to_basis_pool(M.field(), M.dim(), dirs)) {
      Line l = canonical_line(x, v);
      all.insert(l);
      mine.push_back(std::move(l));
    }
  }
  out.lines.assign(all.begin(), all.end());
  return out;
}

double FactorCertificate::norm() const {
  if (sgn(power_sum) == 0) return 0;
  return std::exp(log_rational(power_sum) / static_cast<double>(dim));
}

std::optional<std::size_t> FactorCertificate::point_index(const Vector& x) const {
  auto it = std::lower_bound(points.begin(), points.end(), x);
  if (it == points.end() || !(*it == x)) return std::nullopt;
  return static_cast<std::size_t>(it - points.begin());
}

std::optional<std::size_t> FactorCertificate::line_index(const Line& l) const {
  auto it = std::lower_bound(lines.begin(), lines.end(), l);
  if (it == lines.end() || !(*it == l)) return std::nullopt;
  return static_cast<std::size_t>(it - lines.begin());
}

FactorCertificate factorise(const PointMass& M, const FactoriseOptions& options) {
  return solve_certificate(M, line_closure(M).lines, true, options);
}

FactorCertificate factorise(const PointMass& M, const MultiFamily& families,
                            const FactoriseOptions& options) {
  if (families.field() != M.field() || families.dim() != M.dim()) {
    throw InputError("families and point masses live in different spaces");
  }
  std::vector<Line> lines;
  const LineFamily merged = families.union_family();
  for (const auto& [l, m] : merged.lines()) lines.push_back(l);
  FactorCertificate cert = solve_certificate(M, lines, false, options);
  for (std::size_t j = 0; j < families.dim(); ++j) {
    std::vector<std::size_t> idx;
    for (const auto& [l, m] : families[j].lines()) idx.push_back(*cert.line_index(l));
    cert.families.push_back(std::move(idx));
  }
  return cert;
}

mpq_class evaluate_g(const FactorCertificate& cert, const Vector& x, const Line& l) {
  const auto pi = cert.point_index(x);
  if (!pi) return 0;
  if (const auto li = cert.line_index(l)) {
    auto it = cert.g.find({*pi, *li});
    return it == cert.g.end() ? mpq_class(0) : it->second;
  }
  if (cert.all_lines && l.contains(x)) return cert.C;
  return 0;
}

std::vector<Vector> verification_directions(const FactorCertificate& cert, const Vector& x) {
  if (!cert.all_lines) {
    std::vector<Vector> out;
    for (const auto& l : cert.lines) {
      if (l.contains(x)) out.push_back(l.direction());
    }
    return out;
  }
  if (cert.field.is_prime()) return all_directions(cert.field, cert.dim);
  std::set<Vector> dirs;
  for (const auto& l : cert.lines) {
    if (l.contains(x)) dirs.insert(l.direction());
  }
  std::vector<long> digits(cert.dim, -1);
  while (true) {
    std::vector<Scalar> coords;
    for (long v : digits) coords.emplace_back(cert.field, v);
    Vector v(cert.field, std::move(coords));
    if (!v.is_zero()) dirs.insert(normalize_direction(v));
    std::size_t pos = cert.dim;
    while (pos > 0 && ++digits[pos - 1] == 2) digits[--pos] = -1;
    if (pos == 0) break;
  }
  return {dirs.begin(), dirs.end()};
}

VerifyResult verify_certificate(const FactorCertificate& cert, const VerifyOptions& options) {
  VerifyResult out;
  if (!check_structure(cert, out)) {
    out.pass = false;
    return out;
  }
  const std::size_t d = cert.dim;
  std::vector<PointReport> reports(cert.points.size());
  run_parallel(cert.points.size(), options.jobs, [&](std::size_t i) {
    const Vector& x = cert.points[i];
    const std::vector<Vector> dirs = verification_directions(cert, x);
    std::vector<Line> lines;
    std::vector<mpq_class> value;
    for (const auto& v : dirs) {
      lines.push_back(canonical_line(x, v));
      value.push_back(evaluate_g(cert, x, lines.back()));
    }
    const mpq_class& target = cert.mass_power[i];
    PointReport& rep = reports[i];
    auto check = [&](std::span<const std::size_t> idx) {
      ++rep.checked;
      mpq_class prod = 1;
      for (std::size_t k : idx) prod *= value[k];
      if (prod < target && rep.witness.empty()) {
        std::vector<Line> tuple;
        for (std::size_t k : idx) tuple.push_back(lines[k]);
        rep.witness = "at x = " + x.to_string() + " lines " + list_lines(tuple) +
                      ": Mhat^d = " + rational_to_string(target) +
                      " > prod g = " + rational_to_string(prod);
      }
    };
    if (options.scope == VerifyScope::exhaustive) {
      for_each_independent_subset(dirs, d, [&](std::span<const std::size_t> idx) {
        if (rep.witness.empty()) check(idx);
      });
    } else {
      std::mt19937_64 rng(options.seed * 1000003u + i);
      std::vector<std::size_t> idx(dirs.size());
      for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
      if (dirs.size() < d) return;
      for (std::size_t s = 0; s < options.samples && rep.witness.empty(); ++s) {
        for (std::size_t k = 0; k < d; ++k) {
          std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
          std::swap(idx[k], idx[pick(rng)]);
        }
        std::vector<Vector> chosen;
        for (std::size_t k = 0; k < d; ++k) chosen.push_back(dirs[idx[k]]);
        if (independent(chosen)) check(std::span<const std::size_t>(idx.data(), d));
      }
    }
  });
  for (const auto& rep : reports) {
    out.tuples_checked += rep.checked;
    if (out.pass && !rep.witness.empty()) {
      out.pass = false;
      out.witness = rep.witness;
    }
  }
  return out;
}

MultijointCertificate multijoint_factorise(const PointMass& M, const MultiFamily& families,
                                           const FactoriseOptions& options) {
  for (const auto& x : M.support()) {
    if (!is_multijoint(families, x)) {
      throw InputError("support point " + x.to_string() + " is not a multijoint");
    }
  }
  MultijointCertificate out;
  out.base = factorise(M, families, options);
  out.tables.resize(families.dim());
  for (std::size_t j = 0; j < families.dim(); ++j) {
    const std::set<std::size_t> mine(out.base.families[j].begin(), out.base.families[j].end());
    for (const auto& [key, v] : out.base.g) {
      if (mine.count(key.second)) out.tables[j].emplace(key, v);
    }
  }
  return out;
}

VerifyResult verify_multijoint(const MultijointCertificate& cert, const MultiFamily& families,
                               unsigned jobs) {
  VerifyResult out;
  const FactorCertificate& base = cert.base;
  if (!check_structure(base, out)) {
    out.pass = false;
    return out;
  }
  const std::size_t d = families.dim();
  // Restricted line sums are bounded by the union's; recheck them per family.
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t l : base.families[j]) {
      mpq_class sum = 0;
      for (const auto& [key, v] : cert.tables[j]) {
        if (key.second == l) sum += v;
      }
      if (sum > base.C) {
        out.pass = false;
        out.witness = "family " + std::to_string(j + 1) + " line sum exceeds C on " +
                      base.lines[l].to_string();
        return out;
      }
    }
  }
  std::vector<PointReport> reports(base.points.size());
  run_parallel(base.points.size(), jobs, [&](std::size_t i) {
    const Vector& x = base.points[i];
    std::vector<std::vector<Vector>> slots(d);
    std::vector<std::vector<std::size_t>> line_of(d);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t l : base.families[j]) {
        if (base.lines[l].contains(x)) {
          slots[j].push_back(base.lines[l].direction());
          line_of[j].push_back(l);
        }
      }
    }
    PointReport& rep = reports[i];
    for_each_independent_tuple(slots, [&](std::span<const std::size_t> idx) {
      if (!rep.witness.empty()) return;
      ++rep.checked;
      mpq_class prod = 1;
      for (std::size_t j = 0; j < d; ++j) {
        auto it = cert.tables[j].find({i, line_of[j][idx[j]]});
        prod *= it == cert.tables[j].end() ? mpq_class(0) : it->second;
      }
      if (prod < base.mass_power[i]) {
        rep.witness = "multijoint tuple at x = " + x.to_string() + ": Mhat^d = " +
                      rational_to_string(base.mass_power[i]) + " > prod g_j = " +
                      rational_to_string(prod);
      }
    });
  });
  for (const auto& rep : reports) {
    out.tuples_checked += rep.checked;
    if (out.pass && !rep.witness.empty()) {
      out.pass = false;
      out.witness = rep.witness;
    }
  }
  return out;
}

}  // namespace jointscert
