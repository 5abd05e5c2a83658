#include "jointscert/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "jointscert/error.hpp"

namespace jointscert {

namespace {

// Portable draws: std::uniform_int_distribution differs between standard
// libraries, which would break byte-identical reports.
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

Vector random_vector(std::mt19937_64& rng, Field field, std::size_t d, bool nonzero) {
  while (true) {
    std::vector<Scalar> coords;
    for (std::size_t i = 0; i < d; ++i) {
      coords.emplace_back(field, static_cast<long>(draw(rng, field.characteristic())));
    }
    Vector v(field, std::move(coords));
    if (!nonzero || !v.is_zero()) return v;
  }
}

void require_sizes(std::size_t d, std::uint64_t p) {
  if (d < 1 || d > 16) throw InputError("--d must be between 1 and 16");
  if (!is_prime_number(p)) throw InputError(std::to_string(p) + " is not prime");
}

struct Common {
  std::string input = "-";
  std::string out;
  std::string format = "json";
  bool timing = false;
  unsigned jobs = 1;
};

struct Emitter {
  std::ostream& out;
  const Common& common;

  void text(const std::string& body) const {
    if (common.out.empty()) {
      out << body;
      return;
    }
    std::ofstream file(common.out, std::ios::binary);
    if (!file) throw InputError("cannot write " + common.out);
    file << body;
  }

  void report(const Report& r) const {
    text(common.format == "csv" ? r.to_csv() : r.to_json().dump(2) + "\n");
  }
};

void write_json_file(const std::string& path, const Json& json) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write " + path);
  file << json.dump(2) << "\n";
}

Report start_report(const std::string& command, const InstanceFile& inst,
                    const std::string& text) {
  Report r;
  r.command = command;
  r.d = inst.d;
  r.p = inst.field.characteristic();
  r.input_digest = digest(text);
  return r;
}

Json rational(const mpq_class& v) { return rational_to_string(v); }

void cmd_joints(const InstanceFile& inst, Report& r) {
  // Plain lines take precedence; families alone give the multijoint count.
  const bool plain = inst.lines.distinct() > 0 || inst.families.empty();
  const JointSummary s = plain ? joint_summary(inst.lines) : joint_summary(inst.multi_family());
  r.add("lines", plain ? inst.lines.size() : inst.multi_family().union_family().size());
  r.add("joints", s.size());
  for (const auto& [x, n] : s.multiplicity) r.add("N" + x.to_string(), n);
}

void cmd_zhang(const InstanceFile& inst, Report& r) {
  const bool plain = inst.lines.distinct() > 0 || inst.families.empty();
  const ZhangReport z = plain ? zhang_report(inst.lines) : zhang_report(inst.multi_family());
  r.add("lhs", z.lhs);
  r.add("rhs", z.rhs);
  r.add("ratio", z.ratio);
}

void cmd_heavy(const InstanceFile& inst, Report& r, unsigned jobs) {
  const SWeights S = build_S(inst.directions);
  Json dims = Json::array();
  for (const auto& plane : S.chain.planes) dims.push_back(plane.dim());
  Json layers = Json::array();
  for (const auto& F : S.chain.layers) layers.push_back(rational(F));
  Json rho = Json::array();
  for (const auto& v : S.rho) rho.push_back(root_to_json(v));
  r.add("chain_dims", dims);
  r.add("layers", layers);
  r.add("rho", rho);
  r.add("all_in_hyperplane", S.all_in_hyperplane);
  const AdmissibilityResult adm = verify_admissibility(S, inst.directions, jobs);
  r.add("admissible", adm.pass);
  r.add("tuples_checked", adm.tuples_checked);
  const ConstantLedger ledger = lightness_audit(inst.directions, S.chain);
  const double bound = bound_constant(inst.d);
  r.add("bound_constant", bound);
  r.add("instance_bound", ledger.instance_bound);
  bool within = true;
  if (!S.all_in_hyperplane) {
    const double ratio = main_estimate_ratio(S, inst.directions);
    r.add("main_estimate_ratio", ratio);
    within = ratio <= bound;
  }
  r.pass = adm.pass && within;
  if (!adm.pass) {
    std::string w = "S product " + std::to_string(adm.witness_product) + " < 1 at";
    for (const auto& v : adm.witness) w += " " + v.to_string();
    r.witness = w;
  } else if (!within) {
    r.witness = "main estimate ratio exceeds the bound constant";
  }
}

void cmd_duality(const InstanceFile& inst, Report& r, double tolerance) {
  if (!inst.duality) throw InputError("instance has no \"duality\" section");
  PrimalOptions options;
  options.tolerance = tolerance;
  const PrimalResult res = primal_solve(*inst.duality, options);
  r.d = inst.duality->d;
  r.add("primal", res.report.primal);
  r.add("dual", res.report.dual);
  r.add("gap", res.report.gap);
  r.add("table_value", rational(res.tables.value));
  r.add("lifted_exact", res.report.lifted_exact);
  r.add("newton_steps", res.report.iterations);
  bool weak = true;
  // Rounding slack only: both values are floating point evaluations.
  for (const auto& [dual, primal] : res.report.trace) {
    weak = weak && dual <= primal + 1e-8 * std::max(1.0, primal);
  }
  r.add("weak_duality", weak);
  r.pass = res.report.lifted_exact && weak;
  if (!res.report.lifted_exact) {
    r.witness = find_violation(*inst.duality, res.tables).value_or("lift failed");
  } else if (!weak) {
    r.witness = "dual bound exceeds the primal value";
  }
}

void cmd_diag(const InstanceFile& inst, Report& r) {
  if (!inst.duality) throw InputError("instance has no \"duality\" section");
  const DiagOffdiag c = diag_offdiag_constants(*inst.duality);
  r.d = inst.duality->d;
  r.add("a_diag", c.a_diag);
  r.add("a_offdiag", c.a_offdiag);
  r.add("diag_power", c.diag_power());
  r.add("offdiag_power", c.offdiag_power());
  r.pass = c.a_offdiag <= static_cast<double>(c.d) * c.a_diag + 1e-6;
  if (!r.pass) r.witness = "off-diagonal constant exceeds d times the diagonal one";
}

void add_verify(Report& r, const VerifyResult& v) {
  r.add("tuples_checked", v.tuples_checked);
  r.add("lines_checked", v.lines_checked);
  r.add("max_line_sum", rational(v.max_line_sum));
  r.pass = v.pass;
  r.witness = v.witness;
}

void add_certificate(Report& r, const FactorCertificate& cert) {
  r.add("C", rational(cert.C));
  r.add("C_value", cert.C.get_d());
  r.add("norm", cert.norm());
  r.add("support", cert.points.size());
  r.add("lines", cert.lines.size());
  r.add("entries", cert.g.size());
}

void cmd_factor(const InstanceFile& inst, Report& r, bool explicit_mode, const std::string& cert_path,
                bool verify, unsigned jobs) {
  if (inst.points.values().empty()) throw InputError("instance has no \"points\" section");
  const FactorCertificate cert =
      explicit_mode ? factorise(inst.points, inst.multi_family()) : factorise(inst.points);
  add_certificate(r, cert);
  if (!cert_path.empty()) write_json_file(cert_path, certificate_to_json(cert));
  if (verify) {
    VerifyOptions options;
    options.jobs = jobs;
    add_verify(r, verify_certificate(cert, options));
  }
}

void cmd_factor_multi(const InstanceFile& inst, Report& r, const std::string& cert_path,
                      bool verify, unsigned jobs) {
  if (inst.points.values().empty()) throw InputError("instance has no \"points\" section");
  const MultiFamily families = inst.multi_family();
  const MultijointCertificate cert = multijoint_factorise(inst.points, families);
  add_certificate(r, cert.base);
  if (!cert_path.empty()) write_json_file(cert_path, multijoint_to_json(cert));
  if (verify) add_verify(r, verify_multijoint(cert, families, jobs));
}

void cmd_verify(const Json& json, Report& r, const VerifyOptions& options) {
  const std::string kind = json.is_object() && json.contains("kind") && json["kind"].is_string()
                               ? json["kind"].get<std::string>()
                               : "";
  if (kind == "multijoint-certificate") {
    const MultijointCertificate cert = multijoint_from_json(json);
    r.d = cert.base.dim;
    r.p = cert.base.field.characteristic();
    r.add("kind", kind);
    r.add("C", rational(cert.base.C));
    add_verify(r, verify_multijoint(cert, certificate_families(cert.base), options.jobs));
    return;
  }
  const FactorCertificate cert = certificate_from_json(json);
  r.d = cert.dim;
  r.p = cert.field.characteristic();
  r.add("kind", "factor-certificate");
  r.add("C", rational(cert.C));
  r.add("scope", options.scope == VerifyScope::exhaustive ? "exhaustive" : "sampled");
  add_verify(r, verify_certificate(cert, options));
}

}  // namespace

InstanceFile grid_instance(std::size_t n, std::size_t d, std::uint64_t p) {
  require_sizes(d, p);
  if (n < 1 || n > p) throw InputError("--n must be between 1 and p");
  const Field field = Field::prime(p);
  InstanceFile inst(field, d);
  inst.families.assign(d, LineFamily(field, d));
  std::vector<long> idx(d, 0);
  while (true) {
    std::vector<Scalar> coords;
    for (long c : idx) coords.emplace_back(field, c);
    const Vector x(field, coords);
    inst.points.set(x, 1);
    for (std::size_t axis = 0; axis < d; ++axis) {
      if (idx[axis] != 0) continue;
      const Line l = canonical_line(x, Vector::unit(field, d, axis));
      inst.lines.add(l);
      inst.families[axis].add(l);
    }
    std::size_t k = 0;
    while (k < d && ++idx[k] == static_cast<long>(n)) idx[k++] = 0;
    if (k == d) break;
  }
  return inst;
}

InstanceFile random_lines_instance(std::uint64_t seed, std::size_t count, std::size_t d,
                                   std::uint64_t p) {
  require_sizes(d, p);
  const Field field = Field::prime(p);
  InstanceFile inst(field, d);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const Vector base = random_vector(rng, field, d, false);
    inst.lines.add(canonical_line(base, random_vector(rng, field, d, true)));
  }
  return inst;
}

InstanceFile random_weights_instance(std::uint64_t seed, std::size_t count, std::size_t d,
                                     std::uint64_t p) {
  require_sizes(d, p);
  const Field field = Field::prime(p);
  InstanceFile inst(field, d);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const Vector dir = random_vector(rng, field, d, true);
    inst.directions.add(dir, static_cast<long>(1 + draw(rng, 100)));
  }
  return inst;
}

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact certificates for joints and multijoints over finite fields and Q",
               "jointscert"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool with_input) {
    if (with_input) sub->add_option("input", common.input, "instance file, - for stdin");
    sub->add_option("--out", common.out, "write the output here instead of stdout");
    sub->add_option("--format", common.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--timing", common.timing, "include the runtime in the report");
    sub->add_option("--jobs", common.jobs, "worker threads for verification")
        ->check(CLI::Range(1u, 256u));
  };

  std::string kind;
  std::size_t n = 2, d = 3, count = 8;
  std::uint64_t p = 5, seed = 0;
  auto* gen = app.add_subcommand("gen", "generate an instance");
  gen->add_option("kind", kind, "grid, random-lines or random-weights")
      ->required()
      ->check(CLI::IsMember({"grid", "random-lines", "random-weights"}));
  gen->add_option("--n", n, "grid side");
  gen->add_option("--d", d, "dimension");
  gen->add_option("--p", p, "field characteristic");
  gen->add_option("--count", count, "number of lines or directions");
  auto* seed_opt = gen->add_option("--seed", seed, "random seed");
  add_common(gen, false);

  auto* joints = app.add_subcommand("joints", "joints and their multiplicities");
  add_common(joints, true);
  auto* zhang = app.add_subcommand("zhang", "the joints inequality ratio");
  add_common(zhang, true);
  auto* heavy = app.add_subcommand("heavy-s", "heavy chain, S weights and admissibility");
  add_common(heavy, true);
  double tolerance = 1e-10;
  auto* duality = app.add_subcommand("duality", "primal and dual values of a discrete instance");
  duality->add_option("--tolerance", tolerance, "barrier duality gap target");
  add_common(duality, true);
  auto* diag = app.add_subcommand("diag-offdiag", "diagonal and off-diagonal norm constants");
  add_common(diag, true);

  std::string cert_path;
  bool explicit_mode = false, no_verify = false;
  auto* factor = app.add_subcommand("factor", "factorisation certificate for a point mass");
  factor->add_option("--cert", cert_path, "write the certificate here");
  factor->add_flag("--explicit", explicit_mode, "use the instance lines instead of all lines");
  factor->add_flag("--no-verify", no_verify, "skip the exhaustive re-check");
  add_common(factor, true);
  auto* multi = app.add_subcommand("factor-multi", "multijoint factorisation certificate");
  multi->add_option("--cert", cert_path, "write the certificate here");
  multi->add_flag("--no-verify", no_verify, "skip the exhaustive re-check");
  add_common(multi, true);

  std::string scope = "exhaustive";
  std::size_t samples = 20000;
  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "re-check a saved certificate");
  verify->add_option("--scope", scope, "exhaustive or sampled")
      ->check(CLI::IsMember({"exhaustive", "sampled"}));
  verify->add_option("--samples", samples, "tuples per point when sampling");
  verify->add_option("--seed", verify_seed, "sampling seed");
  add_common(verify, true);

  std::vector<const char*> raw;
  for (const auto& a : argv) raw.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kInputError;
  }

  const auto started = std::chrono::steady_clock::now();
  const Emitter emit{out, common};
  Report report;
  try {
    if (gen->parsed()) {
      InstanceFile inst;
      if (kind == "grid") {
        inst = grid_instance(n, d, p);
      } else {
        if (seed_opt->count() == 0) throw InputError("random generators need --seed");
        inst = kind == "random-lines" ? random_lines_instance(seed, count, d, p)
                                      : random_weights_instance(seed, count, d, p);
      }
      emit.text(instance_to_json(inst).dump(2) + "\n");
      return kOk;
    }

    const std::string text = read_text(common.input);
    const std::string source = common.input == "-" ? "<stdin>" : common.input;
    auto load = [&] {
      try {
        return parse_instance_text(text);
      } catch (const InputError& e) {
        throw InputError(source + ": " + e.what());
      }
    };

    if (verify->parsed()) {
      report.command = "verify";
      report.input_digest = digest(text);
      Json json;
      try {
        json = Json::parse(text);
      } catch (const Json::parse_error&) {
        throw InputError(source + ": malformed JSON");
      }
      VerifyOptions options;
      options.scope = scope == "sampled" ? VerifyScope::sampled : VerifyScope::exhaustive;
      options.samples = samples;
      options.seed = verify_seed;
      options.jobs = common.jobs;
      if (options.scope == VerifyScope::sampled) report.seed = verify_seed;
      try {
        cmd_verify(json, report, options);
      } catch (const InputError& e) {
        throw InputError(source + ": " + e.what());
      }
    } else {
      const InstanceFile inst = load();
      CLI::App* sub = app.get_subcommands().front();
      report = start_report(sub->get_name(), inst, text);
      if (sub == joints) cmd_joints(inst, report);
      if (sub == zhang) cmd_zhang(inst, report);
      if (sub == heavy) cmd_heavy(inst, report, common.jobs);
      if (sub == duality) cmd_duality(inst, report, tolerance);
      if (sub == diag) cmd_diag(inst, report);
      if (sub == factor) cmd_factor(inst, report, explicit_mode, cert_path, !no_verify, common.jobs);
      if (sub == multi) cmd_factor_multi(inst, report, cert_path, !no_verify, common.jobs);
    }
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const ConvergenceError& e) {
    err << "no convergence: " << e.what() << " (bracket [" << e.lower() << ", " << e.upper()
        << "])\n";
    report.add("lower", e.lower());
    report.add("upper", e.upper());
    report.pass = false;
    report.witness = e.what();
    emit.report(report);
    return kNonconvergence;
  } catch (const MathError& e) {
    report.pass = false;
    report.witness = e.what();
    emit.report(report);
    err << "failure: " << e.what() << "\n";
    return kMathFailure;
  }
  if (common.timing) {
    report.runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  emit.report(report);
  if (!report.pass) {
    err << "failure: " << report.witness << "\n";
    return kMathFailure;
  }
  return kOk;
}

}  // namespace jointscert
