#include "jointscert/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <sstream>

#include "jointscert/error.hpp"

namespace jointscert {

namespace {

// A JSON node together with its pointer, so every diagnostic can say where.
struct Node {
  const Json& json;
  std::string path;

  [[noreturn]] void fail(const std::string& message) const {
    throw InputError((path.empty() ? std::string("/") : path) + ": " + message);
  }

  bool has(const std::string& key) const { return json.is_object() && json.contains(key); }

  Node operator[](const std::string& key) const {
    if (!json.is_object()) fail("expected an object");
    if (!json.contains(key)) fail("missing key \"" + key + "\"");
    return {json.at(key), path + "/" + key};
  }

  Node operator[](std::size_t i) const { return {json.at(i), path + "/" + std::to_string(i)}; }

  std::size_t size() const { return json.size(); }

  const Node& array() const {
    if (!json.is_array()) fail("expected an array");
    return *this;
  }

  std::uint64_t unsigned_int() const {
    if (!json.is_number_unsigned()) fail("expected a nonnegative integer");
    return json.get<std::uint64_t>();
  }

  bool boolean() const {
    if (!json.is_boolean()) fail("expected true or false");
    return json.get<bool>();
  }

  std::string text() const {
    if (!json.is_string()) fail("expected a string");
    return json.get<std::string>();
  }

  mpq_class rational() const {
    if (json.is_number_integer()) return mpq_class(mpz_class(json.dump()));
    if (!json.is_string()) fail("expected an integer or a rational string \"n/d\"");
    try {
      return parse_rational(json.get<std::string>());
    } catch (const InputError& e) {
      fail(e.what());
    }
  }

  mpq_class nonnegative() const {
    mpq_class v = rational();
    if (sgn(v) < 0) fail("negative value " + rational_to_string(v));
    return v;
  }

  Vector vector(Field field, std::size_t d) const {
    array();
    if (size() != d) {
      fail("expected " + std::to_string(d) + " coordinates, found " + std::to_string(size()));
    }
    std::vector<Scalar> coords;
    for (std::size_t i = 0; i < d; ++i) {
      const Node c = (*this)[i];
      try {
        coords.emplace_back(field, c.rational());
      } catch (const InputError& e) {
        c.fail(e.what());
      }
    }
    return Vector(field, std::move(coords));
  }

  Line line(Field field, std::size_t d) const {
    const Vector base = (*this)["base"].vector(field, d);
    const Vector dir = (*this)["dir"].vector(field, d);
    if (dir.is_zero()) (*this)["dir"].fail("degenerate direction");
    return canonical_line(base, dir);
  }
};

Json rational_json(const mpq_class& v) { return rational_to_string(v); }

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (const auto& c : v.coords()) out.push_back(rational_json(c.to_rational()));
  return out;
}

Json line_json(const Line& l) {
  return Json{{"base", vector_json(l.base())}, {"dir", vector_json(l.direction())}};
}

void write_field(Json& out, Field field) {
  if (field.is_prime()) {
    out["field"] = "Fp";
    out["p"] = field.characteristic();
  } else {
    out["field"] = "Q";
  }
}

Field read_field(const Node& root) {
  const std::string kind = root["field"].text();
  if (kind == "Q") return Field::rationals();
  if (kind != "Fp") root["field"].fail("expected \"Fp\" or \"Q\", found \"" + kind + "\"");
  const std::uint64_t p = root["p"].unsigned_int();
  if (!is_prime_number(p)) root["p"].fail(std::to_string(p) + " is not prime");
  if (p >= (1ull << 31)) root["p"].fail("primes must be below 2^31");
  return Field::prime(p);
}

std::size_t read_dim(const Node& node) {
  const std::uint64_t d = node.unsigned_int();
  if (d < 1 || d > 64) node.fail("dimension must be between 1 and 64");
  return static_cast<std::size_t>(d);
}

LineFamily read_family(const Node& node, Field field, std::size_t d) {
  node.array();
  LineFamily family(field, d);
  for (std::size_t i = 0; i < node.size(); ++i) {
    const Node entry = node[i];
    std::uint64_t mult = 1;
    if (entry.has("mult")) {
      mult = entry["mult"].unsigned_int();
      if (mult == 0) entry["mult"].fail("multiplicity must be positive");
    }
    family.add(entry.line(field, d), mult);
  }
  return family;
}

Json family_json(const LineFamily& family) {
  Json out = Json::array();
  for (const auto& [line, mult] : family.lines()) {
    Json entry = line_json(line);
    if (mult != 1) entry["mult"] = mult;
    out.push_back(std::move(entry));
  }
  return out;
}

DiscreteInstance read_duality(const Node& node) {
  DiscreteInstance inst;
  inst.d = read_dim(node["d"]);
  if (node.has("symmetric")) inst.symmetric = node["symmetric"].boolean();
  if (node.has("q")) inst.q = node["q"].rational();
  const Node X = node["X"].array();
  for (std::size_t i = 0; i < X.size(); ++i) {
    inst.mu.push_back(X[i]["mu"].nonnegative());
    inst.M.push_back(X[i]["M"].nonnegative());
  }
  const Node Y = node["Y"].array();
  const std::size_t tables = inst.symmetric ? 1 : inst.d;
  if (Y.size() != tables) {
    Y.fail("expected " + std::to_string(tables) + " weight lists, found " +
           std::to_string(Y.size()));
  }
  inst.w.resize(tables);
  for (std::size_t j = 0; j < tables; ++j) {
    const Node row = Y[j].array();
    for (std::size_t y = 0; y < row.size(); ++y) inst.w[j].push_back(row[y].nonnegative());
  }
  if (inst.symmetric) inst.w.assign(inst.d, inst.w[0]);
  const Node K = node["kernel"].array();
  for (std::size_t i = 0; i < K.size(); ++i) {
    KernelEntry e;
    e.x = K[i]["x"].unsigned_int();
    const Node ys = K[i]["y"].array();
    for (std::size_t s = 0; s < ys.size(); ++s) e.y.push_back(ys[s].unsigned_int());
    e.value = K[i]["K"].nonnegative();
    inst.kernel.push_back(std::move(e));
  }
  try {
    inst.validate();
  } catch (const InputError& e) {
    node.fail(e.what());
  }
  return inst;
}

Json duality_json(const DiscreteInstance& inst) {
  Json out;
  out["d"] = inst.d;
  out["symmetric"] = inst.symmetric;
  out["q"] = rational_json(inst.q);
  Json X = Json::array();
  for (std::size_t i = 0; i < inst.num_points(); ++i) {
    X.push_back({{"mu", rational_json(inst.mu[i])}, {"M", rational_json(inst.M[i])}});
  }
  out["X"] = std::move(X);
  Json Y = Json::array();
  for (std::size_t j = 0; j < (inst.symmetric ? 1 : inst.d); ++j) {
    Json row = Json::array();
    for (const auto& w : inst.w[j]) row.push_back(rational_json(w));
    Y.push_back(std::move(row));
  }
  out["Y"] = std::move(Y);
  Json K = Json::array();
  for (const auto& e : inst.kernel) {
    K.push_back({{"x", e.x}, {"y", e.y}, {"K", rational_json(e.value)}});
  }
  out["kernel"] = std::move(K);
  return out;
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw InputError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                     ": malformed JSON");
  }
}

Json table_json(const std::map<std::pair<std::size_t, std::size_t>, mpq_class>& table) {
  Json out = Json::array();
  for (const auto& [key, v] : table) {
    out.push_back({{"point", key.first}, {"line", key.second}, {"value", rational_json(v)}});
  }
  return out;
}

std::map<std::pair<std::size_t, std::size_t>, mpq_class> read_table(const Node& node,
                                                                     std::size_t points,
                                                                     std::size_t lines) {
  node.array();
  std::map<std::pair<std::size_t, std::size_t>, mpq_class> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const Node e = node[i];
    const std::size_t pi = e["point"].unsigned_int();
    const std::size_t li = e["line"].unsigned_int();
    if (pi >= points) e["point"].fail("point index out of range");
    if (li >= lines) e["line"].fail("line index out of range");
    if (!out.emplace(std::make_pair(pi, li), e["value"].rational()).second) {
      e.fail("duplicate table entry");
    }
  }
  return out;
}

FactorCertificate read_certificate(const Node& root) {
  FactorCertificate cert;
  cert.field = read_field(root);
  cert.dim = read_dim(root["d"]);
  cert.all_lines = root["all_lines"].boolean();
  const Node lines = root["lines"].array();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    cert.lines.push_back(lines[i].line(cert.field, cert.dim));
    if (i > 0 && !(cert.lines[i - 1] < cert.lines[i])) lines[i].fail("lines must be sorted and distinct");
  }
  const Node points = root["points"].array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    cert.points.push_back(points[i]["x"].vector(cert.field, cert.dim));
    if (i > 0 && !(cert.points[i - 1] < cert.points[i])) {
      points[i].fail("points must be sorted and distinct");
    }
    const mpq_class m = points[i]["M"].nonnegative();
    if (sgn(m) == 0) points[i]["M"].fail("support points need positive mass");
    cert.mass.push_back(m);
  }
  cert.power_sum = 0;
  for (const auto& m : cert.mass) {
    mpq_class p = 1;
    for (std::size_t k = 0; k < cert.dim; ++k) p *= m;
    cert.mass_power.push_back(p);
    cert.power_sum += p;
  }
  for (auto& m : cert.mass_power) m /= cert.power_sum;
  cert.C = root["C"].rational();
  cert.g = read_table(root["g"], cert.points.size(), cert.lines.size());
  if (root.has("families")) {
    const Node fams = root["families"].array();
    for (std::size_t j = 0; j < fams.size(); ++j) {
      const Node fam = fams[j].array();
      std::vector<std::size_t> idx;
      for (std::size_t k = 0; k < fam.size(); ++k) {
        idx.push_back(fam[k].unsigned_int());
        if (idx.back() >= cert.lines.size()) fam[k].fail("line index out of range");
      }
      cert.families.push_back(std::move(idx));
    }
  }
  return cert;
}

}  // namespace

MultiFamily InstanceFile::multi_family() const {
  if (!families.empty()) return MultiFamily(families);
  return MultiFamily::diagonal(lines);
}

InstanceFile parse_instance_text(const std::string& text) {
  const Json json = parse_json(text);
  const Node root{json, ""};
  if (!json.is_object()) root.fail("expected an object");
  InstanceFile out(read_field(root), read_dim(root["d"]));
  if (root.has("lines")) out.lines = read_family(root["lines"], out.field, out.d);
  if (root.has("families")) {
    const Node fams = root["families"].array();
    if (fams.size() != out.d) {
      fams.fail("expected " + std::to_string(out.d) + " families, found " +
                std::to_string(fams.size()));
    }
    for (std::size_t j = 0; j < fams.size(); ++j) {
      out.families.push_back(read_family(fams[j], out.field, out.d));
    }
  }
  if (root.has("points")) {
    const Node pts = root["points"].array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vector x = pts[i]["x"].vector(out.field, out.d);
      if (sgn(out.points.at(x)) != 0) pts[i].fail("duplicate point " + x.to_string());
      out.points.set(x, pts[i]["M"].nonnegative());
    }
  }
  if (root.has("directions")) {
    const Node dirs = root["directions"].array();
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const Vector v = dirs[i]["dir"].vector(out.field, out.d);
      if (v.is_zero()) dirs[i]["dir"].fail("degenerate direction");
      out.directions.add(v, dirs[i]["f"].nonnegative());
    }
  }
  if (root.has("duality")) out.duality = read_duality(root["duality"]);
  return out;
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

InstanceFile parse_instance(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return parse_instance_text(text);
  } catch (const InputError& e) {
    throw InputError((path == "-" ? std::string("<stdin>") : path) + ": " + e.what());
  }
}

Json instance_to_json(const InstanceFile& inst) {
  Json out;
  write_field(out, inst.field);
  out["d"] = inst.d;
  if (inst.lines.distinct() > 0) out["lines"] = family_json(inst.lines);
  if (!inst.families.empty()) {
    Json fams = Json::array();
    for (const auto& f : inst.families) fams.push_back(family_json(f));
    out["families"] = std::move(fams);
  }
  if (!inst.points.values().empty()) {
    Json pts = Json::array();
    for (const auto& [x, m] : inst.points.values()) {
      pts.push_back({{"x", vector_json(x)}, {"M", rational_json(m)}});
    }
    out["points"] = std::move(pts);
  }
  if (!inst.directions.empty()) {
    Json dirs = Json::array();
    for (const auto& [v, f] : inst.directions.weights()) {
      dirs.push_back({{"dir", vector_json(v)}, {"f", rational_json(f)}});
    }
    out["directions"] = std::move(dirs);
  }
  if (inst.duality) out["duality"] = duality_json(*inst.duality);
  return out;
}

Json certificate_to_json(const FactorCertificate& cert) {
  Json out;
  out["kind"] = "factor-certificate";
  write_field(out, cert.field);
  out["d"] = cert.dim;
  out["all_lines"] = cert.all_lines;
  Json lines = Json::array();
  for (const auto& l : cert.lines) lines.push_back(line_json(l));
  out["lines"] = std::move(lines);
  Json points = Json::array();
  for (std::size_t i = 0; i < cert.points.size(); ++i) {
    points.push_back({{"x", vector_json(cert.points[i])}, {"M", rational_json(cert.mass[i])}});
  }
  out["points"] = std::move(points);
  out["C"] = rational_json(cert.C);
  out["g"] = table_json(cert.g);
  if (!cert.families.empty()) out["families"] = cert.families;
  return out;
}

FactorCertificate certificate_from_json(const Json& json) {
  const Node root{json, ""};
  if (!json.is_object()) root.fail("expected an object");
  if (root["kind"].text() != "factor-certificate") root["kind"].fail("not a factor certificate");
  return read_certificate(root);
}

Json multijoint_to_json(const MultijointCertificate& cert) {
  Json out;
  out["kind"] = "multijoint-certificate";
  out["base"] = certificate_to_json(cert.base);
  Json tables = Json::array();
  for (const auto& t : cert.tables) tables.push_back(table_json(t));
  out["tables"] = std::move(tables);
  return out;
}

MultijointCertificate multijoint_from_json(const Json& json) {
  const Node root{json, ""};
  if (!json.is_object()) root.fail("expected an object");
  if (root["kind"].text() != "multijoint-certificate") {
    root["kind"].fail("not a multijoint certificate");
  }
  MultijointCertificate cert;
  const Node base = root["base"];
  if (base["kind"].text() != "factor-certificate") base["kind"].fail("not a factor certificate");
  cert.base = read_certificate(base);
  if (cert.base.families.size() != cert.base.dim) {
    base.fail("a multijoint certificate needs one family per dimension");
  }
  const Node tables = root["tables"].array();
  if (tables.size() != cert.base.dim) tables.fail("expected one table per family");
  for (std::size_t j = 0; j < tables.size(); ++j) {
    cert.tables.push_back(read_table(tables[j], cert.base.points.size(), cert.base.lines.size()));
  }
  return cert;
}

MultiFamily certificate_families(const FactorCertificate& cert) {
  std::vector<LineFamily> families;
  for (const auto& idx : cert.families) {
    LineFamily f(cert.field, cert.dim);
    for (std::size_t i : idx) f.add(cert.lines[i]);
    families.push_back(std::move(f));
  }
  if (families.empty()) throw InputError("certificate carries no families");
  return MultiFamily(std::move(families));
}

Json root_to_json(const RootValue& value) {
  return Json{{"radicand", rational_json(value.radicand)}, {"num", value.num}, {"den", value.den}};
}

RootValue root_from_json(const Json& json) {
  const Node node{json, ""};
  RootValue out;
  out.radicand = node["radicand"].nonnegative();
  out.num = static_cast<unsigned>(node["num"].unsigned_int());
  out.den = static_cast<unsigned>(node["den"].unsigned_int());
  if (out.den == 0) node["den"].fail("zero exponent denominator");
  return out;
}

std::string digest(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json Report::to_json() const {
  Json out;
  out["command"] = command;
  if (seed) out["seed"] = *seed;
  out["d"] = d;
  out["p"] = p;
  if (!input_digest.empty()) out["input_digest"] = input_digest;
  Json vals = Json::object();
  for (const auto& [name, v] : values) vals[name] = v;
  out["values"] = std::move(vals);
  out["pass"] = pass;
  if (!witness.empty()) out["witness"] = witness;
  if (runtime) out["runtime_seconds"] = *runtime;
  return out;
}

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string plain(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_object() && v.contains("radicand")) {
    return v["radicand"].get<std::string>() + "^(" + std::to_string(v["num"].get<unsigned>()) +
           "/" + std::to_string(v["den"].get<unsigned>()) + ")";
  }
  return v.dump();
}

}  // namespace

std::string Report::to_csv() const {
  std::ostringstream out;
  out << "command,seed,d,p,name,value,pass\n";
  const std::string prefix = csv_cell(command) + "," + (seed ? std::to_string(*seed) : "") + "," +
                             std::to_string(d) + "," + std::to_string(p) + ",";
  const std::string tail = std::string(",") + (pass ? "1" : "0") + "\n";
  for (const auto& [name, v] : values) out << prefix << csv_cell(name) << "," << csv_cell(plain(v)) << tail;
  if (!witness.empty()) out << prefix << "witness," << csv_cell(witness) << tail;
  if (runtime) out << prefix << "runtime_seconds," << *runtime << tail;
  return out.str();
}

}  // namespace jointscert
