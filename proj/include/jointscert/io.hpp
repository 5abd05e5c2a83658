#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jointscert/duality.hpp"
#include "jointscert/factorisation.hpp"
#include "jointscert/heavy.hpp"
#include "jointscert/joints.hpp"

namespace jointscert {

using Json = nlohmann::ordered_json;

/// Everything an instance file may carry. Sections absent from the file
/// stay empty.
struct InstanceFile {
  Field field = Field::rationals();
  std::size_t d = 0;
  LineFamily lines{Field::rationals(), 0};
  std::vector<LineFamily> families;  // empty, or exactly d families
  PointMass points{Field::rationals(), 0};
  DirectionWeights directions{Field::rationals(), 0};
  std::optional<DiscreteInstance> duality;

  InstanceFile() = default;
  InstanceFile(Field f, std::size_t dim)
      : field(f), d(dim), lines(f, dim), points(f, dim), directions(f, dim) {}

  /// The explicit families, or d copies of `lines` when none are given.
  MultiFamily multi_family() const;
};

/// Parses JSON text. Errors name the offending entry by JSON pointer, or by
/// line and column for syntax errors.
InstanceFile parse_instance_text(const std::string& text);
/// Reads a file, or standard input when `path` is "-".
InstanceFile parse_instance(const std::string& path);
Json instance_to_json(const InstanceFile& instance);

Json certificate_to_json(const FactorCertificate& cert);
FactorCertificate certificate_from_json(const Json& json);
Json multijoint_to_json(const MultijointCertificate& cert);
MultijointCertificate multijoint_from_json(const Json& json);
/// The families a multijoint certificate was built for, rebuilt from its
/// line indices.
MultiFamily certificate_families(const FactorCertificate& cert);

Json root_to_json(const RootValue& value);
RootValue root_from_json(const Json& json);

/// Reads a whole file, or standard input for "-". Throws InputError.
std::string read_text(const std::string& path);
/// 64-bit FNV-1a digest as 16 hex digits.
std::string digest(const std::string& text);

/// A command's outcome. `values` keeps insertion order.
struct Report {
  std::string command;
  std::optional<std::uint64_t> seed;
  std::size_t d = 0;
  std::uint32_t p = 0;  // 0 over Q
  std::string input_digest;
  std::vector<std::pair<std::string, Json>> values;
  bool pass = true;
  std::string witness;
  std::optional<double> runtime;

  void add(std::string name, Json value) { values.emplace_back(std::move(name), std::move(value)); }
  Json to_json() const;
  /// Long format: command,seed,d,p,name,value,pass.
  std::string to_csv() const;
};

}  // namespace jointscert
