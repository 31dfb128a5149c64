// JSON and CSV forms of densities, polynomials, expansions and run reports.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "chaosloop/dist.hpp"
#include "chaosloop/engine.hpp"
#include "chaosloop/lang.hpp"
#include "chaosloop/pce.hpp"
#include "chaosloop/poly.hpp"

namespace chaosloop {

using Json = nlohmann::ordered_json;

// {"family":"TruncNormal","mu":2,"sigma":0.1,"a":1,"b":3}; "var" may replace
// "sigma"; Uniform takes a, b; TruncGamma takes theta (scale), k (shape), a, b.
Density density_from_json(const Json& j);
Json density_to_json(const Density& d);

struct NamedGerm {
  std::string name;
  Density density;
};
// [{"name":"x", "family":...}, ...]
std::vector<NamedGerm> germs_from_json(const Json& j);
// Inline JSON text, or a path to a file holding it.
Json load_json_arg(const std::string& text_or_path);

Json poly_to_json(const MultiPoly& p);
MultiPoly poly_from_json(const Json& j);

Json basis_to_json(const OrthonormalBasis& b, const std::string& var);
Json expansion_to_json(const PceExpansion& e, const std::vector<std::string>& names);
Json conditions_to_json(const ConditionsReport& r);
Json provenance_to_json(const SiteProvenance& s);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
  Json to_json() const;
};

// Fixed-format number for tables (enough digits to round-trip).
std::string num(double v);

// 64-bit FNV-1a of the inputs, hex encoded.
std::string digest(const std::vector<std::string>& inputs);

std::string read_file(const std::string& path);

}  // namespace chaosloop
