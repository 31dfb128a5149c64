#include "chaosloop/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chaosloop/error.hpp"
#include "chaosloop/gauss.hpp"

namespace chaosloop {

namespace {

double field(const Json& j, const char* key) {
  if (!j.contains(key)) throw DomainError(std::string("density JSON: missing \"") + key + "\"");
  if (!j[key].is_number()) throw DomainError(std::string("density JSON: \"") + key + "\" must be a number");
  return j[key].get<double>();
}

// Accepts "sigma" (standard deviation) or "var".
double spread(const Json& j) {
  if (j.contains("var")) {
    const double v = field(j, "var");
    if (!(v > 0.0)) throw DomainError("density JSON: \"var\" must be positive");
    return std::sqrt(v);
  }
  return field(j, "sigma");
}

}  // namespace

Density density_from_json(const Json& j) {
  if (!j.is_object()) throw DomainError("density JSON must be an object");
  if (!j.contains("family") || !j["family"].is_string()) throw DomainError("density JSON: missing \"family\"");
  const std::string f = j["family"].get<std::string>();
  if (f == "Normal") {
    if (j.contains("var")) return Density::normal_var(field(j, "mu"), field(j, "var"));
    return Density::normal(field(j, "mu"), field(j, "sigma"));
  }
  if (f == "Uniform") return Density::uniform(field(j, "a"), field(j, "b"));
  if (f == "TruncNormal") {
    if (j.contains("var")) return Density::truncated_normal_var(field(j, "mu"), field(j, "var"), field(j, "a"), field(j, "b"));
    return Density::truncated_normal(field(j, "mu"), spread(j), field(j, "a"), field(j, "b"));
  }
  if (f == "TruncGamma") return Density::truncated_gamma(field(j, "theta"), field(j, "k"), field(j, "a"), field(j, "b"));
  throw DomainError("density JSON: unknown family \"" + f + "\"");
}

Json density_to_json(const Density& d) {
  Json j;
  j["family"] = family_name(d.family());
  switch (d.family()) {
    case Family::Normal:
      j["mu"] = d.mu();
      j["sigma"] = d.sigma();
      break;
    case Family::Uniform:
      j["a"] = d.support().lo;
      j["b"] = d.support().hi;
      break;
    case Family::TruncNormal:
      j["mu"] = d.mu();
      j["sigma"] = d.sigma();
      j["a"] = d.support().lo;
      j["b"] = d.support().hi;
      break;
    case Family::TruncGamma:
      j["theta"] = d.scale();
      j["k"] = d.shape();
      j["a"] = d.support().lo;
      j["b"] = d.support().hi;
      break;
  }
  j["text"] = d.to_string();
  return j;
}

std::vector<NamedGerm> germs_from_json(const Json& j) {
  if (!j.is_array()) throw DomainError("germs JSON must be an array of {\"name\": ..., \"family\": ...}");
  std::vector<NamedGerm> out;
  for (const auto& g : j) {
    if (!g.contains("name") || !g["name"].is_string()) throw DomainError("germs JSON: each entry needs a \"name\"");
    out.push_back({g["name"].get<std::string>(), density_from_json(g)});
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json load_json_arg(const std::string& text_or_path) {
  const auto first = text_or_path.find_first_not_of(" \t\r\n");
  const bool inline_json = first != std::string::npos && (text_or_path[first] == '{' || text_or_path[first] == '[');
  const std::string text = inline_json ? text_or_path : read_file(text_or_path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DomainError(std::string("invalid JSON: ") + e.what());
  }
}

Json poly_to_json(const MultiPoly& p) {
  Json terms = Json::array();
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) terms.push_back({{"exp", it->first}, {"c", it->second}});
  return {{"arity", p.arity()}, {"terms", terms}};
}

MultiPoly poly_from_json(const Json& j) {
  if (!j.contains("terms") || !j["terms"].is_array()) throw DomainError("polynomial JSON: missing \"terms\"");
  std::size_t arity = j.contains("arity") ? j["arity"].get<std::size_t>() : 0;
  if (!j.contains("arity") && !j["terms"].empty()) arity = j["terms"][0]["exp"].size();
  MultiPoly p(arity);
  for (const auto& t : j["terms"]) p.add_term(t["exp"].get<Monomial>(), t["c"].get<double>());
  return p;
}

Json basis_to_json(const OrthonormalBasis& b, const std::string& var) {
  Json polys = Json::array();
  const std::vector<std::string> names{var};
  for (int i = 0; i <= b.max_degree(); ++i) {
    const UniPoly p = b.polynomial(i);
    polys.push_back({{"degree", i},
                     {"coeffs", p.coeffs()},
                     {"text", MultiPoly::from_univariate(p, 1, 0).to_string(names)}});
  }
  return {{"density", density_to_json(b.density())},
          {"center", b.center()},
          {"scale", b.scale()},
          {"gram_residual", b.gram_residual()},
          {"polys", polys}};
}

Json expansion_to_json(const PceExpansion& e, const std::vector<std::string>& names) {
  Json D = Json::array();
  for (std::size_t r = 0; r < e.degrees().rows(); ++r) D.push_back(e.degrees().row(r));
  Json bases = Json::array();
  for (std::size_t i = 0; i < e.bases().size(); ++i) bases.push_back(basis_to_json(e.bases()[i], names[i]));
  const Moments m = moments_from_coeffs(e);
  const auto& dg = e.diagnostics();
  Json diag = {{"quad_nodes", dg.quad_nodes},
               {"gs_nodes", dg.gs_nodes},
               {"max_gram_residual", dg.max_gram_residual},
               {"second_moment", dg.second_moment}};
  if (dg.convergence_delta >= 0.0) diag["convergence_delta"] = dg.convergence_delta;
  Json est = poly_to_json(e.estimator());
  est["text"] = e.estimator().to_string(names);
  return {{"variables", names},
          {"L", e.degrees().rows()},
          {"D", D},
          {"coeffs", e.coeffs()},
          {"estimator", est},
          {"se", e.se()},
          {"mean", m.mean},
          {"variance", m.variance},
          {"bases", bases},
          {"diagnostics", diag}};
}

Json conditions_to_json(const ConditionsReport& r) {
  Json sites = Json::array();
  for (const auto& s : r.sites) {
    sites.push_back({{"target", s.target},
                     {"call", s.text},
                     {"line", s.pos.line},
                     {"column", s.pos.column},
                     {"classification", s.stable ? "iteration-stable" : "non-stable"},
                     {"accumulating", s.accumulating}});
  }
  return {{"sites", sites},
          {"conditions",
           {{"A", check_name(r.independent_germs)},
            {"B", check_name(r.square_integrable)},
            {"C", check_name(r.moment_determinate)},
            {"D", check_name(r.fixed_arguments)},
            {"E", check_name(r.identically_distributed)}}},
          {"forward_references", r.forward_references},
          {"notes", r.notes}};
}

Json provenance_to_json(const SiteProvenance& s) {
  Json germs = Json::array();
  for (const auto& g : s.germs) germs.push_back(g.to_string());
  Json j = {{"target", s.target},         {"call", s.call},       {"scheme", s.scheme},
            {"germ_variables", s.germ_variables}, {"germs", germs}, {"degrees", s.degrees},
            {"coeffs", s.coeffs},         {"se", s.se},           {"polynomial", s.polynomial}};
  if (!std::isnan(s.bound)) j["bound"] = s.bound;
  return j;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + csv_field(columns[i]);
  out += "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + csv_field(r[i]);
    out += "\n";
  }
  return out;
}

Json Table::to_json() const {
  Json rs = Json::array();
  for (const auto& r : rows) {
    Json o;
    for (std::size_t i = 0; i < columns.size() && i < r.size(); ++i) o[columns[i]] = r[i];
    rs.push_back(o);
  }
  return rs;
}

std::string num(double v) {
  if (std::isnan(v)) return "";
  return format_number(v);
}

std::string digest(const std::vector<std::string>& inputs) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& s : inputs) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace chaosloop
