// JSON problem documents. Field errors carry the JSON path of the offending value.

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fdelay/error.hpp"
#include "fdelay/problem.hpp"

namespace fdelay {

namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) invalid(path.empty() ? key : path + "." + key, "unknown field");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) invalid(path.empty() ? key : path + "." + key, "required field missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) invalid(path, "expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& path) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, path + "." + key);
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) invalid(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Expression expression(const json& v, const std::string& path) {
  if (v.is_number()) return Expression::constant(v.get<double>());
  if (!v.is_string()) invalid(path, "expected an expression string");
  try {
    return Expression::parse(v.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

HistorySpec parse_history(const json& v, int order) {
  if (v.is_string() || v.is_number()) return HistorySpec::from_expression(expression(v, "phi"), order);
  if (!v.is_object()) invalid("phi", "expected an expression string or an object");
  reject_unknown(v, "phi", {"expr", "samples", "derivs"});
  std::optional<std::vector<double>> derivs;
  if (auto it = v.find("derivs"); it != v.end()) derivs = numbers(*it, "phi.derivs");
  const bool has_expr = v.contains("expr");
  const bool has_samples = v.contains("samples");
  if (has_expr == has_samples) invalid("phi", "give exactly one of 'expr' and 'samples'");
  if (has_expr) return HistorySpec::from_expression(expression(v["expr"], "phi.expr"), order, derivs);
  const json& s = v["samples"];
  if (!s.is_object()) invalid("phi.samples", "expected an object with arrays 't' and 'u'");
  reject_unknown(s, "phi.samples", {"t", "u"});
  if (!derivs) invalid("phi.derivs", "required for sampled history");
  return HistorySpec::from_samples(numbers(require(s, "t", "phi.samples"), "phi.samples.t"),
                                   numbers(require(s, "u", "phi.samples"), "phi.samples.u"), *derivs);
}

std::optional<double> optional_eta(const json& piece, const std::string& path) {
  auto it = piece.find("eta");
  if (it == piece.end() || it->is_null()) return std::nullopt;
  return number(*it, path + ".eta");
}

GrowthSpec parse_growth(const json& v) {
  if (!v.is_array()) invalid("growth", "expected an array of pieces");
  GrowthSpec spec;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string path = "growth[" + std::to_string(i) + "]";
    const json& p = v[i];
    if (!p.is_object()) invalid(path, "expected an object");
    reject_unknown(p, path, {"T_end", "eta", "a", "p", "b", "q", "m"});
    GrowthPiece piece;
    piece.t_end = number(require(p, "T_end", path), path + ".T_end");
    piece.eta = optional_eta(p, path);
    piece.a = number_or(p, "a", 0.0, path);
    piece.p = number_or(p, "p", 1.0, path);
    piece.b = number(require(p, "b", path), path + ".b");
    piece.q = number_or(p, "q", 0.0, path);
    if (auto it = p.find("m"); it != p.end()) piece.m = expression(*it, path + ".m");
    spec.pieces.push_back(std::move(piece));
  }
  return spec;
}

LipschitzSpec parse_lipschitz(const json& v) {
  if (!v.is_array()) invalid("lipschitz", "expected an array of pieces");
  LipschitzSpec spec;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string path = "lipschitz[" + std::to_string(i) + "]";
    const json& p = v[i];
    if (!p.is_object()) invalid(path, "expected an object");
    reject_unknown(p, path, {"T_end", "eta", "a", "b"});
    LipschitzPiece piece;
    piece.t_end = number(require(p, "T_end", path), path + ".T_end");
    piece.eta = optional_eta(p, path);
    piece.a = number_or(p, "a", 0.0, path);
    piece.b = number(require(p, "b", path), path + ".b");
    spec.pieces.push_back(piece);
  }
  return spec;
}

}  // namespace

ProblemBundle parse_problem(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config: top level must be an object");
  reject_unknown(doc, "", {"alpha", "h", "T", "phi", "f", "growth", "lipschitz", "name", "description"});

  ProblemBundle bundle;
  DelayIVP& ivp = bundle.ivp;
  ivp.alpha = number(require(doc, "alpha", ""), "alpha");
  ivp.h = number(require(doc, "h", ""), "h");
  ivp.T = number(require(doc, "T", ""), "T");
  if (!(ivp.alpha > 0.0)) invalid("alpha", "must be positive");
  ivp.phi = parse_history(require(doc, "phi", ""), ivp.ceil_alpha());
  ivp.f = expression(require(doc, "f", ""), "f");
  ivp.validate();
  if (auto it = doc.find("growth"); it != doc.end()) {
    bundle.growth = parse_growth(*it);
    bundle.growth->validate(ivp);
  }
  if (auto it = doc.find("lipschitz"); it != doc.end()) {
    bundle.lipschitz = parse_lipschitz(*it);
    bundle.lipschitz->validate(ivp);
  }
  return bundle;
}

ProblemBundle load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

std::string serialize(const ProblemBundle& bundle) {
  const DelayIVP& ivp = bundle.ivp;
  json doc;
  doc["alpha"] = ivp.alpha;
  doc["h"] = ivp.h;
  doc["T"] = ivp.T;
  json phi;
  if (ivp.phi.is_expression()) {
    phi["expr"] = ivp.phi.expression().to_string();
  } else {
    phi["samples"] = {{"t", ivp.phi.sample_nodes()}, {"u", ivp.phi.sample_values()}};
  }
  phi["derivs"] = ivp.phi.derivatives_at_zero();
  doc["phi"] = phi;
  doc["f"] = ivp.f.to_string();
  if (bundle.growth) {
    json pieces = json::array();
    for (const auto& p : bundle.growth->pieces) {
      json j = {{"T_end", p.t_end}, {"a", p.a}, {"p", p.p}, {"b", p.b}, {"q", p.q}, {"m", p.m.to_string()}};
      if (p.eta) j["eta"] = *p.eta;
      pieces.push_back(j);
    }
    doc["growth"] = pieces;
  }
  if (bundle.lipschitz) {
    json pieces = json::array();
    for (const auto& p : bundle.lipschitz->pieces) {
      json j = {{"T_end", p.t_end}, {"a", p.a}, {"b", p.b}};
      if (p.eta) j["eta"] = *p.eta;
      pieces.push_back(j);
    }
    doc["lipschitz"] = pieces;
  }
  return doc.dump(2);
}

}  // namespace fdelay
