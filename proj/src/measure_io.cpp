#include "freeprob/measure_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "freeprob/levy.hpp"

namespace freeprob {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

Rational rational_of(const Json& v, const std::string& where) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return parse_rational(v.dump());
    if (v.is_number_float()) return parse_rational(v.dump());
  } catch (const Error& e) {
    throw DomainError(where + ": " + e.what());
  }
  throw DomainError(where + ": expected a number or a rational string");
}

std::vector<Rational> rationals_of(const Json& v, const std::string& where) {
  if (!v.is_array()) throw DomainError(where + ": expected an array");
  std::vector<Rational> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(rational_of(v[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

Json rational_array(const std::vector<Rational>& v) {
  Json a = Json::array();
  for (const auto& q : v) a.push_back(to_json(q));
  return a;
}

const char* extent_name(JacobiCoefficients::Extent e) {
  switch (e) {
    case JacobiCoefficients::Extent::Terminating: return "terminating";
    case JacobiCoefficients::Extent::Truncated: return "truncated";
    case JacobiCoefficients::Extent::Tail: return "tail";
  }
  return "truncated";
}

MeasureSpec from_jacobi_doc(const Json& j) {
  if (!j.is_object()) throw DomainError("jacobi: expected an object");
  auto alpha = rationals_of(j.value("alpha", Json::array()), "jacobi.alpha");
  auto beta = rationals_of(j.value("beta", Json::array()), "jacobi.beta");
  for (const auto& b : beta)
    if (b <= 0) throw DomainError("jacobi.beta: entries must be positive");
  std::string extent = j.value("extent", j.contains("tail") ? "tail" : "truncated");
  MeasureSpec m;
  m.name = "jacobi";
  if (extent == "terminating") {
    if (alpha.empty() || beta.size() + 1 != alpha.size())
      throw DomainError("jacobi: terminating data needs n alphas and n-1 betas");
    m.jacobi = JacobiCoefficients::terminating(alpha, beta);
  } else if (extent == "truncated") {
    m.jacobi = JacobiCoefficients::truncated(alpha, beta);
  } else if (extent == "tail") {
    const Json& t = j.at("tail");
    JacobiTail tail{rational_of(t.at("alpha"), "jacobi.tail.alpha"),
                    rational_of(t.at("beta_const"), "jacobi.tail.beta_const"),
                    rational_of(t.value("beta_slope", Json("0")), "jacobi.tail.beta_slope")};
    if (tail.beta_slope < 0 || tail.beta_const + tail.beta_slope * Rational(static_cast<long>(beta.size() + 1)) <= 0)
      throw DomainError("jacobi.tail: beta_n must stay positive");
    m.jacobi = JacobiCoefficients::with_tail(alpha, beta, tail);
  } else {
    throw DomainError("jacobi.extent: unknown value '" + extent + "'");
  }
  if (m.jacobi->constant_tail_start() || extent == "terminating") {
    m.closed_form = closed_form_from_jacobi(*m.jacobi);
    m.compact_support = jacobi_spectral_bounds(*m.jacobi);
  }
  return m;
}

}  // namespace

ParamRecord parse_param_record(std::string_view text) {
  ParamRecord out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw DomainError("line " + std::to_string(lineno) + ": expected key=value");
    std::string key(trim(s.substr(0, eq)));
    if (key.empty()) throw DomainError("line " + std::to_string(lineno) + ": empty key");
    if (out.count(key)) throw DomainError("line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    try {
      out[key] = parse_rational(trim(s.substr(eq + 1)));
    } catch (const Error& e) {
      throw DomainError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

Json measure_to_json(const MeasureSpec& m) {
  Json j = Json::object();
  j["name"] = m.name;
  Json params = Json::object();
  for (const auto& [k, v] : m.params) params[k] = to_json(v);
  j["params"] = params;
  j["representations"] = m.representation_tags();
  if (m.moments) j["moments"] = rational_array(m.moments->entries);
  if (m.jacobi) {
    Json jj = Json::object();
    jj["extent"] = extent_name(m.jacobi->extent());
    jj["alpha"] = rational_array(m.jacobi->alpha_head());
    jj["beta"] = rational_array(m.jacobi->beta_head());
    if (const auto& t = m.jacobi->tail()) {
      jj["tail"] = {{"alpha", to_json(t->alpha)},
                    {"beta_const", to_json(t->beta_const)},
                    {"beta_slope", to_json(t->beta_slope)}};
    }
    j["jacobi"] = jj;
  }
  if (m.riccati) j["riccati"] = {{"c", m.riccati->c}, {"location", m.riccati->location}, {"scale", m.riccati->scale}};
  if (m.closed_form) j["closed_form"] = m.closed_form->description;
  if (m.triplet) j["triplet"] = to_json(*m.triplet);
  if (m.compact_support) j["compact_support"] = {m.compact_support->first, m.compact_support->second};
  else j["compact_support"] = nullptr;
  j["finite_variance"] = m.finite_variance;
  return j;
}

MeasureSpec measure_from_json(const Json& doc) {
  if (!doc.is_object()) throw DomainError("measure document must be a JSON object");
  // Catalog reference, either explicit or from a serialized catalog measure.
  std::string catalog;
  if (doc.contains("catalog")) {
    catalog = doc.at("catalog").get<std::string>();
  } else if (doc.contains("name")) {
    std::string n = doc.at("name").get<std::string>();
    auto names = catalog_names();
    if (std::find(names.begin(), names.end(), n) != names.end()) catalog = n;
  }
  if (!catalog.empty()) {
    ParamRecord p;
    if (doc.contains("params")) {
      if (!doc.at("params").is_object()) throw DomainError("params: expected an object");
      for (const auto& [k, v] : doc.at("params").items()) p[k] = rational_of(v, "params." + k);
    }
    return catalog_lookup(catalog, p);
  }
  if (doc.contains("jacobi")) return from_jacobi_doc(doc.at("jacobi"));
  if (doc.contains("moments")) {
    MomentSequence ms{rationals_of(doc.at("moments"), "moments")};
    if (ms.entries.empty() || ms.entries[0] != 1) throw DomainError("moments: m_0 must be 1");
    if (!is_valid_moment_sequence(ms)) throw DomainError("moments: not a moment sequence");
    MeasureSpec m;
    m.name = "moments";
    m.moments = ms;
    return m;
  }
  throw DomainError("measure document needs one of: catalog, jacobi, moments");
}

MeasureSpec load_measure_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open measure file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("measure file '" + path + "': " + e.what());
  }
  return measure_from_json(doc);
}

}  // namespace freeprob
