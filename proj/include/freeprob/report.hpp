#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "freeprob/core.hpp"

namespace freeprob {

using Json = nlohmann::ordered_json;

enum class HalfPlane { Upper, Lower };

/// Polar grid: log-spaced radii times uniformly spaced angles kept theta_min away
/// from the real axis. Point index = radius_index * angles + angle_index.
struct HalfPlaneGrid {
  HalfPlane half = HalfPlane::Lower;
  double r_min = 1e-2;
  double r_max = 1e3;
  int per_decade = 25;
  int angles = 64;
  double theta_min = 1e-3;

  std::size_t radius_count() const;
  std::size_t count() const { return radius_count() * static_cast<std::size_t>(angles); }
  std::vector<Complex> points() const;
  /// Same extent with `factor` times as many points (split evenly between radii and angles).
  HalfPlaneGrid densified(int factor) const;
  void validate() const;
};

enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(Verdict v);

/// Outcome of one criterion. A fail carries a witness; a pass only states that no
/// violation was seen on the evaluated sample.
struct CheckReport {
  std::string check;
  Verdict verdict = Verdict::Inconclusive;
  std::string statement;
  double margin = std::numeric_limits<double>::quiet_NaN();
  std::optional<Complex> witness;
  double tolerance = 0.0;
  std::optional<HalfPlaneGrid> grid;
  std::size_t evaluated = 0;
  std::size_t evaluation_failures = 0;
  bool sampled = false;
  Json details = Json::object();
};

Json to_json(const Complex& z);
Json to_json(const Rational& q);
Json to_json(const HalfPlaneGrid& g);
Json to_json(const CheckReport& r);

/// Deterministic serializer: 17 significant digits for every float, insertion-ordered keys.
std::string dump_json(const Json& j, int indent = 2);

}  // namespace freeprob
