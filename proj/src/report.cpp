#include "freeprob/report.hpp"

#include <cmath>
#include <sstream>

namespace freeprob {

std::size_t HalfPlaneGrid::radius_count() const {
  double decades = std::log10(r_max / r_min);
  return static_cast<std::size_t>(std::llround(decades * per_decade)) + 1;
}

std::vector<Complex> HalfPlaneGrid::points() const {
  validate();
  std::vector<Complex> out;
  out.reserve(count());
  std::size_t nr = radius_count();
  double decades = std::log10(r_max / r_min);
  double sign = half == HalfPlane::Upper ? 1.0 : -1.0;
  for (std::size_t k = 0; k < nr; ++k) {
    double r = nr == 1 ? r_min : r_min * std::pow(10.0, decades * static_cast<double>(k) / static_cast<double>(nr - 1));
    for (int j = 0; j < angles; ++j) {
      double theta = angles == 1 ? kPi / 2
                                 : theta_min + (kPi - 2.0 * theta_min) * j / static_cast<double>(angles - 1);
      out.emplace_back(r * std::cos(theta), sign * r * std::sin(theta));
    }
  }
  return out;
}

HalfPlaneGrid HalfPlaneGrid::densified(int factor) const {
  HalfPlaneGrid g = *this;
  int each = static_cast<int>(std::lround(std::sqrt(static_cast<double>(factor))));
  if (each < 1) each = 1;
  g.per_decade *= each;
  g.angles *= each;
  return g;
}

void HalfPlaneGrid::validate() const {
  if (!(r_min > 0.0) || !(r_max >= r_min)) throw DomainError("grid radii must satisfy 0 < r_min <= r_max");
  if (per_decade < 1 || angles < 1) throw DomainError("grid needs at least one radius and angle per decade");
  if (!(theta_min > 0.0) || theta_min >= kPi / 2) throw DomainError("grid theta_min must lie in (0, pi/2)");
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

Json to_json(const Complex& z) {
  Json j = Json::object();
  j["re"] = z.real();
  j["im"] = z.imag();
  return j;
}

Json to_json(const Rational& q) { return q.get_str(); }

Json to_json(const HalfPlaneGrid& g) {
  Json j = Json::object();
  j["half"] = g.half == HalfPlane::Upper ? "upper" : "lower";
  j["r_min"] = g.r_min;
  j["r_max"] = g.r_max;
  j["per_decade"] = g.per_decade;
  j["angles"] = g.angles;
  j["theta_min"] = g.theta_min;
  j["count"] = g.count();
  return j;
}

Json to_json(const CheckReport& r) {
  Json j = Json::object();
  j["check"] = r.check;
  j["verdict"] = to_string(r.verdict);
  j["statement"] = r.statement;
  j["margin"] = r.margin;
  j["witness"] = r.witness ? to_json(*r.witness) : Json(nullptr);
  j["tolerance"] = r.tolerance;
  j["grid"] = r.grid ? to_json(*r.grid) : Json(nullptr);
  j["evaluated"] = r.evaluated;
  j["evaluation_failures"] = r.evaluation_failures;
  j["sampled"] = r.sampled;
  j["details"] = r.details;
  return j;
}

namespace {

void write_string(std::ostringstream& os, const std::string& s) {
  os << '"';
  for (unsigned char ch : s) {
    switch (ch) {
      case '"':
        os << "\\\"";
        break;
      case '\\':
        os << "\\\\";
        break;
      case '\n':
        os << "\\n";
        break;
      case '\t':
        os << "\\t";
        break;
      case '\r':
        os << "\\r";
        break;
      default:
        if (ch < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          os << buf;
        } else {
          os << static_cast<char>(ch);
        }
    }
  }
  os << '"';
}

void write(std::ostringstream& os, const Json& j, int indent, int level) {
  auto newline = [&](int lvl) {
    if (indent > 0) os << '\n' << std::string(static_cast<std::size_t>(indent * lvl), ' ');
  };
  switch (j.type()) {
    case Json::value_t::null:
      os << "null";
      break;
    case Json::value_t::boolean:
      os << (j.get<bool>() ? "true" : "false");
      break;
    case Json::value_t::number_integer:
      os << j.get<long long>();
      break;
    case Json::value_t::number_unsigned:
      os << j.get<unsigned long long>();
      break;
    case Json::value_t::number_float: {
      double x = j.get<double>();
      if (std::isfinite(x))
        os << format_double(x);
      else
        os << "null";
      break;
    }
    case Json::value_t::string:
      write_string(os, j.get<std::string>());
      break;
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      os << '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ',';
        first = false;
        newline(level + 1);
        write(os, v, indent, level + 1);
      }
      newline(level);
      os << ']';
      break;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        newline(level + 1);
        write_string(os, it.key());
        os << (indent > 0 ? ": " : ":");
        write(os, it.value(), indent, level + 1);
      }
      newline(level);
      os << '}';
      break;
    }
    default:
      os << "null";
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::ostringstream os;
  write(os, j, indent, 0);
  if (indent > 0) os << '\n';
  return os.str();
}

}  // namespace freeprob
