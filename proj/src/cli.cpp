#include "freeprob/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "freeprob/awk.hpp"
#include "freeprob/checkers.hpp"
#include "freeprob/cumulants.hpp"
#include "freeprob/levy.hpp"
#include "freeprob/measure_io.hpp"
#include "freeprob/transforms.hpp"

namespace freeprob {

namespace {

const std::vector<std::string> kCheckFlags = {"fid", "fsd", "cumulant", "levy", "kerov", "awk"};
const std::vector<std::string> kOps = {"cauchy", "reciprocal", "inverse", "cumulant", "cprime", "voiculescu"};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    return to_double(parse_rational(s));
  } catch (const Error&) {
    throw UsageError("bad number '" + s + "' for " + what);
  }
}

HalfPlaneGrid parse_grid(const std::string& spec) {
  auto parts = split(spec, ',');
  if (parts.size() != 4) throw UsageError("--grid expects rmin,rmax,per_decade,angles");
  HalfPlaneGrid g;
  g.r_min = parse_number(parts[0], "--grid rmin");
  g.r_max = parse_number(parts[1], "--grid rmax");
  double pd = parse_number(parts[2], "--grid per_decade");
  double an = parse_number(parts[3], "--grid angles");
  if (pd != std::floor(pd) || an != std::floor(an) || pd < 1 || an < 1 || pd > 1e4 || an > 1e5)
    throw UsageError("--grid per_decade and angles must be positive integers");
  g.per_decade = static_cast<int>(pd);
  g.angles = static_cast<int>(an);
  return g;
}

// "--name value" becomes "--name=value" so that negative values ("--c -0.5",
// "--point -1i") are never mistaken for options.
std::vector<std::string> join_values(const std::vector<std::string>& args) {
  std::set<std::string> flags = {"--help"};
  for (const auto& f : kCheckFlags) flags.insert("--" + f);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    bool long_opt = a.size() > 2 && a.compare(0, 2, "--") == 0 && a.find('=') == std::string::npos;
    if (long_opt && !flags.count(a) && i + 1 < args.size() && args[i + 1].compare(0, 2, "--") != 0) {
      out.push_back(a + "=" + args[i + 1]);
      ++i;
    } else {
      out.push_back(a);
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MeasureSpec resolve_measure(const RunConfig& c) {
  try {
    if (c.input) return load_measure_file(*c.input);
    return catalog_lookup(*c.catalog, c.params);
  } catch (const UsageError&) {
    throw;
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  } catch (const UnknownMeasureError& e) {
    throw UsageError(e.what());
  }
}

// AWK parameter of a standardized Riccati law; the point mass at 0 is the c = -1 endpoint.
std::optional<double> awk_parameter(const MeasureSpec& m) {
  if (m.name == "awk" && m.params.count("c")) return to_double(m.params.at("c"));
  if (m.riccati && m.riccati->location == 0.0 && m.riccati->scale == 1.0) return m.riccati->c;
  if (m.name == "dirac" && m.params.count("a") && m.params.at("a") == 0) return -1.0;
  return std::nullopt;
}

Json measure_summary(const MeasureSpec& m) {
  Json j = Json::object();
  j["name"] = m.name;
  Json p = Json::object();
  for (const auto& [k, v] : m.params) p[k] = to_json(v);
  j["params"] = p;
  j["representations"] = m.representation_tags();
  return j;
}

Json envelope(const RunConfig& c, const MeasureSpec& m) {
  Json j = Json::object();
  j["schema"] = 1;
  j["command"] = c.command;
  j["config"] = c.to_json();
  j["measure"] = measure_summary(m);
  return j;
}

void emit(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (!c.out) {
    out << text;
    return;
  }
  std::ofstream f(*c.out, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + *c.out + "'");
  f << text;
}

std::string csv_number(double x) { return format_double(x); }

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::Pass: return kExitPass;
    case Verdict::Fail: return kExitFail;
    case Verdict::Inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

CheckReport errored(const std::string& check, const std::exception& e) {
  CheckReport r;
  r.check = check;
  r.verdict = Verdict::Inconclusive;
  r.statement = "evaluation failed";
  r.details["error"] = e.what();
  return r;
}

CheckReport run_one_check(const std::string& which, const MeasureSpec& m, const RunConfig& c) {
  HalfPlaneGrid grid = c.grid.value_or(HalfPlaneGrid{});
  if (which == "fid" || which == "fsd") {
    GridCheckOptions o;
    o.grid = grid;
    if (c.tol) o.slack = *c.tol;
    CheckReport r = which == "fid" ? fid_grid_check(m, o) : fsd_grid_check(m, o);
    auto awk_c = awk_parameter(m);
    if (which == "fsd" && m.name == "awk" && awk_c && *awk_c > 0) {
      r.details["exploratory"] = true;
      r.details["note"] = "free selfdecomposability of mu_c is only established for c in [-1, 0]";
    }
    return r;
  }
  if (which == "cumulant") {
    if (!m.has_moment_source()) throw UsageError("measure '" + m.name + "' has no moments");
    std::size_t N = static_cast<std::size_t>(c.order.value_or(4));
    return fsd_cumulant_criterion(m.moment_sequence(2 * N), N, m.compact_support.has_value());
  }
  if (which == "levy") {
    if (!m.triplet) throw UsageError("measure '" + m.name + "' has no Levy triplet");
    return fsd_monotonicity_check(m.triplet->nu);
  }
  auto awk_c = awk_parameter(m);
  if (!awk_c) throw UsageError("--" + which + " needs a standardized Askey-Wimp-Kerov law (--catalog awk)");
  if (which == "kerov") {
    KerovOptions o;
    o.grid = grid;
    o.grid.half = HalfPlane::Upper;
    if (c.tol) o.asymptotic_tol = *c.tol;
    return kerov_check(*awk_c, o);
  }
  AwkVerifyOptions o;
  o.upper = grid;
  o.upper.half = HalfPlane::Upper;
  if (c.tol) o.slack = *c.tol;
  CheckReport r = awk_fsd_verify(*awk_c, o);
  if (*awk_c > 0) r.details["exploratory"] = true;
  return r;
}

int cmd_check(const RunConfig& c, const MeasureSpec& m, std::ostream& out, std::ostream& err) {
  std::vector<std::string> checks = c.checks.empty() ? std::vector<std::string>{"fsd"} : c.checks;
  std::vector<CheckReport> reports;
  for (const auto& which : checks) {
    try {
      reports.push_back(run_one_check(which, m, c));
    } catch (const UsageError&) {
      throw;
    } catch (const UnsupportedRepresentationError& e) {
      throw UsageError(e.what());
    } catch (const TruncationError& e) {
      throw UsageError(e.what());
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    } catch (const Error& e) {
      err << which << ": " << e.what() << "\n";
      reports.push_back(errored(which, e));
    }
  }
  Verdict overall = Verdict::Pass;
  for (const auto& r : reports) {
    if (r.verdict == Verdict::Fail) overall = Verdict::Fail;
    else if (r.verdict == Verdict::Inconclusive && overall == Verdict::Pass) overall = Verdict::Inconclusive;
  }
  if (c.format == OutputFormat::Json) {
    Json j = envelope(c, m);
    j["verdict"] = to_string(overall);
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    j["reports"] = arr;
    emit(c, dump_json(j) + "\n", out);
  } else {
    std::ostringstream s;
    s << "check,verdict,margin,witness_re,witness_im,tolerance,evaluated,evaluation_failures\n";
    for (const auto& r : reports) {
      s << r.check << ',' << to_string(r.verdict) << ',' << csv_number(r.margin) << ','
        << (r.witness ? csv_number(r.witness->real()) : "") << ','
        << (r.witness ? csv_number(r.witness->imag()) : "") << ',' << csv_number(r.tolerance) << ','
        << r.evaluated << ',' << r.evaluation_failures << '\n';
    }
    emit(c, s.str(), out);
  }
  return exit_for(overall);
}

int cmd_cumulants(const RunConfig& c, const MeasureSpec& m, std::ostream& out) {
  if (!m.has_moment_source()) throw UsageError("measure '" + m.name + "' has no moments");
  std::size_t order = static_cast<std::size_t>(c.order.value_or(8));
  // Without --order, a stored finite sequence is used as far as it goes.
  if (!c.order && !m.jacobi && m.moments) order = std::min(order, m.moments->order());
  MomentSequence ms;
  try {
    ms = m.moment_sequence(order);
  } catch (const TruncationError& e) {
    throw UsageError(e.what());
  }
  FreeCumulantSequence k = free_cumulants_from_moments(ms);
  std::vector<Rational> nk;
  for (std::size_t n = 1; n <= k.order(); ++n) nk.push_back(Rational(static_cast<long>(n)) * k.kappa(n));
  std::size_t N = order / 2;
  std::optional<CheckReport> fsd, fid;
  if (N >= 1) {
    fsd = fsd_cumulant_criterion(ms, N, m.compact_support.has_value());
    fid = fid_cumulant_criterion(ms, N, m.compact_support.has_value());
  }
  if (c.format == OutputFormat::Json) {
    Json j = envelope(c, m);
    auto arr = [](const std::vector<Rational>& v) {
      Json a = Json::array();
      for (const auto& q : v) a.push_back(to_json(q));
      return a;
    };
    j["order"] = order;
    j["moments"] = arr(ms.entries);
    j["free_cumulants"] = arr(k.entries);
    j["n_kappa"] = arr(nk);
    Json h = Json::object();
    if (fid) h["fid"] = to_json(*fid);
    if (fsd) h["fsd"] = to_json(*fsd);
    j["hankel"] = h;
    emit(c, dump_json(j) + "\n", out);
  } else {
    std::ostringstream s;
    s << "n,moment,kappa,n_kappa\n";
    for (std::size_t n = 0; n <= order; ++n) {
      s << n << ',' << to_string(ms[n]) << ',';
      if (n >= 1) s << to_string(k.kappa(n)) << ',' << to_string(nk[n - 1]);
      else s << ',';
      s << '\n';
    }
    emit(c, s.str(), out);
  }
  return kExitPass;
}

struct Row {
  Complex point;
  Complex value;
  double est_error;
  std::string method;
};

std::string method_name(Method m) { return to_string(m); }

int emit_rows(const RunConfig& c, const MeasureSpec& m, const std::vector<Row>& rows, bool complex_values,
              std::ostream& out) {
  bool any_failed = std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.method == "error"; });
  if (c.format == OutputFormat::Json) {
    Json j = envelope(c, m);
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json row = Json::object();
      if (complex_values) {
        row["point"] = to_json(r.point);
        row["value"] = to_json(r.value);
      } else {
        row["point"] = r.point.real();
        row["value"] = r.value.real();
      }
      row["est_error"] = r.est_error;
      row["method"] = r.method;
      arr.push_back(row);
    }
    j["rows"] = arr;
    emit(c, dump_json(j) + "\n", out);
  } else {
    std::ostringstream s;
    if (complex_values) s << "point_re,point_im,value_re,value_im,est_error,method\n";
    else s << "t,value,est_error,method\n";
    for (const auto& r : rows) {
      if (complex_values)
        s << csv_number(r.point.real()) << ',' << csv_number(r.point.imag()) << ',' << csv_number(r.value.real())
          << ',' << csv_number(r.value.imag()) << ',';
      else
        s << csv_number(r.point.real()) << ',' << csv_number(r.value.real()) << ',';
      s << csv_number(r.est_error) << ',' << r.method << '\n';
    }
    emit(c, s.str(), out);
  }
  return any_failed ? kExitInconclusive : kExitPass;
}

int cmd_density(const RunConfig& c, const MeasureSpec& m, std::ostream& out, std::ostream& err) {
  std::vector<double> ts;
  if (c.points) ts = parse_point_range(*c.points);
  for (const auto& z : c.point) ts.push_back(z.real());
  if (ts.empty()) throw UsageError("density needs --points a:b:step or --point t");
  auto awk_c = awk_parameter(m);
  bool use_awk = m.name == "awk" && awk_c.has_value();
  if (!use_awk && !m.density && !m.supports_cauchy())
    throw UsageError("measure '" + m.name + "' has no representation that yields a density");
  TransformOptions topt;
  std::vector<Row> rows;
  for (double t : ts) {
    Row r{Complex(t, 0.0), Complex(kNaN, 0.0), kNaN, "error"};
    try {
      if (use_awk && *awk_c >= 0) {
        r.value = awk_density(*awk_c, t, topt);
        r.est_error = 0.0;
        r.method = *awk_c == 0 ? "closed-form" : "parabolic-cylinder";
      } else if (!use_awk && m.density) {
        const auto& d = *m.density;
        bool inside = d.bounded() ? (t >= d.lo && t <= d.hi) : true;
        r.value = inside ? d.pdf(t) : 0.0;
        r.est_error = 0.0;
        r.method = "density";
      } else {
        auto g = [&](Complex z) { return cauchy_eval(m, z, topt).value; };
        StieltjesResult s = stieltjes_inversion(g, t);
        r.value = s.value;
        r.est_error = s.est_error;
        r.method = "stieltjes-inversion";
      }
    } catch (const UnsupportedRepresentationError& e) {
      throw UsageError(e.what());
    } catch (const Error& e) {
      err << "density at " << format_double(t) << ": " << e.what() << "\n";
      r.method = "error";
    }
    rows.push_back(r);
  }
  return emit_rows(c, m, rows, false, out);
}

int cmd_transform(const RunConfig& c, const MeasureSpec& m, std::ostream& out, std::ostream& err) {
  std::vector<Complex> zs = c.point;
  if (c.points)
    for (double t : parse_point_range(*c.points)) zs.emplace_back(t, 0.0);
  if (zs.empty()) throw UsageError("transform needs --point z");
  TransformOptions topt;
  std::vector<Row> rows;
  for (Complex z : zs) {
    Row r{z, Complex(kNaN, kNaN), kNaN, "error"};
    try {
      TransformValue v;
      if (c.op == "cauchy") v = cauchy_eval(m, z, topt);
      else if (c.op == "reciprocal") v = reciprocal_cauchy_eval(m, z, topt);
      else if (c.op == "cumulant") v = free_cumulant_transform_eval(m, z, topt);
      else if (c.op == "cprime") v = free_cumulant_transform_derivative_eval(m, z, topt);
      else if (c.op == "voiculescu") v = voiculescu_eval(m, z, topt);
      else {
        InversionResult inv = invert_reciprocal_cauchy_detailed(m, z, topt);
        v = TransformValue{inv.z, inv.residual, Method::NewtonInversion};
      }
      r.value = v.value;
      r.est_error = v.est_error;
      r.method = method_name(v.method);
    } catch (const UnsupportedRepresentationError& e) {
      throw UsageError(e.what());
    } catch (const Error& e) {
      err << c.op << " at " << format_complex(z) << ": " << e.what() << "\n";
    }
    rows.push_back(r);
  }
  return emit_rows(c, m, rows, true, out);
}

}  // namespace

std::vector<double> parse_point_range(const std::string& spec) {
  auto parts = split(spec, ':');
  if (parts.size() != 3) throw UsageError("--points expects a:b:step");
  Rational q[3];
  for (int k = 0; k < 3; ++k) {
    try {
      q[k] = parse_rational(parts[k]);
    } catch (const Error&) {
      throw UsageError("bad number '" + parts[k] + "' for --points");
    }
  }
  const Rational &a = q[0], &b = q[1], &h = q[2];
  if (h <= 0 || b < a) throw UsageError("--points needs a <= b and step > 0");
  Rational steps = (b - a) / h;
  if (steps > 1000000) throw UsageError("--points range has too many points");
  // Exact grid a + k h, so 0.1-spaced points print as 0.1, 0.2, ...
  std::vector<double> out;
  for (Rational t = a; t <= b; t += h) out.push_back(to_double(t));
  return out;
}

void RunConfig::validate() const {
  if (catalog.has_value() == input.has_value()) throw UsageError("give exactly one of --catalog or --input");
  if (input && !params.empty()) throw UsageError("catalog parameters cannot be combined with --input");
  if (tol && !(*tol >= 1e-14 && *tol <= 1e-2)) throw UsageError("--tol must lie in [1e-14, 1e-2]");
  if (grid) {
    try {
      grid->validate();
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  if (order && (*order < 1 || *order > 64)) throw UsageError("--order must lie in [1, 64]");
  if (std::find(kOps.begin(), kOps.end(), op) == kOps.end()) throw UsageError("unknown --op '" + op + "'");
}

Json RunConfig::to_json() const {
  Json j = Json::object();
  j["command"] = command;
  j["catalog"] = catalog ? Json(*catalog) : Json(nullptr);
  Json p = Json::object();
  for (const auto& [k, v] : params) p[k] = freeprob::to_json(v);
  j["params"] = p;
  j["input"] = input ? Json(*input) : Json(nullptr);
  j["config_file"] = config_file ? Json(*config_file) : Json(nullptr);
  j["grid"] = freeprob::to_json(grid.value_or(HalfPlaneGrid{}));
  j["tol"] = tol ? Json(*tol) : Json(nullptr);
  j["out"] = out ? Json(*out) : Json(nullptr);
  j["format"] = format == OutputFormat::Json ? "json" : "csv";
  if (command == "check") j["checks"] = checks.empty() ? std::vector<std::string>{"fsd"} : checks;
  if (order) j["order"] = *order;
  if (points) j["points"] = *points;
  if (!point.empty()) {
    Json a = Json::array();
    for (auto z : point) a.push_back(freeprob::to_json(z));
    j["point"] = a;
  }
  if (command == "transform") j["op"] = op;
  return j;
}

RunConfig parse_run_config(const std::vector<std::string>& raw) {
  std::vector<std::string> args = join_values(raw);
  CLI::App app{"Free probability transforms and selfdecomposability checks", "freeprob_cli"};
  app.require_subcommand(1, 1);

  struct Common {
    std::string catalog, input, config, grid, out, format, points, op = "cauchy";
    double tol = 0;
    int order = 0;
    std::vector<std::string> point;
  };
  Common v;
  std::map<std::string, bool> flag_set;
  for (const auto& f : kCheckFlags) flag_set[f] = false;

  std::vector<CLI::App*> subs;
  auto add_common = [&](CLI::App* s) {
    s->allow_extras();
    s->add_option("--catalog", v.catalog, "catalog measure name");
    s->add_option("--input", v.input, "measure JSON file");
    s->add_option("--config", v.config, "key=value file with catalog parameters");
    s->add_option("--grid", v.grid, "rmin,rmax,per_decade,angles");
    s->add_option("--tol", v.tol, "tolerance override in [1e-14, 1e-2]");
    s->add_option("--out", v.out, "output path (default: stdout)");
    s->add_option("--format", v.format, "json or csv");
    s->add_option("--order", v.order, "moment order / Hankel size");
    s->add_option("--points", v.points, "a:b:step");
    s->add_option("--point", v.point, "evaluation point, e.g. 2i or 1.1-0.1i");
    subs.push_back(s);
  };
  CLI::App* check = app.add_subcommand("check", "run FID/FSD criteria");
  add_common(check);
  for (const auto& f : kCheckFlags) check->add_flag("--" + f, flag_set[f]);
  add_common(app.add_subcommand("cumulants", "moments, free cumulants and Hankel verdicts"));
  add_common(app.add_subcommand("density", "density table"));
  CLI::App* transform = app.add_subcommand("transform", "transform evaluations");
  add_common(transform);
  transform->add_option("--op", v.op, "cauchy|reciprocal|inverse|cumulant|cprime|voiculescu");

  std::vector<const char*> argv{"freeprob_cli"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig c;
  CLI::App* used = app.get_subcommands().front();
  c.command = used->get_name();
  if (!v.catalog.empty()) c.catalog = v.catalog;
  if (!v.input.empty()) c.input = v.input;
  if (!v.config.empty()) {
    c.config_file = v.config;
    try {
      c.params = parse_param_record(read_file(v.config));
    } catch (const DomainError& e) {
      throw UsageError(v.config + ": " + e.what());
    }
  }
  for (const auto& extra : used->remaining()) {
    auto eq = extra.find('=');
    if (extra.compare(0, 2, "--") != 0 || eq == std::string::npos || eq == 2)
      throw UsageError("unexpected argument '" + extra + "'");
    std::string key = extra.substr(2, eq - 2);
    try {
      c.params[key] = parse_rational(extra.substr(eq + 1));
    } catch (const Error&) {
      throw UsageError("bad value for --" + key + ": '" + extra.substr(eq + 1) + "'");
    }
  }
  if (!v.grid.empty()) c.grid = parse_grid(v.grid);
  if (used->count("--tol")) c.tol = v.tol;
  if (!v.out.empty()) c.out = v.out;
  if (v.format.empty()) {
    c.format = (c.command == "density" || c.command == "transform") ? OutputFormat::Csv : OutputFormat::Json;
  } else if (v.format == "json") {
    c.format = OutputFormat::Json;
  } else if (v.format == "csv") {
    c.format = OutputFormat::Csv;
  } else {
    throw UsageError("--format must be json or csv");
  }
  if (c.command == "check")
    for (const auto& f : kCheckFlags)
      if (flag_set[f]) c.checks.push_back(f);
  if (used->count("--order")) c.order = v.order;
  if (!v.points.empty()) c.points = v.points;
  for (const auto& p : v.point) {
    for (const auto& piece : split(p, ',')) {
      try {
        c.point.push_back(parse_complex(piece));
      } catch (const Error&) {
        throw UsageError("bad --point '" + piece + "'");
      }
    }
  }
  c.op = v.op;
  c.validate();
  return c;
}

int run_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
  MeasureSpec m = resolve_measure(c);
  if (c.command == "check") return cmd_check(c, m, out, err);
  if (c.command == "cumulants") return cmd_cumulants(c, m, out);
  if (c.command == "density") return cmd_density(c, m, out, err);
  return cmd_transform(c, m, out, err);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run_command(parse_run_config(args), out, err);
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace freeprob
