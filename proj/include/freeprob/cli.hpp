#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "freeprob/core.hpp"
#include "freeprob/measures.hpp"
#include "freeprob/report.hpp"

namespace freeprob {

/// Bad arguments or an unusable measure; maps to exit status 3.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class OutputFormat { Json, Csv };

struct RunConfig {
  std::string command;
  /// Exactly one of catalog / input is set.
  std::optional<std::string> catalog;
  ParamRecord params;
  std::optional<std::string> input;
  std::optional<std::string> config_file;
  std::optional<HalfPlaneGrid> grid;
  std::optional<double> tol;
  std::optional<std::string> out;
  OutputFormat format = OutputFormat::Json;
  /// check: which criteria to run.
  std::vector<std::string> checks;
  /// cumulants: highest moment order; check --cumulant: Hankel size.
  std::optional<int> order;
  /// density: a:b:step.
  std::optional<std::string> points;
  /// transform: evaluation points.
  std::vector<Complex> point;
  std::string op = "cauchy";

  /// Throws UsageError when the selector or an override is out of bounds.
  void validate() const;
  Json to_json() const;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitUsage = 3;

/// Parses argv (without the program name). Throws UsageError.
RunConfig parse_run_config(const std::vector<std::string>& args);

/// Runs one command. The report goes to config.out when set, otherwise to `out`;
/// diagnostics go to `err`. Returns the exit status.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_run_config + run_command with usage errors mapped to exit status 3.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// a:b:step, inclusive of b up to rounding.
std::vector<double> parse_point_range(const std::string& spec);

}  // namespace freeprob
