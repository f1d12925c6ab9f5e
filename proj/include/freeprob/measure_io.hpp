#pragma once

#include <string>
#include <string_view>

#include "freeprob/measures.hpp"
#include "freeprob/report.hpp"

namespace freeprob {

/// Reads `key = value` lines. Blank lines and `#` comments are skipped; values are exact rationals.
/// Throws DomainError on a malformed line or a repeated key.
ParamRecord parse_param_record(std::string_view text);

/// Tagged document: name, params, representations, and every rational representation in full.
Json measure_to_json(const MeasureSpec& m);

/// Accepts three shapes:
///   {"catalog": "gaussian", "params": {"variance": "2"}}
///   {"moments": ["1", "0", "1", ...]}
///   {"jacobi": {"alpha": [...], "beta": [...], "extent": "terminating"|"truncated"|"tail",
///               "tail": {"alpha": ..., "beta_const": ..., "beta_slope": ...}}}
/// Documents written by measure_to_json are read back through their catalog reference when
/// they have one. Throws DomainError on anything else.
MeasureSpec measure_from_json(const Json& doc);

MeasureSpec load_measure_file(const std::string& path);

}  // namespace freeprob
