#pragma once

// CSV exports and JSON report documents shared by the CLI and tests.

#include <string>

#include "json.hpp"

#include "fdelay/bounds.hpp"
#include "fdelay/mlf.hpp"
#include "fdelay/problem.hpp"
#include "fdelay/solver.hpp"

namespace fdelay::io {

/// Columns t,u. History rows come first, sampled at the solution step.
[[nodiscard]] std::string solution_csv(const SolutionGrid& sol);

/// Columns t,abs_u,envelope,ratio at every solution node.
[[nodiscard]] std::string envelope_csv(const SolutionGrid& sol, const EnvelopeSpec& es,
                                       const EnvelopeReport& report);

[[nodiscard]] nlohmann::json to_json(const LambdaSearchSpec& spec);
[[nodiscard]] nlohmann::json to_json(const LambdaCertificate& cert);
[[nodiscard]] nlohmann::json to_json(const IterationReport& report);
[[nodiscard]] nlohmann::json to_json(const ConditionReport& report);
[[nodiscard]] nlohmann::json to_json(const EnvelopeReport& report);
[[nodiscard]] nlohmann::json to_json(const UniquenessReport& report);
/// D_i, lambda_i, r targets, formulas and certificate grids per piece.
[[nodiscard]] nlohmann::json constants_report(const EnvelopeSpec& es);

/// Writes text to path, creating parent directories. Throws Error on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace fdelay::io
