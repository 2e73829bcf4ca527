#pragma once

// Batch front end. Problem files are JSON objects; "inf" (a string) stands
// for an infinite cost. Results go to stdout (or --out) as JSON, diagnostics
// to stderr.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mkot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;         // bad flags, unreadable or malformed file
inline constexpr int kExitInfeasible = 3;    // no coupling on the finite-cost cells
inline constexpr int kExitNumerical = 4;     // solver failed to certify its own answer
inline constexpr int kExitCheckFailed = 5;   // verify or cyclic found a violation

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rows = std::vector<std::vector<double>>;

/// Every field is optional at parse time; each command demands what it uses.
struct ProblemFile {
  std::optional<std::vector<double>> mu;
  std::optional<std::vector<double>> nu;
  std::optional<Rows> cost;  // +inf for "inf"
  std::optional<Rows> plan;
  std::optional<std::vector<double>> phi;
  std::optional<std::vector<double>> psi;
  std::optional<std::vector<std::string>> labels_a;
  std::optional<std::vector<std::string>> labels_b;
  // norms command
  std::optional<Rows> u;
  std::optional<Rows> ell;
  std::optional<std::vector<double>> kappa1;
  std::optional<std::vector<double>> kappa2;
};

/// Checks JSON syntax, value types and rectangular shapes. Semantic checks
/// (marginals summing to one, matching dimensions) are left to the commands.
ProblemFile parse_problem(std::string_view text);

/// Entry point shared by the executable and the tests; args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mkot::cli
