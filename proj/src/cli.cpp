#include "mkot/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mkot/analysis.hpp"
#include "mkot/certificates.hpp"
#include "mkot/core.hpp"
#include "mkot/duality.hpp"
#include "mkot/solver.hpp"

namespace mkot::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// ------------------------------------------------------------- parsing ---

double read_number(const json& v, const std::string& where, bool allow_inf) {
  if (allow_inf && v.is_string() && v.get<std::string>() == "inf") return kInf;
  if (!v.is_number()) throw ParseError(where + ": expected a number" + (allow_inf ? " or \"inf\"" : ""));
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(where + ": number out of range");
  return x;
}

std::vector<double> read_vector(const json& v, const std::string& name) {
  if (!v.is_array()) throw ParseError(name + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(read_number(v[i], name + "[" + std::to_string(i) + "]", false));
  return out;
}

Rows read_rows(const json& v, const std::string& name, bool allow_inf) {
  if (!v.is_array() || v.empty()) throw ParseError(name + ": expected a non-empty 2-D array");
  Rows out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& row = v[i];
    if (!row.is_array() || row.empty()) throw ParseError(name + ": row " + std::to_string(i) + " is not a non-empty array");
    std::vector<double> values;
    for (std::size_t j = 0; j < row.size(); ++j)
      values.push_back(read_number(row[j], name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]", allow_inf));
    if (!out.empty() && values.size() != out.front().size())
      throw ParseError(name + ": rows have different lengths");
    out.push_back(std::move(values));
  }
  return out;
}

std::vector<std::string> read_labels(const json& v, const std::string& name) {
  if (!v.is_array()) throw ParseError(name + ": expected an array of strings");
  std::vector<std::string> out;
  for (const json& x : v) {
    if (!x.is_string()) throw ParseError(name + ": expected an array of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

}  // namespace

ProblemFile parse_problem(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("problem file must be a JSON object");

  ProblemFile p;
  auto vec = [&](const char* key, std::optional<std::vector<double>>& slot) {
    if (doc.contains(key)) slot = read_vector(doc[key], key);
  };
  auto rows = [&](const char* key, std::optional<Rows>& slot, bool allow_inf) {
    if (doc.contains(key)) slot = read_rows(doc[key], key, allow_inf);
  };
  vec("mu", p.mu);
  vec("nu", p.nu);
  rows("cost", p.cost, true);
  rows("plan", p.plan, false);
  vec("phi", p.phi);
  vec("psi", p.psi);
  rows("u", p.u, false);
  rows("ell", p.ell, false);
  vec("kappa1", p.kappa1);
  vec("kappa2", p.kappa2);
  if (doc.contains("labels_a")) p.labels_a = read_labels(doc["labels_a"], "labels_a");
  if (doc.contains("labels_b")) p.labels_b = read_labels(doc["labels_b"], "labels_b");
  return p;
}

namespace {

// ----------------------------------------------------------- commands ---

struct Options {
  std::string path;
  double tol = 1e-9;
  double support_threshold = kDefaultSupportThreshold;
  bool strengthen = false;
  bool strengthened = false;
  bool no_timing = false;
  std::string out_path;
};

struct Outcome {
  ordered_json result;
  int code = kExitOk;
};

ordered_json number(double v) {
  if (v == kInf) return "inf";
  return v;
}

ordered_json rows_json(const std::vector<std::vector<double>>& rows) {
  ordered_json out = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json r = ordered_json::array();
    for (double v : row) r.push_back(number(v));
    out.push_back(std::move(r));
  }
  return out;
}

ordered_json vector_json(std::span<const double> v) {
  ordered_json out = ordered_json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

ordered_json cell_json(const Cell& cell) { return ordered_json::array({cell.row, cell.col}); }

template <class T>
const T& require(const std::optional<T>& field, const char* name) {
  if (!field) throw ParseError(std::string("missing field \"") + name + "\"");
  return *field;
}

Marginal marginal(const std::optional<std::vector<double>>& w,
                  const std::optional<std::vector<std::string>>& labels, const char* name) {
  return Marginal(require(w, name), labels.value_or(std::vector<std::string>{}));
}

CostMatrix cost_of(const ProblemFile& p) { return CostMatrix::from_rows(require(p.cost, "cost")); }

ordered_json cut_json(const HallCut& cut) {
  ordered_json out;
  out["rows"] = cut.rows;
  out["cols"] = cut.cols;
  out["row_mass"] = cut.row_mass;
  out["col_mass"] = cut.col_mass;
  return out;
}

ordered_json verdicts_json(const Verdicts& v) {
  ordered_json out;
  out["feasible_everywhere"] = v.feasible_everywhere;
  out["tight_on_support"] = v.tight_on_support;
  if (v.strengthened_bound) out["strengthened_bound"] = *v.strengthened_bound;
  out["cyclically_monotone"] = v.cyclically_monotone;
  return out;
}

ordered_json diagnostics_json(const Diagnostics& d) {
  ordered_json out;
  out["bounded_by_marginal_costs"] = d.bounded_by_marginal_costs;
  out["finite_moment"] = d.finite_moment;
  out["full_product_support"] = d.full_product_support;
  out["product_mass_on_finite"] = d.product_mass_on_finite;
  return out;
}

// Echo of the instance so a solve result can be fed straight to verify.
void echo_instance(ordered_json& out, const ProblemFile& p) {
  out["mu"] = vector_json(*p.mu);
  out["nu"] = vector_json(*p.nu);
  out["cost"] = rows_json(*p.cost);
  if (p.labels_a) out["labels_a"] = *p.labels_a;
  if (p.labels_b) out["labels_b"] = *p.labels_b;
}

Outcome cmd_solve(const ProblemFile& p, const Options& opt, std::ostream& err) {
  const Marginal mu = marginal(p.mu, p.labels_a, "mu");
  const Marginal nu = marginal(p.nu, p.labels_b, "nu");
  const CostMatrix c = cost_of(p);
  SolveConfig cfg;
  cfg.tolerance = opt.tol;
  cfg.support_threshold = opt.support_threshold;
  cfg.validate();

  Outcome o;
  const SolveResult r = solve_mk(mu, nu, c, cfg);
  if (r.status == SolveStatus::infeasible) {
    o.result["status"] = "infeasible";
    o.result["value"] = "inf";
    o.result["cut"] = cut_json(*r.cut);
    o.code = kExitInfeasible;
    err << "infeasible: rows carrying mass " << r.cut->row_mass
        << " reach columns carrying only " << r.cut->col_mass << " through finite-cost cells\n";
    return o;
  }

  const NormalizedCost normalized = normalize_cost(c);
  PotentialPair potentials = *r.potentials;
  bool strengthened = false;
  if (opt.strengthen) {
    std::vector<double> psi = potentials.psi;
    for (double& x : psi) x += normalized.shift;
    try {
      const PotentialPair repaired = strengthen_potentials(
          *r.plan, normalized.cost, PotentialPair(potentials.phi, std::move(psi)), cfg);
      psi = repaired.psi;
      for (double& x : psi) x -= normalized.shift;
      potentials = PotentialPair(repaired.phi, std::move(psi));
      // Same gauge as the solver: phi = 0 at the first row carrying mass.
      std::size_t anchor = 0;
      while (mu[anchor] <= 0.0) ++anchor;
      potentials = potentials.shifted(-potentials.phi[anchor]);
      strengthened = true;
    } catch (const NotCertifiable& e) {
      // Tight equalities on a connected support can force phi + psi below -c
      // elsewhere; the plan is still optimal, only the two-sided form is out.
      err << "warning: no two-sided potentials exist for this plan; keeping the solver's potentials\n";
    }
  }
  const CertifyOptions copts{opt.tol * c.scale(), opt.support_threshold, opt.strengthen};
  const Certificate cert = certify(mu, nu, c, *r.plan, potentials, copts);

  o.result["status"] = "optimal";
  o.result["value"] = number(r.value.value());
  o.result["shift"] = normalized.shift;
  echo_instance(o.result, p);
  o.result["plan"] = rows_json(r.plan->mass().to_rows());
  o.result["phi"] = vector_json(potentials.phi);
  o.result["psi"] = vector_json(potentials.psi);
  if (opt.strengthen) o.result["strengthened"] = strengthened;
  o.result["dual_value"] = cert.dual_value;
  o.result["gap"] = number(cert.gap);
  o.result["verdicts"] = verdicts_json(cert.verdicts);
  o.result["diagnostics"] = diagnostics_json(diagnostics(mu, nu, c));
  o.result["iterations"] = r.iterations;
  o.result["tolerance"] = opt.tol;
  return o;
}

Outcome cmd_verify(const ProblemFile& p, const Options& opt, std::ostream& err) {
  const Marginal mu = marginal(p.mu, p.labels_a, "mu");
  const Marginal nu = marginal(p.nu, p.labels_b, "nu");
  const CostMatrix c = cost_of(p);
  const Matrix mass = Matrix::from_rows(require(p.plan, "plan"));
  const PotentialPair potentials(require(p.phi, "phi"), require(p.psi, "psi"));
  require_dimensions(c, mu.size(), nu.size(), "verify");
  require_dimensions(c, mass.rows(), mass.cols(), "verify plan");

  // Checks run one order of magnitude looser than the solver so that a
  // freshly solved result always passes.
  const double tol = 10.0 * opt.tol * c.scale();
  const TransportPlan plan(mass, mu, nu, tol);
  const CertifyOptions copts{tol, opt.support_threshold, opt.strengthened};
  const Certificate cert = certify(mu, nu, c, plan, potentials, copts);

  std::optional<CertificateCheck> failure;
  const CertificateCheck basic = verify_kantorovich_certificate(plan, c, potentials, tol, opt.support_threshold);
  if (!basic.pass) failure = basic;
  if (!failure && opt.strengthened) {
    const NormalizedCost normalized = normalize_cost(c);
    std::vector<double> psi = potentials.psi;
    for (double& x : psi) x += normalized.shift;
    const CertificateCheck strong = verify_strengthened_certificate(
        plan, normalized.cost, PotentialPair(potentials.phi, std::move(psi)), tol,
        opt.support_threshold);
    if (!strong.pass) failure = strong;
  }
  const bool marginals_ok = plan.max_residual() <= tol;

  Outcome o;
  const bool pass = !failure && marginals_ok;
  o.result["status"] = pass ? "pass" : "fail";
  if (failure) {
    o.result["witness"] = {{"row", failure->witness->row},
                           {"col", failure->witness->col},
                           {"clause", to_string(failure->clause)}};
  }
  o.result["marginal_residual"] = plan.max_residual();
  o.result["primal_value"] = number(cert.primal_value.value());
  o.result["dual_value"] = cert.dual_value;
  o.result["gap"] = number(cert.gap);
  o.result["verdicts"] = verdicts_json(cert.verdicts);
  o.result["diagnostics"] = diagnostics_json(diagnostics(mu, nu, c));
  o.result["tolerance"] = tol;
  if (!pass) {
    o.code = kExitCheckFailed;
    if (failure)
      err << "certificate fails at cell (" << failure->witness->row << ", " << failure->witness->col
          << "): " << to_string(failure->clause) << "\n";
    if (!marginals_ok) err << "plan marginals are off by " << plan.max_residual() << "\n";
  }
  return o;
}

Outcome cmd_cyclic(const ProblemFile& p, const Options& opt, std::ostream& err) {
  const CostMatrix c = cost_of(p);
  const Matrix mass = Matrix::from_rows(require(p.plan, "plan"));
  require_dimensions(c, mass.rows(), mass.cols(), "cyclic plan");
  for (double v : mass.data())
    if (v < 0.0) throw InvalidInput("plan entries must be nonnegative");
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < mass.rows(); ++i)
    for (std::size_t j = 0; j < mass.cols(); ++j)
      if (mass(i, j) > opt.support_threshold) cells.push_back({i, j});
  const SupportSet support(std::move(cells), mass.rows(), mass.cols());
  const CyclicResult r = cyclical_monotonicity_check(support, c, opt.tol);

  Outcome o;
  o.result["status"] = r.monotone ? "monotone" : "violating";
  o.result["support_size"] = support.size();
  if (!r.monotone) {
    ordered_json cycle = ordered_json::array();
    for (const Cell& cell : r.cycle) cycle.push_back(cell_json(cell));
    o.result["cycle"] = std::move(cycle);
    o.result["excess"] = cycle_excess(r.cycle, c);
    o.code = kExitCheckFailed;
    err << "support is not cyclically monotone: reassigning " << r.cycle.size()
        << " pairs saves " << cycle_excess(r.cycle, c) << "\n";
  }
  return o;
}

Outcome cmd_feasible(const ProblemFile& p, const Options& opt, std::ostream& err) {
  const Marginal mu = marginal(p.mu, p.labels_a, "mu");
  const Marginal nu = marginal(p.nu, p.labels_b, "nu");
  const CostMatrix c = cost_of(p);
  const FeasibilityResult r = finite_cost_feasible(mu, nu, c, opt.tol);

  Outcome o;
  o.result["status"] = r.feasible ? "feasible" : "infeasible";
  o.result["max_flow"] = r.max_flow;
  if (r.plan) o.result["plan"] = rows_json(r.plan->mass().to_rows());
  if (r.cut) {
    o.result["cut"] = cut_json(*r.cut);
    o.code = kExitInfeasible;
    err << "infeasible: max flow " << r.max_flow << " < 1\n";
  }
  return o;
}

Outcome cmd_norms(const ProblemFile& p, const Options&, std::ostream&) {
  const CostMatrix c = cost_of(p);
  Outcome o;
  if (p.u) o.result["cost_norm"] = cost_norm(Matrix::from_rows(*p.u), c);
  if (p.ell) {
    const Matrix ell = Matrix::from_rows(*p.ell);
    o.result["dual_cost_norm"] = number(dual_cost_norm(ell, c).value());
  }
  // Marginals default to those of ell.
  std::optional<std::vector<double>> k1 = p.kappa1;
  std::optional<std::vector<double>> k2 = p.kappa2;
  if (p.ell && !k1 && !k2) {
    const Matrix ell = Matrix::from_rows(*p.ell);
    k1 = ell.row_sums();
    k2 = ell.col_sums();
  }
  if (k1 || k2) {
    const MarginalNorm m = marginal_dual_norm(require(k1, "kappa1"), require(k2, "kappa2"), c);
    o.result["marginal_dual_norm"] = number(m.value.value());
    if (m.value.is_finite()) o.result["coupling"] = rows_json(m.coupling.to_rows());
  }
  if (o.result.is_null()) throw ParseError("norms needs at least one of \"u\", \"ell\", \"kappa1\"/\"kappa2\"");
  return o;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

using Command = Outcome (*)(const ProblemFile&, const Options&, std::ostream&);

int execute(Command command, const Options& opt, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    const ProblemFile problem = parse_problem(read_file(opt.path));
    o = command(problem, opt, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    // InvalidInput, DimensionMismatch and friends: the file is malformed.
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NotCertifiable& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IterationLimitExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  if (!opt.no_timing) {
    const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
    o.result["timing_ms"] = elapsed.count();
  }
  const std::string text = o.result.dump(2) + "\n";
  if (opt.out_path.empty()) {
    out << text;
  } else {
    std::ofstream file(opt.out_path, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << opt.out_path << "\n";
      return kExitUsage;
    }
    file << text;
  }
  return o.code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Exact discrete optimal transport with +inf costs", "mkot");
  app.require_subcommand(1);
  Options opt;

  auto common = [&opt](CLI::App* sub) {
    sub->add_option("file", opt.path, "problem file (JSON)")->required();
    sub->add_option("--tol", opt.tol, "tolerance (default 1e-9)");
    sub->add_option("--support-threshold", opt.support_threshold, "mass above which a cell is supported");
    sub->add_option("--out", opt.out_path, "write the result here instead of stdout");
    sub->add_flag("--no-timing", opt.no_timing, "omit timing_ms for byte-stable output");
  };
  CLI::App* solve = app.add_subcommand("solve", "solve and certify a transport problem");
  common(solve);
  solve->add_flag("--strengthen", opt.strengthen, "repair potentials to |phi + psi| <= c");
  CLI::App* verify = app.add_subcommand("verify", "check a plan against potentials");
  common(verify);
  verify->add_flag("--strengthened", opt.strengthened, "also check the two-sided bound");
  CLI::App* cyclic = app.add_subcommand("cyclic", "cyclical monotonicity of a plan's support");
  common(cyclic);
  CLI::App* feasible = app.add_subcommand("feasible", "is there a coupling on the finite-cost cells");
  common(feasible);
  CLI::App* norms = app.add_subcommand("norms", "cost norm, dual norm and marginal dual norm");
  common(norms);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (!(opt.tol > 0.0) || !(opt.support_threshold >= 0.0)) {
    err << "error: --tol must be positive and --support-threshold nonnegative\n";
    return kExitUsage;
  }

  if (solve->parsed()) return execute(cmd_solve, opt, out, err);
  if (verify->parsed()) return execute(cmd_verify, opt, out, err);
  if (cyclic->parsed()) return execute(cmd_cyclic, opt, out, err);
  if (feasible->parsed()) return execute(cmd_feasible, opt, out, err);
  return execute(cmd_norms, opt, out, err);
}

}  // namespace mkot::cli
