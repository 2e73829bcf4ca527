// Acceptance suite: one line per criterion, exit status 0 only if all pass.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mkot/analysis.hpp"
#include "mkot/certificates.hpp"
#include "mkot/cli.hpp"
#include "mkot/duality.hpp"
#include "mkot/solver.hpp"
#include "support/cli_io.hpp"
#include "support/instances.hpp"

using namespace mkot;
using testing::Instance;
using testing::InstanceShape;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, pattern, args...);
  return buffer;
}

std::vector<Instance> suite(std::mt19937_64& rng, std::size_t count, const InstanceShape& shape) {
  std::vector<Instance> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(testing::random_instance(rng, shape));
  return out;
}

// 1. |primal - dual| <= 1e-7 (1 + primal) with dual-feasible potentials.
Outcome dual_equality(const std::vector<Instance>& instances) {
  constexpr double kTol = 1e-7;
  double worst = 0.0;
  int failures = 0;
  for (const Instance& inst : instances) {
    const SolveResult r = solve_mk(inst.mu, inst.nu, inst.cost);
    if (r.status != SolveStatus::optimal) {
      ++failures;
      continue;
    }
    const double primal = r.value.value();
    const DualReport report =
        duality_gap(inst.mu, inst.nu, inst.cost, *r.plan, *r.potentials, 1e-9 * inst.cost.scale());
    const double dual = dual_value(inst.mu, inst.nu, *r.potentials);
    const double rel = std::abs(primal - dual) / (1.0 + primal);
    worst = std::max(worst, rel);
    if (rel > kTol || !report.feasible_everywhere) ++failures;
  }
  return {failures == 0, fmt("%zu instances, max |primal-dual|/(1+primal) = %.3g, failures %d", instances.size(),
                             worst, failures)};
}

// 2. solve_mk against vertex enumeration, within 1e-9.
Outcome oracle_equivalence(const std::vector<Instance>& instances) {
  constexpr double kTol = 1e-9;
  double worst = 0.0;
  int compared = 0;
  int failures = 0;
  for (const Instance& inst : instances) {
    if (inst.mu.size() > 4 || inst.nu.size() > 4) continue;
    ++compared;
    const double fast = solve_mk(inst.mu, inst.nu, inst.cost).value.value();
    const double slow = brute_force_solve(inst.mu, inst.nu, inst.cost).value.value();
    worst = std::max(worst, std::abs(fast - slow));
    if (std::abs(fast - slow) > kTol) ++failures;
  }
  return {failures == 0 && compared > 0,
          fmt("%d instances with m,n <= 4, max |solve - brute force| = %.3g", compared, worst)};
}

// 3. Optimal plans certify; plans pushed 0.05 along a costlier cycle do not.
Outcome certificate_soundness(const std::vector<Instance>& instances) {
  int optimal_fail = 0;
  int perturbed = 0;
  int perturbed_fail = 0;
  for (const Instance& inst : instances) {
    const double tol = 1e-9 * inst.cost.scale();
    const SolveResult r = solve_mk(inst.mu, inst.nu, inst.cost);
    try {
      const PotentialPair p = extract_potentials(*r.plan, inst.cost);
      if (!verify_kantorovich_certificate(*r.plan, inst.cost, p, tol).pass) ++optimal_fail;
    } catch (const NotCertifiable&) {
      ++optimal_fail;
    }
    const auto moved = testing::perturb_along_cycle(r.plan->mass(), inst.cost, 0.05, 1e-2);
    if (!moved) continue;
    ++perturbed;
    const TransportPlan worse(*moved, inst.mu, inst.nu);
    bool rejected = !verify_kantorovich_certificate(worse, inst.cost, *r.potentials, tol).pass;
    try {
      const PotentialPair attempt = extract_potentials(worse, inst.cost);
      rejected = rejected && !verify_kantorovich_certificate(worse, inst.cost, attempt, tol).pass;
    } catch (const NotCertifiable&) {
      // No attempt exists at all.
    }
    rejected = rejected && !strong_monotonicity_check(worse, inst.cost).strongly_monotone;
    if (!rejected) ++perturbed_fail;
  }
  return {optimal_fail == 0 && perturbed_fail == 0 && perturbed > 0,
          fmt("%zu optimal plans (%d rejected), %d perturbed plans (%d accepted)", instances.size(), optimal_fail,
              perturbed, perturbed_fail)};
}

// 4. Two-sided potentials for every optimal plan, plus the adversarial seed.
Outcome strengthened_certificate(const std::vector<Instance>& instances) {
  int succeeded = 0;
  for (const Instance& inst : instances) {
    const SolveResult r = solve_mk(inst.mu, inst.nu, inst.cost);
    const NormalizedCost normalized = normalize_cost(inst.cost);
    std::vector<double> psi = r.potentials->psi;
    for (double& x : psi) x += normalized.shift;
    try {
      const PotentialPair p =
          strengthen_potentials(*r.plan, normalized.cost, PotentialPair(r.potentials->phi, std::move(psi)));
      if (verify_strengthened_certificate(*r.plan, normalized.cost, p, 1e-9 * normalized.cost.scale()).pass)
        ++succeeded;
    } catch (const NotCertifiable&) {
    }
  }
  const CostMatrix c = CostMatrix::from_rows({{1, 100}, {1, 1}});
  const TransportPlan diagonal(Matrix::from_rows({{0.5, 0}, {0, 0.5}}));
  bool adversarial = false;
  try {
    const PotentialPair p = strengthen_potentials(diagonal, c, PotentialPair({99, 0}, {-98, 1}));
    adversarial = verify_strengthened_certificate(diagonal, c, p, 1e-9).pass;
  } catch (const NotCertifiable&) {
  }
  const bool all = succeeded == static_cast<int>(instances.size());
  return {all && adversarial, fmt("strengthened %d/%zu optimal plans, adversarial seed %s", succeeded,
                                  instances.size(), adversarial ? "repaired" : "NOT repaired")};
}

// 5. gap <= tol, cyclical monotonicity and strong monotonicity agree.
Outcome finite_equivalence(std::mt19937_64& rng) {
  InstanceShape shape;
  shape.max_dim = 6;
  shape.mask_probability = 0.0;
  int instances = 0;
  int skipped = 0;
  int disagreements = 0;
  int optimal_true = 0;
  int perturbed_false = 0;
  auto judge = [&](const Instance& inst, const TransportPlan& plan, double optimum) {
    const double gap = plan_cost(plan, inst.cost).value() - optimum;
    const bool optimal = gap <= 1e-9 * (1.0 + optimum);
    const bool cyclic = cyclical_monotonicity_check(SupportSet::of(plan), inst.cost).monotone;
    const bool strong = strong_monotonicity_check(plan, inst.cost).strongly_monotone;
    if (optimal != cyclic || cyclic != strong) ++disagreements;
    return optimal;
  };
  while (instances < 100) {
    const Instance inst = testing::random_instance(rng, shape);
    const SolveResult r = solve_mk(inst.mu, inst.nu, inst.cost);
    const auto moved = testing::perturb_along_cycle(r.plan->mass(), inst.cost, 0.05, 1e-2);
    if (!moved) {
      ++skipped;
      continue;
    }
    ++instances;
    const double optimum = r.value.value();
    if (judge(inst, *r.plan, optimum)) ++optimal_true;
    if (!judge(inst, TransportPlan(*moved, inst.mu, inst.nu), optimum)) ++perturbed_false;
  }
  return {disagreements == 0,
          fmt("%d instances (%d skipped without a perturbable cycle), %d optimal + %d perturbed plans, %d "
              "disagreements",
              instances, skipped, optimal_true, perturbed_false, disagreements)};
}

// 6. Diagonal instances with +inf off the diagonal.
Outcome infinite_costs() {
  int failures = 0;
  for (std::size_t n = 2; n <= 50; ++n) {
    std::vector<double> entries(n * n, kInf);
    for (std::size_t i = 0; i < n; ++i) entries[i * n + i] = 0.0;
    const CostMatrix c(n, n, entries);
    const Marginal mu = Marginal::uniform(n);
    const SolveResult r = solve_mk(mu, mu, c);
    bool ok = r.status == SolveStatus::optimal && r.value.value() == 0.0;
    if (ok) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i == j ? std::abs((*r.plan)(i, j) - mu[i]) > 1e-12 : (*r.plan)(i, j) != 0.0) ok = false;
      const PotentialPair p = extract_potentials(*r.plan, c);
      ok = ok && verify_kantorovich_certificate(*r.plan, c, p, 1e-9).pass;
      const NormalizedCost normalized = normalize_cost(c);
      std::vector<double> psi = p.psi;
      for (double& x : psi) x += normalized.shift;
      const PotentialPair strong = strengthen_potentials(*r.plan, normalized.cost, PotentialPair(p.phi, psi));
      ok = ok && verify_strengthened_certificate(*r.plan, normalized.cost, strong, 1e-9).pass;
      ok = ok && cyclical_monotonicity_check(SupportSet::of(*r.plan), c).monotone;
      ok = ok && strong_monotonicity_check(*r.plan, c).strongly_monotone;
      ok = ok && !diagnostics(mu, mu, c).full_product_support;
    }
    if (!ok) ++failures;
  }
  return {failures == 0, fmt("n = 2..50: value 0, diagonal plan, all certificates, product-support diagnostic "
                             "false; failures %d",
                             failures)};
}

// 7. Hoelder bound, marginal norm vs transport value, signed example.
Outcome norm_toolbox(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> price(1.0, 10.0);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  int holder_fail = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = dim(rng);
    const std::size_t n = dim(rng);
    std::vector<double> entries(m * n);
    for (double& x : entries) x = std::bernoulli_distribution(0.2)(rng) ? kInf : price(rng);
    const CostMatrix c(m, n, entries);
    Matrix u(m, n);
    Matrix ell(m, n);
    double pairing = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        u(i, j) = 10.0 * unit(rng);
        if (c.finite(i, j)) ell(i, j) = unit(rng);
        pairing += u(i, j) * ell(i, j);
      }
    const double bound = cost_norm(u, c) * dual_cost_norm(ell, c).value();
    if (std::abs(pairing) > bound * (1.0 + 1e-12) + 1e-12) ++holder_fail;
  }

  InstanceShape shape;
  shape.mask_probability = 0.0;
  double worst = 0.0;
  int equal = 0;
  int above = 0;  // norm above the transport value would contradict the infimum
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = testing::random_instance(rng, shape);
    const double transport = solve_mk(inst.mu, inst.nu, inst.cost).value.value();
    const double norm = marginal_dual_norm(inst.mu.weights(), inst.nu.weights(), inst.cost).value.value();
    worst = std::max(worst, std::abs(transport - norm));
    if (std::abs(transport - norm) <= 1e-7) ++equal;
    if (norm > transport + 1e-7) ++above;
  }

  const double signed_norm = marginal_dual_norm(std::vector<double>{1, -1}, std::vector<double>{0, 0},
                                                CostMatrix::from_rows({{1, 1}, {1, 1}}))
                                 .value.value();
  const bool pass = holder_fail == 0 && worst <= 1e-7 && std::abs(signed_norm - 2.0) <= 1e-9;
  return {pass, fmt("Hoelder violations %d/1000; marginal norm = transport value on %d/50 (max diff %.3g, "
                    "norm above value %d/50); signed example %.12g",
                    holder_fail, equal, worst, above, signed_norm)};
}

// 8. Moreau-Yosida properties and capped approximants.
Outcome moreau_yosida_suite(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> value(-5.0, 5.0);
  std::vector<double> ks{0.0, 0.5};
  for (double k = 1.0; k <= 256.0; k *= 2.0) ks.push_back(k);
  int failures[5] = {0, 0, 0, 0, 0};  // (i) (ii) (iii) (iv) capped

  for (int trial = 0; trial < 100; ++trial) {
    constexpr std::size_t kPoints = 8;
    std::vector<double> x(kPoints);
    std::vector<double> y(kPoints);
    for (std::size_t p = 0; p < kPoints; ++p) {
      x[p] = unit(rng);
      y[p] = unit(rng);
    }
    Matrix d(kPoints, kPoints);
    for (std::size_t a = 0; a < kPoints; ++a)
      for (std::size_t b = a + 1; b < kPoints; ++b) d(a, b) = d(b, a) = std::hypot(x[a] - x[b], y[a] - y[b]);
    const FiniteMetricSpace space(d);

    std::vector<double> raw(kPoints);
    for (double& v : raw) v = std::bernoulli_distribution(0.25)(rng) ? kInf : value(rng);
    raw[trial % kPoints] = value(rng);  // never identically +inf
    const ExtFunction u(raw);

    std::vector<ExtFunction> approximations;
    for (double k : ks) approximations.push_back(moreau_yosida(u, k, space));
    for (std::size_t s = 0; s < ks.size(); ++s) {
      const ExtFunction& v = approximations[s];
      for (std::size_t a = 0; a < kPoints; ++a) {
        if (!(v[a] <= u[a])) ++failures[0];
        if (s > 0 && !(approximations[s - 1][a] <= v[a])) ++failures[1];
        for (std::size_t b = 0; b < kPoints; ++b)
          if (std::abs(v[a] - v[b]) > ks[s] * space(a, b) * (1.0 + 1e-12) + 1e-12) ++failures[2];
      }
    }

    // (iv): past the largest slope between finite values the approximation
    // is u itself there, and it grows without bound at the +inf points.
    double slope = 0.0;
    double min_distance = kInf;
    double largest = 0.0;
    for (std::size_t a = 0; a < kPoints; ++a) {
      if (u[a] != kInf) largest = std::max(largest, std::abs(u[a]));
      for (std::size_t b = 0; b < kPoints; ++b) {
        if (a == b) continue;
        min_distance = std::min(min_distance, space(a, b));
        if (u[a] != kInf && u[b] != kInf) slope = std::max(slope, (u[a] - u[b]) / space(a, b));
      }
    }
    const ExtFunction settled = moreau_yosida(u, 2.0 * slope + 1.0, space);
    const double huge_k = (1e6 + 2.0 * largest) / min_distance;
    const ExtFunction huge = moreau_yosida(u, huge_k, space);
    for (std::size_t a = 0; a < kPoints; ++a) {
      if (u[a] != kInf && settled[a] != u[a]) ++failures[3];
      if (u[a] == kInf && !(huge[a] >= 1e6)) ++failures[3];
    }

    std::vector<double> cost(kPoints);
    for (double& v : cost) v = std::bernoulli_distribution(0.25)(rng) ? kInf : 10.0 * unit(rng);
    const ExtFunction c(cost);
    std::vector<double> previous(kPoints, -kInf);
    for (double k = 1.0; k <= 256.0; k *= 2.0) {
      const ExtFunction ck = capped_approximants(c, k, space);
      for (std::size_t a = 0; a < kPoints; ++a) {
        const bool ok = std::isfinite(ck[a]) && ck[a] <= c[a] && ck[a] <= k && ck[a] >= previous[a];
        if (!ok) ++failures[4];
        previous[a] = ck[a];
      }
    }
  }
  const bool pass = std::all_of(std::begin(failures), std::end(failures), [](int f) { return f == 0; });
  return {pass, fmt("100 functions on 8-point spaces; violations (i) %d (ii) %d (iii) %d (iv) %d, capped %d",
                    failures[0], failures[1], failures[2], failures[3], failures[4])};
}

// 9. Gauge sandwich for four families of theta.
Outcome gauge_sandwich(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  struct Family {
    std::string name;
    GaugeProbe probe;
  };
  std::vector<Family> families;
  families.push_back({"x^2", GaugeProbe(1, [](std::span<const double> s) { return s[0] * s[0]; },
                                        SampleBox::symmetric(1, 4.0, 4001))});
  families.push_back({"|x|", GaugeProbe(1, [](std::span<const double> s) { return std::abs(s[0]); },
                                        SampleBox::symmetric(1, 100.0, 2001))});
  // Q = A^T A + I / 2 keeps {theta <= 1} inside [-sqrt 2, sqrt 2]^2.
  const double a = entry(rng), b = entry(rng), c = entry(rng), e = entry(rng);
  const double q11 = a * a + c * c + 0.5;
  const double q12 = a * b + c * e;
  const double q22 = b * b + e * e + 0.5;
  families.push_back({"quadratic form",
                      GaugeProbe(2,
                                 [=](std::span<const double> s) {
                                   return q11 * s[0] * s[0] + 2 * q12 * s[0] * s[1] + q22 * s[1] * s[1];
                                 },
                                 SampleBox::symmetric(2, 3.0, 201))});
  families.push_back({"box indicator",
                      GaugeProbe(2,
                                 [](std::span<const double> s) {
                                   const bool inside = s[0] >= -1.0 && s[0] <= 2.0 && s[1] >= -0.5 && s[1] <= 1.5;
                                   return inside ? 0.0 : kInf;
                                 },
                                 SampleBox::symmetric(2, 3.0, 121))});

  std::string detail;
  bool pass = true;
  for (const Family& f : families) {
    int ok = 0;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> r(f.probe.dimension());
      for (double& x : r) x = coord(rng);
      if (gauge_sandwich_check(f.probe, r).pass) ++ok;
    }
    pass = pass && ok == 20;
    detail += fmt("%s%s %d/20", detail.empty() ? "" : ", ", f.name.c_str(), ok);
  }
  return {pass, detail + " (5% grid slack)"};
}

// 10. solve -> verify on the random suite and golden outputs.
Outcome cli_round_trip(const std::vector<Instance>& instances) {
  const testing::TempDir dir;
  int failures = 0;
  for (const Instance& inst : instances) {
    const std::string problem = dir.write("p.json", testing::problem_json(inst));
    const std::string result = dir.path("r.json");
    if (testing::run_cli({"solve", problem, "--out", result}).code != cli::kExitOk ||
        testing::run_cli({"verify", result}).code != cli::kExitOk)
      ++failures;
  }
  int golden_fail = 0;
  const std::vector<std::pair<std::string, bool>> golden{
      {"two_by_two", false}, {"one_by_one", false}, {"diagonal_mask", false}, {"masked_three", false},
      {"adversarial", true}};
  for (const auto& [name, strengthen] : golden) {
    std::vector<std::string> args{"solve", testing::data_path("data/" + name + ".json"), "--no-timing"};
    if (strengthen) args.push_back("--strengthen");
    if (testing::run_cli(args).out != testing::read_text(testing::data_path("golden/" + name + ".json")))
      ++golden_fail;
  }
  return {failures == 0 && golden_fail == 0, fmt("solve->verify failures %d/%zu, golden mismatches %d/5", failures,
                                                 instances.size(), golden_fail)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance suite");
  std::uint64_t seed = 20261016;
  app.add_option("--seed", seed, "seed for the random instance generators");
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(seed);
  const std::vector<Instance> main_suite = suite(rng, 200, InstanceShape{});
  InstanceShape small;
  small.max_dim = 4;
  const std::vector<Instance> small_suite = suite(rng, 100, small);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"dual equality", [&] { return dual_equality(main_suite); }},
      {"oracle equivalence", [&] { return oracle_equivalence(small_suite); }},
      {"certificate soundness and completeness", [&] { return certificate_soundness(main_suite); }},
      {"strengthened certificate", [&] { return strengthened_certificate(main_suite); }},
      {"finite-cost three-way equivalence", [&] { return finite_equivalence(rng); }},
      {"infinite-cost handling", [] { return infinite_costs(); }},
      {"norm toolbox", [&] { return norm_toolbox(rng); }},
      {"Moreau-Yosida suite", [&] { return moreau_yosida_suite(rng); }},
      {"gauge sandwich", [&] { return gauge_sandwich(rng); }},
      {"CLI round-trip", [&] { return cli_round_trip(main_suite); }},
  };

  std::printf("seed %llu\n", static_cast<unsigned long long>(seed));
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %2zu  %-40s %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
