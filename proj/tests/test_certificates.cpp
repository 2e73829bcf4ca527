#include <doctest.h>

#include <random>

#include "mkot/certificates.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace mkot;

namespace {

const Marginal kMu({0.7, 0.3});
const Marginal kNu({0.4, 0.6});
const CostMatrix kCost = CostMatrix::from_rows({{1, 2}, {3, 1}});
const TransportPlan kOptimal(Matrix::from_rows({{0.4, 0.3}, {0, 0.3}}), kMu, kNu);
const TransportPlan kSuboptimal(Matrix::from_rows({{0.3, 0.4}, {0.1, 0.2}}), kMu, kNu);
const PotentialPair kPotentials({0, -1}, {1, 2});

}  // namespace

TEST_CASE("verify_kantorovich_certificate") {
  CHECK(verify_kantorovich_certificate(kOptimal, kCost, kPotentials, 1e-9).pass);

  const CertificateCheck bad = verify_kantorovich_certificate(kSuboptimal, kCost, kPotentials, 1e-9);
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.witness);
  CHECK(*bad.witness == Cell{1, 0});
  CHECK(bad.clause == CertificateClause::tight_support);

  CHECK(verify_kantorovich_certificate(TransportPlan(Matrix::from_rows({{1}})), CostMatrix::from_rows({{0}}),
                                       PotentialPair({0}, {0}), 1e-9)
            .pass);

  const CertificateCheck over = verify_kantorovich_certificate(kOptimal, kCost, PotentialPair({0, 0}, {1, 2}), 1e-9);
  CHECK(over.clause == CertificateClause::upper_bound);
  CHECK(*over.witness == Cell{1, 1});
}

TEST_CASE("verify_strengthened_certificate") {
  CHECK(verify_strengthened_certificate(kOptimal, kCost, kPotentials, 1e-9).pass);
  const CostMatrix c = CostMatrix::from_rows({{1, 100}, {1, 1}});
  const TransportPlan diag(Matrix::from_rows({{0.5, 0}, {0, 0.5}}));
  const CertificateCheck bad = verify_strengthened_certificate(diag, c, PotentialPair({99, 0}, {-98, 1}), 1e-9);
  CHECK_FALSE(bad.pass);
  CHECK(*bad.witness == Cell{1, 0});
  CHECK(bad.clause == CertificateClause::lower_bound);
  CHECK(verify_strengthened_certificate(TransportPlan(Matrix::from_rows({{1}})), CostMatrix::from_rows({{5}}),
                                        PotentialPair({0}, {5}), 1e-9)
            .pass);
}

TEST_CASE("cyclical_monotonicity_check") {
  CHECK(cyclical_monotonicity_check(SupportSet({{0, 0}, {1, 1}}, 2, 2), kCost).monotone);
  const CyclicResult r = cyclical_monotonicity_check(SupportSet({{0, 1}, {1, 0}}, 2, 2), kCost);
  CHECK_FALSE(r.monotone);
  CHECK(r.cycle.size() == 2);
  // c(a0,b1) + c(a1,b0) = 5 against 2 after reassignment.
  CHECK(cycle_excess(r.cycle, kCost) == doctest::Approx(3.0));
  CHECK(cyclical_monotonicity_check(SupportSet({{1, 0}}, 2, 2), kCost).monotone);
  CHECK_THROWS_AS(cyclical_monotonicity_check(SupportSet({{0, 1}}, 2, 2), CostMatrix::from_rows({{0, kInf}, {0, 0}})),
                  InvalidInput);
  CHECK_THROWS_AS(SupportSet({{0, 0}, {0, 0}}, 2, 2), InvalidInput);
}

TEST_CASE("cyclical monotonicity agrees with cycle enumeration") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> price(0.0, 10.0);
  int violations = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 2 + trial % 3;
    const std::size_t n = 2 + (trial / 3) % 3;
    std::vector<double> entries(m * n);
    for (double& x : entries) x = std::bernoulli_distribution(0.15)(rng) ? kInf : price(rng);
    const CostMatrix c(m, n, entries);
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (c.finite(i, j)) cells.push_back({i, j});
    std::shuffle(cells.begin(), cells.end(), rng);
    cells.resize(std::min<std::size_t>(cells.size(), 2 + trial % 5));
    if (cells.empty()) continue;
    // An elementary cycle never revisits a pair, so enumerating up to the
    // support size is exhaustive.
    const bool oracle = testing::has_improving_cycle(cells, c, cells.size(), 1e-9);
    const CyclicResult r = cyclical_monotonicity_check(SupportSet(cells, m, n), c);
    CHECK(r.monotone == !oracle);
    if (!r.monotone) {
      ++violations;
      CHECK(cycle_excess(r.cycle, c) > 0.0);
    }
  }
  CHECK(violations > 20);
}

TEST_CASE("strong_monotonicity_check") {
  const StrongMonotonicity good = strong_monotonicity_check(kOptimal, kCost);
  CHECK(good.strongly_monotone);
  REQUIRE(good.witness);
  CHECK(good.witness->phi[1] == doctest::Approx(-1.0));
  CHECK(good.witness->psi[1] == doctest::Approx(2.0));

  const StrongMonotonicity bad = strong_monotonicity_check(kSuboptimal, kCost);
  CHECK_FALSE(bad.strongly_monotone);
  CHECK_FALSE(bad.conflict.empty());

  const StrongMonotonicity diag = strong_monotonicity_check(TransportPlan(Matrix::from_rows({{0.5, 0}, {0, 0.5}})),
                                                            CostMatrix::from_rows({{0, kInf}, {kInf, 0}}));
  CHECK(diag.strongly_monotone);
  CHECK(diag.witness->phi == std::vector<double>{0, 0});
}

TEST_CASE("diagnostics") {
  const Diagnostics finite = diagnostics(kMu, kNu, kCost);
  CHECK(finite.bounded_by_marginal_costs);
  CHECK(finite.finite_moment);
  CHECK(finite.full_product_support);

  const Marginal half({0.5, 0.5});
  const Diagnostics diag = diagnostics(half, half, CostMatrix::from_rows({{0, kInf}, {kInf, 0}}));
  CHECK_FALSE(diag.bounded_by_marginal_costs);
  CHECK_FALSE(diag.finite_moment);
  CHECK_FALSE(diag.full_product_support);
  CHECK(diag.product_mass_on_finite == doctest::Approx(0.5));

  const Diagnostics one = diagnostics(half, half, CostMatrix::from_rows({{1, kInf}, {1, 1}}));
  CHECK_FALSE(one.bounded_by_marginal_costs);
  CHECK(one.finite_moment);
  CHECK_FALSE(one.full_product_support);
  CHECK(one.product_mass_on_finite == doctest::Approx(0.75));
}

TEST_CASE("certify and re-verification") {
  const Certificate cert = certify(kMu, kNu, kCost, kOptimal, kPotentials, {1e-9, kDefaultSupportThreshold, true});
  CHECK(cert.verdicts.feasible_everywhere);
  CHECK(cert.verdicts.tight_on_support);
  CHECK(cert.verdicts.strengthened_bound == true);
  CHECK(cert.verdicts.cyclically_monotone);
  CHECK(std::abs(cert.gap) <= 1e-9);
  CHECK(verdicts_reproduce(cert, kMu, kNu, kCost));

  const Certificate bad = certify(kMu, kNu, kCost, kSuboptimal, kPotentials, {});
  CHECK_FALSE(bad.verdicts.tight_on_support);
  CHECK_FALSE(bad.verdicts.cyclically_monotone);
  CHECK_FALSE(bad.verdicts.strengthened_bound.has_value());
  CHECK(verdicts_reproduce(bad, kMu, kNu, kCost));
}

TEST_CASE("optimal plans are cyclically monotone, perturbed ones are not") {
  std::mt19937_64 rng(17);
  testing::InstanceShape shape;
  shape.max_dim = 6;
  int perturbed = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const testing::Instance inst = testing::random_instance(rng, shape);
    const SolveResult r = solve_mk(inst.mu, inst.nu, inst.cost);
    REQUIRE(r.status == SolveStatus::optimal);
    const SupportSet support = SupportSet::of(*r.plan);
    CHECK(cyclical_monotonicity_check(support, inst.cost).monotone);
    CHECK(strong_monotonicity_check(*r.plan, inst.cost).strongly_monotone);
    const auto moved = testing::perturb_along_cycle(r.plan->mass(), inst.cost, 0.05, 1e-2);
    if (!moved) continue;
    ++perturbed;
    const TransportPlan worse(*moved, inst.mu, inst.nu);
    CHECK_FALSE(strong_monotonicity_check(worse, inst.cost).strongly_monotone);
    CHECK_FALSE(cyclical_monotonicity_check(SupportSet::of(worse), inst.cost).monotone);
  }
  CHECK(perturbed > 30);
}
