#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pertflow/coefficients.hpp"
#include "pertflow/noise.hpp"
#include "pertflow/operators.hpp"
#include "pertflow/sensitivity.hpp"
#include "pertflow/solver.hpp"

using namespace pertflow;

TEST_CASE("correction-term combinatorics at low order") {
  CHECK(correction_terms(1).empty());

  const auto n2 = correction_terms(2);
  REQUIRE(n2.size() == 1);
  CHECK(n2[0].sizes == std::vector<int>{1, 1});
  CHECK(n2[0].coefficient == 1);
  CHECK(n2[0].blocks() == 2);

  // presentation order: fewer blocks first, then sizes descending
  const auto n3 = correction_terms(3);
  REQUIRE(n3.size() == 2);
  CHECK(n3[0] == PartitionTerm{{2, 1}, 3});
  CHECK(n3[1] == PartitionTerm{{1, 1, 1}, 1});

  // 4! / (prod sizes! * prod multiplicities!) for each part-multiset
  const std::vector<PartitionTerm> want4 = {
      {{3, 1}, 4}, {{2, 2}, 3}, {{2, 1, 1}, 6}, {{1, 1, 1, 1}, 1}};
  CHECK(correction_terms(4) == want4);

  // total count = number of set partitions minus the single-block one
  const auto n5 = correction_terms(5);
  std::int64_t total = 0;
  for (const auto& t : n5) total += t.coefficient;
  CHECK(total == 51);

  CHECK_THROWS_AS(correction_terms(0), std::invalid_argument);
  CHECK_THROWS_AS(correction_terms(21), std::invalid_argument);
}

TEST_CASE("chain-rule recursion reproduces the direct enumeration") {
  for (int n = 2; n <= 8; ++n) {
    const RecursionCheck rc = check_phi_recursion(n);
    CHECK(rc.pass);
    CHECK(rc.derived == rc.expected);
  }
  CHECK_THROWS_AS(check_phi_recursion(1), std::invalid_argument);
}

TEST_CASE("hierarchy under zero coefficients: discrete falling factorial") {
  const OperatorPair P = OperatorPair::fourier(4, 3);
  const CoefficientField c = CoefficientField::zero(P);
  const Element u0 = Element::unit(P.basis(), 3);
  const double eps = 0.3;
  const TimeGrid grid(0.5, 16);
  const WienerDriver driver(1, 0, 16, 0.5);
  const SensitivitySolution sol = solve_hierarchy(P, c, eps, u0, 3, grid, driver, 0);
  REQUIRE(sol.levels.size() == 4);
  const double dt = grid.dt();
  for (int s = 0; s <= 16; ++s) {
    const double t = grid.time(s);
    Element base = P.semigroup(eps, t, u0);
    Element g1 = P.apply_G(base);
    Element g2 = P.apply_G(g1);
    Element g3 = P.apply_G(g2);
    // u^j(t_s) = (-1)^j t (t - dt) ... (t - (j-1) dt) G^j S(t_s) u0
    const double c1 = -t;
    const double c2 = t * (t - dt);
    const double c3 = -t * (t - dt) * (t - 2.0 * dt);
    auto err = [&](int level, double coeff, const Element& g) {
      Element d = sol.levels[static_cast<std::size_t>(level)].states[static_cast<std::size_t>(s)];
      axpy(-coeff, g, d);
      return norm(d);
    };
    CHECK(err(0, 1.0, base) <= 1e-12);
    CHECK(err(1, c1, g1) <= 1e-12);
    CHECK(err(2, c2, g2) <= 1e-12);
    CHECK(err(3, c3, g3) <= 1e-12);
  }
}

TEST_CASE("hierarchy is linear in the initial state when the field is linear") {
  const OperatorPair P = OperatorPair::fourier(4, 3);
  const CoefficientField c = CoefficientField::zero(P);
  const TimeGrid grid(0.5, 128);
  const WienerDriver driver(1, 0, 128, 0.5);
  Element a = Element::unit(P.basis(), 1);
  Element b = Element::unit(P.basis(), 4);
  b[0] = 0.5;
  Element ab = a;
  ab += b;
  const auto sa = solve_hierarchy(P, c, 0.2, a, 1, grid, driver, 0);
  const auto sb = solve_hierarchy(P, c, 0.2, b, 1, grid, driver, 0);
  const auto sab = solve_hierarchy(P, c, 0.2, ab, 1, grid, driver, 0);
  Element diff = sab.levels[1].states.back();
  diff -= sa.levels[1].states.back();
  diff -= sb.levels[1].states.back();
  CHECK(norm(diff) <= 1e-10);
}

TEST_CASE("lower levels are a bit-identical prefix of a deeper run") {
  const OperatorPair P = OperatorPair::fourier(4, 3);
  const CoefficientField c = CoefficientField::nemytskii(P, {0.5, 0.25}, {0.2, 0.1});
  Element u0 = Element::unit(P.basis(), 1);
  u0[3] = 0.4;
  const TimeGrid grid(0.5, 64);
  const WienerDriver driver(42, 2, 256, 0.5);
  const auto deep = solve_hierarchy(P, c, 0.1, u0, 3, grid, driver, 7);
  const auto shallow = solve_hierarchy(P, c, 0.1, u0, 2, grid, driver, 7);
  REQUIRE(deep.levels.size() == 4);
  REQUIRE(shallow.levels.size() == 3);
  for (int k = 0; k <= 2; ++k) {
    for (std::size_t s = 0; s < deep.levels[0].states.size(); ++s) {
      Element d = deep.levels[static_cast<std::size_t>(k)].states[s];
      d -= shallow.levels[static_cast<std::size_t>(k)].states[s];
      CHECK(norm(d) == 0.0);
    }
  }
}

TEST_CASE("level zero and its fingerprint agree with the plain solver") {
  const OperatorPair P = OperatorPair::fourier(4, 3);
  const CoefficientField c = CoefficientField::nemytskii(P, {0.5, 0.25}, {0.2, 0.1});
  const Element u0 = Element::unit(P.basis(), 1);
  const TimeGrid grid(0.5, 64);
  const WienerDriver driver(42, 2, 256, 0.5);
  const auto hier = solve_hierarchy(P, c, 0.1, u0, 2, grid, driver, 3);
  const SolutionPath base = solve_base(P, c, 0.1, u0, grid, driver, 3);
  for (std::size_t s = 0; s < base.states.size(); ++s) {
    Element d = hier.levels[0].states[s];
    d -= base.states[s];
    CHECK(norm(d) == 0.0);
  }
  CHECK(hier.levels[0].noise_fingerprint == base.noise_fingerprint);
  CHECK(hier.levels[1].noise_fingerprint == base.noise_fingerprint);
}

TEST_CASE("vanishing perturbation operator kills every level above zero") {
  const DenseMatrix A(3, {0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.5});
  const OperatorPair P = OperatorPair::dense(A, DenseMatrix::zero(3), 3);
  const CoefficientField c = CoefficientField::nemytskii(P, {0.4}, {0.3, 0.2});
  const Element u0 = Element::unit(P.basis(), 0);
  const TimeGrid grid(0.5, 64);
  const WienerDriver driver(9, 2, 256, 0.5);
  const auto sol = solve_hierarchy(P, c, 0.7, u0, 2, grid, driver, 0);
  for (int k = 1; k <= 2; ++k)
    for (const Element& u : sol.levels[static_cast<std::size_t>(k)].states)
      CHECK(norm(u) == 0.0);
  // the base level still moves
  Element moved = sol.levels[0].states.back();
  moved -= u0;
  CHECK(norm(moved) > 0.1);
}

TEST_CASE("finite differences of the base collapse onto the first level") {
  const OperatorPair P = OperatorPair::fourier(4, 3);
  const CoefficientField c = CoefficientField::zero(P);
  const Element u0 = Element::unit(P.basis(), 3);
  const TimeGrid grid(0.5, 1024);
  const WienerDriver driver(1, 0, 1024, 0.5);
  const std::vector<double> h_list = {0.0625, 0.03125, 0.015625};
  const FdHierarchyCheck fd =
      finite_difference_check(P, c, 0.1, u0, 1, h_list, grid, driver, 1, 2.0);
  CHECK(fd.pass);
  CHECK(fd.slope == doctest::Approx(1.0).epsilon(0.1));
  REQUIRE(fd.rows.size() == 3);
  CHECK(fd.rows[0].value > fd.rows[1].value);
  CHECK(fd.rows[1].value > fd.rows[2].value);
  CHECK(fd.graph_k == 2);

  CHECK_THROWS_AS(finite_difference_check(P, c, 0.1, u0, 0, h_list, grid, driver, 1, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(finite_difference_check(P, c, 0.1, u0, 4, h_list, grid, driver, 1, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(finite_difference_check(P, c, 0.1, u0, 1, std::vector<double>{0.1}, grid,
                                          driver, 1, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(finite_difference_check(P, c, 0.1, u0, 1, h_list, grid, driver, 0, 2.0),
                  std::invalid_argument);
}

TEST_CASE("first-order Taylor remainder decays at second order") {
  const OperatorPair P = OperatorPair::fourier(4, 3);
  const CoefficientField c = CoefficientField::zero(P);
  const Element u0 = Element::unit(P.basis(), 3);
  const TimeGrid grid(0.5, 1024);
  const WienerDriver driver(1, 0, 1024, 0.5);
  const std::vector<double> eps_list = {0.125, 0.0625, 0.03125};
  const TaylorCheck tc = taylor_remainder(P, c, u0, 1, eps_list, grid, driver, 1, 2.0);
  CHECK(tc.pass);
  CHECK(tc.slope == doctest::Approx(2.0).epsilon(0.1));
  CHECK(tc.graph_k == 1);
  REQUIRE(tc.rows.size() == 3);
  CHECK(tc.rows[0].value > tc.rows[2].value);

  CHECK_THROWS_AS(taylor_remainder(P, c, u0, 0, eps_list, grid, driver, 1, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(taylor_remainder(P, c, u0, 3, eps_list, grid, driver, 1, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(taylor_remainder(P, c, u0, 1, std::vector<double>{0.1}, grid, driver, 1, 2.0),
                  std::invalid_argument);
}

TEST_CASE("diffusion correction summands respect the product bound") {
  const OperatorPair P = OperatorPair::fourier(2, 3);
  const CoefficientField c = CoefficientField::nemytskii(P, {0.5, 0.25}, {0.2, 0.1});
  Element u0 = Element::unit(P.basis(), 1);
  u0[3] = 0.3;
  const TimeGrid grid(0.5, 64);
  const WienerDriver driver(11, 2, 256, 0.5);
  const auto sol = solve_hierarchy(P, c, 0.1, u0, 3, grid, driver, 0);
  const CorrectionBoundCheck cb = check_correction_bounds(P, c, sol, 8);
  CHECK(cb.pass);
  CHECK_FALSE(cb.rows.empty());
  CHECK(cb.worst_ratio <= 1.0 + 1e-9);
  for (const auto& row : cb.rows) {
    CHECK(row.level >= 2);
    CHECK(row.term_norm <= row.bound * (1.0 + 1e-8) + 1e-12);
  }
}
