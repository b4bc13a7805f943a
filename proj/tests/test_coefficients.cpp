#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pertflow/coefficients.hpp"
#include "pertflow/operators.hpp"

using namespace pertflow;

namespace {

OperatorPair small_pair() { return OperatorPair::fourier(2, 3); }

CoefficientField sample_nemytskii(const OperatorPair& P) {
  return CoefficientField::nemytskii(P, {0.5, 0.25}, {0.2, 0.1});
}

}  // namespace

TEST_CASE("tanh derivative recursion against central differences") {
  CHECK(tanh_derivative(0, 0.3) == doctest::Approx(std::tanh(0.3)).epsilon(1e-15));
  CHECK(tanh_derivative(1, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  const double h = 1e-6;
  for (int n : {1, 2, 3}) {
    for (double x : {-0.7, 0.0, 0.4}) {
      const double fd = (tanh_derivative(n - 1, x + h) - tanh_derivative(n - 1, x - h)) / (2 * h);
      CHECK(tanh_derivative(n, x) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(tanh_derivative(-1, 0.0), std::invalid_argument);
}

TEST_CASE("tanh derivative sups are true upper bounds at known extrema") {
  // |tanh'| peaks at 1; |tanh''| at 4/(3 sqrt 3); |tanh'''| at 2
  CHECK(tanh_derivative_sup(1) >= 1.0);
  CHECK(tanh_derivative_sup(1) <= 1.001);
  const double m2 = 4.0 / (3.0 * std::sqrt(3.0));
  CHECK(tanh_derivative_sup(2) >= m2);
  CHECK(tanh_derivative_sup(2) <= m2 + 1e-3);
  CHECK(tanh_derivative_sup(3) >= 2.0);
  CHECK(tanh_derivative_sup(3) <= 2.001);
}

TEST_CASE("zero preset") {
  const OperatorPair P = small_pair();
  const CoefficientField c = CoefficientField::zero(P);
  CHECK(c.noise_dim() == 0);
  CHECK(c.lipschitz_f() == 0.0);
  CHECK(c.lipschitz_B() == 0.0);
  const Element u = Element::unit(P.basis(), 1);
  CHECK(norm(c.f(0.0, u)) == 0.0);
  CHECK(c.B(0.0, u).noise_dim() == 0);
  CHECK(norm(c.f_derivative_apply(1, 0.0, u, std::vector<Element>{u})) == 0.0);
}

TEST_CASE("additive preset: constant diffusion") {
  const OperatorPair P = small_pair();
  const CoefficientField c = CoefficientField::additive(P, 0.1, 2);
  CHECK(c.noise_dim() == 2);
  const Element u = 0.7 * Element::unit(P.basis(), 3);
  const HSOperator at_u = c.B(0.0, u);
  const HSOperator at_0 = c.B(0.0, Element::zero(P.basis()));
  REQUIRE(at_u.noise_dim() == 2);
  for (int l = 0; l < 2; ++l) {
    Element d = at_u.cols[static_cast<std::size_t>(l)];
    d -= at_0.cols[static_cast<std::size_t>(l)];
    CHECK(norm(d) == 0.0);
  }
  // first derivative vanishes identically
  const HSOperator d1 = c.B_derivative_apply(1, 0.0, u, std::vector<Element>{u});
  CHECK(d1.hs_norm() == 0.0);
  CHECK(norm(c.f(0.0, u)) == 0.0);
}

TEST_CASE("scalar_mult preset: linear multiplicative diffusion") {
  const OperatorPair P = small_pair();
  const double beta = 0.3;
  const CoefficientField c = CoefficientField::scalar_mult(P, beta);
  CHECK(c.noise_dim() == 1);
  const Element u = Element(P.basis(), {0.5, -1.0, 0.25, 0.0, 2.0});
  const HSOperator op = c.B(0.0, u);
  REQUIRE(op.noise_dim() == 1);
  Element col = op.cols[0];
  axpy(-beta, u, col);
  CHECK(norm(col) <= 1e-15);

  // B(u) dw = beta dw_0 u
  const double dw[] = {0.4};
  Element img = op.apply(std::span<const double>(dw, 1));
  axpy(-beta * 0.4, u, img);
  CHECK(norm(img) <= 1e-15);

  // derivative is u-independent; second derivative bound is zero
  const Element dir = Element::unit(P.basis(), 2);
  const HSOperator d1 = c.B_derivative_apply(1, 0.0, u, std::vector<Element>{dir});
  Element dcol = d1.cols[0];
  axpy(-beta, dir, dcol);
  CHECK(norm(dcol) <= 1e-15);
  CHECK(c.b_derivative_bound(1) == doctest::Approx(beta * graph_factor(P, c.m())).epsilon(1e-12));
  CHECK(c.b_derivative_bound(2) == 0.0);
}

TEST_CASE("nemytskii preset: pointwise tanh fields") {
  const OperatorPair P = small_pair();
  const CoefficientField c = sample_nemytskii(P);
  CHECK(c.noise_dim() == 2);
  Element u = Element::zero(P.basis());
  u[0] = 0.4;
  u[1] = -0.2;
  const Element fu = c.f(0.0, u);
  CHECK(fu[0] == doctest::Approx(0.5 * std::tanh(0.4)).epsilon(1e-14));
  CHECK(fu[1] == doctest::Approx(0.25 * std::tanh(-0.2)).epsilon(1e-14));
  for (int i = 2; i < 5; ++i) CHECK(fu[i] == 0.0);

  const HSOperator Bu = c.B(0.0, u);
  CHECK(Bu.cols[0][0] == doctest::Approx(0.2 * std::tanh(0.4)).epsilon(1e-14));
  CHECK(Bu.cols[1][1] == doctest::Approx(0.1 * std::tanh(-0.2)).epsilon(1e-14));
}

TEST_CASE("derivative tensors are symmetric and multilinear") {
  const OperatorPair P = small_pair();
  const CoefficientField c = sample_nemytskii(P);
  Element u = Element::zero(P.basis());
  u[0] = 0.3;
  u[1] = 0.3;
  Element a = Element::unit(P.basis(), 0);
  a[1] = 1.0;
  Element b = Element::zero(P.basis());
  b[0] = 0.5;
  b[1] = -0.3;

  const Element ab = c.f_derivative_apply(2, 0.0, u, std::vector<Element>{a, b});
  CHECK(ab[0] == doctest::Approx(0.5 * tanh_derivative(2, 0.3) * 0.5).epsilon(1e-13));
  CHECK(norm(ab) > 1e-3);  // the probe really exercises the tensor
  const Element ba = c.f_derivative_apply(2, 0.0, u, std::vector<Element>{b, a});
  Element sym = ab;
  sym -= ba;
  CHECK(norm(sym) <= 1e-12);

  Element scaled = c.f_derivative_apply(2, 0.0, u, std::vector<Element>{2.0 * a, b});
  axpy(-2.0, ab, scaled);
  CHECK(norm(scaled) <= 1e-12);

  const HSOperator hab = c.B_derivative_apply(2, 0.0, u, std::vector<Element>{a, b});
  HSOperator hba = c.B_derivative_apply(2, 0.0, u, std::vector<Element>{b, a});
  hba -= hab;
  CHECK(hba.hs_norm() <= 1e-12);

  // argument count and order range are enforced
  CHECK_THROWS_AS(c.f_derivative_apply(1, 0.0, u, std::vector<Element>{a, b}),
                  std::invalid_argument);
  CHECK_THROWS_AS(c.f_derivative_apply(0, 0.0, u, std::vector<Element>{}), std::invalid_argument);
  CHECK_THROWS_AS(c.f_derivative_apply(4, 0.0, u, std::vector<Element>(4, a)),
                  std::invalid_argument);

  // tensor wrappers close over the base point
  const DerivativeTensor t2 = c.f_derivative(2, 0.0, u);
  CHECK(t2.order == 2);
  Element via = t2.eval(std::vector<Element>{a, b});
  via -= ab;
  CHECK(norm(via) <= 1e-15);
}

TEST_CASE("derivative oracles agree with central differences") {
  const OperatorPair P = small_pair();
  const CoefficientField c = sample_nemytskii(P);
  const Element base = 0.3 * Element::unit(P.basis(), 1);
  const std::vector<Element> dirs = {Element::unit(P.basis(), 1),
                                     Element::unit(P.basis(), 0)};
  const std::vector<double> h_list = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  for (int order : {0, 1, 2}) {
    const FdCheck fd = derivative_fd_check(c, order, 0.0, base, dirs, h_list);
    CHECK(fd.pass);
    if (fd.slope_valid) CHECK(fd.slope >= 1.7);
  }
  CHECK_THROWS_AS(derivative_fd_check(c, 3, 0.0, base, dirs, h_list), std::invalid_argument);
}

TEST_CASE("declared Lipschitz constants dominate sampled quotients") {
  const OperatorPair P = OperatorPair::fourier(8, 3);
  const std::vector<CoefficientField> fields = {
      CoefficientField::zero(P), CoefficientField::additive(P, 0.1, 2),
      CoefficientField::scalar_mult(P, 0.3), sample_nemytskii(P)};
  for (const CoefficientField& c : fields) {
    const RegularityCheck rc = check_Hmp(c, P, 120, 7);
    CHECK(rc.pass);
    CHECK(rc.worst_ratio <= 1.0 + 1e-9);
    CHECK(std::isfinite(rc.anchor_drift_norm));
    CHECK(std::isfinite(rc.anchor_diffusion_norm));
  }
}

TEST_CASE("derivative bound data for the correction terms") {
  const OperatorPair P = small_pair();
  const CoefficientField c = sample_nemytskii(P);
  // weights {0.2, 0.1} against profile graph norms {1, 2}: sqrt(0.04 + 0.04)
  const double n2 = std::sqrt(0.08);
  CHECK(c.b_derivative_bound(1) >= 1.0 * n2 - 1e-12);
  CHECK(c.b_derivative_bound(1) <= 1.001 * n2);
  const double m2 = 4.0 / (3.0 * std::sqrt(3.0));
  CHECK(c.b_derivative_bound(2) >= m2 * n2 - 1e-12);
  CHECK(c.b_derivative_bound(2) <= (m2 + 1e-3) * n2);
  CHECK_THROWS_AS(c.b_derivative_bound(0), std::invalid_argument);
}

TEST_CASE("preset dispatch reads the configuration") {
  const OperatorPair P = small_pair();
  Config cfg;
  cfg.set("coefficients", "beta", ConfigValue(0.9));
  const CoefficientField c = CoefficientField::preset("scalar_mult", P, cfg);
  CHECK(c.name() == "scalar_mult");
  const Element u = Element::unit(P.basis(), 1);
  Element col = c.B(0.0, u).cols[0];
  axpy(-0.9, u, col);
  CHECK(norm(col) <= 1e-15);
  CHECK_THROWS_AS(CoefficientField::preset("no_such_preset", P, cfg), std::invalid_argument);
}

TEST_CASE("custom fields plug into the same interface") {
  const OperatorPair P = small_pair();
  const BasisSpec basis = P.basis();
  auto f_impl = [](int order, double, const Element& u, std::span<const Element> args) {
    if (order == 0) return 2.0 * u;
    if (order == 1) return 2.0 * args[0];
    return Element::zero(u.basis());
  };
  auto B_impl = [basis](int, double, const Element&, std::span<const Element>) {
    return HSOperator{basis, {}};
  };
  const CoefficientField c = CoefficientField::custom("doubling", basis, 3, 0, f_impl, B_impl,
                                                      2.0, 0.0, Element::zero(basis));
  const Element u = Element::unit(basis, 2);
  CHECK(norm(c.f(0.0, u) - 2.0 * u) == 0.0);
  CHECK(std::isinf(c.b_derivative_bound(1)));
}

TEST_CASE("hilbert-schmidt norms of finite-rank maps") {
  const OperatorPair P = small_pair();
  HSOperator op{P.basis(), {Element::unit(P.basis(), 0), Element::unit(P.basis(), 3)}};
  op *= 2.0;
  CHECK(op.hs_norm() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
  // graph norm weights the cos(2x) column by sqrt(1 + 16 + 256 + 4096)
  const double w = std::sqrt(1.0 + 16.0 + 256.0 + 4096.0);
  CHECK(op.hs_graph_norm(P, 3) == doctest::Approx(2.0 * std::sqrt(1.0 + w * w)).epsilon(1e-12));
  const double dw[] = {0.5, -1.0};
  const Element img = op.apply(std::span<const double>(dw, 2));
  CHECK(img[0] == doctest::Approx(1.0));
  CHECK(img[3] == doctest::Approx(-2.0));
}
