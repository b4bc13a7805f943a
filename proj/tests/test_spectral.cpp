#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pertflow/spectral.hpp"

using namespace pertflow;

TEST_CASE("basis dimensions and tags") {
  CHECK(BasisSpec::fourier(16).dim() == 33);
  CHECK(BasisSpec::fourier(1).dim() == 3);
  CHECK(BasisSpec::euclidean(2).dim() == 2);
  CHECK(BasisSpec::fourier(16).tag() == "fourier:K=16");
  CHECK(BasisSpec::euclidean(3).tag() == "euclidean:d=3");
  CHECK(BasisSpec::fourier(2) == BasisSpec::fourier(2));
  CHECK_FALSE(BasisSpec::fourier(2) == BasisSpec::euclidean(5));
  CHECK_THROWS_AS(BasisSpec::fourier(0), std::invalid_argument);
  CHECK_THROWS_AS(BasisSpec::euclidean(0), std::invalid_argument);
}

TEST_CASE("element construction and validation") {
  const BasisSpec b = BasisSpec::fourier(1);
  CHECK_THROWS_AS(Element(b, {1.0, 2.0}), std::invalid_argument);  // needs 3
  const Element z = Element::zero(b);
  CHECK(norm(z) == 0.0);
  const Element e = Element::unit(b, 2);
  CHECK(e[2] == 1.0);
  CHECK(e[0] == 0.0);
  CHECK_THROWS_AS(Element::unit(b, 3), std::invalid_argument);
  CHECK(e.finite());
  Element bad = e;
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(bad.finite());
}

TEST_CASE("vector arithmetic and the parallelogram identity") {
  const BasisSpec basis = BasisSpec::euclidean(2);
  const Element a(basis, {3.0, 4.0});
  const Element b(basis, {-1.0, 2.0});
  CHECK(norm(a) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(inner_product(a, b) == doctest::Approx(5.0).epsilon(1e-15));

  Element s = a;
  s += b;
  CHECK(s[0] == 2.0);
  Element d = a;
  d -= b;
  CHECK(d[1] == 2.0);
  Element scaled = a;
  scaled *= -2.0;
  CHECK(scaled[0] == -6.0);
  CHECK((2.0 * a)[1] == 8.0);
  CHECK((a + b)[0] == 2.0);
  CHECK((a - b)[0] == 4.0);

  Element y = b;
  axpy(0.5, a, y);  // y = b + a/2
  CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-15));

  const double lhs = norm(a + b) * norm(a + b) + norm(a - b) * norm(a - b);
  const double rhs = 2.0 * (norm(a) * norm(a) + norm(b) * norm(b));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("mixed bases are rejected") {
  const Element a = Element::unit(BasisSpec::fourier(1), 0);
  const Element b = Element::unit(BasisSpec::euclidean(3), 0);
  CHECK_THROWS_AS(require_same_basis(a, b), std::invalid_argument);
  Element c = a;
  CHECK_THROWS_AS(c += b, std::invalid_argument);
  CHECK_THROWS_AS(inner_product(a, b), std::invalid_argument);
}

TEST_CASE("graph norm with an explicit multiplier") {
  // G acts as k^2 on mode k; on the unit cos(2x) profile |phi| = 1 and
  // |G phi| = 4, so the order-1 graph norm is sqrt(17)
  const BasisSpec basis = BasisSpec::fourier(2);
  const LinearOp g = [](const Element& x) {
    Element out = Element::zero(x.basis());
    for (int k = 1; k <= x.basis().param; ++k) {
      out[2 * k - 1] = static_cast<double>(k) * k * x[2 * k - 1];
      out[2 * k] = static_cast<double>(k) * k * x[2 * k];
    }
    return out;
  };
  const Element phi = Element::unit(basis, 3);
  CHECK(graph_norm(phi, g, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(graph_norm(phi, g, 1) == doctest::Approx(std::sqrt(17.0)).epsilon(1e-14));
  CHECK(graph_norm(phi, g, 2) == doctest::Approx(std::sqrt(273.0)).epsilon(1e-14));
  CHECK_THROWS_AS(graph_norm(phi, g, -1), std::invalid_argument);
}
