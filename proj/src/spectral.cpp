#include "pertflow/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace pertflow {

BasisSpec BasisSpec::fourier(int K) {
  if (K < 1) throw std::invalid_argument("fourier basis needs K >= 1");
  return BasisSpec{BasisKind::fourier, K};
}

BasisSpec BasisSpec::euclidean(int d) {
  if (d < 1) throw std::invalid_argument("euclidean basis needs d >= 1");
  return BasisSpec{BasisKind::euclidean, d};
}

std::string BasisSpec::tag() const {
  if (kind == BasisKind::fourier) return "fourier:K=" + std::to_string(param);
  return "euclidean:d=" + std::to_string(param);
}

Element::Element(BasisSpec basis, std::vector<double> coeff)
    : basis_(basis), coeff_(std::move(coeff)) {
  if (static_cast<int>(coeff_.size()) != basis_.dim())
    throw std::invalid_argument("coefficient count does not match basis dimension");
}

Element Element::zero(const BasisSpec& basis) {
  return Element(basis, std::vector<double>(static_cast<std::size_t>(basis.dim()), 0.0));
}

Element Element::unit(const BasisSpec& basis, int index) {
  if (index < 0 || index >= basis.dim())
    throw std::invalid_argument("unit index outside basis dimension");
  Element e = zero(basis);
  e[index] = 1.0;
  return e;
}

void require_same_basis(const Element& a, const Element& b) {
  if (!(a.basis() == b.basis()))
    throw std::invalid_argument("basis mismatch: " + a.basis().tag() + " vs " + b.basis().tag());
}

Element& Element::operator+=(const Element& other) {
  require_same_basis(*this, other);
  for (int i = 0; i < size(); ++i) coeff_[static_cast<std::size_t>(i)] += other[i];
  return *this;
}

Element& Element::operator-=(const Element& other) {
  require_same_basis(*this, other);
  for (int i = 0; i < size(); ++i) coeff_[static_cast<std::size_t>(i)] -= other[i];
  return *this;
}

Element& Element::operator*=(double a) {
  for (double& c : coeff_) c *= a;
  return *this;
}

bool Element::finite() const {
  for (double c : coeff_)
    if (!std::isfinite(c)) return false;
  return true;
}

Element operator+(Element a, const Element& b) { return a += b; }
Element operator-(Element a, const Element& b) { return a -= b; }
Element operator*(double a, Element x) { return x *= a; }

void axpy(double a, const Element& x, Element& y) {
  require_same_basis(x, y);
  for (int i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double inner_product(const Element& a, const Element& b) {
  require_same_basis(a, b);
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Element& a) { return std::sqrt(inner_product(a, a)); }

double graph_norm(const Element& phi, const LinearOp& g, int k) {
  if (k < 0) throw std::invalid_argument("graph norm order must be >= 0");
  double sq = inner_product(phi, phi);
  Element v = phi;
  for (int j = 1; j <= k; ++j) {
    v = g(v);
    sq += inner_product(v, v);
  }
  return std::sqrt(sq);
}

}  // namespace pertflow
