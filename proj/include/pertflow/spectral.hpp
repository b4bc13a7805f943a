#pragma once
// Coefficient vectors over a fixed orthonormal basis, plus the graph-norm
// scale |phi|_{D(G^k)} = sqrt(sum_{j<=k} |G^j phi|^2) used throughout.

#include <functional>
#include <string>
#include <vector>

namespace pertflow {

enum class BasisKind { fourier, euclidean };

// fourier: real trigonometric basis on the circle, truncated at mode K.
// Coefficient layout: index 0 is the constant mode; for k >= 1, index 2k-1
// carries cos(kx) and index 2k carries sin(kx).  Dimension 2K+1.
// euclidean: standard basis of R^d, used by the dense operator backend.
struct BasisSpec {
  BasisKind kind = BasisKind::fourier;
  int param = 0;  // K for fourier, d for euclidean

  static BasisSpec fourier(int K);
  static BasisSpec euclidean(int d);

  int dim() const { return kind == BasisKind::fourier ? 2 * param + 1 : param; }
  std::string tag() const;  // "fourier:K=16" / "euclidean:d=2", used in CSV headers

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

class Element {
 public:
  Element() = default;
  Element(BasisSpec basis, std::vector<double> coeff);

  static Element zero(const BasisSpec& basis);
  static Element unit(const BasisSpec& basis, int index);

  const BasisSpec& basis() const { return basis_; }
  int size() const { return static_cast<int>(coeff_.size()); }
  double operator[](int i) const { return coeff_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return coeff_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& coeff() const { return coeff_; }

  Element& operator+=(const Element& other);
  Element& operator-=(const Element& other);
  Element& operator*=(double a);

  bool finite() const;  // no NaN/Inf coefficients

 private:
  BasisSpec basis_{};
  std::vector<double> coeff_;
};

Element operator+(Element a, const Element& b);
Element operator-(Element a, const Element& b);
Element operator*(double a, Element x);

// y += a*x
void axpy(double a, const Element& x, Element& y);

double inner_product(const Element& a, const Element& b);
double norm(const Element& a);

// throws std::invalid_argument on basis mismatch
void require_same_basis(const Element& a, const Element& b);

// One application of a linear operator; the graph norm only needs repeated G.
using LinearOp = std::function<Element(const Element&)>;

// |phi|_{D(G^k)} with G^0 = identity; k = 0 is the plain H-norm.
double graph_norm(const Element& phi, const LinearOp& g, int k);

}  // namespace pertflow
