#pragma once

// Drift f and diffusion B with exact derivative oracles, declared Lipschitz
// constants, and the sampled regularity checks the experiments rely on.  All
// presets are deterministic and time-homogeneous; a custom hook accepts
// user-supplied (t,u)-dependent fields.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pertflow/config.hpp"
#include "pertflow/operators.hpp"
#include "pertflow/spectral.hpp"

namespace pertflow {

// finite-rank map from the M noise directions into state space: column l is
// the image of the l-th noise direction
struct HSOperator {
  BasisSpec basis;
  std::vector<Element> cols;

  int noise_dim() const { return static_cast<int>(cols.size()); }
  Element apply(std::span<const double> dw) const;  // sum_l dw[l] * cols[l]
  double hs_norm() const;                           // sqrt(sum_l |col_l|^2)
  double hs_graph_norm(const OperatorPair& P, int k) const;

  HSOperator& operator+=(const HSOperator& o);
  HSOperator& operator-=(const HSOperator& o);
  HSOperator& operator*=(double a);
};

// multilinear derivative at a fixed base point; eval takes `order` arguments
struct DerivativeTensor {
  int order = 0;
  std::function<Element(std::span<const Element>)> eval;
};

struct HSDerivativeTensor {
  int order = 0;
  std::function<HSOperator(std::span<const Element>)> eval;
};

class CoefficientField {
 public:
  using DerivFn = std::function<Element(int, double, const Element&, std::span<const Element>)>;
  using HSDerivFn = std::function<HSOperator(int, double, const Element&, std::span<const Element>)>;

  // presets; each captures the operator pair it was built against so graph
  // norms in the declared constants refer to the right G
  static CoefficientField zero(const OperatorPair& P);
  static CoefficientField additive(const OperatorPair& P, double scale, int noise_dim);
  static CoefficientField scalar_mult(const OperatorPair& P, double beta);
  static CoefficientField nemytskii(const OperatorPair& P, std::vector<double> drift_weights,
                                    std::vector<double> diffusion_weights);
  static CoefficientField preset(const std::string& name, const OperatorPair& P,
                                 const Config& params);
  static CoefficientField custom(std::string name, BasisSpec basis, int m, int noise_dim,
                                 DerivFn f_impl, HSDerivFn B_impl, double lipschitz_f,
                                 double lipschitz_B, Element anchor);

  const std::string& name() const { return name_; }
  const BasisSpec& basis() const { return basis_; }
  int m() const { return m_; }
  int noise_dim() const { return noise_dim_; }
  double lipschitz_f() const { return lipschitz_f_; }
  double lipschitz_B() const { return lipschitz_B_; }
  const Element& anchor() const { return anchor_; }

  Element f(double t, const Element& u) const;
  HSOperator B(double t, const Element& u) const;

  // order in {1..m}; `args` must carry exactly `order` elements
  Element f_derivative_apply(int order, double t, const Element& u,
                             std::span<const Element> args) const;
  HSOperator B_derivative_apply(int order, double t, const Element& u,
                                std::span<const Element> args) const;
  DerivativeTensor f_derivative(int order, double t, const Element& u) const;
  HSDerivativeTensor B_derivative(int order, double t, const Element& u) const;

  // uniform-in-u bound on the HS-graph norm of B^(order), used by the
  // instrumentation around the correction terms
  double b_derivative_bound(int order) const;

 private:
  CoefficientField() : basis_(BasisSpec::fourier(1)), anchor_(Element::zero(basis_)) {}
  void validate_order(int order) const;

  std::string name_;
  BasisSpec basis_;
  int m_ = 0;
  int noise_dim_ = 0;
  double lipschitz_f_ = 0.0;
  double lipschitz_B_ = 0.0;
  Element anchor_;
  DerivFn f_impl_;
  HSDerivFn B_impl_;
  std::vector<double> b_bounds_;  // index j-1 = bound for order j; empty entries = 0
};

// n-th derivative of tanh as a polynomial in tau = tanh(x):
// p_0 = tau, p_{n+1} = p_n' * (1 - tau^2); returns p_n evaluated at tanh(x)
double tanh_derivative(int n, double x);
// certified sup of |p_n| on tau in [-1,1] (dense sampling plus a derivative
// slack term, so the returned value is a true upper bound)
double tanh_derivative_sup(int n);

struct RegularityCheck {
  struct Row {
    double separation;  // |x - y|
    double ratio;       // (|f gap|_m + |B gap|_HS,m) / ((N1+N2) |x-y|)
  };
  std::vector<Row> rows;
  double worst_ratio = 0.0;
  double anchor_drift_norm = 0.0;      // |f(a)| in D(G^m)
  double anchor_diffusion_norm = 0.0;  // HS norm of B(a) into D(G^m)
  double tol = 1e-9;
  bool pass = false;
};

RegularityCheck check_Hmp(const CoefficientField& c, const OperatorPair& P, int samples,
                          std::uint64_t seed, double tol = 1e-9);

struct FdCheck {
  struct Row {
    double h;
    double err;  // worst over directions, drift and diffusion sides combined
  };
  std::vector<Row> rows;
  double slope = 0.0;
  double max_err = 0.0;
  bool slope_valid = false;  // false when every error sits at machine precision
  bool pass = false;
};

// central finite differences of the order-j oracle against the analytic
// order-(j+1) oracle along each direction; probe arguments for the lower
// oracle cycle through `directions`
FdCheck derivative_fd_check(const CoefficientField& c, int order, double t, const Element& u,
                            std::span<const Element> directions, std::span<const double> h_list);

}  // namespace pertflow
