#include "pertflow/coefficients.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pertflow {

// ---- HSOperator -------------------------------------------------------------

Element HSOperator::apply(std::span<const double> dw) const {
  if (dw.size() != cols.size())
    throw std::invalid_argument("noise increment dimension does not match operator rank");
  Element out = Element::zero(basis);
  for (std::size_t l = 0; l < cols.size(); ++l) axpy(dw[l], cols[l], out);
  return out;
}

double HSOperator::hs_norm() const {
  double sq = 0.0;
  for (const Element& c : cols) {
    const double n = norm(c);
    sq += n * n;
  }
  return std::sqrt(sq);
}

double HSOperator::hs_graph_norm(const OperatorPair& P, int k) const {
  double sq = 0.0;
  for (const Element& c : cols) {
    const double n = P.graph_norm(c, k);
    sq += n * n;
  }
  return std::sqrt(sq);
}

HSOperator& HSOperator::operator+=(const HSOperator& o) {
  if (!(basis == o.basis) || cols.size() != o.cols.size())
    throw std::invalid_argument("HS operator shape mismatch");
  for (std::size_t l = 0; l < cols.size(); ++l) cols[l] += o.cols[l];
  return *this;
}

HSOperator& HSOperator::operator-=(const HSOperator& o) {
  if (!(basis == o.basis) || cols.size() != o.cols.size())
    throw std::invalid_argument("HS operator shape mismatch");
  for (std::size_t l = 0; l < cols.size(); ++l) cols[l] -= o.cols[l];
  return *this;
}

HSOperator& HSOperator::operator*=(double a) {
  for (Element& c : cols) c *= a;
  return *this;
}

// ---- tanh derivative machinery ---------------------------------------------

namespace {

// p_{n+1} = p_n' * (1 - tau^2), starting from p_0(tau) = tau
std::vector<double> tanh_poly(int n) {
  std::vector<double> p = {0.0, 1.0};
  for (int j = 0; j < n; ++j) {
    std::vector<double> d(p.size() > 1 ? p.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = static_cast<double>(i) * p[i];
    std::vector<double> q(d.size() + 2, 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      q[i] += d[i];
      q[i + 2] -= d[i];
    }
    p = std::move(q);
  }
  return p;
}

double poly_eval(const std::vector<double>& p, double x) {
  double acc = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return acc;
}

HSOperator zero_hs(const BasisSpec& basis, int noise_dim) {
  return HSOperator{basis, std::vector<Element>(static_cast<std::size_t>(noise_dim),
                                               Element::zero(basis))};
}

}  // namespace

double tanh_derivative(int n, double x) {
  if (n < 0) throw std::invalid_argument("negative derivative order");
  if (n == 0) return std::tanh(x);
  return poly_eval(tanh_poly(n), std::tanh(x));
}

double tanh_derivative_sup(int n) {
  if (n < 0) throw std::invalid_argument("negative derivative order");
  if (n == 0) return 1.0;
  const std::vector<double> p = tanh_poly(n);
  double coeff_slope = 0.0;  // |p'| <= sum i*|c_i| on [-1,1]
  for (std::size_t i = 1; i < p.size(); ++i) coeff_slope += static_cast<double>(i) * std::abs(p[i]);
  const int cells = 200000;
  double best = 0.0;
  for (int i = 0; i <= cells; ++i) {
    const double tau = -1.0 + 2.0 * i / cells;
    best = std::max(best, std::abs(poly_eval(p, tau)));
  }
  return best + coeff_slope * (1.0 / cells);  // grid max plus Lipschitz slack
}

// ---- CoefficientField core --------------------------------------------------

void CoefficientField::validate_order(int order) const {
  if (order < 1 || order > m_)
    throw std::invalid_argument("derivative order outside {1.." + std::to_string(m_) + "}");
}

Element CoefficientField::f(double t, const Element& u) const {
  if (!(u.basis() == basis_)) throw std::invalid_argument("basis mismatch in drift evaluation");
  return f_impl_(0, t, u, {});
}

HSOperator CoefficientField::B(double t, const Element& u) const {
  if (!(u.basis() == basis_)) throw std::invalid_argument("basis mismatch in diffusion evaluation");
  return B_impl_(0, t, u, {});
}

Element CoefficientField::f_derivative_apply(int order, double t, const Element& u,
                                             std::span<const Element> args) const {
  validate_order(order);
  if (static_cast<int>(args.size()) != order)
    throw std::invalid_argument("argument count does not match derivative order");
  return f_impl_(order, t, u, args);
}

HSOperator CoefficientField::B_derivative_apply(int order, double t, const Element& u,
                                                std::span<const Element> args) const {
  validate_order(order);
  if (static_cast<int>(args.size()) != order)
    throw std::invalid_argument("argument count does not match derivative order");
  return B_impl_(order, t, u, args);
}

DerivativeTensor CoefficientField::f_derivative(int order, double t, const Element& u) const {
  validate_order(order);
  DerivativeTensor out;
  out.order = order;
  out.eval = [impl = f_impl_, order, t, u](std::span<const Element> args) {
    if (static_cast<int>(args.size()) != order)
      throw std::invalid_argument("argument count does not match derivative order");
    return impl(order, t, u, args);
  };
  return out;
}

HSDerivativeTensor CoefficientField::B_derivative(int order, double t, const Element& u) const {
  validate_order(order);
  HSDerivativeTensor out;
  out.order = order;
  out.eval = [impl = B_impl_, order, t, u](std::span<const Element> args) {
    if (static_cast<int>(args.size()) != order)
      throw std::invalid_argument("argument count does not match derivative order");
    return impl(order, t, u, args);
  };
  return out;
}

double CoefficientField::b_derivative_bound(int order) const {
  validate_order(order);
  return b_bounds_[static_cast<std::size_t>(order) - 1];
}

// ---- presets ----------------------------------------------------------------

CoefficientField CoefficientField::zero(const OperatorPair& P) {
  CoefficientField c;
  c.name_ = "zero";
  c.basis_ = P.basis();
  c.m_ = P.m();
  c.noise_dim_ = 0;
  c.anchor_ = Element::zero(c.basis_);
  c.b_bounds_.assign(static_cast<std::size_t>(c.m_), 0.0);
  const BasisSpec basis = c.basis_;
  c.f_impl_ = [basis](int, double, const Element&, std::span<const Element>) {
    return Element::zero(basis);
  };
  c.B_impl_ = [basis](int, double, const Element&, std::span<const Element>) {
    return zero_hs(basis, 0);
  };
  return c;
}

CoefficientField CoefficientField::additive(const OperatorPair& P, double scale, int noise_dim) {
  if (noise_dim < 1 || noise_dim > P.basis().dim())
    throw std::invalid_argument("additive preset needs 1 <= noise_dim <= basis dimension");
  if (!std::isfinite(scale)) throw std::invalid_argument("additive scale must be finite");
  CoefficientField c;
  c.name_ = "additive";
  c.basis_ = P.basis();
  c.m_ = P.m();
  c.noise_dim_ = noise_dim;
  c.anchor_ = Element::zero(c.basis_);
  c.b_bounds_.assign(static_cast<std::size_t>(c.m_), 0.0);
  const BasisSpec basis = c.basis_;
  HSOperator B0 = zero_hs(basis, noise_dim);
  for (int l = 0; l < noise_dim; ++l)
    B0.cols[static_cast<std::size_t>(l)] = scale * Element::unit(basis, l);
  c.f_impl_ = [basis](int, double, const Element&, std::span<const Element>) {
    return Element::zero(basis);
  };
  c.B_impl_ = [basis, noise_dim, B0](int order, double, const Element&, std::span<const Element>) {
    return order == 0 ? B0 : zero_hs(basis, noise_dim);
  };
  return c;
}

CoefficientField CoefficientField::scalar_mult(const OperatorPair& P, double beta) {
  if (!std::isfinite(beta)) throw std::invalid_argument("scalar_mult beta must be finite");
  CoefficientField c;
  c.name_ = "scalar_mult";
  c.basis_ = P.basis();
  c.m_ = P.m();
  c.noise_dim_ = 1;
  c.anchor_ = Element::zero(c.basis_);
  c.lipschitz_B_ = std::abs(beta) * graph_factor(P, P.m());
  c.b_bounds_.assign(static_cast<std::size_t>(c.m_), 0.0);
  c.b_bounds_[0] = c.lipschitz_B_;
  const BasisSpec basis = c.basis_;
  c.f_impl_ = [basis](int, double, const Element&, std::span<const Element>) {
    return Element::zero(basis);
  };
  c.B_impl_ = [basis, beta](int order, double, const Element& u, std::span<const Element> args) {
    HSOperator out = zero_hs(basis, 1);
    if (order == 0)
      out.cols[0] = beta * u;
    else if (order == 1)
      out.cols[0] = beta * args[0];
    return out;  // second and higher derivatives of a linear map vanish
  };
  return c;
}

CoefficientField CoefficientField::nemytskii(const OperatorPair& P,
                                             std::vector<double> drift_weights,
                                             std::vector<double> diffusion_weights) {
  const int J = static_cast<int>(drift_weights.size());
  const int M = static_cast<int>(diffusion_weights.size());
  if (J == 0 && M == 0) throw std::invalid_argument("nemytskii preset needs at least one weight");
  if (J > P.basis().dim() || M > P.basis().dim())
    throw std::invalid_argument("nemytskii preset has more terms than basis directions");
  for (double w : drift_weights)
    if (!std::isfinite(w)) throw std::invalid_argument("nemytskii drift weight not finite");
  for (double w : diffusion_weights)
    if (!std::isfinite(w)) throw std::invalid_argument("nemytskii diffusion weight not finite");

  CoefficientField c;
  c.name_ = "nemytskii";
  c.basis_ = P.basis();
  c.m_ = P.m();
  c.noise_dim_ = M;
  c.anchor_ = Element::zero(c.basis_);

  // profiles are unit basis directions: term j reads u through <u, e_j> and
  // writes back along e_j, so all graph norms below are exact
  std::vector<double> psi_m(static_cast<std::size_t>(std::max(J, M)));
  for (int j = 0; j < std::max(J, M); ++j)
    psi_m[static_cast<std::size_t>(j)] = P.graph_norm(Element::unit(c.basis_, j), P.m());

  double n1 = 0.0;
  for (int j = 0; j < J; ++j) n1 += std::abs(drift_weights[static_cast<std::size_t>(j)]) * psi_m[static_cast<std::size_t>(j)];
  double n2sq = 0.0;
  for (int l = 0; l < M; ++l) {
    const double a = diffusion_weights[static_cast<std::size_t>(l)] * psi_m[static_cast<std::size_t>(l)];
    n2sq += a * a;
  }
  c.lipschitz_f_ = n1;
  c.lipschitz_B_ = std::sqrt(n2sq);

  c.b_bounds_.assign(static_cast<std::size_t>(c.m_), 0.0);
  for (int order = 1; order <= c.m_; ++order)
    c.b_bounds_[static_cast<std::size_t>(order) - 1] = tanh_derivative_sup(order) * std::sqrt(n2sq);

  const BasisSpec basis = c.basis_;
  c.f_impl_ = [basis, drift_weights](int order, double, const Element& u,
                                     std::span<const Element> args) {
    Element out = Element::zero(basis);
    for (std::size_t j = 0; j < drift_weights.size(); ++j) {
      double term = drift_weights[j] * tanh_derivative(order, u[static_cast<int>(j)]);
      for (const Element& v : args) term *= v[static_cast<int>(j)];
      out[static_cast<int>(j)] += term;
    }
    return out;
  };
  c.B_impl_ = [basis, diffusion_weights](int order, double, const Element& u,
                                         std::span<const Element> args) {
    HSOperator out = zero_hs(basis, static_cast<int>(diffusion_weights.size()));
    for (std::size_t l = 0; l < diffusion_weights.size(); ++l) {
      double term = diffusion_weights[l] * tanh_derivative(order, u[static_cast<int>(l)]);
      for (const Element& v : args) term *= v[static_cast<int>(l)];
      out.cols[l][static_cast<int>(l)] = term;
    }
    return out;
  };
  return c;
}

CoefficientField CoefficientField::preset(const std::string& name, const OperatorPair& P,
                                          const Config& params) {
  if (name == "zero") return zero(P);
  if (name == "additive")
    return additive(P, params.get_real("coefficients", "scale", 0.1),
                    static_cast<int>(params.get_int("coefficients", "noise_dim", 2)));
  if (name == "scalar_mult") return scalar_mult(P, params.get_real("coefficients", "beta", 0.3));
  if (name == "nemytskii")
    return nemytskii(P, params.get_array("coefficients", "drift_weights", {0.5, 0.25}),
                     params.get_array("coefficients", "diffusion_weights", {0.2, 0.1}));
  throw std::invalid_argument("unknown coefficient preset: " + name);
}

CoefficientField CoefficientField::custom(std::string name, BasisSpec basis, int m, int noise_dim,
                                          DerivFn f_impl, HSDerivFn B_impl, double lipschitz_f,
                                          double lipschitz_B, Element anchor) {
  if (m < 1) throw std::invalid_argument("custom field needs m >= 1");
  if (noise_dim < 0) throw std::invalid_argument("custom field needs noise_dim >= 0");
  if (!(anchor.basis() == basis)) throw std::invalid_argument("anchor basis mismatch");
  CoefficientField c;
  c.name_ = std::move(name);
  c.basis_ = basis;
  c.m_ = m;
  c.noise_dim_ = noise_dim;
  c.lipschitz_f_ = lipschitz_f;
  c.lipschitz_B_ = lipschitz_B;
  c.anchor_ = std::move(anchor);
  c.f_impl_ = std::move(f_impl);
  c.B_impl_ = std::move(B_impl);
  c.b_bounds_.assign(static_cast<std::size_t>(m), std::numeric_limits<double>::infinity());
  return c;
}

// ---- sampled regularity check ----------------------------------------------

RegularityCheck check_Hmp(const CoefficientField& c, const OperatorPair& P, int samples,
                          std::uint64_t seed, double tol) {
  if (c.m() > P.m()) throw std::invalid_argument("field regularity order exceeds operator m");
  if (!(c.basis() == P.basis())) throw std::invalid_argument("field/operator basis mismatch");
  if (samples < 1) throw std::invalid_argument("regularity check needs samples >= 1");

  RegularityCheck out;
  out.tol = tol;
  const double N = c.lipschitz_f() + c.lipschitz_B();
  const int k = c.m();
  for (int i = 0; i < samples; ++i) {
    Element x = random_element(c.basis(), seed, 31u, 2u * static_cast<std::uint64_t>(i));
    Element y = random_element(c.basis(), seed, 31u, 2u * static_cast<std::uint64_t>(i) + 1u);
    if (i % 2 == 1) {
      // nearby pair: probes the local quotient rather than the global one
      y *= 1e-3;
      y += x;
    }
    Element d = x;
    d -= y;
    const double sep = norm(d);
    if (sep == 0.0) continue;

    Element fg = c.f(0.0, x);
    fg -= c.f(0.0, y);
    HSOperator bg = c.B(0.0, x);
    bg -= c.B(0.0, y);
    const double num = P.graph_norm(fg, k) + bg.hs_graph_norm(P, k);

    double ratio;
    if (N * sep > 0.0)
      ratio = num / (N * sep);
    else
      ratio = num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    out.rows.push_back({sep, ratio});
    out.worst_ratio = std::max(out.worst_ratio, ratio);
  }

  out.anchor_drift_norm = P.graph_norm(c.f(0.0, c.anchor()), k);
  out.anchor_diffusion_norm = c.B(0.0, c.anchor()).hs_graph_norm(P, k);
  out.pass = out.worst_ratio <= 1.0 + tol && std::isfinite(out.anchor_drift_norm) &&
             std::isfinite(out.anchor_diffusion_norm);
  return out;
}

// ---- finite-difference derivative check ------------------------------------

FdCheck derivative_fd_check(const CoefficientField& c, int order, double t, const Element& u,
                            std::span<const Element> directions, std::span<const double> h_list) {
  if (order < 0 || order >= c.m())
    throw std::invalid_argument("finite-difference check needs 0 <= order < m");
  if (directions.empty()) throw std::invalid_argument("finite-difference check needs directions");
  if (h_list.size() < 2) throw std::invalid_argument("finite-difference check needs >= 2 step sizes");

  // fixed probe arguments for the lower oracle, cycling through directions
  std::vector<Element> probe;
  for (int i = 0; i < order; ++i)
    probe.push_back(directions[static_cast<std::size_t>(i) % directions.size()]);

  FdCheck out;
  for (double h : h_list) {
    double err = 0.0;
    for (const Element& dir : directions) {
      std::vector<Element> upper = probe;
      upper.push_back(dir);

      Element up = u, dn = u;
      axpy(h, dir, up);
      axpy(-h, dir, dn);

      Element f_fd = order == 0 ? c.f(t, up) : c.f_derivative_apply(order, t, up, probe);
      Element f_lo = order == 0 ? c.f(t, dn) : c.f_derivative_apply(order, t, dn, probe);
      f_fd -= f_lo;
      f_fd *= 1.0 / (2.0 * h);
      f_fd -= c.f_derivative_apply(order + 1, t, u, upper);
      err = std::max(err, norm(f_fd));

      HSOperator b_fd = order == 0 ? c.B(t, up) : c.B_derivative_apply(order, t, up, probe);
      HSOperator b_lo = order == 0 ? c.B(t, dn) : c.B_derivative_apply(order, t, dn, probe);
      b_fd -= b_lo;
      b_fd *= 1.0 / (2.0 * h);
      b_fd -= c.B_derivative_apply(order + 1, t, u, upper);
      err = std::max(err, b_fd.hs_norm());
    }
    out.rows.push_back({h, err});
    out.max_err = std::max(out.max_err, err);
  }

  if (out.max_err <= 1e-12) {
    out.slope_valid = false;  // oracle and difference agree to rounding
    out.pass = true;
    return out;
  }
  std::vector<double> hs, es;
  for (const auto& r : out.rows) {
    hs.push_back(r.h);
    es.push_back(r.err);
  }
  out.slope = loglog_slope(hs, es, /*drop_first=*/true);
  out.slope_valid = true;
  out.pass = out.slope >= 1.7;  // central differences: 2, more if odd terms vanish
  return out;
}

}  // namespace pertflow
