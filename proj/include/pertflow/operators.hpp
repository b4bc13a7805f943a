#pragma once
// The operator pair (A, G) behind the perturbed generator A + eps*G.  Two
// backends: fourier multipliers (A = transport, per-mode skew rotation blocks;
// G = Laplacian, symbol k^2 — every growth bound holds exactly with alphas 0)
// and dense matrices with monotone symmetric parts (exercises non-commuting
// Trotter products and estimated alphas).  All operations are pure; a pair is
// immutable after construction.

#include "pertflow/spectral.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pertflow {

// Row-major square matrix; the dense backend keeps Eigen out of the headers.
struct DenseMatrix {
  int n = 0;
  std::vector<double> a;  // n*n entries

  DenseMatrix() = default;
  DenseMatrix(int n, std::vector<double> entries);
  static DenseMatrix zero(int n);
  static DenseMatrix identity(int n);
  static DenseMatrix load_csv(const std::string& path);

  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
};

struct AlphaEstimate {
  std::vector<double> alphas;  // index j holds alpha_{j+1}, j = 0..m
  bool heuristic = false;
};

struct ResolventQuery {
  double lambda = 1.0;
  double eps = 0.0;
};

class OperatorPair {
 public:
  // transport x Laplacian multipliers on modes 0..K; alphas all zero
  static OperatorPair fourier(int K, int m);
  // matrices with positive-semidefinite symmetric parts (monotonicity is
  // validated to -1e-10); when alphas are absent they are estimated, falling
  // back to sampled upper bounds if G is singular
  static OperatorPair dense(const DenseMatrix& A, const DenseMatrix& G, int m,
                            std::optional<std::vector<double>> alphas = std::nullopt);

  BasisKind backend() const { return basis_.kind; }
  const BasisSpec& basis() const { return basis_; }
  int m() const { return m_; }
  const std::vector<double>& alphas() const { return alphas_; }
  bool alphas_heuristic() const { return alphas_heuristic_; }
  double alpha(int k) const;  // alpha_k, k in {1..m+1}

  Element apply_A(const Element& phi) const;
  Element apply_G(const Element& phi) const;
  Element apply_G_power(const Element& phi, int k) const;

  Element semigroup(double eps, double t, const Element& phi) const;    // S_{A+eps G}(t)
  Element semigroup_A(double t, const Element& phi) const;              // S_A(t)
  Element semigroup_G(double eps, double t, const Element& phi) const;  // S_{eps G}(t)
  Element trotter(double eps, double t, int n, const Element& phi) const;
  Element resolvent(const ResolventQuery& q, const Element& phi) const;

  double graph_norm(const Element& phi, int k) const;  // requires k <= m+1
  LinearOp g_op() const;                               // phi -> G phi

  // The solver applies S_{A+eps G}(dt) once per step; the dense backend
  // precomputes the exponential here instead of per call.
  class Propagator {
   public:
    Element apply(const Element& phi) const;

   private:
    friend class OperatorPair;
    const OperatorPair* pair_ = nullptr;
    double eps_ = 0.0, dt_ = 0.0;
    std::vector<double> dense_exp_;  // row-major, dense backend only
    std::vector<double> cosv_, sinv_, decay_;  // per mode, fourier backend
  };
  Propagator propagator(double eps, double dt) const;

 private:
  OperatorPair() = default;
  void validate_eps_t(double eps, double t) const;

  BasisSpec basis_{};
  int m_ = 0;
  std::vector<double> alphas_;
  bool alphas_heuristic_ = false;
  DenseMatrix A_, G_;  // dense backend only
};

// ---- growth-bound and convergence checks (each returns a small report the
// ---- harness embeds; `pass` summarises, rows stay re-checkable)

struct BoundCheck {
  struct Row {
    int k;
    double t;
    double eps;
    double max_ratio;  // |G^k S(t) phi| / (e^{alpha_k t} |G^k phi|)
    int evals;
  };
  std::vector<Row> rows;
  double tol = 1e-10;
  double worst = 0.0;
  bool pass = true;
};

BoundCheck check_assumption_h1(const OperatorPair& P, int samples, std::span<const double> t_grid,
                               std::uint64_t seed, double tol = 1e-10);
BoundCheck check_semigroup_bound_perturbed(const OperatorPair& P, double eps, int samples,
                                           std::span<const double> t_grid, std::uint64_t seed,
                                           double tol = 1e-10);

struct ResolventCheck {
  struct Row {
    double h;
    double diff;  // max over samples of |R_lambda(eps+h)x - R_lambda(eps)x|_{D(G^k)} / |x|_{D(G^{k+1})}
  };
  std::vector<Row> rows;
  double slope = 0.0;        // log-log fit, coarsest point discarded
  bool monotone = false;
  double final_diff = 0.0;
  double bound_worst = 0.0;  // max of |G R_lambda phi| * (lambda - alpha_1) / |G phi|
  double tol = 0.0;
  bool pass = false;
};

ResolventCheck check_resolvent_convergence(const OperatorPair& P, double lambda, double eps,
                                           std::span<const double> h_list, int k, int samples,
                                           std::uint64_t seed, double tol);

struct ContinuityCheck {
  struct Row {
    double t;
    double gap;  // graph_norm(S(t)phi - phi, G, k)
  };
  std::vector<Row> rows;
  double tol = 0.0;
  bool pass = false;
};

ContinuityCheck check_strong_continuity(const OperatorPair& P, double eps, int k, const Element& phi,
                                        std::span<const double> t_list, double tol);

AlphaEstimate estimate_alphas(const OperatorPair& P, bool allow_heuristic = false,
                              int samples = 10000, std::uint64_t seed = 0x616c7068u);

// smallest constant C with graph_norm(v, k) <= C |v| over the whole space:
// closed form for the multiplier backend, an eigenvalue problem for dense.
double graph_factor(const OperatorPair& P, int k);

// least-squares slope of log(y) against log(x); the coarsest point is
// pre-asymptotic and discarded by default.  Used by every convergence table.
double loglog_slope(std::span<const double> x, std::span<const double> y, bool drop_first = true);

// Gaussian element with independent unit coefficients; `stream` separates
// independent uses of the same seed.
Element random_element(const BasisSpec& basis, std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t index);

}  // namespace pertflow
