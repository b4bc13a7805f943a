#pragma once

// Exponential-Euler time stepping for the base equation and linear forced
// equations, plus Monte Carlo estimation of path-sup moment norms.  The
// semigroup factor is applied exactly per backend, so the parabolic part never
// constrains the step size (the eps sweeps include both eps = 0 and eps = 1).

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pertflow/coefficients.hpp"
#include "pertflow/noise.hpp"
#include "pertflow/operators.hpp"
#include "pertflow/spectral.hpp"

namespace pertflow {

struct TimeGrid {
  double T = 0.0;
  int steps = 0;

  TimeGrid(double T_, int steps_);
  double dt() const { return T / steps; }
  double time(int s) const { return T * s / steps; }
};

struct SolutionPath {
  TimeGrid grid;
  double eps = 0.0;
  std::vector<Element> states;            // steps + 1 entries, states[0] = u0
  std::uint64_t noise_fingerprint = 0xcbf29ce484222325ull;  // FNV over consumed increments
};

// u_{s+1} = S_{A+eps G}(dt) [ u_s + dt f(t_s,u_s) + B(t_s,u_s) dW_s ]
SolutionPath solve_base(const OperatorPair& P, const CoefficientField& c, double eps,
                        const Element& u0, const TimeGrid& grid, const WienerDriver& driver,
                        std::uint64_t path);

// same recursion on caller-supplied increment rows (row s feeds step s); this
// is the seam the adaptedness and common-random-number tests drive directly
SolutionPath solve_base_on(const OperatorPair& P, const CoefficientField& c, double eps,
                           const Element& u0, const TimeGrid& grid,
                           std::span<const std::vector<double>> increments);

using LinearDrift = std::function<Element(double, const Element&)>;
using LinearDiffusion = std::function<HSOperator(double, const Element&)>;

// v_{s+1} = S_{A+eps G}(dt) [ v_s + dt (V(t_s)v_s + g_s) + Sigma(t_s)v_s dW_s ];
// null V or Sigma mean the corresponding term is absent
SolutionPath solve_linear_forced(const OperatorPair& P, double eps, const LinearDrift& V,
                                 const LinearDiffusion& Sigma, std::span<const Element> forcing,
                                 const TimeGrid& grid, const WienerDriver& driver,
                                 std::uint64_t path, const Element& v0);

struct CpNormEstimate {
  double p = 2.0;
  int graph_k = 0;
  int paths = 0;
  double value = 0.0;
  double std_error = 0.0;
};

// (mean over paths of (sup over grid of |state|_{D(G^k)})^p)^{1/p}; the
// standard error comes from the path-level variance of the p-th powers
CpNormEstimate cp_norm(std::span<const SolutionPath> ensemble, double p, int k,
                       const OperatorPair& P);

// same moments from caller-supplied per-path sup norms (streaming callers
// avoid keeping whole paths alive just to take their sup)
CpNormEstimate cp_norm_from_sups(std::span<const double> sups, double p, int k);

struct EpsContinuityCheck {
  struct Row {
    double h;
    double value;  // cp_norm of u_{eps+h} - u_eps under common random numbers
    double std_error;
  };
  std::vector<Row> rows;
  double tol = 0.0;
  bool monotone = false;
  double final_value = 0.0;
  bool pass = false;
};

EpsContinuityCheck check_continuity_in_eps(const OperatorPair& P, const CoefficientField& c,
                                           const Element& u0, double eps,
                                           std::span<const double> h_list, const TimeGrid& grid,
                                           const WienerDriver& driver, int paths, double p, int k,
                                           double tol);

}  // namespace pertflow
