#pragma once

// The derivative hierarchy in eps: correction-term combinatorics, a joint
// solver for (u^0,...,u^n) sharing one noise path, finite-difference
// validation of each level, and Taylor-remainder sweeps around eps = 0.

#include <cstdint>
#include <span>
#include <vector>

#include "pertflow/coefficients.hpp"
#include "pertflow/noise.hpp"
#include "pertflow/operators.hpp"
#include "pertflow/solver.hpp"
#include "pertflow/spectral.hpp"

namespace pertflow {

// one summand of the order-n correction: coefficient * D^j(u)(u^{n_1},...,u^{n_j})
struct PartitionTerm {
  std::vector<int> sizes;  // descending, sum = n, at least 2 entries
  std::int64_t coefficient = 0;

  int blocks() const { return static_cast<int>(sizes.size()); }
  bool operator==(const PartitionTerm&) const = default;
};

// all part-multisets of n with >= 2 blocks, each carrying its set-partition
// count n! / (prod n_i! * prod_s r_s!); order n = 1 yields the empty list
std::vector<PartitionTerm> correction_terms(int n);

struct RecursionCheck {
  int n = 0;
  std::vector<PartitionTerm> expected;  // correction_terms(n)
  std::vector<PartitionTerm> derived;   // differentiate order n-1, add the D''(u^{n-1},u^1) seed
  bool pass = false;
};

// derives the order-n list from the order-(n-1) list by the chain rule and
// compares against the direct enumeration
RecursionCheck check_phi_recursion(int n);

struct SensitivitySolution {
  double eps = 0.0;
  int order = 0;
  std::vector<SolutionPath> levels;  // order+1 paths; levels[0] is the base solution
};

// joint exponential-Euler pass: level k evolves with drift
// f'(u0)u^k + phi_k - k G u^{k-1} and diffusion B'(u0)u^k + Phi_k, reading
// only levels below it, so an order n-1 rerun is a bit-identical prefix
SensitivitySolution solve_hierarchy(const OperatorPair& P, const CoefficientField& c, double eps,
                                    const Element& u0, int order, const TimeGrid& grid,
                                    const WienerDriver& driver, std::uint64_t path);
SensitivitySolution solve_hierarchy_on(const OperatorPair& P, const CoefficientField& c, double eps,
                                       const Element& u0, int order, const TimeGrid& grid,
                                       std::span<const std::vector<double>> increments);

struct FdHierarchyCheck {
  struct Row {
    double h;
    double value;            // primary moment (order p) of sup |w|
    double std_error;
    double value_secondary;  // moment of order max(1, p/k), reported alongside
    double se_secondary;
  };
  std::vector<Row> rows;
  int k = 1;
  int graph_k = 0;  // norms taken in D(G^{m-k})
  double p = 2.0;
  double p_secondary = 1.0;
  double slope = 0.0;
  bool pass = false;
};

// w^k(h) := (u^{k-1} at eps+h  -  u^{k-1} at eps)/h - u^k at eps, all levels
// driven by the same increments; tabulates its sup-norm moments over h_list
// (coarsest h first) and fits the decay slope
FdHierarchyCheck finite_difference_check(const OperatorPair& P, const CoefficientField& c,
                                         double eps, const Element& u0, int k,
                                         std::span<const double> h_list, const TimeGrid& grid,
                                         const WienerDriver& driver, int paths, double p);

struct TaylorCheck {
  struct Row {
    double eps;
    double value;
    double std_error;
    double value_secondary;  // moment of order max(1, p/(K+1))
    double se_secondary;
  };
  std::vector<Row> rows;
  int K = 1;
  int graph_k = 0;  // norms taken in D(G^{max(0, m-K-1)})
  double p = 2.0;
  double p_secondary = 1.0;
  double slope = 0.0;
  bool pass = false;
};

// hierarchy at eps = 0, partial sum T_K(eps) = sum_{k<=K} eps^k/k! u^k,
// remainder u_eps - T_K(eps) swept over eps_list (largest first)
TaylorCheck taylor_remainder(const OperatorPair& P, const CoefficientField& c, const Element& u0,
                             int K, std::span<const double> eps_list, const TimeGrid& grid,
                             const WienerDriver& driver, int paths, double p);

struct CorrectionBoundCheck {
  struct Row {
    int level;
    double t;
    double term_norm;  // HS graph norm of one evaluated correction summand
    double bound;      // |D^j| sup bound times the product of argument norms
  };
  std::vector<Row> rows;
  double worst_ratio = 0.0;
  bool pass = false;
};

// instruments each diffusion correction summand of levels >= 2 against the
// product bound, sampling every `stride`-th grid node of a solved hierarchy
CorrectionBoundCheck check_correction_bounds(const OperatorPair& P, const CoefficientField& c,
                                             const SensitivitySolution& sol, int stride);

}  // namespace pertflow
