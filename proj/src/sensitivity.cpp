#include "pertflow/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "pertflow/config.hpp"

namespace pertflow {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void enumerate_partitions(int remaining, int max_part, std::vector<int>& acc,
                          std::vector<std::vector<int>>& out) {
  if (remaining == 0) {
    out.push_back(acc);
    return;
  }
  for (int part = std::min(remaining, max_part); part >= 1; --part) {
    acc.push_back(part);
    enumerate_partitions(remaining - part, part, acc, out);
    acc.pop_back();
  }
}

std::int64_t set_partition_count(int n, const std::vector<int>& sizes) {
  // n! / (prod sizes! * prod repetitions!)
  double c = factorial(n);
  for (int s : sizes) c /= factorial(s);
  int run = 1;
  for (std::size_t i = 1; i <= sizes.size(); ++i) {
    if (i < sizes.size() && sizes[i] == sizes[i - 1]) {
      ++run;
    } else {
      c /= factorial(run);
      run = 1;
    }
  }
  return static_cast<std::int64_t>(std::llround(c));
}

std::vector<PartitionTerm> sorted_terms(std::map<std::vector<int>, std::int64_t> bag) {
  std::vector<PartitionTerm> out;
  for (auto& [sizes, coeff] : bag) out.push_back({sizes, coeff});
  // stable presentation: fewer blocks first, then lexicographic on sizes
  std::sort(out.begin(), out.end(), [](const PartitionTerm& a, const PartitionTerm& b) {
    if (a.blocks() != b.blocks()) return a.blocks() < b.blocks();
    return a.sizes > b.sizes;
  });
  return out;
}

constexpr double kDivergenceGuard = 1e12;

void hierarchy_driver_check(const TimeGrid& grid, const WienerDriver& driver, int needed_dim) {
  if (driver.T != grid.T)
    throw std::invalid_argument("grid horizon does not match driver horizon");
  if (driver.master_steps % grid.steps != 0)
    throw std::invalid_argument("grid steps must divide driver master steps");
  if (needed_dim > driver.dim)
    throw std::invalid_argument("driver carries fewer noise components than required");
}

// joint state of levels 0..order advanced one exponential-Euler step at a
// time; level k reads only the current states of levels <= k (and u^0), so
// truncating `order` leaves the lower levels bit-identical
class HierarchyStepper {
 public:
  HierarchyStepper(const OperatorPair& P, const CoefficientField& c, double eps, const Element& u0,
                   int order, double dt)
      : P_(&P), c_(&c), dt_(dt), order_(order), prop_(P.propagator(eps, dt)) {
    if (order < 0) throw std::invalid_argument("hierarchy order must be >= 0");
    if (order > c.m())
      throw std::invalid_argument("hierarchy order exceeds the available derivative oracles");
    if (!(u0.basis() == P.basis())) throw std::invalid_argument("initial datum basis mismatch");
    if (!u0.finite()) throw std::invalid_argument("initial datum not finite");
    terms_.resize(static_cast<std::size_t>(order) + 1);
    for (int k = 1; k <= order; ++k) terms_[static_cast<std::size_t>(k)] = correction_terms(k);
    cur_.assign(static_cast<std::size_t>(order) + 1, Element::zero(P.basis()));
    cur_[0] = u0;
    next_ = cur_;
  }

  void step(double t, std::span<const double> dw) {
    const int M = c_->noise_dim();
    if (M > 0 && static_cast<int>(dw.size()) < M)
      throw std::invalid_argument("increment row narrower than the noise dimension");
    const std::span<const double> dwm = M > 0 ? dw.first(static_cast<std::size_t>(M))
                                              : std::span<const double>();

    Element stage = cur_[0];
    axpy(dt_, c_->f(t, cur_[0]), stage);
    if (M > 0) stage += c_->B(t, cur_[0]).apply(dwm);
    next_[0] = prop_.apply(stage);

    for (int k = 1; k <= order_; ++k) {
      const std::span<const Element> uk(&cur_[static_cast<std::size_t>(k)], 1);
      Element drift = c_->f_derivative_apply(1, t, cur_[0], uk);
      for (const PartitionTerm& term : terms_[static_cast<std::size_t>(k)]) {
        gather_args(term);
        axpy(static_cast<double>(term.coefficient),
             c_->f_derivative_apply(term.blocks(), t, cur_[0], scratch_), drift);
      }
      drift -= static_cast<double>(k) * P_->apply_G(cur_[static_cast<std::size_t>(k) - 1]);

      stage = cur_[static_cast<std::size_t>(k)];
      axpy(dt_, drift, stage);
      if (M > 0) {
        HSOperator op = c_->B_derivative_apply(1, t, cur_[0], uk);
        for (const PartitionTerm& term : terms_[static_cast<std::size_t>(k)]) {
          gather_args(term);
          HSOperator part = c_->B_derivative_apply(term.blocks(), t, cur_[0], scratch_);
          part *= static_cast<double>(term.coefficient);
          op += part;
        }
        stage += op.apply(dwm);
      }
      next_[static_cast<std::size_t>(k)] = prop_.apply(stage);
    }

    for (int k = 0; k <= order_; ++k) {
      const Element& u = next_[static_cast<std::size_t>(k)];
      if (!u.finite() || norm(u) > kDivergenceGuard)
        throw std::runtime_error("hierarchy level " + std::to_string(k) + " diverged");
    }
    std::swap(cur_, next_);
  }

  const std::vector<Element>& states() const { return cur_; }

 private:
  void gather_args(const PartitionTerm& term) {
    scratch_.clear();
    for (int s : term.sizes) scratch_.push_back(cur_[static_cast<std::size_t>(s)]);
  }

  const OperatorPair* P_;
  const CoefficientField* c_;
  double dt_;
  int order_;
  OperatorPair::Propagator prop_;
  std::vector<std::vector<PartitionTerm>> terms_;
  std::vector<Element> cur_, next_;
  std::vector<Element> scratch_;
};

std::uint64_t fold_rows(std::span<const std::vector<double>> rows, int used) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& row : rows)
    h = fnv1a64(row.data(), static_cast<std::size_t>(used) * sizeof(double), h);
  return h;
}

}  // namespace

// ---- correction-term combinatorics -----------------------------------------

std::vector<PartitionTerm> correction_terms(int n) {
  if (n < 1 || n > 20) throw std::invalid_argument("correction order outside {1..20}");
  std::vector<std::vector<int>> partitions;
  std::vector<int> acc;
  enumerate_partitions(n, n, acc, partitions);
  std::map<std::vector<int>, std::int64_t> bag;
  for (const auto& sizes : partitions) {
    if (sizes.size() < 2) continue;  // the j = 1 block is the D'(u)u^n term, not a correction
    bag[sizes] = set_partition_count(n, sizes);
  }
  return sorted_terms(std::move(bag));
}

RecursionCheck check_phi_recursion(int n) {
  if (n < 2) throw std::invalid_argument("recursion check needs n >= 2");
  RecursionCheck out;
  out.n = n;
  out.expected = correction_terms(n);

  std::map<std::vector<int>, std::int64_t> bag;
  // seed: differentiating D'(u)u^{n-1} produces D''(u)(u^{n-1}, u^1)
  {
    std::vector<int> seed = {n - 1, 1};
    std::sort(seed.rbegin(), seed.rend());
    bag[seed] += 1;
  }
  for (const PartitionTerm& term : correction_terms(n - 1)) {
    // chain-rule hit on the base point: one extra size-1 argument
    std::vector<int> grown = term.sizes;
    grown.push_back(1);
    std::sort(grown.rbegin(), grown.rend());
    bag[grown] += term.coefficient;
    // product-rule hits on the arguments: one size s becomes s+1, once per
    // occurrence of s
    std::vector<int> distinct = term.sizes;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (int s : distinct) {
      const auto mult = std::count(term.sizes.begin(), term.sizes.end(), s);
      std::vector<int> bumped = term.sizes;
      *std::find(bumped.begin(), bumped.end(), s) += 1;
      std::sort(bumped.rbegin(), bumped.rend());
      bag[bumped] += term.coefficient * static_cast<std::int64_t>(mult);
    }
  }
  out.derived = sorted_terms(std::move(bag));
  out.pass = out.derived == out.expected;
  return out;
}

// ---- hierarchy solver -------------------------------------------------------

SensitivitySolution solve_hierarchy_on(const OperatorPair& P, const CoefficientField& c, double eps,
                                       const Element& u0, int order, const TimeGrid& grid,
                                       std::span<const std::vector<double>> increments) {
  if (!(c.basis() == P.basis())) throw std::invalid_argument("field/operator basis mismatch");
  const int M = c.noise_dim();
  if (M > 0 && static_cast<int>(increments.size()) < grid.steps)
    throw std::invalid_argument("not enough increment rows for the grid");

  HierarchyStepper stepper(P, c, eps, u0, order, grid.dt());

  SensitivitySolution out;
  out.eps = eps;
  out.order = order;
  const std::uint64_t fp =
      M > 0 ? fold_rows(increments.subspan(0, static_cast<std::size_t>(grid.steps)), M)
            : 0xcbf29ce484222325ull;
  for (int k = 0; k <= order; ++k) {
    SolutionPath path{grid, eps, {}, fp};
    path.states.reserve(static_cast<std::size_t>(grid.steps) + 1);
    path.states.push_back(stepper.states()[static_cast<std::size_t>(k)]);
    out.levels.push_back(std::move(path));
  }
  for (int s = 0; s < grid.steps; ++s) {
    stepper.step(grid.time(s), M > 0 ? std::span<const double>(increments[static_cast<std::size_t>(s)])
                                     : std::span<const double>());
    for (int k = 0; k <= order; ++k)
      out.levels[static_cast<std::size_t>(k)].states.push_back(
          stepper.states()[static_cast<std::size_t>(k)]);
  }
  return out;
}

SensitivitySolution solve_hierarchy(const OperatorPair& P, const CoefficientField& c, double eps,
                                    const Element& u0, int order, const TimeGrid& grid,
                                    const WienerDriver& driver, std::uint64_t path) {
  std::vector<std::vector<double>> rows;
  if (c.noise_dim() > 0) {
    hierarchy_driver_check(grid, driver, c.noise_dim());
    rows = increments(driver, path, grid.steps);
  }
  return solve_hierarchy_on(P, c, eps, u0, order, grid, rows);
}

// ---- finite-difference validation ------------------------------------------

FdHierarchyCheck finite_difference_check(const OperatorPair& P, const CoefficientField& c,
                                         double eps, const Element& u0, int k,
                                         std::span<const double> h_list, const TimeGrid& grid,
                                         const WienerDriver& driver, int paths, double p) {
  if (k < 1 || k > c.m()) throw std::invalid_argument("difference order outside {1..m}");
  if (h_list.size() < 2) throw std::invalid_argument("need at least two step sizes");
  if (paths < 1) throw std::invalid_argument("need at least one path");
  const int M = c.noise_dim();
  if (M > 0) hierarchy_driver_check(grid, driver, M);

  FdHierarchyCheck out;
  out.k = k;
  out.graph_k = std::max(0, c.m() - k);
  out.p = p;
  out.p_secondary = std::max(1.0, p / k);

  std::vector<std::vector<double>> sups(h_list.size());
  for (auto& s : sups) s.reserve(static_cast<std::size_t>(paths));

  for (int path = 0; path < paths; ++path) {
    std::vector<std::vector<double>> rows;
    if (M > 0) rows = increments(driver, static_cast<std::uint64_t>(path), grid.steps);

    HierarchyStepper main(P, c, eps, u0, k, grid.dt());
    std::vector<HierarchyStepper> perts;
    perts.reserve(h_list.size());
    for (double h : h_list) perts.emplace_back(P, c, eps + h, u0, k - 1, grid.dt());

    std::vector<double> path_sup(h_list.size(), 0.0);
    for (int s = 0; s < grid.steps; ++s) {
      const double t = grid.time(s);
      const std::span<const double> row =
          M > 0 ? std::span<const double>(rows[static_cast<std::size_t>(s)])
                : std::span<const double>();
      main.step(t, row);
      for (std::size_t j = 0; j < perts.size(); ++j) {
        perts[j].step(t, row);
        Element w = perts[j].states()[static_cast<std::size_t>(k) - 1];
        w -= main.states()[static_cast<std::size_t>(k) - 1];
        w *= 1.0 / h_list[j];
        w -= main.states()[static_cast<std::size_t>(k)];
        path_sup[j] = std::max(path_sup[j], P.graph_norm(w, out.graph_k));
      }
    }
    for (std::size_t j = 0; j < h_list.size(); ++j) sups[j].push_back(path_sup[j]);
  }

  std::vector<double> hs, vals;
  for (std::size_t j = 0; j < h_list.size(); ++j) {
    const CpNormEstimate a = cp_norm_from_sups(sups[j], p, out.graph_k);
    const CpNormEstimate b = cp_norm_from_sups(sups[j], out.p_secondary, out.graph_k);
    out.rows.push_back({h_list[j], a.value, a.std_error, b.value, b.std_error});
    hs.push_back(h_list[j]);
    vals.push_back(a.value);
  }
  out.slope = loglog_slope(hs, vals, /*drop_first=*/true);
  out.pass = out.slope >= 0.5;
  return out;
}

// ---- Taylor remainder sweep -------------------------------------------------

TaylorCheck taylor_remainder(const OperatorPair& P, const CoefficientField& c, const Element& u0,
                             int K, std::span<const double> eps_list, const TimeGrid& grid,
                             const WienerDriver& driver, int paths, double p) {
  if (K < 1 || K + 1 > c.m())
    throw std::invalid_argument("expansion order needs 1 <= K and K+1 <= m");
  if (eps_list.size() < 2) throw std::invalid_argument("need at least two expansion points");
  if (paths < 1) throw std::invalid_argument("need at least one path");
  const int M = c.noise_dim();
  if (M > 0) hierarchy_driver_check(grid, driver, M);

  TaylorCheck out;
  out.K = K;
  out.graph_k = std::max(0, c.m() - K - 1);
  out.p = p;
  out.p_secondary = std::max(1.0, p / (K + 1));

  std::vector<std::vector<double>> sups(eps_list.size());
  for (auto& s : sups) s.reserve(static_cast<std::size_t>(paths));

  for (int path = 0; path < paths; ++path) {
    std::vector<std::vector<double>> rows;
    if (M > 0) rows = increments(driver, static_cast<std::uint64_t>(path), grid.steps);

    HierarchyStepper hier(P, c, 0.0, u0, K, grid.dt());
    std::vector<HierarchyStepper> bases;
    bases.reserve(eps_list.size());
    for (double eps : eps_list) bases.emplace_back(P, c, eps, u0, 0, grid.dt());

    std::vector<double> path_sup(eps_list.size(), 0.0);
    for (int s = 0; s < grid.steps; ++s) {
      const double t = grid.time(s);
      const std::span<const double> row =
          M > 0 ? std::span<const double>(rows[static_cast<std::size_t>(s)])
                : std::span<const double>();
      hier.step(t, row);
      for (std::size_t j = 0; j < bases.size(); ++j) {
        bases[j].step(t, row);
        Element r = bases[j].states()[0];
        double scale = 1.0;
        for (int kk = 0; kk <= K; ++kk) {
          axpy(-scale, hier.states()[static_cast<std::size_t>(kk)], r);
          scale *= eps_list[j] / (kk + 1);
        }
        path_sup[j] = std::max(path_sup[j], P.graph_norm(r, out.graph_k));
      }
    }
    for (std::size_t j = 0; j < eps_list.size(); ++j) sups[j].push_back(path_sup[j]);
  }

  std::vector<double> es, vals;
  for (std::size_t j = 0; j < eps_list.size(); ++j) {
    const CpNormEstimate a = cp_norm_from_sups(sups[j], p, out.graph_k);
    const CpNormEstimate b = cp_norm_from_sups(sups[j], out.p_secondary, out.graph_k);
    out.rows.push_back({eps_list[j], a.value, a.std_error, b.value, b.std_error});
    es.push_back(eps_list[j]);
    vals.push_back(a.value);
  }
  out.slope = loglog_slope(es, vals, /*drop_first=*/true);
  out.pass = out.slope >= K + 0.7;
  return out;
}

// ---- correction bound instrumentation ---------------------------------------

CorrectionBoundCheck check_correction_bounds(const OperatorPair& P, const CoefficientField& c,
                                             const SensitivitySolution& sol, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  CorrectionBoundCheck out;
  const TimeGrid& grid = sol.levels.front().grid;
  for (int n = 2; n <= sol.order; ++n) {
    const int graph_k = std::max(0, c.m() - n);
    for (const PartitionTerm& term : correction_terms(n)) {
      for (int s = 0; s <= grid.steps; s += stride) {
        const double t = grid.time(s);
        const Element& base = sol.levels[0].states[static_cast<std::size_t>(s)];
        std::vector<Element> args;
        double arg_prod = 1.0;
        for (int sz : term.sizes) {
          const Element& u = sol.levels[static_cast<std::size_t>(sz)].states[static_cast<std::size_t>(s)];
          args.push_back(u);
          arg_prod *= norm(u);
        }
        const double term_norm =
            c.B_derivative_apply(term.blocks(), t, base, args).hs_graph_norm(P, graph_k);
        const double bound = c.b_derivative_bound(term.blocks()) * arg_prod;
        out.rows.push_back({n, t, term_norm, bound});
        const double ratio = term_norm <= 1e-300 ? 0.0 : term_norm / bound;
        out.worst_ratio = std::max(out.worst_ratio, ratio);
      }
    }
  }
  out.pass = out.worst_ratio <= 1.0 + 1e-9;
  return out;
}

}  // namespace pertflow
