#include "pertflow/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "pertflow/config.hpp"

namespace pertflow {

namespace {

constexpr double kDivergenceGuard = 1e12;

void guard_norm(const Element& u, int step) {
  if (!u.finite() || norm(u) > kDivergenceGuard)
    throw std::runtime_error("solution diverged at step " + std::to_string(step));
}

std::uint64_t fold_increments(std::uint64_t h, std::span<const double> row, int used) {
  return fnv1a64(row.data(), static_cast<std::size_t>(used) * sizeof(double), h);
}

void check_driver(const TimeGrid& grid, const WienerDriver& driver, int needed_dim) {
  if (driver.T != grid.T)
    throw std::invalid_argument("grid horizon does not match driver horizon");
  if (driver.master_steps % grid.steps != 0)
    throw std::invalid_argument("grid steps must divide driver master steps");
  if (needed_dim > driver.dim)
    throw std::invalid_argument("driver carries fewer noise components than required");
}

}  // namespace

// delta method: value = mu^(1/p), se = (1/p) mu^(1/p-1) * se(mu)
CpNormEstimate cp_norm_from_sups(std::span<const double> sups, double p, int k) {
  if (sups.empty()) throw std::invalid_argument("empty ensemble");
  if (!(p >= 1.0)) throw std::invalid_argument("moment order p must be >= 1");
  CpNormEstimate out;
  out.p = p;
  out.graph_k = k;
  out.paths = static_cast<int>(sups.size());
  const std::size_t n = sups.size();
  double mean = 0.0;
  for (double s : sups) mean += std::pow(s, p);
  mean /= static_cast<double>(n);
  out.value = mean > 0.0 ? std::pow(mean, 1.0 / p) : 0.0;
  if (n >= 2 && mean > 0.0) {
    double var = 0.0;
    for (double s : sups) {
      const double d = std::pow(s, p) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n - 1);
    out.std_error = (1.0 / p) * std::pow(mean, 1.0 / p - 1.0) * std::sqrt(var / static_cast<double>(n));
  }
  return out;
}

TimeGrid::TimeGrid(double T_, int steps_) : T(T_), steps(steps_) {
  if (!(T > 0.0)) throw std::invalid_argument("grid horizon must be positive");
  if (steps < 1) throw std::invalid_argument("grid needs at least one step");
}

SolutionPath solve_base_on(const OperatorPair& P, const CoefficientField& c, double eps,
                           const Element& u0, const TimeGrid& grid,
                           std::span<const std::vector<double>> increments) {
  if (!(c.basis() == P.basis())) throw std::invalid_argument("field/operator basis mismatch");
  if (!(u0.basis() == P.basis())) throw std::invalid_argument("initial datum basis mismatch");
  if (!u0.finite()) throw std::invalid_argument("initial datum not finite");
  const int M = c.noise_dim();
  if (M > 0 && static_cast<int>(increments.size()) < grid.steps)
    throw std::invalid_argument("not enough increment rows for the grid");

  const double dt = grid.dt();
  const OperatorPair::Propagator prop = P.propagator(eps, dt);

  SolutionPath out{grid, eps, {}, 0xcbf29ce484222325ull};
  out.states.reserve(static_cast<std::size_t>(grid.steps) + 1);
  out.states.push_back(u0);

  Element u = u0;
  for (int s = 0; s < grid.steps; ++s) {
    const double t = grid.time(s);
    Element stage = u;
    axpy(dt, c.f(t, u), stage);
    if (M > 0) {
      const std::vector<double>& row = increments[static_cast<std::size_t>(s)];
      if (static_cast<int>(row.size()) < M)
        throw std::invalid_argument("increment row narrower than the noise dimension");
      stage += c.B(t, u).apply(std::span<const double>(row.data(), static_cast<std::size_t>(M)));
      out.noise_fingerprint = fold_increments(out.noise_fingerprint, row, M);
    }
    u = prop.apply(stage);
    guard_norm(u, s + 1);
    out.states.push_back(u);
  }
  return out;
}

SolutionPath solve_base(const OperatorPair& P, const CoefficientField& c, double eps,
                        const Element& u0, const TimeGrid& grid, const WienerDriver& driver,
                        std::uint64_t path) {
  const int M = c.noise_dim();
  std::vector<std::vector<double>> rows;
  if (M > 0) {
    check_driver(grid, driver, M);
    rows = increments(driver, path, grid.steps);
  }
  return solve_base_on(P, c, eps, u0, grid, rows);
}

SolutionPath solve_linear_forced(const OperatorPair& P, double eps, const LinearDrift& V,
                                 const LinearDiffusion& Sigma, std::span<const Element> forcing,
                                 const TimeGrid& grid, const WienerDriver& driver,
                                 std::uint64_t path, const Element& v0) {
  if (!(v0.basis() == P.basis())) throw std::invalid_argument("initial datum basis mismatch");
  if (!forcing.empty() && static_cast<int>(forcing.size()) < grid.steps)
    throw std::invalid_argument("forcing path shorter than the grid");

  const double dt = grid.dt();
  const OperatorPair::Propagator prop = P.propagator(eps, dt);

  SolutionPath out{grid, eps, {}, 0xcbf29ce484222325ull};
  out.states.reserve(static_cast<std::size_t>(grid.steps) + 1);
  out.states.push_back(v0);

  const bool noisy = static_cast<bool>(Sigma);
  IncrementView view{};
  if (noisy) {
    check_driver(grid, driver, 0);
    view = make_view(driver, path, grid.steps);
  }

  Element v = v0;
  for (int s = 0; s < grid.steps; ++s) {
    const double t = grid.time(s);
    Element stage = v;
    if (V) axpy(dt, V(t, v), stage);
    if (!forcing.empty()) axpy(dt, forcing[static_cast<std::size_t>(s)], stage);
    if (noisy) {
      const HSOperator op = Sigma(t, v);
      const int M = op.noise_dim();
      if (M > driver.dim)
        throw std::invalid_argument("driver carries fewer noise components than required");
      if (M > 0) {
        const std::vector<double> row = view.row(s);
        stage += op.apply(std::span<const double>(row.data(), static_cast<std::size_t>(M)));
        out.noise_fingerprint = fold_increments(out.noise_fingerprint, row, M);
      }
    }
    v = prop.apply(stage);
    guard_norm(v, s + 1);
    out.states.push_back(v);
  }
  return out;
}

CpNormEstimate cp_norm(std::span<const SolutionPath> ensemble, double p, int k,
                       const OperatorPair& P) {
  if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
  if (!(p >= 1.0)) throw std::invalid_argument("moment order p must be >= 1");
  const int steps = ensemble.front().grid.steps;
  const double T = ensemble.front().grid.T;
  std::vector<double> sups;
  sups.reserve(ensemble.size());
  for (const SolutionPath& path : ensemble) {
    if (path.grid.steps != steps || path.grid.T != T)
      throw std::invalid_argument("ensemble grids are not homogeneous");
    double sup = 0.0;
    for (const Element& u : path.states) sup = std::max(sup, P.graph_norm(u, k));
    sups.push_back(sup);
  }
  return cp_norm_from_sups(sups, p, k);
}

EpsContinuityCheck check_continuity_in_eps(const OperatorPair& P, const CoefficientField& c,
                                           const Element& u0, double eps,
                                           std::span<const double> h_list, const TimeGrid& grid,
                                           const WienerDriver& driver, int paths, double p, int k,
                                           double tol) {
  if (k > P.m()) throw std::invalid_argument("graph order exceeds operator m");
  if (paths < 1) throw std::invalid_argument("continuity check needs paths >= 1");
  const int M = c.noise_dim();
  if (M > 0) check_driver(grid, driver, M);

  // one increment table per path, shared by every eps: common random numbers
  std::vector<std::vector<double>> sups(h_list.size(), std::vector<double>());
  for (auto& s : sups) s.reserve(static_cast<std::size_t>(paths));

  for (int path = 0; path < paths; ++path) {
    std::vector<std::vector<double>> rows;
    if (M > 0) rows = increments(driver, static_cast<std::uint64_t>(path), grid.steps);
    const SolutionPath base = solve_base_on(P, c, eps, u0, grid, rows);
    for (std::size_t j = 0; j < h_list.size(); ++j) {
      const SolutionPath pert = solve_base_on(P, c, eps + h_list[j], u0, grid, rows);
      double sup = 0.0;
      for (std::size_t s = 0; s < base.states.size(); ++s) {
        Element d = pert.states[s];
        d -= base.states[s];
        sup = std::max(sup, P.graph_norm(d, k));
      }
      sups[j].push_back(sup);
    }
  }

  EpsContinuityCheck out;
  out.tol = tol;
  for (std::size_t j = 0; j < h_list.size(); ++j) {
    const CpNormEstimate est = cp_norm_from_sups(sups[j], p, k);
    out.rows.push_back({h_list[j], est.value, est.std_error});
  }
  out.monotone = true;
  for (std::size_t j = 1; j < out.rows.size(); ++j)
    if (out.rows[j].value > out.rows[j - 1].value * (1.0 + 1e-9)) out.monotone = false;
  out.final_value = out.rows.empty() ? 0.0 : out.rows.back().value;
  out.pass = out.monotone && out.final_value <= tol;
  return out;
}

}  // namespace pertflow
