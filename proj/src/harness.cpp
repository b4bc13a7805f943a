#include "pertflow/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "pertflow/coefficients.hpp"
#include "pertflow/noise.hpp"
#include "pertflow/operators.hpp"
#include "pertflow/sensitivity.hpp"
#include "pertflow/solver.hpp"
#include "pertflow/spectral.hpp"

namespace pertflow {

bool Report::pass() const {
  for (const Assertion& a : assertions)
    if (!a.pass) return false;
  return true;
}

bool all_pass(std::span<const Report> reports) {
  for (const Report& r : reports)
    if (!r.pass()) return false;
  return true;
}

namespace {

void assert_le(Report& r, std::string claim, double value, double threshold) {
  r.assertions.push_back({std::move(claim), "le", value, threshold, value <= threshold});
}

void assert_ge(Report& r, std::string claim, double value, double threshold) {
  r.assertions.push_back({std::move(claim), "ge", value, threshold, value >= threshold});
}

void assert_abs_le(Report& r, std::string claim, double value, double threshold) {
  r.assertions.push_back({std::move(claim), "abs_le", value, threshold, std::abs(value) <= threshold});
}

struct Ctx {
  const Config& cfg;
  std::uint64_t seed;
  int workers;

  double tol(const std::string& key, double dflt) const {
    return cfg.get_real("tolerances", key, dflt);
  }
  int modes() const { return static_cast<int>(cfg.get_int("operator", "modes", 16)); }
  int m() const { return static_cast<int>(cfg.get_int("operator", "m", 3)); }
  int paths() const { return static_cast<int>(cfg.get_int("ensemble", "paths", 64)); }
  double p() const { return cfg.get_real("ensemble", "p", 2.0); }
  double horizon() const { return cfg.get_real("noise", "horizon", 0.5); }
  int master_steps() const { return static_cast<int>(cfg.get_int("noise", "master_steps", 4096)); }
  int noise_dim() const { return static_cast<int>(cfg.get_int("noise", "dim", 8)); }
};

// shared fixtures ------------------------------------------------------------

Element mixed_u0(const BasisSpec& basis) {
  Element u0 = Element::zero(basis);
  u0[0] = 0.5;
  u0[1] = 1.0;
  if (basis.dim() > 3) u0[3] = 0.3;
  return u0;
}

OperatorPair dense_rotation_pair() {
  // skew drift with a rank-one parabolic part: the generic non-commuting case
  return OperatorPair::dense(DenseMatrix(2, {0.0, 1.0, -1.0, 0.0}),
                             DenseMatrix(2, {1.0, 0.0, 0.0, 0.0}), 3);
}

std::vector<double> dyadic(double first, int count) {
  std::vector<double> out;
  double x = first;
  for (int i = 0; i < count; ++i, x /= 2.0) out.push_back(x);
  return out;
}

CoefficientField default_nemytskii(const Ctx& ctx, const OperatorPair& P) {
  return CoefficientField::nemytskii(
      P, ctx.cfg.get_array("coefficients", "drift_weights", {0.5, 0.25}),
      ctx.cfg.get_array("coefficients", "diffusion_weights", {0.2, 0.1}));
}

// brute-force set partitions of {1..n}: distribution of block-size multisets
// (only >= 2 blocks), independent of the closed-form coefficient formula
std::map<std::vector<int>, std::int64_t> enumerate_set_partition_sizes(int n) {
  std::map<std::vector<int>, std::int64_t> out;
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  const std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == n) {
      std::vector<int> sizes(static_cast<std::size_t>(used), 0);
      for (int a : assign) ++sizes[static_cast<std::size_t>(a)];
      std::sort(sizes.rbegin(), sizes.rend());
      if (sizes.size() >= 2) ++out[sizes];
      return;
    }
    for (int b = 0; b <= used; ++b) {
      assign[static_cast<std::size_t>(i)] = b;
      rec(i + 1, b == used ? used + 1 : used);
    }
  };
  rec(0, 0);
  return out;
}

// experiments ----------------------------------------------------------------

void exp_semigroup_growth_fourier(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(ctx.modes(), ctx.m());
  std::vector<double> t_grid = {0.05, 0.1, 0.25, 0.5, 1.0, 2.0};
  for (int j = 0; j < 2; ++j) t_grid.push_back(2.0 * uniform_draw(ctx.seed, 901, j, 0));
  const int samples = static_cast<int>(ctx.cfg.get_int("ensemble", "growth_samples", 1000));
  const BoundCheck bc = check_assumption_h1(P, samples, t_grid, ctx.seed, ctx.tol("growth", 1e-10));
  r.columns = {"k", "t", "eps", "max_ratio", "samples"};
  long total = 0;
  for (const auto& row : bc.rows) {
    r.rows.push_back({static_cast<double>(row.k), row.t, row.eps, row.max_ratio,
                      static_cast<double>(row.evals)});
    total += row.evals;
  }
  assert_le(r, "translation semigroup growth ratio |G^k S(t)x| / |G^k x| for k <= m+1",
            bc.worst, 1.0 + bc.tol);
  assert_ge(r, "sampled (x,t) pairs", static_cast<double>(total), 1000.0);
}

void exp_semigroup_growth_perturbed(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(ctx.modes(), ctx.m());
  std::vector<double> t_grid = {0.1, 0.25, 0.5, 1.0, 2.0};
  t_grid.push_back(2.0 * uniform_draw(ctx.seed, 902, 0, 0));
  const int samples = static_cast<int>(ctx.cfg.get_int("ensemble", "growth_samples", 1000));
  r.columns = {"k", "t", "eps", "max_ratio", "samples"};
  double worst = 0.0;
  long total = 0;
  for (double eps : {0.25, 0.5, 1.0}) {
    const BoundCheck bc =
        check_semigroup_bound_perturbed(P, eps, samples, t_grid, ctx.seed, ctx.tol("growth", 1e-10));
    worst = std::max(worst, bc.worst);
    for (const auto& row : bc.rows) {
      r.rows.push_back({static_cast<double>(row.k), row.t, row.eps, row.max_ratio,
                        static_cast<double>(row.evals)});
      total += row.evals;
    }
  }
  assert_le(r, "perturbed semigroup growth ratio for k <= m+1 across eps sweeps", worst,
            1.0 + ctx.tol("growth", 1e-10));
  assert_ge(r, "sampled (x,t,eps) triples", static_cast<double>(total), 1000.0);
}

void exp_semigroup_growth_dense(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::dense(DenseMatrix(2, {1.0, 0.3, 0.3, 1.0}),
                                             DenseMatrix::identity(2), 3);
  r.columns = {"k", "alpha"};
  for (int k = 1; k <= P.m() + 1; ++k) r.rows.push_back({static_cast<double>(k), P.alpha(k)});
  assert_le(r, "exponents certified by the log-norm formula (invertible G)",
            P.alphas_heuristic() ? 1.0 : 0.0, 0.0);
  // with G = I the exponents contract: alpha_k = -lambda_min(A) = -0.7
  assert_abs_le(r, "alpha_1 equals -lambda_min(sym A)", P.alpha(1) + 0.7, 1e-12);

  const std::vector<double> t_grid = {0.1, 0.5, 1.0, 2.0};
  const BoundCheck h1 = check_assumption_h1(P, 400, t_grid, ctx.seed, ctx.tol("growth", 1e-10));
  const BoundCheck pb =
      check_semigroup_bound_perturbed(P, 0.5, 400, t_grid, ctx.seed, ctx.tol("growth", 1e-10));
  assert_le(r, "dense growth bound with certified exponents", h1.worst, 1.0 + h1.tol);
  assert_le(r, "dense perturbed growth bound with certified exponents", pb.worst, 1.0 + pb.tol);

  const AlphaEstimate est = estimate_alphas(dense_rotation_pair(), /*allow_heuristic=*/true);
  assert_ge(r, "singular G falls back to sampled exponents and flags them heuristic",
            est.heuristic ? 1.0 : 0.0, 1.0);
}

void exp_trotter_fourier(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(ctx.modes(), ctx.m());
  const Element phi = random_element(P.basis(), ctx.seed, 41, 0);
  const double eps = 0.7, t = 1.0;
  const Element exact = P.semigroup(eps, t, phi);
  r.columns = {"n", "error"};
  double worst = 0.0;
  for (int n = 1; n <= 256; n *= 2) {
    Element d = P.trotter(eps, t, n, phi);
    d -= exact;
    const double err = norm(d);
    worst = std::max(worst, err);
    r.rows.push_back({static_cast<double>(n), err});
  }
  assert_le(r, "commuting split is exact at every n (multiplier backend)", worst,
            ctx.tol("exact", 1e-12));
}

void exp_trotter_dense(const Ctx&, Report& r) {
  const OperatorPair P = dense_rotation_pair();
  const Element phi(P.basis(), {0.6, 0.8});
  const double eps = 1.0, t = 1.0;
  const Element exact = P.semigroup(eps, t, phi);
  r.columns = {"n", "error"};
  std::vector<double> hs, errs;
  for (int n = 1; n <= 256; n *= 2) {
    Element d = P.trotter(eps, t, n, phi);
    d -= exact;
    const double err = norm(d);
    r.rows.push_back({static_cast<double>(n), err});
    hs.push_back(t / n);
    errs.push_back(err);
  }
  const double slope = loglog_slope(hs, errs, /*drop_first=*/true);
  assert_ge(r, "non-commuting split error decays ~ 1/n: slope lower edge", slope, 0.8);
  assert_le(r, "non-commuting split error decays ~ 1/n: slope upper edge", slope, 1.2);
}

void exp_resolvent_convergence(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(ctx.modes(), ctx.m());
  const double lambda = 2.0;
  const std::vector<double> h_list = dyadic(0.25, 9);
  const int samples = static_cast<int>(ctx.cfg.get_int("ensemble", "resolvent_samples", 1000));
  r.columns = {"eps", "k", "h", "difference"};
  for (double eps : {0.0, 0.5}) {
    for (int k : {0, 1}) {
      const ResolventCheck rc = check_resolvent_convergence(P, lambda, eps, h_list, k, samples,
                                                            ctx.seed, ctx.tol("resolvent", 1e-2));
      for (const auto& row : rc.rows) r.rows.push_back({eps, static_cast<double>(k), row.h, row.diff});
      char tag[64];
      std::snprintf(tag, sizeof(tag), " (eps=%g, graph order %d)", eps, k);
      assert_abs_le(r, std::string("resolvent difference decays at first order in h") + tag,
                    rc.slope - 1.0, 0.1);
      assert_le(r, std::string("resolvent differences monotone in h") + tag, rc.monotone ? 0.0 : 1.0,
                0.0);
      assert_le(r, std::string("resolvent difference below tolerance at smallest h") + tag,
                rc.final_diff, rc.tol);
      assert_le(r, std::string("graph bound |G R x| <= |G x|/(lambda - alpha_1)") + tag,
                rc.bound_worst, 1.0 + 1e-10);
    }
  }
}

void exp_resolvent_identities(const Ctx& ctx, Report& r) {
  const OperatorPair fourier = OperatorPair::fourier(ctx.modes(), ctx.m());
  const OperatorPair dense = OperatorPair::dense(DenseMatrix(2, {1.0, 0.3, 0.3, 1.0}),
                                                 DenseMatrix::identity(2), 3);
  r.columns = {"backend", "lambda", "eps", "defining_residual", "second_resolvent_residual"};
  double worst_def = 0.0, worst_sec = 0.0;
  int backend_id = 0;
  for (const OperatorPair* P : {&fourier, &dense}) {
    for (double lambda : {1.5, 3.0}) {
      for (double eps : {0.0, 0.3}) {
        double wd = 0.0, ws = 0.0;
        for (int i = 0; i < 50; ++i) {
          const Element phi = random_element(P->basis(), ctx.seed, 45, static_cast<std::uint64_t>(i));
          const Element res = P->resolvent({lambda, eps}, phi);
          Element lhs = P->apply_A(res);
          axpy(eps, P->apply_G(res), lhs);
          axpy(lambda, res, lhs);
          lhs -= phi;
          wd = std::max(wd, norm(lhs) / norm(phi));

          const double h = 0.5;
          // R(eps+h) - R(eps) = -h R(eps+h) G R(eps); the sign is pinned by
          // this very check
          Element sec = P->resolvent({lambda, eps + h}, phi);
          sec -= res;
          axpy(h, P->resolvent({lambda, eps + h}, P->apply_G(res)), sec);
          ws = std::max(ws, norm(sec) / norm(phi));
        }
        r.rows.push_back({static_cast<double>(backend_id), lambda, eps, wd, ws});
        worst_def = std::max(worst_def, wd);
        worst_sec = std::max(worst_sec, ws);
      }
    }
    ++backend_id;
  }
  assert_le(r, "defining identity (lambda + A + eps G) R x = x", worst_def,
            ctx.tol("identity", 1e-10));
  assert_le(r, "second-resolvent identity across eps (minus sign)", worst_sec,
            ctx.tol("second_resolvent", 1e-9));
}

void exp_semigroup_law(const Ctx& ctx, Report& r) {
  const OperatorPair fourier = OperatorPair::fourier(ctx.modes(), ctx.m());
  const OperatorPair dense = OperatorPair::dense(DenseMatrix(2, {1.0, 0.3, 0.3, 1.0}),
                                                 DenseMatrix::identity(2), 3);
  r.columns = {"backend", "eps", "t", "s", "law_residual", "contraction_excess"};
  double worst_law = 0.0, worst_con = 0.0;
  int backend_id = 0;
  for (const OperatorPair* P : {&fourier, &dense}) {
    for (double eps : {0.0, 0.5, 1.0}) {
      for (auto [t, s] : {std::pair{0.3, 0.4}, std::pair{0.1, 1.2}, std::pair{0.7, 0.7}}) {
        double wl = 0.0, wc = 0.0;
        for (int i = 0; i < 25; ++i) {
          const Element phi = random_element(P->basis(), ctx.seed, 47, static_cast<std::uint64_t>(i));
          Element d = P->semigroup(eps, t + s, phi);
          d -= P->semigroup(eps, t, P->semigroup(eps, s, phi));
          wl = std::max(wl, norm(d) / norm(phi));
          wc = std::max(wc, norm(P->semigroup(eps, t, phi)) / norm(phi) - 1.0);
        }
        r.rows.push_back({static_cast<double>(backend_id), eps, t, s, wl, wc});
        worst_law = std::max(worst_law, wl);
        worst_con = std::max(worst_con, wc);
      }
    }
    ++backend_id;
  }
  assert_le(r, "semigroup law S(t+s) = S(t)S(s)", worst_law, ctx.tol("law", 1e-10));
  assert_le(r, "contraction: both shipped pairs have alpha_1 <= 0", worst_con, 1e-12);

  // strong continuity tail toward t = 0
  const std::vector<double> t_list = {0.5, 0.25, 0.1, 0.05, 0.01, 0.005, 0.001};
  const ContinuityCheck cc =
      check_strong_continuity(fourier, 0.5, 1, mixed_u0(fourier.basis()), t_list, 0.05);
  for (const auto& row : cc.rows) r.rows.push_back({0.0, 0.5, row.t, 0.0, row.gap, 0.0});
  assert_le(r, "strong continuity: |S(t)x - x| small at the smallest t", cc.pass ? 0.0 : 1.0, 0.0);
}

void exp_solver_zero_exact(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(ctx.modes(), ctx.m());
  const CoefficientField c = CoefficientField::zero(P);
  Element u0 = mixed_u0(P.basis());
  u0[6] = -0.7;
  u0[2 * ctx.modes() - 1] += 0.2;  // touch the top mode as well
  const WienerDriver driver(ctx.seed, 0, ctx.master_steps(), ctx.horizon());
  r.columns = {"eps", "steps", "max_node_error"};
  double worst = 0.0;
  for (double eps : {0.0, 0.1, 1.0}) {
    for (int steps : {1, 3, 8, 65, 512, 1024}) {
      const TimeGrid grid(ctx.horizon(), steps);
      const SolutionPath sol = solve_base(P, c, eps, u0, grid, driver, 0);
      double err = 0.0;
      for (int s = 0; s <= steps; ++s) {
        Element d = sol.states[static_cast<std::size_t>(s)];
        d -= P.semigroup(eps, grid.time(s), u0);
        err = std::max(err, norm(d));
      }
      worst = std::max(worst, err);
      r.rows.push_back({eps, static_cast<double>(steps), err});
    }
  }
  assert_le(r, "with f = B = 0 the stepper reproduces the semigroup at every node", worst,
            ctx.tol("exact", 1e-12));
}

void exp_hierarchy_zero_closed_form(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(4, ctx.m());
  const CoefficientField c = CoefficientField::zero(P);
  const Element u0 = Element::unit(P.basis(), 3);  // pure second cosine mode
  const double eps = 0.1;
  const TimeGrid grid(ctx.horizon(), 1024);
  const WienerDriver driver(ctx.seed, 0, ctx.master_steps(), ctx.horizon());
  const SensitivitySolution sol = solve_hierarchy(P, c, eps, u0, 3, grid, driver, 0);

  // at the nodes the scheme solves the hierarchy exactly up to the discrete
  // falling factorial: u^j(t_s) = (-1)^j t_s (t_s - dt) ... (t_s-(j-1)dt) G^j S(t_s) u0
  const double dt = grid.dt();
  r.columns = {"level", "max_node_error"};
  std::vector<double> errs(4, 0.0);
  for (int s = 0; s <= grid.steps; ++s) {
    const double t = grid.time(s);
    const Element base = P.semigroup(eps, t, u0);
    for (int j = 1; j <= 3; ++j) {
      double coef = 1.0;
      for (int i = 0; i < j; ++i) coef *= -(t - i * dt);
      Element d = P.apply_G_power(base, j);
      d *= coef;
      d -= sol.levels[static_cast<std::size_t>(j)].states[static_cast<std::size_t>(s)];
      errs[static_cast<std::size_t>(j)] = std::max(errs[static_cast<std::size_t>(j)], norm(d));
    }
  }
  for (int j = 1; j <= 3; ++j) {
    r.rows.push_back({static_cast<double>(j), errs[static_cast<std::size_t>(j)]});
    char claim[96];
    std::snprintf(claim, sizeof(claim),
                  "level %d matches the discrete falling-factorial closed form", j);
    assert_le(r, claim, errs[static_cast<std::size_t>(j)], ctx.tol("exact", 1e-12));
  }
  // spot value: first-derivative magnitude t*g*e^{-eps*g*t} = 2 e^{-0.2} at t = 0.5
  const double got = norm(sol.levels[1].states.back());
  assert_abs_le(r, "first-level magnitude equals 2 exp(-0.2) at t = 0.5",
                got - 2.0 * std::exp(-0.2), 1e-12);
}

void exp_fd_slope_zero_k1(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(4, ctx.m());
  const CoefficientField c = CoefficientField::zero(P);
  const Element u0 = Element::unit(P.basis(), 3);
  const TimeGrid grid(ctx.horizon(), 4096);
  const WienerDriver driver(ctx.seed, 0, ctx.master_steps(), ctx.horizon());
  const FdHierarchyCheck fd = finite_difference_check(P, c, 0.1, u0, 1, dyadic(0x1p-12, 5), grid,
                                                      driver, 1, ctx.p());
  r.columns = {"h", "value", "std_error", "value_low_moment", "se_low_moment"};
  for (const auto& row : fd.rows)
    r.rows.push_back({row.h, row.value, row.std_error, row.value_secondary, row.se_secondary});
  assert_abs_le(r, "first-derivative difference quotient: slope 1 in h (closed-form case)",
                fd.slope - 1.0, ctx.tol("fd_zero_slope", 1e-3));
}

void exp_fd_slope_zero_k2(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(4, ctx.m());
  const CoefficientField c = CoefficientField::zero(P);
  const Element u0 = Element::unit(P.basis(), 3);
  const TimeGrid grid(ctx.horizon(), 1 << 21);
  const WienerDriver driver(ctx.seed, 0, ctx.master_steps(), ctx.horizon());
  const FdHierarchyCheck fd = finite_difference_check(P, c, 0.1, u0, 2, dyadic(0x1p-7, 5), grid,
                                                      driver, 1, ctx.p());
  r.columns = {"h", "value", "std_error", "value_low_moment", "se_low_moment"};
  for (const auto& row : fd.rows)
    r.rows.push_back({row.h, row.value, row.std_error, row.value_secondary, row.se_secondary});
  assert_abs_le(r, "second-derivative difference quotient: slope 1 in h (closed-form case)",
                fd.slope - 1.0, ctx.tol("fd_zero_slope", 1e-3));
}

void exp_taylor_zero(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(4, ctx.m());
  const CoefficientField c = CoefficientField::zero(P);
  const Element u0 = Element::unit(P.basis(), 3);
  const TimeGrid grid(ctx.horizon(), 1 << 17);
  const WienerDriver driver(ctx.seed, 0, ctx.master_steps(), ctx.horizon());
  r.columns = {"K", "eps", "value", "std_error"};
  for (int K : {1, 2}) {
    const std::vector<double> eps_list = dyadic(K == 1 ? 0x1p-6 : 0x1p-5, 5);
    const TaylorCheck tc = taylor_remainder(P, c, u0, K, eps_list, grid, driver, 1, ctx.p());
    for (const auto& row : tc.rows)
      r.rows.push_back({static_cast<double>(K), row.eps, row.value, row.std_error});
    char claim[96];
    std::snprintf(claim, sizeof(claim),
                  "order-%d Taylor remainder decays at order %d (closed-form case)", K, K + 1);
    assert_abs_le(r, claim, tc.slope - (K + 1), ctx.tol("taylor_zero_slope", 1e-2));
  }
}

void exp_faa_di_bruno(const Ctx&, Report& r) {
  r.columns = {"n", "terms", "coefficient_sum", "mismatches"};
  int mismatches_total = 0, recursion_failures = 0;
  for (int n = 1; n <= 6; ++n) {
    const std::vector<PartitionTerm> terms = correction_terms(n);
    const auto brute = enumerate_set_partition_sizes(n);
    int mismatches = 0;
    if (brute.size() != terms.size()) ++mismatches;
    std::int64_t coeff_sum = 0;
    for (const PartitionTerm& t : terms) {
      coeff_sum += t.coefficient;
      const auto it = brute.find(t.sizes);
      if (it == brute.end() || it->second != t.coefficient) ++mismatches;
    }
    mismatches_total += mismatches;
    if (n >= 2 && !check_phi_recursion(n).pass) ++recursion_failures;
    r.rows.push_back({static_cast<double>(n), static_cast<double>(terms.size()),
                      static_cast<double>(coeff_sum), static_cast<double>(mismatches)});
  }
  assert_le(r, "correction coefficients equal brute-force set-partition counts for n <= 6",
            static_cast<double>(mismatches_total), 0.0);
  assert_le(r, "chain-rule recursion reproduces each correction list for n <= 6",
            static_cast<double>(recursion_failures), 0.0);

  // spot checks quoted in the acceptance gate
  const std::vector<PartitionTerm> n4 = correction_terms(4);
  const std::vector<PartitionTerm> want = {{{1, 1, 1, 1}, 1}, {{2, 1, 1}, 6}, {{2, 2}, 3}, {{3, 1}, 4}};
  bool n4_ok = n4.size() == want.size();
  for (const PartitionTerm& w : want) {
    bool found = false;
    for (const PartitionTerm& t : n4) found = found || t == w;
    n4_ok = n4_ok && found;
  }
  assert_le(r, "order 4 lists exactly {1,1,1,1}:1 {2,1,1}:6 {2,2}:3 {3,1}:4", n4_ok ? 0.0 : 1.0,
            0.0);
  std::int64_t sum5 = 0;
  for (const PartitionTerm& t : correction_terms(5)) sum5 += t.coefficient;
  assert_abs_le(r, "order-5 coefficients sum to 51 (all multi-block set partitions)",
                static_cast<double>(sum5) - 51.0, 0.0);
}

void exp_degenerate_g(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::dense(
      DenseMatrix(3, {0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.5}), DenseMatrix::zero(3), 3);
  const CoefficientField c = CoefficientField::nemytskii(P, {0.4}, {0.3, 0.2});
  const Element u0(P.basis(), {0.8, -0.3, 0.5});
  const TimeGrid grid(ctx.horizon(), 256);
  const WienerDriver driver(ctx.seed, ctx.noise_dim(), ctx.master_steps(), ctx.horizon());
  const SensitivitySolution sol = solve_hierarchy(P, c, 0.7, u0, 3, grid, driver, 0);
  r.columns = {"level", "sup_norm"};
  double worst = 0.0;
  for (int k = 1; k <= 3; ++k) {
    double sup = 0.0;
    for (const Element& u : sol.levels[static_cast<std::size_t>(k)].states)
      sup = std::max(sup, norm(u));
    worst = std::max(worst, sup);
    r.rows.push_back({static_cast<double>(k), sup});
  }
  assert_le(r, "with G = 0 every derivative level vanishes identically", worst,
            ctx.tol("exact", 1e-12));
}

void exp_lipschitz_presets(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(ctx.modes(), ctx.m());
  const std::vector<CoefficientField> fields = {
      CoefficientField::zero(P), CoefficientField::additive(P, 0.1, 2),
      CoefficientField::scalar_mult(P, 0.3), default_nemytskii(ctx, P)};
  r.columns = {"preset", "worst_quotient", "anchor_drift_norm", "anchor_diffusion_norm"};
  double worst = 0.0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const RegularityCheck hm = check_Hmp(fields[i], P, 200, ctx.seed);
    r.rows.push_back({static_cast<double>(i), hm.worst_ratio, hm.anchor_drift_norm,
                      hm.anchor_diffusion_norm});
    worst = std::max(worst, hm.worst_ratio);
  }
  assert_le(r, "sampled Lipschitz quotients stay under the declared constants (all presets)",
            worst, 1.0 + 1e-9);

  // derivative oracles against central differences
  const std::vector<double> h_list = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  const Element e1 = Element::unit(P.basis(), 1);
  Element dir2 = Element::unit(P.basis(), 0);
  axpy(0.5, Element::unit(P.basis(), 2), dir2);
  const std::vector<Element> dirs = {e1, dir2};

  const Element generic = 0.3 * e1;
  double worst_slope = 10.0;
  for (int order : {0, 1}) {
    const FdCheck fd = derivative_fd_check(fields[3], order, 0.0, generic, dirs, h_list);
    if (fd.slope_valid) worst_slope = std::min(worst_slope, fd.slope);
  }
  assert_ge(r, "smooth-preset derivative oracles match central differences at order >= 2",
            worst_slope, 1.7);

  const FdCheck odd = derivative_fd_check(fields[3], 1, 0.0, Element::zero(P.basis()),
                                          std::vector<Element>{e1}, h_list);
  assert_le(r, "even-slope point: the difference quotient of the first derivative vanishes",
            odd.max_err, 1e-13);

  const FdCheck lin = derivative_fd_check(fields[2], 1, 0.0, generic, dirs, h_list);
  assert_le(r, "linear diffusion: second derivative is exactly zero", lin.max_err, 1e-12);
}

void exp_noise_driver(const Ctx& ctx, Report& r) {
  const WienerDriver driver(ctx.seed, 4, 2048, ctx.horizon());
  double refine_err = 0.0;
  for (std::uint64_t path : {0ull, 1ull}) {
    const auto coarse = increments(driver, path, 512);
    const auto fine = increments(driver, path, 1024);
    for (int s = 0; s < 512; ++s)
      for (int i = 0; i < driver.dim; ++i)
        refine_err = std::max(refine_err,
                              std::abs(coarse[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)] -
                                       fine[static_cast<std::size_t>(2 * s)][static_cast<std::size_t>(i)] -
                                       fine[static_cast<std::size_t>(2 * s + 1)][static_cast<std::size_t>(i)]));
  }

  const int n = 200000;
  double mean = 0.0, sq = 0.0, cross = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = gaussian_draw(ctx.seed, 777, static_cast<std::uint64_t>(i), 0);
    const double b = gaussian_draw(ctx.seed, 778, static_cast<std::uint64_t>(i), 0);
    mean += a;
    sq += a * a;
    cross += a * b;
  }
  mean /= n;
  const double sd = std::sqrt(sq / n - mean * mean);
  const double rho = (cross / n - 0.0) / (sd * sd);

  r.columns = {"metric", "value"};
  r.rows = {{0.0, refine_err}, {1.0, mean}, {2.0, sd}, {3.0, rho}};
  assert_le(r, "coarse increments equal sums of fine increments (dyadic refinement)", refine_err,
            1e-14);
  assert_abs_le(r, "standard draws: sample mean near 0", mean, 0.01);
  assert_abs_le(r, "standard draws: sample standard deviation near 1", sd - 1.0, 0.01);
  assert_abs_le(r, "independent streams decorrelated", rho, 0.01);
}

void exp_continuity_in_eps(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(ctx.modes(), ctx.m());
  const CoefficientField c = default_nemytskii(ctx, P);
  const Element u0 = mixed_u0(P.basis());
  const double eps = 0.25;
  const std::vector<double> h_list = dyadic(0.25, 6);
  const TimeGrid grid(ctx.horizon(), 256);
  const WienerDriver driver(ctx.seed, ctx.noise_dim(), ctx.master_steps(), ctx.horizon());
  const int paths = ctx.paths();
  const int k = ctx.m();

  const EpsContinuityCheck cc = check_continuity_in_eps(P, c, u0, eps, h_list, grid, driver, paths,
                                                        ctx.p(), k, /*tol=*/1.0);
  // first-order prediction from the derivative level on the same ensemble
  std::vector<double> sups;
  for (int path = 0; path < paths; ++path) {
    const SensitivitySolution sol =
        solve_hierarchy(P, c, eps, u0, 1, grid, driver, static_cast<std::uint64_t>(path));
    double sup = 0.0;
    for (const Element& u : sol.levels[1].states) sup = std::max(sup, P.graph_norm(u, k));
    sups.push_back(sup);
  }
  const double prediction = h_list.back() * cp_norm_from_sups(sups, ctx.p(), k).value;

  r.columns = {"h", "difference_norm", "std_error"};
  for (const auto& row : cc.rows) r.rows.push_back({row.h, row.value, row.std_error});
  r.rows.push_back({0.0, prediction, 0.0});
  assert_le(r, "coupled difference |u_{eps+h} - u_eps| decreases monotonically in h",
            cc.monotone ? 0.0 : 1.0, 0.0);
  assert_le(r, "difference at the smallest h is below 10x the first-order prediction",
            cc.final_value, 10.0 * prediction);
}

void exp_fd_slope_nemytskii_k1(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(ctx.modes(), ctx.m());
  const CoefficientField c = default_nemytskii(ctx, P);
  const Element u0 = mixed_u0(P.basis());
  const TimeGrid grid(ctx.horizon(), ctx.master_steps());
  const WienerDriver driver(ctx.seed, ctx.noise_dim(), ctx.master_steps(), ctx.horizon());
  const FdHierarchyCheck fd = finite_difference_check(P, c, 0.25, u0, 1, dyadic(0x1p-3, 6), grid,
                                                      driver, ctx.paths(), ctx.p());
  r.columns = {"h", "value", "std_error", "value_low_moment", "se_low_moment"};
  for (const auto& row : fd.rows)
    r.rows.push_back({row.h, row.value, row.std_error, row.value_secondary, row.se_secondary});
  assert_ge(r, "stochastic first-derivative quotient: slope lower edge", fd.slope, 0.8);
  assert_le(r, "stochastic first-derivative quotient: slope upper edge", fd.slope, 1.2);
}

void exp_fd_slope_nemytskii_k2(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(ctx.modes(), ctx.m());
  const CoefficientField c = default_nemytskii(ctx, P);
  const Element u0 = mixed_u0(P.basis());
  const TimeGrid grid(ctx.horizon(), ctx.master_steps());
  const WienerDriver driver(ctx.seed, ctx.noise_dim(), ctx.master_steps(), ctx.horizon());
  const FdHierarchyCheck fd = finite_difference_check(P, c, 0.25, u0, 2, dyadic(0x1p-3, 6), grid,
                                                      driver, ctx.paths(), ctx.p());
  r.columns = {"h", "value", "std_error", "value_low_moment", "se_low_moment"};
  for (const auto& row : fd.rows)
    r.rows.push_back({row.h, row.value, row.std_error, row.value_secondary, row.se_secondary});
  assert_ge(r, "stochastic second-derivative quotient: slope lower edge", fd.slope, 0.7);
  assert_le(r, "stochastic second-derivative quotient: slope upper edge", fd.slope, 1.3);
}

void exp_taylor_scalar_mult(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(ctx.modes(), ctx.m());
  const CoefficientField c = CoefficientField::scalar_mult(P, 0.3);
  const Element u0 = Element::unit(P.basis(), 3);
  const int steps = 8192;
  const TimeGrid grid(ctx.horizon(), steps);
  const WienerDriver driver(ctx.seed, 1, steps, ctx.horizon());
  const TaylorCheck tc =
      taylor_remainder(P, c, u0, 2, dyadic(0.25, 5), grid, driver, ctx.paths(), ctx.p());
  r.columns = {"eps", "value", "std_error", "value_low_moment", "se_low_moment"};
  for (const auto& row : tc.rows)
    r.rows.push_back({row.eps, row.value, row.std_error, row.value_secondary, row.se_secondary});
  assert_ge(r, "order-2 Taylor remainder decays faster than eps^2.7 (multiplicative noise)",
            tc.slope, 2.7);
}

void exp_additive_mean(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(ctx.modes(), ctx.m());
  const CoefficientField c = CoefficientField::additive(P, 0.1, 2);
  const Element u0 = mixed_u0(P.basis());
  const double eps = 0.5;
  const TimeGrid grid(ctx.horizon(), 256);
  const WienerDriver driver(ctx.seed, 2, ctx.master_steps(), ctx.horizon());
  const int paths = static_cast<int>(ctx.cfg.get_int("ensemble", "mean_paths", 10000));

  std::vector<std::vector<double>> finals(static_cast<std::size_t>(paths));
  for_each_path(path_count_plan(paths), ctx.workers, [&](int path) {
    const SolutionPath sol =
        solve_base(P, c, eps, u0, grid, driver, static_cast<std::uint64_t>(path));
    finals[static_cast<std::size_t>(path)] = sol.states.back().coeff();
  });

  const int d = P.basis().dim();
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  for (const auto& f : finals)
    for (int i = 0; i < d; ++i) mean[static_cast<std::size_t>(i)] += f[static_cast<std::size_t>(i)];
  for (double& v : mean) v /= paths;
  std::vector<double> var(static_cast<std::size_t>(d), 0.0);
  for (const auto& f : finals)
    for (int i = 0; i < d; ++i) {
      const double dlt = f[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)];
      var[static_cast<std::size_t>(i)] += dlt * dlt;
    }
  double se_sq = 0.0;
  for (double v : var) se_sq += v / (static_cast<double>(paths) - 1.0) / paths;
  const double se_norm = std::sqrt(se_sq);

  const Element exact = P.semigroup(eps, grid.T, u0);
  double err_sq = 0.0;
  for (int i = 0; i < d; ++i) {
    const double dlt = mean[static_cast<std::size_t>(i)] - exact[i];
    err_sq += dlt * dlt;
  }
  const double err = std::sqrt(err_sq);

  r.columns = {"metric", "value"};
  r.rows = {{0.0, err}, {1.0, se_norm}, {2.0, static_cast<double>(paths)}};
  assert_le(r, "additive-noise ensemble mean matches the semigroup image within 3 SE", err,
            3.0 * se_norm);
}

void exp_scalar_mult_strong_rate(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(4, ctx.m());
  const double beta = 0.3, eps = 0.2;
  const CoefficientField c = CoefficientField::scalar_mult(P, beta);
  const Element u0 = Element::unit(P.basis(), 3);
  const WienerDriver driver(ctx.seed, 1, 4096, ctx.horizon());
  const int paths = ctx.paths();

  r.columns = {"steps", "dt", "strong_error"};
  std::vector<double> hs, errs;
  for (int steps : {512, 1024, 2048, 4096}) {
    const TimeGrid grid(ctx.horizon(), steps);
    double acc = 0.0;
    for (int path = 0; path < paths; ++path) {
      const auto rows = increments(driver, static_cast<std::uint64_t>(path), driver.master_steps);
      double wT = 0.0;
      for (const auto& row : rows) wT += row[0];
      Element closed = P.semigroup(eps, grid.T, u0);
      closed *= std::exp(beta * wT - 0.5 * beta * beta * grid.T);
      const SolutionPath sol =
          solve_base(P, c, eps, u0, grid, driver, static_cast<std::uint64_t>(path));
      Element d = sol.states.back();
      d -= closed;
      acc += inner_product(d, d);
    }
    const double strong = std::sqrt(acc / paths);
    r.rows.push_back({static_cast<double>(steps), grid.dt(), strong});
    hs.push_back(grid.dt());
    errs.push_back(strong);
  }
  const double slope = loglog_slope(hs, errs, /*drop_first=*/true);
  assert_ge(r, "strong error against the geometric closed form decays with rate >= 0.4", slope,
            0.4);
}

void exp_grid_refinement_cauchy(const Ctx& ctx, Report& r) {
  const OperatorPair P = OperatorPair::fourier(ctx.modes(), ctx.m());
  const CoefficientField c = default_nemytskii(ctx, P);
  const Element u0 = mixed_u0(P.basis());
  const double eps = 0.3;
  const WienerDriver driver(ctx.seed, ctx.noise_dim(), 4096, ctx.horizon());
  const int paths = 8;
  const std::vector<int> steps_list = {512, 1024, 2048, 4096};

  r.columns = {"fine_steps", "mean_sup_difference"};
  std::vector<double> hs, diffs;
  for (std::size_t j = 0; j + 1 < steps_list.size(); ++j) {
    const int coarse = steps_list[j], fine = steps_list[j + 1];
    double acc = 0.0;
    for (int path = 0; path < paths; ++path) {
      const SolutionPath a = solve_base(P, c, eps, u0, TimeGrid(ctx.horizon(), coarse), driver,
                                        static_cast<std::uint64_t>(path));
      const SolutionPath b = solve_base(P, c, eps, u0, TimeGrid(ctx.horizon(), fine), driver,
                                        static_cast<std::uint64_t>(path));
      double sup = 0.0;
      for (int s = 0; s <= coarse; ++s) {
        Element d = a.states[static_cast<std::size_t>(s)];
        d -= b.states[static_cast<std::size_t>(2 * s)];
        sup = std::max(sup, norm(d));
      }
      acc += sup;
    }
    const double mean_sup = acc / paths;
    r.rows.push_back({static_cast<double>(fine), mean_sup});
    hs.push_back(ctx.horizon() / coarse);
    diffs.push_back(mean_sup);
  }
  bool monotone = true;
  for (std::size_t j = 1; j < diffs.size(); ++j) monotone = monotone && diffs[j] <= diffs[j - 1];
  const double slope = loglog_slope(hs, diffs, /*drop_first=*/false);
  assert_le(r, "coupled dyadic refinements shrink in sup norm", monotone ? 0.0 : 1.0, 0.0);
  assert_ge(r, "refinement differences decay with rate >= 0.4", slope, 0.4);
}

using ExperimentFn = void (*)(const Ctx&, Report&);

const std::vector<std::pair<std::string, ExperimentFn>>& fast_experiments() {
  static const std::vector<std::pair<std::string, ExperimentFn>> list = {
      {"noise_driver", exp_noise_driver},
      {"semigroup_growth_fourier", exp_semigroup_growth_fourier},
      {"semigroup_growth_perturbed", exp_semigroup_growth_perturbed},
      {"semigroup_growth_dense", exp_semigroup_growth_dense},
      {"semigroup_law", exp_semigroup_law},
      {"trotter_fourier", exp_trotter_fourier},
      {"trotter_dense", exp_trotter_dense},
      {"resolvent_convergence", exp_resolvent_convergence},
      {"resolvent_identities", exp_resolvent_identities},
      {"lipschitz_presets", exp_lipschitz_presets},
      {"solver_zero_exact", exp_solver_zero_exact},
      {"hierarchy_zero_closed_form", exp_hierarchy_zero_closed_form},
      {"fd_slope_zero_k1", exp_fd_slope_zero_k1},
      {"taylor_zero", exp_taylor_zero},
      {"faa_di_bruno", exp_faa_di_bruno},
      {"degenerate_g", exp_degenerate_g},
  };
  return list;
}

const std::vector<std::pair<std::string, ExperimentFn>>& full_extra_experiments() {
  static const std::vector<std::pair<std::string, ExperimentFn>> list = {
      {"fd_slope_zero_k2", exp_fd_slope_zero_k2},
      {"continuity_in_eps", exp_continuity_in_eps},
      {"fd_slope_nemytskii_k1", exp_fd_slope_nemytskii_k1},
      {"fd_slope_nemytskii_k2", exp_fd_slope_nemytskii_k2},
      {"taylor_scalar_mult", exp_taylor_scalar_mult},
      {"additive_mean", exp_additive_mean},
      {"scalar_mult_strong_rate", exp_scalar_mult_strong_rate},
      {"grid_refinement_cauchy", exp_grid_refinement_cauchy},
  };
  return list;
}

ExperimentFn find_experiment(const std::string& name) {
  for (const auto& [n, fn] : fast_experiments())
    if (n == name) return fn;
  for (const auto& [n, fn] : full_extra_experiments())
    if (n == name) return fn;
  throw std::invalid_argument("unknown experiment: " + name);
}

}  // namespace

Config default_config() {
  Config cfg;
  cfg.set("suite", "seed", ConfigValue(std::int64_t{20260823}));
  cfg.set("suite", "workers", ConfigValue(std::int64_t{1}));
  cfg.set("operator", "modes", ConfigValue(std::int64_t{16}));
  cfg.set("operator", "m", ConfigValue(std::int64_t{3}));
  cfg.set("noise", "dim", ConfigValue(std::int64_t{8}));
  cfg.set("noise", "master_steps", ConfigValue(std::int64_t{4096}));
  cfg.set("noise", "horizon", ConfigValue(0.5));
  cfg.set("grid", "steps", ConfigValue(std::int64_t{256}));
  cfg.set("ensemble", "paths", ConfigValue(std::int64_t{64}));
  cfg.set("ensemble", "p", ConfigValue(2.0));
  cfg.set("ensemble", "growth_samples", ConfigValue(std::int64_t{1000}));
  cfg.set("ensemble", "resolvent_samples", ConfigValue(std::int64_t{1000}));
  cfg.set("ensemble", "mean_paths", ConfigValue(std::int64_t{10000}));
  cfg.set("coefficients", "preset", ConfigValue(std::string("nemytskii")));
  cfg.set("coefficients", "drift_weights", ConfigValue(std::vector<double>{0.5, 0.25}));
  cfg.set("coefficients", "diffusion_weights", ConfigValue(std::vector<double>{0.2, 0.1}));
  cfg.set("coefficients", "scale", ConfigValue(0.1));
  cfg.set("coefficients", "beta", ConfigValue(0.3));
  cfg.set("coefficients", "noise_dim", ConfigValue(std::int64_t{2}));
  cfg.set("sweep", "eps", ConfigValue(0.25));
  cfg.set("tolerances", "exact", ConfigValue(1e-12));
  cfg.set("tolerances", "growth", ConfigValue(1e-10));
  cfg.set("tolerances", "identity", ConfigValue(1e-10));
  cfg.set("tolerances", "second_resolvent", ConfigValue(1e-9));
  cfg.set("tolerances", "law", ConfigValue(1e-10));
  cfg.set("tolerances", "resolvent", ConfigValue(1e-2));
  cfg.set("tolerances", "fd_zero_slope", ConfigValue(1e-3));
  cfg.set("tolerances", "taylor_zero_slope", ConfigValue(1e-2));
  return cfg;
}

std::vector<std::string> experiment_names(const std::string& level) {
  if (level != "fast" && level != "full")
    throw std::invalid_argument("suite level must be fast or full");
  std::vector<std::string> names;
  for (const auto& [n, fn] : fast_experiments()) names.push_back(n);
  if (level == "full")
    for (const auto& [n, fn] : full_extra_experiments()) names.push_back(n);
  return names;
}

Report run_experiment(const std::string& name, const Config& cfg, int workers) {
  ExperimentFn fn = find_experiment(name);
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  Report r;
  r.name = name;
  r.seed = static_cast<std::uint64_t>(cfg.get_int("suite", "seed", 20260823));
  r.config_hash = cfg.hash();
  const Ctx ctx{cfg, r.seed, workers};
  const auto t0 = std::chrono::steady_clock::now();
  fn(ctx, r);
  r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<Report> run_suite(const std::string& level, const Config& cfg, int workers) {
  std::vector<Report> out;
  for (const std::string& name : experiment_names(level))
    out.push_back(run_experiment(name, cfg, workers));
  return out;
}

// ---- rendering --------------------------------------------------------------

namespace {

void append_report_body(std::string& out, const Report& r, bool with_elapsed) {
  char buf[128];
  out += "== " + r.name + " ==\n";
  std::snprintf(buf, sizeof(buf), "seed=%llu config=%016llx",
                static_cast<unsigned long long>(r.seed),
                static_cast<unsigned long long>(r.config_hash));
  out += buf;
  if (with_elapsed) {
    std::snprintf(buf, sizeof(buf), " elapsed=%.2fs", r.elapsed_seconds);
    out += buf;
  }
  out += "\n";
  for (std::size_t i = 0; i < r.columns.size(); ++i)
    out += (i ? "," : "") + r.columns[i];
  out += "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += format_real(row[i]);
    }
    out += "\n";
  }
  for (const Assertion& a : r.assertions) {
    out += a.pass ? "[PASS] " : "[FAIL] ";
    out += a.claim + " (value=" + format_real(a.value) + " " + a.cmp +
           " threshold=" + format_real(a.threshold) + ")\n";
  }
  out += r.pass() ? "verdict: PASS\n" : "verdict: FAIL\n";
}

}  // namespace

std::string report_text(const Report& r) {
  std::string out;
  append_report_body(out, r, /*with_elapsed=*/true);
  return out;
}

std::string report_csv(const Report& r) {
  std::string out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) out += (i ? "," : "") + r.columns[i];
  out += "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += format_real(row[i]);
    }
    out += "\n";
  }
  return out;
}

std::string suite_text(std::span<const Report> reports) {
  std::string out;
  int failures = 0;
  char buf[160];
  for (const Report& r : reports) {
    if (!r.pass()) ++failures;
    std::snprintf(buf, sizeof(buf), "[%s] %-28s %zu assertions  %.2fs\n",
                  r.pass() ? "PASS" : "FAIL", r.name.c_str(), r.assertions.size(),
                  r.elapsed_seconds);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%zu experiments, %d failing\n", reports.size(), failures);
  out += buf;
  out += failures == 0 ? "ALL PASS\n" : "FAILURES PRESENT\n";
  return out;
}

std::string serialize_reports(std::span<const Report> reports) {
  std::string out;
  for (const Report& r : reports) {
    append_report_body(out, r, /*with_elapsed=*/false);
    out += "---\n";
  }
  return out;
}

void write_suite_outputs(const std::string& out_dir, std::span<const Report> reports) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / "report.txt");
    f << suite_text(reports) << "\n";
    for (const Report& r : reports) f << report_text(r) << "\n";
  }
  {
    std::ofstream f(fs::path(out_dir) / "manifest.csv");
    f << "experiment,pass,assertions,rows,seed,config_hash\n";
    for (const Report& r : reports) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s,%d,%zu,%zu,%llu,%016llx\n", r.name.c_str(),
                    r.pass() ? 1 : 0, r.assertions.size(), r.rows.size(),
                    static_cast<unsigned long long>(r.seed),
                    static_cast<unsigned long long>(r.config_hash));
      f << buf;
    }
  }
  for (const Report& r : reports) {
    std::ofstream f(fs::path(out_dir) / (r.name + ".csv"));
    f << report_csv(r);
  }
}

}  // namespace pertflow
