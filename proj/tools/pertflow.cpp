// pertflow: configure and run the perturbation experiments from the shell.
//
//   simulate     solve_base ensembles, per-path statistics as CSV
//   sensitivity  derivative hierarchy (+ optional difference-quotient and
//                Taylor-remainder studies)
//   verify       one named check, verdict in the exit status
//   suite        the full experiment battery (fast or full level)
//   describe     resolved configuration, reusable as a config file
//
// Exit status: 0 success / all assertions pass, 1 verdict failure,
// 2 usage or configuration error.

#include "CLI11.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pertflow/coefficients.hpp"
#include "pertflow/config.hpp"
#include "pertflow/harness.hpp"
#include "pertflow/noise.hpp"
#include "pertflow/operators.hpp"
#include "pertflow/sensitivity.hpp"
#include "pertflow/solver.hpp"

namespace {

using namespace pertflow;

DenseMatrix matrix_from_config(const Config& cfg, const std::string& key, int d) {
  if (cfg.has("operator", key)) {
    const std::vector<double> a = cfg.get_array("operator", key, {});
    if (static_cast<int>(a.size()) != d * d)
      throw std::invalid_argument("operator." + key + " must hold " + std::to_string(d * d) +
                                  " row-major entries");
    return DenseMatrix(d, a);
  }
  const std::string path = cfg.get_string("operator", key + "_csv", "");
  if (path.empty())
    throw std::invalid_argument("dense backend needs operator." + key + " or operator." + key +
                                "_csv");
  DenseMatrix mat = DenseMatrix::load_csv(path);
  if (mat.n != d) throw std::invalid_argument("operator." + key + "_csv dimension mismatch");
  return mat;
}

OperatorPair operator_from_config(const Config& cfg) {
  const std::string backend = cfg.get_string("operator", "backend", "fourier");
  const int m = static_cast<int>(cfg.get_int("operator", "m", 3));
  if (backend == "fourier")
    return OperatorPair::fourier(static_cast<int>(cfg.get_int("operator", "modes", 16)), m);
  if (backend != "dense") throw std::invalid_argument("unknown operator backend: " + backend);
  const int d = static_cast<int>(cfg.get_int("operator", "dim", 2));
  std::optional<std::vector<double>> alphas;
  if (cfg.has("operator", "alphas")) alphas = cfg.get_array("operator", "alphas", {});
  return OperatorPair::dense(matrix_from_config(cfg, "a", d), matrix_from_config(cfg, "g", d), m,
                             alphas);
}

Element initial_from_config(const Config& cfg, const BasisSpec& basis) {
  if (cfg.has("initial", "coeffs")) {
    const std::vector<double> a = cfg.get_array("initial", "coeffs", {});
    if (static_cast<int>(a.size()) != basis.dim())
      throw std::invalid_argument("initial.coeffs length must equal the basis dimension");
    return Element(basis, a);
  }
  // default start: lowest nontrivial smooth profile (second cosine mode for
  // the circle, first coordinate otherwise)
  const int index = basis.kind == BasisKind::fourier && basis.dim() > 3 ? 3 : 0;
  return Element::unit(basis, index);
}

WienerDriver driver_from_config(const Config& cfg, std::uint64_t seed, int needed_dim) {
  const int dim =
      std::max(static_cast<int>(cfg.get_int("noise", "dim", 8)), needed_dim);
  return WienerDriver(seed, dim, static_cast<int>(cfg.get_int("noise", "master_steps", 4096)),
                      cfg.get_real("noise", "horizon", 0.5));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::string hierarchy_csv(const SensitivitySolution& sol, const BasisSpec& basis,
                          const TimeGrid& grid) {
  std::string out = "t";
  char buf[48];
  const int order = sol.order;
  if (basis.kind == BasisKind::fourier) {
    for (int k = 0; k <= order; ++k)
      for (int j = 0; j <= basis.param; ++j) {
        std::snprintf(buf, sizeof(buf), ",u%d_mode%d", k, j);
        out += buf;
      }
  } else {
    for (int k = 0; k <= order; ++k)
      for (int i = 0; i < basis.dim(); ++i) {
        std::snprintf(buf, sizeof(buf), ",u%d_c%d", k, i);
        out += buf;
      }
  }
  out += "\n";
  for (int s = 0; s <= grid.steps; ++s) {
    out += format_real(grid.time(s));
    for (int k = 0; k <= order; ++k) {
      const Element& u = sol.levels[static_cast<std::size_t>(k)].states[static_cast<std::size_t>(s)];
      if (basis.kind == BasisKind::fourier) {
        out += "," + format_real(std::abs(u[0]));
        for (int j = 1; j <= basis.param; ++j)
          out += "," + format_real(std::hypot(u[2 * j - 1], u[2 * j]));
      } else {
        for (int i = 0; i < basis.dim(); ++i) out += "," + format_real(u[i]);
      }
    }
    out += "\n";
  }
  return out;
}

std::string slope_table_csv(const std::vector<std::array<double, 5>>& rows, const char* x_name) {
  std::string out = std::string(x_name) + ",value,std_error,value_low_moment,se_low_moment\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_real(row[i]);
    out += "\n";
  }
  return out;
}

std::vector<double> dyadic_list(double first, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i, first /= 2.0) out.push_back(first);
  return out;
}

int cmd_simulate(const Config& cfg, const std::string& out_dir, int workers) {
  const OperatorPair P = operator_from_config(cfg);
  const CoefficientField c =
      CoefficientField::preset(cfg.get_string("coefficients", "preset", "nemytskii"), P, cfg);
  const Element u0 = initial_from_config(cfg, P.basis());
  const double eps = cfg.get_real("sweep", "eps", 0.25);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("suite", "seed", 20260823));
  const TimeGrid grid(cfg.get_real("noise", "horizon", 0.5),
                      static_cast<int>(cfg.get_int("grid", "steps", 256)));
  const WienerDriver driver = driver_from_config(cfg, seed, c.noise_dim());
  const int paths = static_cast<int>(cfg.get_int("ensemble", "paths", 64));
  const double p = cfg.get_real("ensemble", "p", 2.0);

  std::vector<SolutionPath> ensemble(static_cast<std::size_t>(paths),
                                     SolutionPath{grid, eps, {}, 0});
  for_each_path(path_count_plan(paths), workers, [&](int path) {
    ensemble[static_cast<std::size_t>(path)] =
        solve_base(P, c, eps, u0, grid, driver, static_cast<std::uint64_t>(path));
  });

  std::string csv = "path,sup_norm,final_norm,final_graph_norm_m,noise_fingerprint\n";
  char buf[64];
  for (int path = 0; path < paths; ++path) {
    const SolutionPath& sol = ensemble[static_cast<std::size_t>(path)];
    double sup = 0.0;
    for (const Element& u : sol.states) sup = std::max(sup, norm(u));
    csv += std::to_string(path) + "," + format_real(sup) + "," +
           format_real(norm(sol.states.back())) + "," +
           format_real(P.graph_norm(sol.states.back(), P.m()));
    std::snprintf(buf, sizeof(buf), ",%016llx\n",
                  static_cast<unsigned long long>(sol.noise_fingerprint));
    csv += buf;
  }
  write_text(std::filesystem::path(out_dir) / "ensemble.csv", csv);

  std::string traj = "t,norm,graph_norm_m\n";
  for (int s = 0; s <= grid.steps; ++s) {
    const Element& u = ensemble[0].states[static_cast<std::size_t>(s)];
    traj += format_real(grid.time(s)) + "," + format_real(norm(u)) + "," +
            format_real(P.graph_norm(u, P.m())) + "\n";
  }
  write_text(std::filesystem::path(out_dir) / "trajectory.csv", traj);

  const CpNormEstimate est = cp_norm(ensemble, p, 0, P);
  std::string summary;
  std::snprintf(buf, sizeof(buf), "%g", est.p);
  summary += "preset " + c.name() + ", eps " + format_real(eps) + ", " + std::to_string(paths) +
             " paths, " + std::to_string(grid.steps) + " steps\n";
  summary += "pathwise-sup L^" + std::string(buf) + " norm: " + format_real(est.value) + " +/- " +
             format_real(est.std_error) + "\n";
  write_text(std::filesystem::path(out_dir) / "report.txt", summary);
  std::cout << summary;
  return 0;
}

int cmd_sensitivity(const Config& cfg, const std::string& out_dir, int order, int fd_order,
                    int taylor_order, std::uint64_t path) {
  const OperatorPair P = operator_from_config(cfg);
  const CoefficientField c =
      CoefficientField::preset(cfg.get_string("coefficients", "preset", "nemytskii"), P, cfg);
  const Element u0 = initial_from_config(cfg, P.basis());
  const double eps = cfg.get_real("sweep", "eps", 0.25);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("suite", "seed", 20260823));
  const TimeGrid grid(cfg.get_real("noise", "horizon", 0.5),
                      static_cast<int>(cfg.get_int("grid", "steps", 256)));
  const WienerDriver driver = driver_from_config(cfg, seed, c.noise_dim());
  const int paths = static_cast<int>(cfg.get_int("ensemble", "paths", 64));
  const double p = cfg.get_real("ensemble", "p", 2.0);

  const SensitivitySolution sol = solve_hierarchy(P, c, eps, u0, order, grid, driver, path);
  write_text(std::filesystem::path(out_dir) / "hierarchy.csv",
             hierarchy_csv(sol, P.basis(), grid));
  std::string summary = "hierarchy to order " + std::to_string(order) + ", preset " + c.name() +
                        ", eps " + format_real(eps) + "\n";
  for (int k = 0; k <= order; ++k)
    summary += "  |u" + std::to_string(k) + "(T)| = " +
               format_real(norm(sol.levels[static_cast<std::size_t>(k)].states.back())) + "\n";

  bool ok = true;
  if (fd_order > 0) {
    const FdHierarchyCheck fd = finite_difference_check(
        P, c, eps, u0, fd_order, dyadic_list(0x1p-3, 6), grid, driver, paths, p);
    std::vector<std::array<double, 5>> rows;
    for (const auto& row : fd.rows)
      rows.push_back({row.h, row.value, row.std_error, row.value_secondary, row.se_secondary});
    write_text(std::filesystem::path(out_dir) / "fd.csv", slope_table_csv(rows, "h"));
    summary += "difference-quotient slope (order " + std::to_string(fd_order) +
               "): " + format_real(fd.slope) + (fd.pass ? " [pass]\n" : " [fail]\n");
    ok = ok && fd.pass;
  }
  if (taylor_order > 0) {
    const TaylorCheck tc = taylor_remainder(P, c, u0, taylor_order, dyadic_list(0.25, 5), grid,
                                            driver, paths, p);
    std::vector<std::array<double, 5>> rows;
    for (const auto& row : tc.rows)
      rows.push_back({row.eps, row.value, row.std_error, row.value_secondary, row.se_secondary});
    write_text(std::filesystem::path(out_dir) / "taylor.csv", slope_table_csv(rows, "eps"));
    summary += "Taylor-remainder slope (order " + std::to_string(taylor_order) +
               "): " + format_real(tc.slope) + (tc.pass ? " [pass]\n" : " [fail]\n");
    ok = ok && tc.pass;
  }
  write_text(std::filesystem::path(out_dir) / "report.txt", summary);
  std::cout << summary;
  return ok ? 0 : 1;
}

// short names for the checks people run interactively
std::string resolve_check_name(const std::string& name) {
  if (name == "h1") return "semigroup_growth_fourier";
  if (name == "seh" || name == "perturbed") return "semigroup_growth_perturbed";
  if (name == "trotter") return "trotter_dense";
  if (name == "resolvent") return "resolvent_convergence";
  if (name == "continuity") return "continuity_in_eps";
  return name;
}

int cmd_verify(const Config& cfg, const std::string& out_dir, const std::string& name,
               int workers) {
  const Report report = run_experiment(resolve_check_name(name), cfg, workers);
  const Report reports[] = {report};
  write_suite_outputs(out_dir, reports);
  std::cout << report_text(report);
  return report.pass() ? 0 : 1;
}

int cmd_suite(const Config& cfg, const std::string& out_dir, const std::string& level,
              int workers) {
  const std::vector<Report> reports = run_suite(level, cfg, workers);
  write_suite_outputs(out_dir, reports);
  std::cout << suite_text(reports);
  return all_pass(reports) ? 0 : 1;
}

int cmd_describe(const Config& cfg) {
  std::cout << cfg.serialize();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(cfg.hash()));
  std::cout << "# hash " << buf << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"singular-perturbation experiment driver"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::vector<std::string> overrides;
  int workers = 0;
  app.add_option("--config", config_path, "configuration file (merged over defaults)");
  app.add_option("--set", overrides, "override, e.g. --set sweep.eps=0.1");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--workers", workers, "worker threads (default: suite.workers)");

  std::string preset, name, level = "fast";
  double eps = std::nan("");
  int order = 1, fd_order = 0, taylor_order = 0, steps = 0, paths = 0;
  std::uint64_t path = 0;

  CLI::App* sim = app.add_subcommand("simulate", "solve_base ensemble statistics");
  sim->add_option("--preset", preset, "coefficient preset");
  sim->add_option("--eps", eps, "perturbation strength");
  sim->add_option("--steps", steps, "time steps");
  sim->add_option("--paths", paths, "ensemble size");

  CLI::App* sens = app.add_subcommand("sensitivity", "derivative hierarchy and slope studies");
  sens->add_option("--order", order, "hierarchy order")->capture_default_str();
  sens->add_option("--preset", preset, "coefficient preset");
  sens->add_option("--eps", eps, "expansion point");
  sens->add_option("--steps", steps, "time steps");
  sens->add_option("--paths", paths, "ensemble size for the slope studies");
  sens->add_option("--path", path, "noise path index for the hierarchy table");
  sens->add_option("--fd", fd_order, "also run the order-k difference-quotient study");
  sens->add_option("--taylor", taylor_order, "also run the order-K Taylor-remainder study");

  CLI::App* ver = app.add_subcommand("verify", "run one named check");
  ver->add_option("--name", name, "check name")->required();

  CLI::App* suite = app.add_subcommand("suite", "run the experiment battery");
  suite->add_option("--level", level, "fast | full")->capture_default_str();

  CLI::App* desc = app.add_subcommand("describe", "print the resolved configuration");
  for (CLI::App* sub : {sim, sens, ver, suite, desc}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Config cfg;
  try {
    cfg = default_config();
    if (!config_path.empty()) {
      const Config file = Config::parse_file(config_path);
      for (const auto& [sec, kv] : file.sections())
        for (const auto& [key, value] : kv) cfg.set(sec, key, value);
    }
    if (const char* env = std::getenv("PERTFLOW_SEED")) {
      char* end = nullptr;
      const long long v = std::strtoll(env, &end, 10);
      if (end == env || *end != '\0')
        throw std::invalid_argument("PERTFLOW_SEED must be an integer");
      cfg.set("suite", "seed", ConfigValue(static_cast<std::int64_t>(v)));
    }
    for (const std::string& s : overrides) cfg.apply_override(s);
    if (!preset.empty()) cfg.set("coefficients", "preset", ConfigValue(preset));
    if (!std::isnan(eps)) cfg.set("sweep", "eps", ConfigValue(eps));
    if (steps > 0) cfg.set("grid", "steps", ConfigValue(static_cast<std::int64_t>(steps)));
    if (paths > 0) cfg.set("ensemble", "paths", ConfigValue(static_cast<std::int64_t>(paths)));
    if (workers == 0)
      workers = static_cast<int>(cfg.get_int("suite", "workers", 1));
    if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(cfg, out_dir, workers);
    if (sens->parsed()) return cmd_sensitivity(cfg, out_dir, order, fd_order, taylor_order, path);
    if (ver->parsed()) return cmd_verify(cfg, out_dir, name, workers);
    if (suite->parsed()) return cmd_suite(cfg, out_dir, level, workers);
    return cmd_describe(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
