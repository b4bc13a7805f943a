#pragma once
// Reproducible Wiener increments.  A keyed counter hash (seed, path, step,
// component) -> uniform -> Gaussian via the inverse CDF; no generator state,
// so any increment is addressable on its own.  Coupled-epsilon runs and
// dyadic grid refinements therefore share identical randomness by
// construction, and coarse increments are exact sums of fine ones.

#include <cstdint>
#include <functional>
#include <vector>

namespace pertflow {

std::uint64_t mix64(std::uint64_t x);  // splitmix64 finalizer
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);
double uniform_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);  // in (0,1)
double gaussian_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c); // N(0,1)

struct WienerDriver {
  std::uint64_t seed = 0;
  int dim = 8;              // noise components M
  int master_steps = 4096;  // finest grid; power of two
  double T = 0.5;

  WienerDriver() = default;
  WienerDriver(std::uint64_t seed, int dim, int master_steps, double T);
};

// Increments of one path on a coarse grid whose step count divides
// master_steps.  row(s) has one entry per component; each is the exact sum
// of the constituent fine increments (each fine draw ~ N(0, T/master_steps)).
struct IncrementView {
  const WienerDriver* driver = nullptr;
  std::uint64_t path = 0;
  int steps = 0;
  int stride = 0;  // master_steps / steps

  std::vector<double> row(int s) const;
};

IncrementView make_view(const WienerDriver& d, std::uint64_t path, int steps);
std::vector<std::vector<double>> increments(const WienerDriver& d, std::uint64_t path, int steps);

// Deterministic path-to-worker assignment: worker w of W handles paths
// w, w+W, w+2W, ...  Callers reduce in path order after the pool joins, so
// ensemble statistics do not depend on the worker count.
struct PathPlan {
  int total = 0;
};

PathPlan path_count_plan(int target_paths);
void for_each_path(const PathPlan& plan, int workers, const std::function<void(int)>& body);

}  // namespace pertflow
