#include "pertflow/noise.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <stdexcept>
#include <thread>

namespace pertflow {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ull);
  h = mix64(h ^ mix64(a + 0xbf58476d1ce4e5b9ull));
  h = mix64(h ^ mix64(b + 0x94d049bb133111ebull));
  h = mix64(h ^ mix64(c + 0xd6e8feb86659fd93ull));
  return h;
}

double uniform_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  // top 53 bits, centered in the bin: strictly inside (0,1)
  const std::uint64_t bits = counter_hash(seed, a, b, c) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1p-53;
}

double gaussian_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  const double u = uniform_draw(seed, a, b, c);
  return M_SQRT2 * boost::math::erf_inv(2.0 * u - 1.0);
}

WienerDriver::WienerDriver(std::uint64_t seed_, int dim_, int master_steps_, double T_)
    : seed(seed_), dim(dim_), master_steps(master_steps_), T(T_) {
  if (dim < 0) throw std::invalid_argument("noise dimension must be >= 0");
  if (master_steps < 1 || (master_steps & (master_steps - 1)) != 0)
    throw std::invalid_argument("master_steps must be a positive power of two");
  if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
}

IncrementView make_view(const WienerDriver& d, std::uint64_t path, int steps) {
  if (steps < 1 || d.master_steps % steps != 0)
    throw std::invalid_argument("step count must divide master_steps");
  return IncrementView{&d, path, steps, d.master_steps / steps};
}

std::vector<double> IncrementView::row(int s) const {
  if (s < 0 || s >= steps) throw std::invalid_argument("increment row out of range");
  const double scale = std::sqrt(driver->T / driver->master_steps);
  std::vector<double> out(static_cast<std::size_t>(driver->dim), 0.0);
  for (int j = 0; j < driver->dim; ++j) {
    double sum = 0.0;
    for (int r = 0; r < stride; ++r) {
      const std::uint64_t fine = static_cast<std::uint64_t>(s) * stride + r;
      sum += gaussian_draw(driver->seed, path, fine, static_cast<std::uint64_t>(j));
    }
    out[static_cast<std::size_t>(j)] = scale * sum;
  }
  return out;
}

std::vector<std::vector<double>> increments(const WienerDriver& d, std::uint64_t path, int steps) {
  IncrementView v = make_view(d, path, steps);
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(steps));
  for (int s = 0; s < steps; ++s) rows.push_back(v.row(s));
  return rows;
}

PathPlan path_count_plan(int target_paths) {
  if (target_paths < 0) throw std::invalid_argument("path count must be >= 0");
  return PathPlan{target_paths};
}

void for_each_path(const PathPlan& plan, int workers, const std::function<void(int)>& body) {
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  if (workers == 1 || plan.total <= 1) {
    for (int p = 0; p < plan.total; ++p) body(p);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&body, &plan, w, workers] {
      for (int p = w; p < plan.total; p += workers) body(p);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace pertflow
