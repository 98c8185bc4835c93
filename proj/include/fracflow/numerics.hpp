#pragma once
// Shared numeric helpers: vector aliases, error types, smooth ramps,
// adaptive quadrature, Hermite tables, and a deterministic parallel loop.

#include <Eigen/Dense>
#include <boost/math/interpolators/cubic_hermite.hpp>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracflow {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
template <int D> using Vec = Eigen::Matrix<double, D, 1>;

// invalid parameters (maps to CLI exit code 2)
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
// caps on enumeration / step counts (exit code 4)
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// a verified invariant broke during a run (exit code 3)
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Quintic C2 smoothstep on [0,1]: P(0)=0, P(1)=1, P',P'' vanish at both ends.
inline double smoothstep(double z) {
  if (z <= 0) return 0;
  if (z >= 1) return 1;
  return z * z * z * (10 + z * (-15 + 6 * z));
}
inline double smoothstep_prime(double z) {
  if (z <= 0 || z >= 1) return 0;
  double w = z * (1 - z);
  return 30 * w * w;
}

// Cutoff that is 1 for r <= a and 0 for r >= b.
struct Falloff {
  double a, b;
  double operator()(double r) const { return 1 - smoothstep((r - a) / (b - a)); }
  double prime(double r) const { return -smoothstep_prime((r - a) / (b - a)) / (b - a); }
};

// exp(-1/(t(1-t))) on (0,1), zero elsewhere
inline double time_bump(double t) {
  if (t <= 0 || t >= 1) return 0;
  return std::exp(-1 / (t * (1 - t)));
}

// Adaptive 15-point Gauss-Kronrod; throws DomainError when the error
// estimate stays above 1000 tol (relative) plus abs_tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-14, unsigned max_depth = 20, double abs_tol = 1e-15);

using HermiteTable = boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>>;

// Tabulate f on a uniform grid [x0, x0+n*dx] using the supplied derivative.
HermiteTable tabulate(const std::function<double(double)>& f,
                      const std::function<double(double)>& df, double x0, double x1,
                      std::size_t intervals);

// Worker count: set_threads() wins, else FA_THREADS, else hardware concurrency.
void set_threads(unsigned n);
unsigned threads();

// Runs body(i) for i in [0,n) split into contiguous chunks. Results must be
// written to per-index slots; no reduction happens here.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fracflow
