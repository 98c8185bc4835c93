#include "fracflow/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace fracflow {

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 unsigned max_depth, double abs_tol) {
  if (a == b) return 0;
  // A coarse pass sizes |f|, so abs_tol can become a relative target. Asking
  // for more than ~5e-14 (or than abs_tol allows) only piles up roundoff over
  // many leaves; the recursion can also stop on a stale estimate, hence the
  // retries.
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0, l1 = 0;
  double v = GK::integrate(f, a, b, 5, 1e-6, &err, &l1);
  if (l1 == 0) return v;
  const double t0 = std::max({tol, 5e-14, abs_tol / l1});
  for (double t = t0; t <= t0 * 1001; t *= 10) {
    v = GK::integrate(f, a, b, max_depth, t, &err, &l1);
    if (err <= 100 * t * l1 + abs_tol) return v;
  }
  std::ostringstream os;
  os << "quadrature on [" << a << ", " << b << "] did not converge (error estimate " << err
     << ", |f| integral " << l1 << ")";
  throw DomainError(os.str());
}

HermiteTable tabulate(const std::function<double(double)>& f,
                      const std::function<double(double)>& df, double x0, double x1,
                      std::size_t intervals) {
  std::vector<double> y(intervals + 1), dy(intervals + 1);
  double dx = (x1 - x0) / double(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) {
    double x = (i == intervals) ? x1 : x0 + dx * double(i);
    y[i] = f(x);
    dy[i] = df(x);
  }
  return HermiteTable(std::move(y), std::move(dy), x0, dx);
}

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_threads(unsigned n) { g_threads = n; }

unsigned threads() {
  if (unsigned n = g_threads.load()) return n;
  if (const char* env = std::getenv("FA_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return unsigned(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  unsigned nt = std::min<std::size_t>(threads(), n);
  if (nt <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + nt - 1) / nt;
  std::vector<std::exception_ptr> errs(nt);
  for (unsigned w = 0; w < nt; ++w) {
    pool.emplace_back([&, w] {
      std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace fracflow
