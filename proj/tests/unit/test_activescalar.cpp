#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracflow/activescalar.hpp"

#include <cmath>
#include <random>

using namespace fracflow;
using doctest::Approx;

namespace {

template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("slit kernel") {
  CHECK((slit_kernel(Vec2(1, 0)) - Vec2(-1, 0)).norm() < 1e-15);
  CHECK(slit_kernel(Vec2(4, 0)).norm() == 0);
  CHECK(slit_kernel(Vec2(0, 0)).norm() == 0);
  for (double s : {-1.9, -0.7, -0.01, 0.3, 1.5})
    CHECK((slit_kernel(Vec2(s, 0)) - Vec2(-(s > 0 ? 1 : -1) * std::sqrt(std::abs(s)), 0)).norm() <
          1e-14);
  // K = grad-perp kappa by central differences, including the cutoff collar
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.2, 3.2);
  const double h = 1e-5;
  for (int n = 0; n < 300; ++n) {
    Vec2 x(u(rng), u(rng));
    if (x.norm() < 0.05) continue;
    double d1 = (slit_kappa(x + Vec2(h, 0)) - slit_kappa(x - Vec2(h, 0))) / (2 * h);
    double d2 = (slit_kappa(x + Vec2(0, h)) - slit_kappa(x - Vec2(0, h))) / (2 * h);
    Vec2 K = slit_kernel(x);
    CHECK(K.x() == Approx(-d2).epsilon(1e-6).scale(1));
    CHECK(K.y() == Approx(d1).epsilon(1e-6).scale(1));
  }
}

TEST_CASE("ribbon kernel") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-4.2, 4.2);
  const double h = 1e-5;
  for (int n = 0; n < 300; ++n) {
    Vec3 x(u(rng), u(rng), u(rng));
    if (std::hypot(x.x(), x.z()) < 0.05) continue;
    auto k = [&](Vec3 d) { return ribbon_kappa(x + d); };
    double d1 = (k(Vec3(h, 0, 0)) - k(Vec3(-h, 0, 0))) / (2 * h);
    double d3 = (k(Vec3(0, 0, h)) - k(Vec3(0, 0, -h))) / (2 * h);
    Vec3 c = ribbon_column(x);
    CHECK(c.x() == Approx(d3).epsilon(1e-6).scale(1));
    CHECK(c.y() == 0);
    CHECK(c.z() == Approx(-d1).epsilon(1e-6).scale(1));
    Eigen::Matrix3d M = ribbon_kernel(x);
    CHECK(M.col(0).norm() == 0);
    CHECK(M.col(2).norm() == 0);
    CHECK((M.col(1) - c).norm() == 0);
  }
  // on {x1 = 0}: d3 kappa vanishes, -d1 kappa = -x3 |x3|^{-1/2} inside the plateau
  for (double x3 : {-1.2, 0.4, 2.0}) {
    Vec3 c = ribbon_column(Vec3(0, 0.7, x3));
    CHECK(c.x() == 0);
    CHECK(c.z() == Approx(-x3 / std::sqrt(std::abs(x3))).epsilon(1e-14));
  }
}

TEST_CASE("mollified kernel") {
  auto M = build_mollified(0.1);
  CHECK(M(0) == 0);
  CHECK(M(3.2) == 0);
  const auto& rho = Bump1D::get();
  // away from the cusp the convolution has a smooth integrand
  for (double s : {0.5, 1.0, 1.5, 1.85}) {
    double ref = simpson([&](double y) { return -rho(y) * std::sqrt(s - 0.1 * y); }, -1, 1);
    CHECK(M(s) == Approx(ref).epsilon(1e-10));
    CHECK(M(-s) == -M(s));
  }
  // table against direct quadrature, including near the cusp and the cutoff
  for (double s : {1e-4, 0.03, 0.0999, 0.11, 2.05, 2.9, 3.05})
    CHECK(std::abs(M(s) - MollifiedKernel::direct(s, 0.1)) < 1e-10);
  // non-increasing on the range the dynamics visit
  for (double s = -1.9; s < 1.9; s += 0.001) CHECK(M(s + 0.001) <= M(s));
  // M_eps(1) -> K(1,0) = -1
  double prev = 1;
  for (double e : {1e-1, 1e-2, 1e-3}) {
    double err = std::abs(build_mollified(e)(1) + 1);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-6);
  CHECK_THROWS_AS(build_mollified(0), DomainError);
  CHECK_THROWS_AS(build_mollified(0.7), DomainError);
}

TEST_CASE("line states and rhs") {
  CHECK_THROWS_AS(initial_line_state(3, 0.01), DomainError);
  auto s = initial_line_state(10, 0.01);
  CHECK(s.alphas.front() == Approx(-0.9));
  CHECK(s.Y == s.alphas);
  auto M = build_mollified(0.01);
  LineState z = s;
  std::fill(z.Y.begin(), z.Y.end(), 0.0);
  CHECK(max_abs(slit_rhs(z, M)) == 0);
  auto r = slit_rhs(s, M);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == Approx(-r[r.size() - 1 - i]));
  // two particles: dY_2/dt = M(2a) ~ -sqrt(2a)
  LineState two = initial_line_state(2, 0.001);
  two.Y = {-0.3, 0.3};
  auto M3 = build_mollified(0.001);
  auto r2 = slit_rhs(two, M3);
  CHECK(r2[1] == Approx(-std::sqrt(0.6)).epsilon(1e-6));
  CHECK(r2[0] == -r2[1]);
  auto r2b = slit_rhs(two, M3, 2);
  CHECK(r2b[1] == 2 * r2[1]);
}

TEST_CASE("slit solve: invariants and comparison bound") {
  auto h = solve_slit(100, 0.02, 0.01, 2.1);
  CHECK(h.max_oddness <= 1e-10);
  CHECK(h.min_increment >= 0);
  CHECK(h.max_increment <= 2.0 / 100 + 1e-10);
  CHECK(h.max_growth == 0);
  for (const auto& s : h.states)
    if (s.t <= 2) CHECK(s.Y.back() <= std::pow(1 - s.t / 2, 2) + 0.05);
  CHECK(max_abs(h.at(2.1).Y) < 1e-2);
  // interpolation in time
  auto a = h.at(0.505);
  CHECK(a.Y[7] == Approx(0.5 * (h.at(0.5).Y[7] + h.at(0.51).Y[7])));
}

TEST_CASE("slit velocity") {
  auto s = initial_line_state(100, 0.02);
  CHECK(slit_velocity(s, Vec2(0, 0.4)).x() == Approx(0).scale(1).epsilon(1e-14));
  CHECK(slit_velocity(s, Vec2(10, 0)).norm() == 0);
  // on-axis velocity against the particle rhs: first order in 1/N + eps
  std::vector<double> err;
  for (int N : {100, 200, 400}) {
    auto st = initial_line_state(N, 2.0 / N);
    auto M = build_mollified(2.0 / N);
    auto r = slit_rhs(st, M);
    double e = 0;
    for (int i = 0; i < N; i += N / 20) e = std::max(e, std::abs(slit_velocity(st, Vec2(st.Y[i], 0)).x() - r[i]));
    err.push_back(e);
  }
  MESSAGE("self-consistency ", err[0], " ", err[1], " ", err[2]);
  CHECK(err[1] < err[0]);
  CHECK(err[2] < err[1]);
}

TEST_CASE("ribbon: doubled rate") {
  const int N = 100;
  auto hs = solve_slit(N, 0.02, 0.02, 1.0);
  auto hr = solve_ribbon(N, 0.02, 0.01, 0.5);
  // RK4 with rhs 2f and step h equals RK4 with f and step 2h
  for (double t : {0.1, 0.2, 0.3}) {
    auto a = hr.at(t), b = hs.at(2 * t);
    for (int i = 0; i < N; ++i) CHECK(a.Y[i] == Approx(b.Y[i]).epsilon(1e-12).scale(1));
  }
  auto h = solve_ribbon(N, 0.02, 0.01, 1.1);
  for (const auto& s : h.states)
    if (s.t <= 1) CHECK(s.Y.back() <= std::pow(1 - s.t, 2) + 0.05);
}

TEST_CASE("ribbon velocity") {
  auto s = initial_line_state(60, 0.03);
  for (double a2 : {-1.0, 0.2, 1.0})
    for (int i : {0, 17, 59}) {
      Vec3 v = ribbon_velocity(s, Vec3(0, a2, s.Y[i]));
      CHECK(v.x() == 0);
      CHECK(v.y() == 0);
      CHECK(v.z() == Approx(2 * slit_velocity(s, Vec2(s.Y[i], 0)).x()).epsilon(1e-14));
    }
  // off the shortcut region: Gauss-Legendre against Simpson in beta_2
  for (Vec3 x : {Vec3(0.4, 2.6, 0.3), Vec3(-1.1, -2.2, 1.0)}) {
    Vec3 ref = Vec3::Zero();
    for (double y : s.Y)
      for (int c = 0; c < 3; ++c)
        ref[c] += (2.0 / 60) *
                  simpson([&](double b) { return ribbon_column(x - Vec3(0, b, y))[c]; }, -1, 1, 4000);
    Vec3 v = ribbon_velocity(s, x, 32);
    CHECK((v - ref).norm() < 1e-11);
    CHECK((ribbon_velocity(s, x, 8) - ref).norm() < 1e-11);
    CHECK(v.y() == 0);
  }
}

TEST_CASE("Gauss-Legendre rules") {
  for (int n : {4, 8, 16, 32}) {
    const auto& g = gauss_legendre(n);
    REQUIRE(int(g.x.size()) == n);
    for (int p = 0; p < 2 * n; ++p) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += g.w[i] * std::pow(g.x[i], p);
      CHECK(s == Approx(p % 2 ? 0 : 2.0 / (p + 1)).epsilon(1e-13).scale(1));
    }
  }
  CHECK_THROWS_AS(gauss_legendre(5), DomainError);
}

TEST_CASE("active Sobolev estimate") {
  auto s = initial_line_state(50, 0.04);
  Rect reg = Rect::from_bounds(-1.5, 1.5, -0.8, 0.8);
  double a = active_sobolev_check(s, 1, reg, 0.02).value;
  double b = active_sobolev_check(s, 1, reg, 0.01).value;
  double c = active_sobolev_check(s, 1, reg, 0.005).value;
  MESSAGE("L1 estimates ", a, " ", b, " ", c);
  CHECK(std::abs(b - a) / c < 0.05);
  CHECK(std::abs(c - b) / c < 0.05);
  auto p2a = active_sobolev_check(s, 2, reg, 0.02), p2b = active_sobolev_check(s, 2, reg, 0.01),
       p2c = active_sobolev_check(s, 2, reg, 0.005);
  CHECK(p2b.value > p2a.value);
  CHECK(p2c.value > p2b.value);
  CHECK_FALSE(p2c.warning.empty());
}
