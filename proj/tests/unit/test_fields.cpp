#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracflow/grid.hpp"

#include <cmath>
#include <random>

using namespace fracflow;
using doctest::Approx;

namespace {

// composite Simpson rule, an oracle independent of the adaptive quadrature
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

}  // namespace

TEST_CASE("smoothstep and falloff") {
  CHECK(smoothstep(0) == 0);
  CHECK(smoothstep(1) == 1);
  CHECK(smoothstep(0.5) == Approx(0.5));
  for (double z = 0.01; z < 1; z += 0.01) {
    double fd = (smoothstep(z + 1e-6) - smoothstep(z - 1e-6)) / 2e-6;
    CHECK(smoothstep_prime(z) == Approx(fd).epsilon(1e-7));
    CHECK(smoothstep(1 - z) == Approx(1 - smoothstep(z)));
  }
  Falloff f{2, 3};
  CHECK(f(1.5) == 1);
  CHECK(f(3.2) == 0);
  CHECK(f(2.5) == Approx(0.5));
}

TEST_CASE("adaptive quadrature") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0, M_PI) == Approx(2).epsilon(1e-14));
  CHECK(integrate([](double x) { return std::exp(x); }, 0, 1) ==
        Approx(std::exp(1.0) - 1).epsilon(1e-14));
  CHECK(integrate([](double x) { return std::sqrt(x); }, 0, 1, 1e-10) ==
        Approx(2.0 / 3).epsilon(1e-10));
  CHECK(integrate([](double) { return 0.0; }, 0, 1) == 0);
}

TEST_CASE("hermite tables") {
  auto t = tabulate([](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }, 0,
                    2, 200);
  for (double x = 0; x <= 2; x += 0.013) CHECK(std::abs(t(x) - std::sin(x)) < 1e-10);
}

TEST_CASE("parallel loop fills every slot") {
  std::vector<int> v(1001, 0);
  parallel_for(v.size(), [&](std::size_t i) { v[i] = int(i) + 1; });
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == int(i) + 1);
}

TEST_CASE("time profile") {
  const auto& tp = TimeProfile::get();
  double z = simpson([](double t) { return time_bump(t); }, 0, 1);
  CHECK(tp.mass_constant() == Approx(z).epsilon(1e-10));
  CHECK(tp.cumulative(0) == 0);
  CHECK(tp.cumulative(1) == Approx(1).epsilon(1e-12));
  CHECK(tp.cumulative(0.5) == Approx(0.5).epsilon(1e-12));
  CHECK(tp.sup() == Approx(tp.rate(0.5)));
  for (double t : {0.1, 0.3, 0.77}) {
    double c = simpson([](double s) { return time_bump(s); }, 0, t) / z;
    CHECK(tp.cumulative(t) == Approx(c).epsilon(1e-10));
  }
}

TEST_CASE("mollifier and smoothed sign") {
  const auto& m = Mollifier2D::get();
  // unit mass over the disk
  double mass = simpson([&](double r) { return 2 * M_PI * r * m.density(r); }, 0, 1);
  CHECK(mass == Approx(1).epsilon(1e-10));
  // marginal: integral of the density along a vertical line
  for (double s : {0.0, 0.3, 0.8}) {
    double h = std::sqrt(1 - s * s);
    double mg = simpson([&](double y) { return m.density(std::hypot(s, y)); }, -h, h);
    CHECK(m.marginal(s) == Approx(mg).epsilon(1e-9));
  }
  CHECK(m.sign_profile(0) == Approx(0).epsilon(1e-15));
  CHECK(m.sign_profile(1) == Approx(1).epsilon(1e-12));
  CHECK(m.sign_profile(-1.5) == -1);
  for (double s = -0.95; s < 1; s += 0.05) {
    CHECK(m.sign_profile(-s) == Approx(-m.sign_profile(s)).epsilon(1e-14));
    double fd = (m.sign_profile(s + 1e-5) - m.sign_profile(s - 1e-5)) / 2e-5;
    CHECK(m.sign_profile_prime(s) == Approx(fd).epsilon(1e-6));
  }
  const double d = derive_constants(0.6).delta;
  CHECK(smoothed_sign(0, d) == Approx(0).epsilon(1e-15));
  CHECK(smoothed_sign(2 * d, d) == 1);
}

TEST_CASE("fundamental field u") {
  const double a = 0.6;
  CHECK((eval_u(a, Vec2(1, 0)) - Vec2(-1, 0)).norm() < 1e-14);
  CHECK((eval_u(a, Vec2(-1, 0)) - Vec2(1, 0)).norm() < 1e-14);
  CHECK(eval_u(a, Vec2(0, 0)).norm() < 1e-15);
  CHECK(eval_u(a, Vec2(10, 0)).norm() == 0);
  // reflection symmetry u(sigma x) = sigma u(x)
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(-2.1, 2.1), uy(-1.5, 1.5);
  FundamentalField u(a);
  for (int n = 0; n < 300; ++n) {
    Vec2 x(ux(rng), uy(rng));
    Vec2 v = u.u(x);
    Vec2 v1 = u.u(Vec2(-x.x(), x.y())), v2 = u.u(Vec2(x.x(), -x.y()));
    CHECK((v1 - Vec2(-v.x(), v.y())).norm() < 1e-14);
    CHECK((v2 - Vec2(v.x(), -v.y())).norm() < 1e-14);
    CHECK(v.norm() <= u.sup_bound());
  }
  // u = grad-perp psi: the line integral of u.n over a closed square vanishes
  auto flux = [&](Vec2 c, double r) {
    auto side = [&](Vec2 p0, Vec2 p1, Vec2 n) {
      return simpson([&](double s) { return u.u(p0 + s * (p1 - p0)).dot(n); }, 0, 1, 2000) *
             (p1 - p0).norm();
    };
    return side(c + Vec2(-r, -r), c + Vec2(r, -r), Vec2(0, -1)) +
           side(c + Vec2(r, -r), c + Vec2(r, r), Vec2(1, 0)) +
           side(c + Vec2(r, r), c + Vec2(-r, r), Vec2(0, 1)) +
           side(c + Vec2(-r, r), c + Vec2(-r, -r), Vec2(-1, 0));
  };
  CHECK(std::abs(flux(Vec2(0.01, 0.3), 0.05)) < 1e-10);
  // the cutoff is only C2, so Simpson converges more slowly across its collar
  CHECK(std::abs(flux(Vec2(2.02, 1.2), 0.2)) < 1e-7);
}

TEST_CASE("rescaled fields") {
  const double a = 0.6;
  Vec2 x(0.3, -0.4);
  CHECK((eval_rescaled({}, 0.01, a, x) - eval_u(a, x)).norm() == 0);
  Vec2 y = word_map({1}, 0.02, a)(Vec2(1, 0));
  CHECK((eval_rescaled({1}, 0.02, a, y) - Vec2(0, -1)).norm() < 1e-14);
  CHECK(eval_rescaled({1, 2}, 0, a, Vec2(-1.9, 1.3)).norm() == 0);
}

TEST_CASE("series field U") {
  const double a = 0.6;
  SeriesField U(a, 8);
  CHECK(eval_U(a, 0.4, Vec2(0, 0)).norm() < 1e-15);
  CHECK(eval_U(a, 0, Vec2(1, 0)).norm() == 0);
  CHECK(eval_U(a, 1, Vec2(1, 0)).norm() == 0);
  // naive double sum over all words
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ux(-2.06, 2.06), uy(-1.48, 1.48), ut(0.02, 0.98);
  std::vector<std::vector<BinaryWord>> words(9);
  for (int k = 0; k <= 8; ++k) words[k] = words_of_length(k);
  double worst = 0;
  for (int n = 0; n < 300; ++n) {
    double t = ut(rng);
    Vec2 x(ux(rng), uy(rng));
    Vec2 s = Vec2::Zero();
    for (int k = 0; k <= 8; ++k)
      for (const auto& w : words[k])
        s += std::pow(a, k) * eval_rescaled(w, U.eta_integral(t), a, x);
    worst = std::max(worst, (U.eval(t, x) - U.eta(t) * s).norm());
  }
  CHECK(worst < 1e-12);
  // truncation bound shrinks with depth
  CHECK(SeriesField(a, 24).tolerance() ==
        Approx(std::pow(a, 16) * SeriesField(a, 8).tolerance()).epsilon(1e-12));
}

TEST_CASE("collapse schedule and W") {
  auto t = collapse_schedule(0.2, 0.5, 4);
  CHECK(t == std::vector<double>{0, 1, 1.5, 1.75, 1.875});
  CHECK_THROWS_AS(collapse_schedule(0.9, 0.5, 3), DomainError);
  const double a = 0.6;
  const double g = derive_constants(a).gamma, xi = default_xi(g);
  CollapseField W(a, xi);
  CHECK(W.terminal_time() == Approx(1 / (1 - xi)));
  CHECK(W.window(0.5) == 0);
  CHECK(W.window(1.0) == 1);
  SeriesField U(a);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ux(-2, 2), uy(-1.4, 1.4), us(0.01, 0.99);
  double scale_worst = 0, sup1 = 0, sup0 = 0;
  for (int n = 0; n < 300; ++n) {
    Vec2 x(ux(rng), uy(rng));
    double s = us(rng);
    // W(t_1 + xi s, gamma x) = (gamma/xi) U(s, x)
    Vec2 w = W.eval(1 + xi * s, g * x), u = (g / xi) * U.eval(s, x);
    scale_worst = std::max(scale_worst, (w - u).norm());
    sup0 = std::max(sup0, W.eval(s, x).norm());
    sup1 = std::max(sup1, w.norm());
  }
  CHECK(scale_worst < 1e-13);
  CHECK(sup1 <= (g / xi) * U.fundamental().sup_bound() * U.ifs().delta * TimeProfile::get().sup() /
                    (1 - a) * 1.0000001);
  CHECK_THROWS_AS(CollapseField(a, 0.5), DomainError);
}

TEST_CASE("auxiliary field nu") {
  CHECK(eval_nu(0.5, Vec2(-1, 0.2)).norm() == 0);
  CHECK(eval_nu(0.5, Vec2(0, 0)).norm() == 0);
  CHECK(eval_nu(0, Vec2(24, 0)).norm() == 0);
  CHECK(eval_nu(1, Vec2(24, 0)).norm() == 0);
  // plateau value -(7/8)^k (3,0) at (7/8)^k (24,0)
  for (int k = 0; k < 12; ++k) {
    double c = std::pow(7.0 / 8, k);
    for (double tau : {0.0, 0.2}) {
      Vec2 v = AuxField::unit_rate(tau, c * Vec2(24, 0));
      CHECK(v.x() == Approx(-3 * c).epsilon(1e-13));
      CHECK(std::abs(v.y()) < 1e-15);
    }
  }
  double t = 0.4;
  CHECK(eval_nu(t, Vec2(24, 0)).x() == Approx(-3 * TimeProfile::get().rate(t)).epsilon(1e-13));
  // closed-form tail of sum chi_k against an explicit long sum
  for (double x1 : {0.02, 0.7, 5.0, 21.3}) {
    double s = 0;
    for (int k = 0; k < 400; ++k) s += AuxField::chi_k(k, 0.3, x1);
    CHECK(AuxField::chi_sum(0.3, x1) == Approx(s).epsilon(1e-13));
  }
}

TEST_CASE("combined and full fields") {
  CHECK(block_gamma(1) == Approx(std::sqrt(7.0 / 8)));
  CHECK(block_alpha(3) == Approx(2 * std::sqrt(2.0) * (std::pow(7.0 / 8, 0.25) - 0.75)));
  CHECK(eval_V(0.5, Vec2(0, 0)).norm() == 0);
  CombinedField V(10);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ux(-30, 30), uy(-30, 30), ut(0.01, 1.99);
  for (int n = 0; n < 2000; ++n) {
    Vec2 x(ux(rng), uy(rng));
    double t = ut(rng);
    if (std::abs(x.y()) > x.x()) CHECK(V.eval(t, x).norm() == 0);
    // at most one block contains x
    int count = 0;
    for (int k = 1; k <= 10; ++k) {
      Rect r = image(block_map(k), rect_R(0.5));
      if (r.contains(x)) ++count;
    }
    CHECK(count <= 1);
    CHECK((count == 1) == (V.locate_block(x) != 0));
  }
  CHECK(FullField::stage_time(1) == Approx(2));
  CHECK(FullField::stage_time(2) == Approx(34.0 / 9));
  CHECK(eval_Vtilde(18, Vec2(21, 0)).norm() == 0);
  // first stage: V~(t, x) = (63/64) V((9/8)(t - 2), (8/7) x)
  FullField Vt(10);
  for (double t : {2.3, 3.1, 3.7})
    for (Vec2 x : {Vec2(20, 0.5), Vec2(10, -0.3), Vec2(18.2, 0.0)}) {
      Vec2 ref = (63.0 / 64) * V.eval(9.0 / 8 * (t - 2), 8.0 / 7 * x);
      CHECK((Vt.eval(t, x) - ref).norm() < 1e-13);
    }
}

TEST_CASE("conjugated and reversed fields") {
  auto U = std::make_shared<SeriesField>(0.6);
  AffineSimilarity G{Vec2(3, -1), 1, 0.5};
  ConjugatedField C(U, G);
  Vec2 y(0.4, 0.1);
  Vec2 expect = G.linear(U->eval(0.3, y));
  CHECK((C.eval(0.3, G(y)) - expect).norm() < 1e-14);
  ReversedField<2> R(U, 1.0);
  CHECK((R.eval(0.3, y) + U->eval(0.7, y)).norm() == 0);
}

TEST_CASE("field factory") {
  CHECK(make_field({{"kind", "zero"}})->kind() == FieldKind::zero);
  CHECK(make_field({{"kind", "U"}, {"alpha", 0.6}})->kind() == FieldKind::series_U);
  CHECK(make_field({{"kind", "W"}})->kind() == FieldKind::collapse_W);
  CHECK_THROWS_AS(make_field({{"kind", "bogus"}}), DomainError);
}

TEST_CASE("grid divergence and Sobolev norms") {
  FundamentalField u(0.6);
  Rect reg = Rect::from_bounds(-2.2, 2.2, -1.6, 1.6);
  ZeroField<2> z;
  CHECK(grid_divergence(z, reg, 0.05, 0) == 0);
  CHECK(sobolev_norm(z, 0, 1, reg, 0.05).value == 0);
  // central differences of a perpendicular gradient cancel to second order;
  // the bound is relative to the largest second derivative of the stream function
  auto max_grad = [](const GridSample& g) {
    double m = 0;
    for (int j = 1; j < g.ny - 1; ++j)
      for (int i = 1; i < g.nx - 1; ++i)
        m = std::max({m, (g.at(i + 1, j) - g.at(i - 1, j)).norm() / (2 * g.h),
                      (g.at(i, j + 1) - g.at(i, j - 1)).norm() / (2 * g.h)});
    return m;
  };
  auto g1 = sample_grid(u, reg, 2e-3, 0), g2 = sample_grid(u, reg, 1e-3, 0);
  double d1 = grid_divergence(g1), d2 = grid_divergence(g2);
  CHECK(d2 < 1e-2 * max_grad(g2));
  CHECK(d1 / d2 > 3.5);
  // U truncated at the depth the grid resolves behaves the same way
  SeriesField U(0.6, 2);
  auto G1 = sample_grid(U, reg, 2e-3, 0.5), G2 = sample_grid(U, reg, 1e-3, 0.5);
  CHECK(grid_divergence(G2) < 1e-2 * max_grad(G2));
  CHECK(grid_divergence(G1) / grid_divergence(G2) > 3.5);
  // self-convergence of the L^1 estimate
  double s1 = sobolev_norm(u, 0, 1, reg, 4e-3).value;
  double s2 = sobolev_norm(u, 0, 1, reg, 2e-3).value;
  double s3 = sobolev_norm(u, 0, 1, reg, 1e-3).value;
  CHECK(std::abs(s2 - s1) / s3 < 0.02);
  CHECK(std::abs(s3 - s2) / s3 < 0.02);
  CHECK_FALSE(sobolev_norm(u, 0, 1, reg, 0.2).warning.empty());
}

TEST_CASE("grid sampling layout") {
  FundamentalField u(0.6);
  auto g = sample_grid(u, Rect::from_bounds(0, 1, 0, 0.5), 0.25, 0);
  CHECK(g.nx == 5);
  CHECK(g.ny == 3);
  CHECK((g.at(2, 1) - u.u(Vec2(0.5, 0.25))).norm() == 0);
  CHECK((g.node(4, 2) - Vec2(1, 0.5)).norm() < 1e-15);
}
