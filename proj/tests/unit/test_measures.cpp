#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracflow/measures.hpp"

#include <cmath>
#include <random>

using namespace fracflow;
using doctest::Approx;

namespace {

class Spin final : public Field2 {
 public:
  Vec2 eval(double, const Vec2& x) const override { return {-x.y(), x.x()}; }
  FieldKind kind() const override { return FieldKind::derived; }
};

// exactly rotated particles sampled on a uniform grid of K+1 times in [0,T]
std::vector<Measure2> spun(const std::vector<Vec2>& p0, const std::vector<double>& w, double T,
                           int K) {
  std::vector<Measure2> mu;
  for (int k = 0; k <= K; ++k) {
    Measure2 m;
    m.t = T * k / K;
    double c = std::cos(m.t), s = std::sin(m.t);
    for (const auto& p : p0) m.points.emplace_back(c * p.x() - s * p.y(), s * p.x() + c * p.y());
    m.weights = w;
    mu.push_back(std::move(m));
  }
  return mu;
}

// q(T - t) rewritten as a quadratic in t
template <int D>
TestFunction<D> time_flipped(TestFunction<D> f, double T) {
  double q0 = f.q0 + f.q1 * T + f.q2 * T * T;
  double q1 = -f.q1 - 2 * f.q2 * T;
  f.q0 = q0;
  f.q1 = q1;
  return f;
}

}  // namespace

TEST_CASE("pushforward") {
  auto c = Cloud2::from_points({Vec2(0.1, 0.2), Vec2(-1, 3)});
  auto m = pushforward<2>(c, {0.5, 1.5}, 0.3);
  CHECK(m.points == c.positions);
  CHECK(m.total_mass() == 2);
  CHECK(m.t == 0.3);
  CHECK_THROWS_AS(pushforward<2>(c, {1.0}), DomainError);
  Cloud3 r;
  r.positions = {Vec3(0, 0.5, 0.2)};
  r.stretch = {Vec3(0, 1, 0)};
  auto v = pushforward_vector(r, {0.25});
  CHECK(v.vweights[0] == Vec3(0, 0.25, 0));
}

TEST_CASE("test functions") {
  TestFunction2D f;
  f.center = Vec2(0.2, -0.1);
  f.scale = 0.7;
  f.powers << 1, 2;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int n = 0; n < 200; ++n) {
    Vec2 x = f.center + Vec2(u(rng), u(rng));
    Vec2 g;
    f.spatial(x, &g);
    const double h = 1e-6;
    CHECK(g.x() == Approx((f.spatial(x + Vec2(h, 0)) - f.spatial(x - Vec2(h, 0))) / (2 * h))
                       .epsilon(1e-6)
                       .scale(1e-3));
    CHECK(g.y() == Approx((f.spatial(x + Vec2(0, h)) - f.spatial(x - Vec2(0, h))) / (2 * h))
                       .epsilon(1e-6)
                       .scale(1e-3));
  }
  CHECK(f.spatial(Vec2(1.0, 0)) == 0);
  CHECK_FALSE(f.in_support(Vec2(0.95, 0)));
  // b(0) = e^{-1}
  TestFunction2D b;
  CHECK(b.spatial(Vec2(0, 0)) == Approx(std::exp(-2.0)));

  auto fam = test_family<2>(50, Vec2(-1, -1), Vec2(1, 1), 0.4, 0.9, 7);
  auto fam2 = test_family<2>(50, Vec2(-1, -1), Vec2(1, 1), 0.4, 0.9, 7);
  REQUIRE(fam.size() == 50);
  for (std::size_t i = 0; i < fam.size(); ++i) {
    CHECK(fam[i].powers.sum() <= 3);
    CHECK(fam[i].scale >= 0.4);
    CHECK(fam[i].scale <= 0.9);
    CHECK(fam[i].center == fam2[i].center);
  }
}

TEST_CASE("2D residual: static measure, zero field") {
  Measure2 m;
  m.points = {Vec2(0.1, 0.05), Vec2(-0.2, 0.3)};
  m.weights = {0.7, 0.4};
  std::vector<Measure2> mu;
  for (int k = 0; k <= 10; ++k) {
    mu.push_back(m);
    mu.back().t = 0.1 * k;
  }
  TestFunction2D f;
  f.scale = 0.9;
  f.q0 = 1;
  f.q1 = 0.5;
  f.q2 = -0.3;
  auto r = weak_residual_2d(ZeroField<2>(), mu, f);
  CHECK(std::abs(r.residual) < 1e-15);
  // terms by hand: T1 = (q(1) - q(0)) G, T2 = q(1) G, T3 = q(0) G, T4 = 0
  double G = 0.7 * f.spatial(m.points[0]) + 0.4 * f.spatial(m.points[1]);
  REQUIRE(r.terms.size() == 4);
  CHECK(r.terms[0] == Approx((f.time_factor(1) - f.time_factor(0)) * G).epsilon(1e-14));
  CHECK(r.terms[1] == Approx(f.time_factor(1) * G).epsilon(1e-14));
  CHECK(r.terms[2] == Approx(f.time_factor(0) * G).epsilon(1e-14));
  CHECK(r.terms[3] == 0);
  CHECK(r.signs == std::vector<double>{1, -1, 1, 1});
  CHECK(r.time_samples == 11);
  CHECK(r.particles == 2);
}

TEST_CASE("2D residual: exact flow converges at second order") {
  Spin s;
  std::vector<Vec2> p0{Vec2(0.3, 0), Vec2(0.1, 0.4), Vec2(-0.2, -0.1)};
  std::vector<double> w{0.5, 1, 0.25};
  TestFunction2D f;
  f.center = Vec2(0.1, 0.1);
  f.scale = 0.8;
  f.powers << 1, 0;
  f.q1 = 0.7;
  f.q2 = -0.4;
  std::vector<double> res;
  for (int K : {20, 40, 80}) res.push_back(std::abs(weak_residual_2d(s, spun(p0, w, 1, K), f).residual));
  MESSAGE("residuals ", res[0], " ", res[1], " ", res[2]);
  CHECK(res[0] / res[1] == Approx(4).epsilon(0.1));
  CHECK(res[1] / res[2] == Approx(4).epsilon(0.1));
  // a wrong field leaves an O(1) residual
  auto bad = weak_residual_2d(ZeroField<2>(), spun(p0, w, 1, 80), f);
  CHECK(std::abs(bad.residual) > 100 * res[2]);
}

TEST_CASE("2D residual: input validation") {
  Measure2 a, b;
  a.points = b.points = {Vec2(0, 0)};
  a.weights = b.weights = {1};
  a.t = 0;
  b.t = 0;
  TestFunction2D f;
  CHECK_THROWS_AS(weak_residual_2d(ZeroField<2>(), {a}, f), DomainError);
  CHECK_THROWS_AS(weak_residual_2d(ZeroField<2>(), {a, b}, f), DomainError);
  b.t = 1;
  f.center = Vec2(5, 5);
  CHECK_FALSE(weak_residual_2d(ZeroField<2>(), {a, b}, f).warning.empty());
}

TEST_CASE("reversal") {
  Spin s;
  auto mu = spun({Vec2(0.3, 0), Vec2(0.1, 0.4)}, {0.5, 1}, 1, 30);
  auto twice = reverse_measures(reverse_measures(mu));
  for (std::size_t k = 0; k < mu.size(); ++k) {
    CHECK(twice[k].t == mu[k].t);
    CHECK(twice[k].points == mu[k].points);
    CHECK(twice[k].weights == mu[k].weights);
  }
  // scalar case: R~[phi(T - .)] = -R[phi]
  auto rev = time_reverse<2>(mu, std::make_shared<Spin>());
  auto fam = test_family<2>(10, Vec2(-0.3, -0.3), Vec2(0.3, 0.3), 0.5, 0.9, 3);
  for (const auto& f : fam) {
    double a = weak_residual_2d(s, mu, f).residual;
    double b = weak_residual_2d(*rev.field, rev.measures, time_flipped(f, 1.0)).residual;
    CHECK(std::abs(a + b) < 1e-15);
  }
}

TEST_CASE("ribbon measures and the divergence pairing") {
  LineHistory h;
  h.states.push_back(initial_line_state(40, 0.05));
  for (int panels : {1, 4}) {
    auto om = ribbon_measures(h, 16, panels);
    REQUIRE(om.size() == 1);
    const auto& m = om[0];
    CHECK(m.points.size() == std::size_t(40 * 16 * panels));
    CHECK((m.total_vector() - Vec3(0, 4, 0)).norm() < 1e-13);
    for (const auto& w : m.vweights) CHECK((w.x() == 0 && w.z() == 0 && w.y() > 0));
  }
  // grad g . d omega against the boundary difference, with a linear factor
  // localized by a bump wider than the ribbon
  TestFunction3D f;
  f.center = Vec3(0, 0.3, 0.1);
  f.scale = 1.6;
  f.powers << 0, 1, 0;
  std::vector<double> err;
  for (int panels : {1, 2, 4}) {
    auto m = ribbon_measures(h, 16, panels)[0];
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < m.points.size(); ++i) {
      Vec3 g;
      f.spatial(m.points[i], &g);
      lhs += g.dot(m.vweights[i]);
    }
    for (std::size_t i = 0; i < m.bnd_plus.size(); ++i)
      rhs += m.bnd_weights[i] * (f.spatial(m.bnd_plus[i]) - f.spatial(m.bnd_minus[i]));
    err.push_back(std::abs(lhs - rhs));
  }
  CHECK(err[2] < 1e-10);
  CHECK(err[2] <= err[0]);
}

TEST_CASE("3D residual terms") {
  auto hp = std::make_shared<const LineHistory>(solve_ribbon(40, 0.04, 0.025, 0.25));
  auto om = ribbon_measures(*hp, 16, 2);
  RibbonVelocityField u(hp);
  // phi vanishing on both boundary curves: bump narrower than the ribbon
  TestFunction3D f;
  f.center = Vec3(0, 0, 0);
  f.scale = 0.9;
  f.pattern = Vec3(0.3, 0.2, 0.9).normalized();
  auto r = weak_residual_3d(u, om, f);
  REQUIRE(r.terms.size() == 6);
  CHECK(r.terms[5] == 0);
  CHECK(r.signs == std::vector<double>{1, -1, 1, 1, -1, -1});
  double sum = 0;
  for (int i = 0; i < 6; ++i) sum += r.signs[i] * r.terms[i];
  CHECK(sum == r.residual);
  // vector reversal flips omega with u: same residual for phi(T - .)
  auto rev = time_reverse<3>(om, std::make_shared<RibbonVelocityField>(hp));
  auto fam = test_family<3>(6, Vec3(-0.3, -1.2, -1), Vec3(0.3, 1.2, 1), 0.5, 1.0, 2);
  for (const auto& g : fam) {
    auto ra = weak_residual_3d(u, om, g);
    double b = weak_residual_3d(*rev.field, rev.measures, time_flipped(g, 0.25)).residual;
    // the residual cancels terms of much larger size: compare at their roundoff
    double size = 0;
    for (double t : ra.terms) size += std::abs(t);
    CHECK(std::abs(ra.residual - b) < 1e-14 * size);
  }
  // missing boundary data is rejected
  auto stripped = om;
  for (auto& m : stripped) m.bnd_plus.clear();
  CHECK_THROWS_AS(weak_residual_3d(u, stripped, f), DomainError);
}

TEST_CASE("box counting") {
  auto one = box_dimension<2>({Vec2(0.3, 0.3)}, default_box_scales());
  CHECK(one.slope == 0);
  CHECK(one.degenerate);
  CHECK(box_dimension_auto<2>({Vec2(0.3, 0.3)}).slope == 0);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec2> seg;
  for (int i = 0; i < 10000; ++i) seg.emplace_back(u(rng), 0);
  auto r = box_dimension<2>(seg, default_box_scales());
  CHECK(r.slope == Approx(1).epsilon(0.05));
  CHECK(box_dimension_auto<2>(seg).slope == Approx(1).epsilon(0.05));

  std::vector<Vec2> sq;
  for (int i = 0; i < 200000; ++i) sq.emplace_back(u(rng), u(rng));
  CHECK(box_dimension_auto<2>(sq).slope == Approx(2).epsilon(0.05));

  // middle-thirds Cantor set: log 2 / log 3
  std::vector<Vec2> cantor{Vec2(0, 0)};
  for (int level = 1; level <= 14; ++level) {
    std::vector<Vec2> next;
    double step = 2 * std::pow(3.0, -level);
    for (const auto& p : cantor) {
      next.push_back(p);
      next.emplace_back(p.x() + step, 0);
    }
    cantor = std::move(next);
  }
  CHECK(box_dimension_auto<2>(cantor).slope == Approx(std::log(2.0) / std::log(3.0)).epsilon(0.05));
  CHECK_THROWS_AS(box_dimension<2>({}, default_box_scales()), DomainError);
}

TEST_CASE("random-word samples of the attractor") {
  const double a = 0.6;
  auto pts = sample_attractor_tilde(a, 4000, 10, 9);
  auto again = sample_attractor_tilde(a, 4000, 10, 9);
  CHECK(pts == again);
  // the attractor lies in the disk of radius 1/(1 - alpha)
  for (const auto& p : pts) CHECK(p.norm() <= 1 / (1 - a) + 1e-12);
  // both first-level pieces are visited, and they are separated
  int right = 0;
  for (const auto& p : pts) right += p.x() > 0;
  CHECK(right > 1500);
  CHECK(right < 2500);
  CHECK(box_dimension_auto<2>(sample_attractor_tilde(a, 65536, 10, 7)).slope ==
        Approx(-std::log(2.0) / std::log(a)).epsilon(0.1 / 1.357));
}

TEST_CASE("slit measures and reversed dimension jump") {
  auto h = solve_slit(200, 0.01, 0.01, 2.05, 5);
  auto mu = slit_measures(h);
  CHECK(mu.front().total_mass() == Approx(2));
  CHECK(mu.back().total_mass() == Approx(2));
  auto rev = reverse_measures(mu);
  // reversed: starts collapsed near the origin, ends as the full segment
  auto diam = [](const Measure2& m) {
    double lo = 1e300, hi = -1e300;
    for (const auto& p : m.points) lo = std::min(lo, p.x()), hi = std::max(hi, p.x());
    return hi - lo;
  };
  CHECK(diam(rev.front()) < 2e-2);
  CHECK(diam(rev.back()) == Approx(2 - 2.0 / 200));
  CHECK(box_dimension_auto<2>(rev.back().points).slope == Approx(1).epsilon(0.1));
}
