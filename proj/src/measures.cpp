#include "fracflow/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace fracflow {

template <int D>
double ParticleMeasure<D>::total_mass() const {
  double m = 0;
  for (double w : weights) m += w;
  return m;
}

template <int D>
Vec<D> ParticleMeasure<D>::total_vector() const {
  Vec<D> m = Vec<D>::Zero();
  for (const auto& w : vweights) m += w;
  return m;
}

template struct ParticleMeasure<2>;
template struct ParticleMeasure<3>;

template <int D>
ParticleMeasure<D> pushforward(const ParticleCloud<D>& cloud, const std::vector<double>& mu0,
                               double t) {
  if (mu0.size() != cloud.size())
    throw DomainError("pushforward: " + std::to_string(mu0.size()) + " weights for " +
                      std::to_string(cloud.size()) + " particles");
  ParticleMeasure<D> m;
  m.t = t;
  m.points = cloud.positions;
  m.weights = mu0;
  return m;
}
template Measure2 pushforward(const Cloud2&, const std::vector<double>&, double);
template Measure3 pushforward(const Cloud3&, const std::vector<double>&, double);

Measure3 pushforward_vector(const Cloud3& cloud, const std::vector<double>& area, double t) {
  if (area.size() != cloud.size() || cloud.stretch.size() != cloud.size())
    throw DomainError("pushforward_vector: weights or stretch data do not match the cloud");
  Measure3 m;
  m.t = t;
  m.points = cloud.positions;
  m.vweights.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) m.vweights[i] = area[i] * cloud.stretch[i];
  return m;
}

// ---- test functions ----

namespace {
// b(z) z^m and its derivative
void bump_mono(double z, int m, double& v, double& d) {
  if (std::abs(z) >= 1) {
    v = d = 0;
    return;
  }
  double q = 1 - z * z;
  double b = std::exp(-1 / q);
  double bp = b * (-2 * z / (q * q));
  double zm = std::pow(z, m);
  v = b * zm;
  d = bp * zm + (m > 0 ? b * m * std::pow(z, m - 1) : 0.0);
}
}  // namespace

template <int D>
double TestFunction<D>::spatial(const Vec<D>& x, Vec<D>* grad) const {
  std::array<double, D> v, d;
  for (int i = 0; i < D; ++i) bump_mono((x[i] - center[i]) / scale, powers[i], v[i], d[i]);
  double g = 1;
  for (int i = 0; i < D; ++i) g *= v[i];
  if (grad) {
    for (int i = 0; i < D; ++i) {
      double p = d[i] / scale;
      for (int k = 0; k < D; ++k)
        if (k != i) p *= v[k];
      (*grad)[i] = p;
    }
  }
  return g;
}

template <int D>
bool TestFunction<D>::in_support(const Vec<D>& x) const {
  return ((x - center).array().abs() < scale).all();
}

template struct TestFunction<2>;
template struct TestFunction<3>;

template <int D>
std::vector<TestFunction<D>> test_family(std::size_t count, const Vec<D>& lo, const Vec<D>& hi,
                                         double smin, double smax, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<TestFunction<D>> out;
  for (std::size_t n = 0; n < count; ++n) {
    TestFunction<D> f;
    for (int i = 0; i < D; ++i) f.center[i] = lo[i] + (hi[i] - lo[i]) * U(rng);
    f.scale = smin + (smax - smin) * U(rng);
    do {
      for (int i = 0; i < D; ++i) f.powers[i] = int(rng() % 4);
    } while (f.powers.sum() > 3);
    f.q0 = 0.5 + U(rng);
    f.q1 = 2 * U(rng) - 1;
    f.q2 = 2 * U(rng) - 1;
    if constexpr (D == 3) {
      Vec3 e(2 * U(rng) - 1, 2 * U(rng) - 1, 2 * U(rng) - 1);
      f.pattern = e.norm() > 1e-3 ? Vec3(e.normalized()) : Vec3::UnitY();
    }
    out.push_back(f);
  }
  return out;
}
template std::vector<TestFunction2D> test_family(std::size_t, const Vec2&, const Vec2&, double,
                                                 double, std::uint64_t);
template std::vector<TestFunction3D> test_family(std::size_t, const Vec3&, const Vec3&, double,
                                                 double, std::uint64_t);

// ---- weak residuals ----

namespace {

template <int D>
double uniform_step(const std::vector<ParticleMeasure<D>>& mu) {
  if (mu.size() < 2) throw DomainError("weak residual needs at least two time samples");
  const std::size_t K = mu.size() - 1;
  const double dt = (mu.back().t - mu.front().t) / double(K);
  if (!(dt > 0)) throw DomainError("measure samples must have increasing times");
  const double tolt = 1e-9 * std::max(1.0, std::abs(mu.back().t));
  for (std::size_t k = 0; k <= K; ++k) {
    if (std::abs(mu[k].t - (mu.front().t + dt * double(k))) > tolt)
      throw DomainError("measure samples are not on a uniform time grid");
    if (mu[k].points.size() != mu[0].points.size())
      throw DomainError("measure samples differ in particle count");
  }
  return dt;
}

double trap_weight(std::size_t k, std::size_t K, double dt) {
  return (k == 0 || k == K) ? 0.5 * dt : dt;
}

template <int D>
std::vector<std::vector<bool>> support_masks(const std::vector<ParticleMeasure<D>>& mu,
                                             const std::vector<TestFunction<D>>& phis,
                                             std::vector<bool>& any, bool boundary) {
  // mask[f][k * P + i]: particle i of sample k lies in supp phi_f
  const std::size_t P = boundary ? mu[0].bnd_plus.size() : mu[0].points.size();
  std::vector<std::vector<bool>> mask(phis.size(), std::vector<bool>(mu.size() * P));
  any.assign(mu.size() * P * (boundary ? 2 : 1), false);
  for (std::size_t f = 0; f < phis.size(); ++f)
    for (std::size_t k = 0; k < mu.size(); ++k)
      for (std::size_t i = 0; i < P; ++i) {
        bool in;
        if (boundary) {
          bool a = phis[f].in_support(mu[k].bnd_plus[i]);
          bool b = phis[f].in_support(mu[k].bnd_minus[i]);
          if (a) any[2 * (k * P + i)] = true;
          if (b) any[2 * (k * P + i) + 1] = true;
          in = a || b;
        } else {
          in = phis[f].in_support(mu[k].points[i]);
          if (in) any[k * P + i] = true;
        }
        mask[f][k * P + i] = in;
      }
  return mask;
}

WeakResidualReport finish(std::vector<double> terms, std::vector<double> signs, std::size_t P,
                          std::size_t samples, double dt) {
  WeakResidualReport r;
  r.terms = std::move(terms);
  r.signs = std::move(signs);
  for (std::size_t i = 0; i < r.terms.size(); ++i) r.residual += r.signs[i] * r.terms[i];
  r.particles = P;
  r.time_samples = samples;
  r.dt = dt;
  return r;
}

}  // namespace

std::vector<WeakResidualReport> weak_residuals_2d(const Field2& u,
                                                  const std::vector<Measure2>& mu,
                                                  const std::vector<TestFunction2D>& phis) {
  const double dt = uniform_step(mu);
  const std::size_t K = mu.size() - 1, P = mu[0].points.size();
  for (const auto& m : mu)
    if (m.weights.size() != P) throw DomainError("scalar weights missing or mismatched");
  std::vector<bool> any;
  auto mask = support_masks(mu, phis, any, false);
  // velocities where some phi needs them
  std::vector<Vec2> vel(mu.size() * P, Vec2::Zero());
  parallel_for(mu.size() * P, [&](std::size_t n) {
    if (any[n]) vel[n] = u.eval(mu[n / P].t, mu[n / P].points[n % P]);
  });
  std::vector<WeakResidualReport> out;
  for (std::size_t f = 0; f < phis.size(); ++f) {
    const auto& phi = phis[f];
    double T1 = 0, T4 = 0, T2 = 0, T3 = 0;
    for (std::size_t k = 0; k <= K; ++k) {
      const double t = mu[k].t, wk = trap_weight(k, K, dt);
      double s1 = 0, s4 = 0, sg = 0;
      for (std::size_t i = 0; i < P; ++i) {
        if (!mask[f][k * P + i]) continue;
        Vec2 grad;
        double g = phi.spatial(mu[k].points[i], &grad);
        double w = mu[k].weights[i];
        s1 += w * g;
        sg += w * g;
        s4 += w * vel[k * P + i].dot(grad);
      }
      T1 += wk * phi.time_factor_prime(t) * s1;
      T4 += wk * phi.time_factor(t) * s4;
      if (k == 0) T3 = phi.time_factor(t) * sg;
      if (k == K) T2 = phi.time_factor(t) * sg;
    }
    auto r = finish({T1, T2, T3, T4}, {1, -1, 1, 1}, P, mu.size(), dt);
    bool touched = false;
    for (bool b : mask[f]) touched = touched || b;
    if (!touched) r.warning = "test function support misses every sampled particle";
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<WeakResidualReport> weak_residuals_3d(const Field3& u,
                                                  const std::vector<Measure3>& omega,
                                                  const std::vector<TestFunction3D>& phis) {
  const double dt = uniform_step(omega);
  const std::size_t K = omega.size() - 1, P = omega[0].points.size();
  const std::size_t B = omega[0].bnd_plus.size();
  for (const auto& m : omega) {
    if (m.vweights.size() != P) throw DomainError("vector weights missing or mismatched");
    if (m.bnd_plus.empty() || m.bnd_minus.size() != m.bnd_plus.size() ||
        m.bnd_weights.size() != m.bnd_plus.size() || m.bnd_plus.size() != B)
      throw DomainError("vector measure lacks divergence boundary data");
  }
  std::vector<bool> any, anyb;
  auto mask = support_masks(omega, phis, any, false);
  auto maskb = support_masks(omega, phis, anyb, true);
  std::vector<Vec3> vel(omega.size() * P, Vec3::Zero());
  parallel_for(omega.size() * P, [&](std::size_t n) {
    if (any[n]) vel[n] = u.eval(omega[n / P].t, omega[n / P].points[n % P]);
  });
  std::vector<Vec3> velb(omega.size() * B * 2, Vec3::Zero());
  parallel_for(omega.size() * B * 2, [&](std::size_t n) {
    if (!anyb[n]) return;
    const auto& m = omega[n / (2 * B)];
    std::size_t i = (n / 2) % B;
    velb[n] = u.eval(m.t, (n % 2 == 0) ? m.bnd_plus[i] : m.bnd_minus[i]);
  });

  std::vector<WeakResidualReport> out;
  for (std::size_t f = 0; f < phis.size(); ++f) {
    const auto& phi = phis[f];
    const Vec3& e = phi.pattern;
    double T1 = 0, T2 = 0, T3 = 0, T4 = 0, T5 = 0, T6 = 0;
    for (std::size_t k = 0; k <= K; ++k) {
      const auto& m = omega[k];
      const double t = m.t, wk = trap_weight(k, K, dt);
      double s1 = 0, s4 = 0, s5 = 0, s6 = 0;
      for (std::size_t i = 0; i < P; ++i) {
        if (!mask[f][k * P + i]) continue;
        Vec3 grad;
        double g = phi.spatial(m.points[i], &grad);
        const Vec3& w = m.vweights[i];
        const Vec3& v = vel[k * P + i];
        s1 += g * e.dot(w);
        s4 += v.dot(grad) * e.dot(w);
        s5 += e.dot(v) * grad.dot(w);
      }
      for (std::size_t i = 0; i < B; ++i) {
        if (!maskb[f][k * B + i]) continue;
        double gp = phi.spatial(m.bnd_plus[i]), gm = phi.spatial(m.bnd_minus[i]);
        double vp = e.dot(velb[2 * (k * B + i)]), vm = e.dot(velb[2 * (k * B + i) + 1]);
        s6 += m.bnd_weights[i] * (gp * vp - gm * vm);
      }
      const double q = phi.time_factor(t);
      T1 += wk * phi.time_factor_prime(t) * s1;
      T4 += wk * q * s4;
      T5 += wk * q * s5;
      // <phi.u, div omega> = -int grad(phi.u) . d omega = -(boundary difference)
      T6 -= wk * q * s6;
      if (k == 0) T3 = q * s1;
      if (k == K) T2 = q * s1;
    }
    out.push_back(finish({T1, T2, T3, T4, T5, T6}, {1, -1, 1, 1, -1, -1}, P, omega.size(), dt));
  }
  return out;
}

WeakResidualReport weak_residual_2d(const Field2& u, const std::vector<Measure2>& mu,
                                    const TestFunction2D& phi) {
  return weak_residuals_2d(u, mu, {phi}).front();
}

WeakResidualReport weak_residual_3d(const Field3& u, const std::vector<Measure3>& omega,
                                    const TestFunction3D& phi) {
  return weak_residuals_3d(u, omega, {phi}).front();
}

// ---- reversal ----

template <int D>
std::vector<ParticleMeasure<D>> reverse_measures(const std::vector<ParticleMeasure<D>>& mu) {
  // sample k of the result keeps the time stamp of sample k: on a uniform grid
  // that is t0 + T - t_{K-k}, and reversing twice is exact
  std::vector<ParticleMeasure<D>> out(mu.rbegin(), mu.rend());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].t = mu[k].t;
    for (auto& w : out[k].vweights) w = -w;
    for (auto& w : out[k].bnd_weights) w = -w;
  }
  return out;
}
template std::vector<Measure2> reverse_measures(const std::vector<Measure2>&);
template std::vector<Measure3> reverse_measures(const std::vector<Measure3>&);

template <int D>
Reversed<D> time_reverse(const std::vector<ParticleMeasure<D>>& mu,
                         std::shared_ptr<const Field<D>> u) {
  if (mu.empty()) throw DomainError("time_reverse needs samples");
  double T = mu.front().t + mu.back().t;
  return {reverse_measures(mu), std::make_shared<ReversedField<D>>(std::move(u), T)};
}
template Reversed<2> time_reverse(const std::vector<Measure2>&, std::shared_ptr<const Field2>);
template Reversed<3> time_reverse(const std::vector<Measure3>&, std::shared_ptr<const Field3>);

// ---- box counting ----

namespace {

template <int D>
std::size_t occupied(const std::vector<Vec<D>>& pts, double s, const Vec<D>& shift) {
  std::vector<std::array<std::int64_t, D>> keys(pts.size());
  for (std::size_t n = 0; n < pts.size(); ++n)
    for (int i = 0; i < D; ++i) keys[n][i] = std::int64_t(std::floor(pts[n][i] / s - shift[i]));
  std::sort(keys.begin(), keys.end());
  return std::size_t(std::unique(keys.begin(), keys.end()) - keys.begin());
}

// grids shifted by half a box: none, along x1, along x2, along both
template <int D>
std::size_t min_count(const std::vector<Vec<D>>& pts, double s) {
  std::size_t best = ~std::size_t(0);
  for (int m = 0; m < 4; ++m) {
    Vec<D> sh = Vec<D>::Zero();
    if (m & 1) sh[0] = 0.5;
    if (m & 2) sh[1] = 0.5;
    best = std::min(best, occupied<D>(pts, s, sh));
  }
  return best;
}

void fit(BoxCountReport& r) {
  std::vector<double> x, y;
  for (std::size_t j = 0; j < r.scales.size(); ++j)
    if (r.used[j]) {
      x.push_back(std::log(1 / r.scales[j]));
      y.push_back(std::log(double(r.counts[j])));
    }
  bool flat = true;
  for (std::size_t j = 1; j < y.size(); ++j) flat = flat && y[j] == y[0];
  if (x.size() < 2 || flat) {
    r.degenerate = true;
    r.slope = 0;
    return;
  }
  double mx = 0, my = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    mx += x[j];
    my += y[j];
  }
  mx /= double(x.size());
  my /= double(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    sxy += (x[j] - mx) * (y[j] - my);
    sxx += (x[j] - mx) * (x[j] - mx);
  }
  r.slope = sxy / sxx;
  double ss = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    double e = y[j] - (my + r.slope * (x[j] - mx));
    ss += e * e;
  }
  r.fit_residual = std::sqrt(ss / double(x.size()));
}

template <int D>
void count_all(const std::vector<Vec<D>>& pts, BoxCountReport& r) {
  r.counts.assign(r.scales.size(), 0);
  parallel_for(r.scales.size(), [&](std::size_t j) { r.counts[j] = min_count<D>(pts, r.scales[j]); });
}

}  // namespace

std::vector<double> default_box_scales() {
  std::vector<double> s;
  for (int j = 2; j <= 10; ++j) s.push_back(std::ldexp(1.0, -j));
  return s;
}

template <int D>
BoxCountReport box_dimension(const std::vector<Vec<D>>& pts, const std::vector<double>& scales) {
  if (pts.empty()) throw DomainError("box counting needs at least one point");
  if (scales.size() < 2) throw DomainError("box counting needs at least two scales");
  for (double s : scales)
    if (!(s > 0)) throw DomainError("box scales must be positive");
  BoxCountReport r;
  r.scales = scales;
  count_all(pts, r);
  r.used.assign(scales.size(), true);
  fit(r);
  return r;
}
template BoxCountReport box_dimension(const std::vector<Vec2>&, const std::vector<double>&);
template BoxCountReport box_dimension(const std::vector<Vec3>&, const std::vector<double>&);

template <int D>
BoxCountReport box_dimension_auto(const std::vector<Vec<D>>& pts) {
  if (pts.empty()) throw DomainError("box counting needs at least one point");
  Vec<D> lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double L = (hi - lo).maxCoeff();
  if (!(L > 0)) L = 1;
  BoxCountReport r;
  for (int j = 0; j < 48; ++j) r.scales.push_back(L * std::exp2(-j / 4.0));
  count_all(pts, r);
  const double top = double(pts.size()) / 4;
  r.used.resize(r.scales.size());
  for (std::size_t j = 0; j < r.scales.size(); ++j)
    r.used[j] = r.counts[j] >= 16 && double(r.counts[j]) <= top;
  fit(r);
  return r;
}
template BoxCountReport box_dimension_auto(const std::vector<Vec2>&);
template BoxCountReport box_dimension_auto(const std::vector<Vec3>&);

std::vector<Vec2> sample_attractor_tilde(double alpha, std::size_t n, int depth,
                                         std::uint64_t seed, int tail) {
  derive_constants(alpha);
  if (depth < 0 || tail < 0) throw DomainError("sampling depth must be >= 0");
  // fixed point of x -> (1,0) + alpha R x
  Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
  A(0, 1) = alpha;
  A(1, 0) = -alpha;
  const Vec2 start = A.lu().solve(Vec2(1, 0));
  std::mt19937_64 rng(seed);
  std::vector<Vec2> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vec2 p = start;
    for (int s = 0; s < tail + depth; ++s) {
      double c = (rng() & 1) ? -1.0 : 1.0;
      p = Vec2(c, 0) + alpha * rotate(p, 1);
    }
    out[k] = p;
  }
  return out;
}

// ---- scenarios ----

std::vector<Measure2> slit_measures(const LineHistory& h) {
  std::vector<Measure2> out;
  for (const auto& s : h.states) {
    Measure2 m;
    m.t = s.t;
    const double w = 2.0 / double(s.Y.size());
    for (double y : s.Y) {
      m.points.emplace_back(y, 0);
      m.weights.push_back(w);
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Measure3> ribbon_measures(const LineHistory& h, int nodes, int panels) {
  if (panels < 1) throw DomainError("ribbon quadrature needs at least one panel");
  // composite rule: `panels` equal pieces of [-1,1], `nodes` points each
  const GaussRule& g1 = gauss_legendre(nodes);
  GaussRule g;
  const double hp = 2.0 / panels;
  for (int k = 0; k < panels; ++k)
    for (std::size_t q = 0; q < g1.x.size(); ++q) {
      g.x.push_back(-1 + hp * (k + 0.5 * (1 + g1.x[q])));
      g.w.push_back(0.5 * hp * g1.w[q]);
    }
  std::vector<Measure3> out;
  for (const auto& s : h.states) {
    Measure3 m;
    m.t = s.t;
    const double w = 2.0 / double(s.Y.size());
    for (double y : s.Y) {
      for (std::size_t q = 0; q < g.x.size(); ++q) {
        m.points.emplace_back(0, g.x[q], y);
        // d_{alpha_2} X = (0,1,0)
        m.vweights.push_back(w * g.w[q] * Vec3::UnitY());
      }
      m.bnd_plus.emplace_back(0, 1, y);
      m.bnd_minus.emplace_back(0, -1, y);
      m.bnd_weights.push_back(w);
    }
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

template <int D>
double involution_error(const std::vector<ParticleMeasure<D>>& mu) {
  auto twice = reverse_measures(reverse_measures(mu));
  double e = 0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    e = std::max(e, std::abs(twice[k].t - mu[k].t));
    for (std::size_t i = 0; i < mu[k].points.size(); ++i)
      e = std::max(e, (twice[k].points[i] - mu[k].points[i]).cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < mu[k].weights.size(); ++i)
      e = std::max(e, std::abs(twice[k].weights[i] - mu[k].weights[i]));
    for (std::size_t i = 0; i < mu[k].vweights.size(); ++i)
      e = std::max(e, (twice[k].vweights[i] - mu[k].vweights[i]).cwiseAbs().maxCoeff());
  }
  return e;
}

ResidualLevel level_from(const std::vector<WeakResidualReport>& reps, double dt, std::size_t P) {
  ResidualLevel l;
  l.dt = dt;
  l.particles = P;
  for (const auto& r : reps) {
    l.residuals.push_back(r.residual);
    l.max_residual = std::max(l.max_residual, std::abs(r.residual));
  }
  return l;
}

void fit_order(ResidualStudy& s) {
  const std::size_t L = s.levels.size();
  if (L < 2) return;
  double mx = 0, my = 0;
  std::vector<double> y(L);
  for (std::size_t l = 0; l < L; ++l) {
    y[l] = -std::log2(std::max(s.levels[l].max_residual, 1e-300));
    mx += double(l);
    my += y[l];
  }
  mx /= double(L);
  my /= double(L);
  double sxy = 0, sxx = 0;
  for (std::size_t l = 0; l < L; ++l) {
    sxy += (double(l) - mx) * (y[l] - my);
    sxx += (double(l) - mx) * (double(l) - mx);
  }
  s.order = sxy / sxx;
}

}  // namespace

ResidualStudy residual_study_U(double alpha, int levels, std::size_t functions,
                               std::uint64_t seed) {
  if (levels < 1) throw DomainError("need at least one refinement level");
  auto U = std::make_shared<SeriesField>(alpha);
  auto fa = attractor_approx(U->ifs(), 3);
  // finite measure on S_alpha: 4 points per segment, mass 2^-|w| |segment|
  std::vector<Vec2> pts;
  std::vector<double> mu0;
  for (const auto& seg : fa.segments) {
    double len = (seg.b - seg.a).norm();
    for (int j = 0; j < 4; ++j) {
      double f = (j + 0.5) / 4;
      pts.push_back(seg.a + f * (seg.b - seg.a));
      mu0.push_back(std::ldexp(len / 4, -int(seg.word.size())));
    }
  }
  auto phis = test_family<2>(functions, Vec2(-2.4, -1.6), Vec2(2.4, 1.6), 0.5, 1.5, seed);
  ResidualStudy st;
  st.scenario = "U";
  for (int l = 0; l < levels; ++l) {
    const std::size_t K = std::size_t(25) << l;
    const double dt = 1.0 / double(K);
    std::vector<double> times(K + 1);
    for (std::size_t k = 0; k <= K; ++k) times[k] = dt * double(k);
    IntegratorConfig cfg;
    cfg.dt = dt / 4;
    auto hist = integrate_history<2>(*U, pts, times, cfg);
    std::vector<Measure2> mu;
    for (std::size_t k = 0; k <= K; ++k) {
      Measure2 m;
      m.t = times[k];
      m.points = hist[k];
      m.weights = mu0;
      mu.push_back(std::move(m));
    }
    if (l == 0) st.involution_error = involution_error(mu);
    st.levels.push_back(level_from(weak_residuals_2d(*U, mu, phis), dt, pts.size()));
  }
  fit_order(st);
  return st;
}

ResidualStudy residual_study_slit(int levels, std::size_t functions, std::uint64_t seed, int N0,
                                  double T) {
  if (levels < 1) throw DomainError("need at least one refinement level");
  auto phis = test_family<2>(functions, Vec2(-1, -0.5), Vec2(1, 0.5), 0.4, 1.0, seed);
  ResidualStudy st;
  st.scenario = "slit (reversed)";
  for (int l = 0; l < levels; ++l) {
    const int N = N0 << l;
    auto h = std::make_shared<const LineHistory>(solve_slit(N, 1.6 / N, 1.0 / N, T));
    auto mu = slit_measures(*h);
    auto rev = time_reverse<2>(mu, std::make_shared<SlitVelocityField>(h));
    if (l == 0) st.involution_error = involution_error(mu);
    st.levels.push_back(
        level_from(weak_residuals_2d(*rev.field, rev.measures, phis), h->dt, std::size_t(N)));
  }
  fit_order(st);
  return st;
}

ResidualStudy residual_study_ribbon(int levels, std::size_t functions, std::uint64_t seed,
                                    int N0, double T, int nodes) {
  if (levels < 1) throw DomainError("need at least one refinement level");
  auto phis = test_family<3>(functions, Vec3(-0.3, -1.2, -1), Vec3(0.3, 1.2, 1), 0.5, 1.0, seed);
  ResidualStudy st;
  st.scenario = "ribbon";
  for (int l = 0; l < levels; ++l) {
    const int N = N0 << l;
    auto h = std::make_shared<const LineHistory>(solve_ribbon(N, 1.6 / N, 1.0 / N, T));
    // the alpha_2 rule is refined with the markers
    auto om = ribbon_measures(*h, nodes, 1 << l);
    RibbonVelocityField u(h, nodes);
    if (l == 0) st.involution_error = involution_error(om);
    st.levels.push_back(level_from(weak_residuals_3d(u, om, phis), h->dt,
                                   std::size_t(N) * std::size_t(nodes << l)));
  }
  fit_order(st);
  return st;
}

}  // namespace fracflow
