#include "fracflow/activescalar.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fracflow {

namespace {

Falloff cutoff(const KernelSpec& k) { return {k.inner, k.outer}; }

// K(s, 0) for the slit kernel, valid for all s
double axis_kernel(double s) {
  static const Falloff chi = cutoff(KernelSpec::slit());
  double a = std::abs(s);
  if (a >= 3) return 0;
  return -std::copysign(std::sqrt(a), s) * chi(a);
}

// Integral over [-1,1] split at `cuts`. Segments touching `cusp` use
// y = cusp +- u^2, which removes the square-root endpoint behaviour.
double integrate_split(const std::function<double(double)>& f, std::vector<double> cuts,
                       double cusp) {
  cuts.push_back(-1);
  cuts.push_back(1);
  std::sort(cuts.begin(), cuts.end());
  double acc = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = std::max(cuts[i], -1.0), b = std::min(cuts[i + 1], 1.0);
    if (!(b > a)) continue;
    if (a == cusp) {
      acc += integrate([&](double u) { return 2 * u * f(a + u * u); }, 0, std::sqrt(b - a), 1e-13, 15, 1e-13);
    } else if (b == cusp) {
      acc += integrate([&](double u) { return 2 * u * f(b - u * u); }, 0, std::sqrt(b - a), 1e-13, 15, 1e-13);
    } else {
      acc += integrate(f, a, b, 1e-13, 15, 1e-13);
    }
  }
  return acc;
}

std::vector<double> kinks(double s, double eps) {
  std::vector<double> out;
  for (double c : {0.0, 2.0, -2.0, 3.0, -3.0}) {
    double y = (s - c) / eps;
    if (std::abs(y) < 1) out.push_back(y);
  }
  return out;
}

}  // namespace

double slit_kappa(const Vec2& x, const KernelSpec& k) {
  double r = x.norm();
  if (r == 0) return 0;
  return x.x() * x.y() / std::sqrt(r) * cutoff(k)(r);
}

Vec2 slit_kernel(const Vec2& x, const KernelSpec& k) {
  double r = x.norm();
  if (r == 0 || r >= k.outer) return Vec2::Zero();
  Falloff chi = cutoff(k);
  double c = chi(r), cp = chi.prime(r);
  double x1 = x.x(), x2 = x.y();
  double rh = std::sqrt(r), r52 = r * r * rh, r32 = r * rh;
  double d1 = x2 / rh * c - 0.5 * x1 * x1 * x2 / r52 * c + x1 * x1 * x2 / r32 * cp;
  double d2 = x1 / rh * c - 0.5 * x1 * x2 * x2 / r52 * c + x1 * x2 * x2 / r32 * cp;
  return {-d2, d1};
}

double ribbon_kappa(const Vec3& x, const KernelSpec& k) {
  double rho = std::hypot(x.x(), x.z());
  if (rho == 0) return 0;
  return x.x() * x.z() / std::sqrt(rho) * cutoff(k)(x.norm());
}

Vec3 ribbon_column(const Vec3& x, const KernelSpec& k) {
  double rho = std::hypot(x.x(), x.z());
  double r = x.norm();
  if (rho == 0 || r >= k.outer) return Vec3::Zero();
  Falloff chi = cutoff(k);
  double c = chi(r), cp = chi.prime(r);
  double x1 = x.x(), x3 = x.z();
  double sh = std::sqrt(rho), s52 = rho * rho * sh;
  double d1 = x3 / sh * c - 0.5 * x1 * x1 * x3 / s52 * c + x1 * x3 / sh * cp * x1 / r;
  double d3 = x1 / sh * c - 0.5 * x1 * x3 * x3 / s52 * c + x1 * x3 / sh * cp * x3 / r;
  return {d3, 0, -d1};
}

Eigen::Matrix3d ribbon_kernel(const Vec3& x, const KernelSpec& k) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m.col(1) = ribbon_column(x, k);
  return m;
}

MollifiedKernel::MollifiedKernel(double eps, HermiteTable table, double zmax)
    : eps_(eps), zmax_(zmax), table_(std::move(table)) {}

double MollifiedKernel::operator()(double s) const {
  double a = std::abs(s);
  if (a >= support()) return 0;
  double v = table_(std::min(std::sqrt(a), zmax_));
  return s < 0 ? -v : v;
}

double MollifiedKernel::direct(double s, double eps) {
  const Bump1D& rho = Bump1D::get();
  return integrate_split([&](double y) { return rho(y) * axis_kernel(s - eps * y); },
                         kinks(s, eps), s / eps);
}

double MollifiedKernel::prime_direct(double s, double eps) {
  const Bump1D& rho = Bump1D::get();
  return integrate_split([&](double v) { return rho.prime(v) * axis_kernel(s - eps * v); },
                         kinks(s, eps), s / eps) /
         eps;
}

MollifiedKernel build_mollified(double eps) {
  if (!(eps > 0) || eps > 0.5) throw DomainError("mollification radius must lie in (0, 0.5]");
  const double zmax = std::sqrt(3.5);
  // Spacing in z covers two curvature sources: the cusp smoothed over |s| < eps
  // and the cutoff's third-derivative jump at |s| = 2, 3 smoothed over eps.
  const double hz = std::min(std::sqrt(eps) / 160, 0.25 * std::pow(4e-11 * eps, 0.25));
  const std::size_t n = std::size_t(std::ceil(zmax / hz));
  const double dz = zmax / double(n);
  std::vector<double> y(n + 1), dy(n + 1);
  parallel_for(n + 1, [&](std::size_t i) {
    double z = dz * double(i), s = z * z;
    y[i] = MollifiedKernel::direct(s, eps);
    dy[i] = 2 * z * MollifiedKernel::prime_direct(s, eps);
  });
  // non-increasing where the dynamics live
  for (std::size_t i = 0; i + 1 <= n; ++i) {
    double s = dz * dz * double(i + 1) * double(i + 1);
    if (s > 2 - eps) break;
    if (y[i + 1] > y[i] + 1e-14)
      throw InvariantError("mollified kernel not monotone near s = " + std::to_string(s));
  }
  MollifiedKernel M(eps, HermiteTable(std::move(y), std::move(dy), 0.0, dz), zmax);
  // interpolation error at interval midpoints
  std::vector<double> err((n + 7) / 8, 0.0);
  parallel_for(err.size(), [&](std::size_t k) {
    double z = dz * (8.0 * double(k) + 0.5), s = z * z;
    err[k] = std::abs(M(s) - MollifiedKernel::direct(s, eps));
  });
  double worst = *std::max_element(err.begin(), err.end());
  if (worst > 1e-10)
    throw DomainError("mollified kernel table error " + std::to_string(worst) + " exceeds 1e-10");
  return M;
}

LineState initial_line_state(int N, double eps) {
  if (N < 2 || N % 2 != 0) throw DomainError("particle count N must be even and >= 2");
  LineState s;
  s.eps = eps;
  s.alphas.resize(N);
  for (int i = 0; i < N; ++i) s.alphas[i] = -1 + (2.0 * i + 1) / N;
  s.Y = s.alphas;
  return s;
}

namespace {

// Pair terms computed once for j > i, summed per row in a fixed order.
void rhs_into(const std::vector<double>& Y, const MollifiedKernel& M, double factor,
              std::vector<double>& pair, std::vector<double>& out) {
  const std::size_t N = Y.size();
  pair.resize(N * N);
  out.resize(N);
  parallel_for(N, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < N; ++j) pair[i * N + j] = M(Y[i] - Y[j]);
  });
  const double w = factor * 2.0 / double(N);
  parallel_for(N, [&](std::size_t i) {
    double acc = 0;
    for (std::size_t j = 0; j < i; ++j) acc -= pair[j * N + i];
    for (std::size_t j = i + 1; j < N; ++j) acc += pair[i * N + j];
    out[i] = w * acc;
  });
}

struct Stepper {
  const MollifiedKernel& M;
  double factor;
  std::vector<double> pair, k1, k2, k3, k4, tmp;

  void rk4(std::vector<double>& Y, double h) {
    const std::size_t N = Y.size();
    tmp.resize(N);
    rhs_into(Y, M, factor, pair, k1);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = Y[i] + 0.5 * h * k1[i];
    rhs_into(tmp, M, factor, pair, k2);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = Y[i] + 0.5 * h * k2[i];
    rhs_into(tmp, M, factor, pair, k3);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = Y[i] + h * k3[i];
    rhs_into(tmp, M, factor, pair, k4);
    for (std::size_t i = 0; i < N; ++i)
      Y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
};

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::vector<double> slit_rhs(const LineState& s, const MollifiedKernel& M, double factor) {
  if (s.eps != M.eps()) throw DomainError("state and kernel use different eps");
  std::vector<double> pair, out;
  rhs_into(s.Y, M, factor, pair, out);
  return out;
}

LineState LineHistory::at(double t) const {
  if (states.empty()) throw DomainError("empty history");
  if (t <= states.front().t) return states.front();
  if (t >= states.back().t) return states.back();
  auto it = std::upper_bound(states.begin(), states.end(), t,
                             [](double v, const LineState& s) { return v < s.t; });
  const LineState& b = *it;
  const LineState& a = *(it - 1);
  double w = (t - a.t) / (b.t - a.t);
  LineState out = a;
  out.t = t;
  for (std::size_t i = 0; i < out.Y.size(); ++i) out.Y[i] = (1 - w) * a.Y[i] + w * b.Y[i];
  return out;
}

LineHistory solve_line(int N, double eps, double dt, double T, const LineSolveOptions& opt) {
  if (!(T > 0)) throw DomainError("final time T must be positive");
  if (!(dt > 0)) throw DomainError("time step dt must be positive");
  if (opt.sample_every < 1) throw DomainError("sample_every must be >= 1");
  LineState st = initial_line_state(N, eps);
  MollifiedKernel M = build_mollified(eps);
  Stepper step{M, opt.factor, {}, {}, {}, {}, {}, {}};

  LineHistory hist;
  hist.factor = opt.factor;
  const std::size_t n = std::size_t(std::max(1.0, std::ceil(T / dt - 1e-9)));
  const double h = T / double(n);
  hist.dt = h;
  hist.states.push_back(st);
  const double dalpha = 2.0 / N;
  double prev_max = max_abs(st.Y);
  double hsub = h;
  std::vector<double> big, half;

  for (std::size_t s = 0; s < n; ++s) {
    if (prev_max < 10 * eps) {
      if (hist.adaptive_from < 0) hist.adaptive_from = st.t;
      double tau = 0;
      while (tau < h) {
        double hs = std::min(hsub, h - tau);
        big = st.Y;
        step.rk4(big, hs);
        half = st.Y;
        step.rk4(half, 0.5 * hs);
        step.rk4(half, 0.5 * hs);
        double err = 0;
        for (int i = 0; i < N; ++i) err = std::max(err, std::abs(half[i] - big[i]) / 15);
        ++hist.substeps;
        if (err <= opt.adaptive_tol || hs < 1e-12 * h) {
          st.Y = half;
          tau = (hs == h - tau) ? h : tau + hs;
        }
        double fac = err > 0 ? 0.9 * std::pow(opt.adaptive_tol / err, 0.2) : 4.0;
        hsub = std::min(h, hs * std::clamp(fac, 0.1, 4.0));
      }
    } else {
      step.rk4(st.Y, h);
    }
    st.t = h * double(s + 1);
    ++hist.steps;

    double odd = 0;
    for (int i = 0; i < N / 2; ++i) odd = std::max(odd, std::abs(st.Y[i] + st.Y[N - 1 - i]));
    double lo = 1e300, hi = 0;
    for (int i = 0; i + 1 < N; ++i) {
      double d = st.Y[i + 1] - st.Y[i];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    double mx = max_abs(st.Y);
    hist.max_oddness = std::max(hist.max_oddness, odd);
    hist.min_increment = std::min(hist.min_increment, lo);
    hist.max_increment = std::max(hist.max_increment, hi);
    hist.max_growth = std::max(hist.max_growth, mx - prev_max);
    if (opt.check_invariants) {
      std::ostringstream why;
      if (odd > 1e-10) why << "oddness defect " << odd;
      else if (lo < 0) why << "marker order lost (increment " << lo << ")";
      else if (hi > dalpha + 1e-10) why << "increment " << hi << " exceeds marker spacing";
      else if (mx > prev_max) why << "max|Y| grew by " << mx - prev_max;
      if (!why.str().empty()) {
        why << " at step " << s + 1 << ", t = " << st.t;
        throw InvariantError(why.str());
      }
    }
    prev_max = mx;
    if ((s + 1) % std::size_t(opt.sample_every) == 0 || s + 1 == n) hist.states.push_back(st);
  }
  return hist;
}

LineHistory solve_slit(int N, double eps, double dt, double T, int sample_every) {
  LineSolveOptions o;
  o.sample_every = sample_every;
  return solve_line(N, eps, dt, T, o);
}

LineHistory solve_ribbon(int N, double eps, double dt, double T, int sample_every) {
  LineSolveOptions o;
  o.factor = 2;
  o.sample_every = sample_every;
  return solve_line(N, eps, dt, T, o);
}

namespace {

template <class Pos>
Vec2 slit_sum(std::size_t N, const Pos& Y, const Vec2& x) {
  Vec2 acc = Vec2::Zero();
  for (std::size_t j = 0; j < N; ++j) acc += slit_kernel(x - Vec2(Y(j), 0));
  return acc * (2.0 / double(N));
}

template <class Pos>
Vec3 ribbon_sum(std::size_t N, const Pos& Y, const Vec3& x, int nodes) {
  const GaussRule& g = gauss_legendre(nodes);
  const KernelSpec spec = KernelSpec::ribbon();
  const double far2 = std::pow(std::abs(x.y()) + 1, 2);
  Vec3 acc = Vec3::Zero();
  for (std::size_t j = 0; j < N; ++j) {
    Vec3 d(x.x(), 0, x.z() - Y(j));
    double q = d.x() * d.x() + d.z() * d.z();
    if (q + far2 < spec.inner * spec.inner) {
      // chi == 1 along the whole alpha_2 line: integrand independent of b
      acc += 2 * ribbon_column(d, spec);
      continue;
    }
    if (q >= spec.outer * spec.outer) continue;
    // split where |x - (0,b,Y_j)| crosses the ends of the cutoff collar, so
    // each piece is smooth in b
    double cuts[6] = {-1, 1};
    int nc = 2;
    for (double c : {spec.inner, spec.outer}) {
      double r2 = c * c - q;
      if (r2 <= 0) continue;
      for (double b : {x.y() - std::sqrt(r2), x.y() + std::sqrt(r2)})
        if (b > -1 && b < 1) cuts[nc++] = b;
    }
    std::sort(cuts, cuts + nc);
    for (int p = 0; p + 1 < nc; ++p) {
      double lo = cuts[p], hi = cuts[p + 1], half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
      // pieces lie wholly inside or outside the support; skip the outside ones
      double near = std::max(0.0, std::abs(x.y() - mid) - half);
      if (half <= 0 || q + near * near >= spec.outer * spec.outer) continue;
      for (std::size_t m = 0; m < g.x.size(); ++m) {
        d.y() = x.y() - (mid + half * g.x[m]);
        acc += (half * g.w[m]) * ribbon_column(d, spec);
      }
    }
  }
  return acc * (2.0 / double(N));
}

}  // namespace

Vec2 slit_velocity(const SlitState& s, const Vec2& x) {
  return slit_sum(s.Y.size(), [&](std::size_t j) { return s.Y[j]; }, x);
}

Vec3 ribbon_velocity(const RibbonState& s, const Vec3& x, int nodes) {
  return ribbon_sum(s.Y.size(), [&](std::size_t j) { return s.Y[j]; }, x, nodes);
}

void LineHistory::bracket(double t, std::size_t& k, double& w) const {
  if (states.empty()) throw DomainError("empty history");
  if (t <= states.front().t || states.size() == 1) {
    k = 0;
    w = 0;
    return;
  }
  if (t >= states.back().t) {
    k = states.size() - 1;
    w = 0;
    return;
  }
  auto it = std::upper_bound(states.begin(), states.end(), t,
                             [](double v, const LineState& s) { return v < s.t; });
  k = std::size_t(it - states.begin()) - 1;
  w = (t - states[k].t) / (states[k + 1].t - states[k].t);
  // snap to a stored sample within roundoff: a marker displaced by 1e-17 still
  // moves its own velocity by ~1e-9 through the square-root kernel
  if (w < 1e-12) {
    w = 0;
  } else if (w > 1 - 1e-12) {
    ++k;
    w = 0;
  }
}

Vec2 SlitVelocityField::eval(double t, const Vec2& x) const {
  std::size_t k;
  double w;
  h_->bracket(t, k, w);
  const auto& a = h_->states[k].Y;
  if (w == 0) return slit_sum(a.size(), [&](std::size_t j) { return a[j]; }, x);
  const auto& b = h_->states[k + 1].Y;
  return slit_sum(a.size(), [&](std::size_t j) { return (1 - w) * a[j] + w * b[j]; }, x);
}

Vec3 RibbonVelocityField::eval(double t, const Vec3& x) const {
  std::size_t k;
  double w;
  h_->bracket(t, k, w);
  const auto& a = h_->states[k].Y;
  if (w == 0) return ribbon_sum(a.size(), [&](std::size_t j) { return a[j]; }, x, nodes_);
  const auto& b = h_->states[k + 1].Y;
  return ribbon_sum(
      a.size(), [&](std::size_t j) { return (1 - w) * a[j] + w * b[j]; }, x, nodes_);
}

const GaussRule& gauss_legendre(int nodes) {
  using boost::math::quadrature::gauss;
  auto make = [](const auto& a, const auto& b) {
    GaussRule r;
    for (std::size_t i = 0; i < a.size(); ++i) {
      r.x.push_back(-a[i]);
      r.w.push_back(b[i]);
      r.x.push_back(a[i]);
      r.w.push_back(b[i]);
    }
    return r;
  };
  static const GaussRule g4 = make(gauss<double, 4>::abscissa(), gauss<double, 4>::weights());
  static const GaussRule g8 = make(gauss<double, 8>::abscissa(), gauss<double, 8>::weights());
  static const GaussRule g16 = make(gauss<double, 16>::abscissa(), gauss<double, 16>::weights());
  static const GaussRule g32 = make(gauss<double, 32>::abscissa(), gauss<double, 32>::weights());
  switch (nodes) {
    case 4: return g4;
    case 8: return g8;
    case 16: return g16;
    case 32: return g32;
    default: throw DomainError("Gauss-Legendre rule supports 4, 8, 16 or 32 nodes");
  }
}

namespace {
class FrozenSlitField final : public Field2 {
 public:
  explicit FrozenSlitField(const SlitState& s) : s_(s) {}
  Vec2 eval(double, const Vec2& x) const override { return slit_velocity(s_, x); }
  FieldKind kind() const override { return FieldKind::slit_u; }

 private:
  const SlitState& s_;
};
}  // namespace

SobolevEstimate active_sobolev_check(const SlitState& s, double p, const Rect& region, double h) {
  if (!(p >= 1 && p <= 2)) throw DomainError("Sobolev exponent must lie in [1,2]");
  FrozenSlitField f(s);
  auto est = sobolev_norm(sample_grid(f, region, h, s.t), p);
  if (p >= 2) {
    est.warning = "p = 2 is critical: the estimate grows under grid refinement";
  }
  return est;
}

}  // namespace fracflow
