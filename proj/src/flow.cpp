#include "fracflow/flow.hpp"

#include <algorithm>
#include <cmath>

namespace fracflow {

namespace {

// Integrates one point over [t0,t1]; returns steps taken.
template <int D>
std::size_t advance(const Field<D>& f, Vec<D>& x, double t0, double t1,
                    const IntegratorConfig& cfg, std::size_t id, const StepObserver<D>& obs) {
  if (t1 <= t0) return 0;
  if (!(cfg.dt > 0)) throw DomainError("integrator dt must be positive");
  if (cfg.method == Method::rk4_fixed) {
    double span = t1 - t0;
    double n = std::max(1.0, std::ceil(span / cfg.dt - 1e-9));
    if (n > double(cfg.max_steps))
      throw IntegrationError("fixed-step count exceeds max_steps", {}, t0);
    std::size_t steps = std::size_t(n);
    double h = span / n;
    for (std::size_t s = 0; s < steps; ++s) {
      double t = t0 + h * double(s);
      x = rk4_step(f, t, x, h);
      if (obs) obs(id, s + 1 == steps ? t1 : t + h, x);
    }
    return steps;
  }
  // step doubling with a per-particle controller
  if (!(cfg.tol > 0)) throw DomainError("integrator tol must be positive");
  double t = t0, h = std::min(cfg.dt, t1 - t0);
  std::size_t steps = 0;
  while (t < t1) {
    if (++steps > cfg.max_steps) {
      std::vector<double> part(x.data(), x.data() + D);
      throw IntegrationError("adaptive step count exceeds max_steps", part, t);
    }
    h = std::min(h, t1 - t);
    Vec<D> big = rk4_step(f, t, x, h);
    Vec<D> half = rk4_step(f, t, x, 0.5 * h);
    Vec<D> two = rk4_step(f, t + 0.5 * h, half, 0.5 * h);
    double err = (two - big).norm() / 15;
    double scale = cfg.tol * (1 + x.norm());
    if (err <= scale || h < 1e-14) {
      t = (t + h >= t1) ? t1 : t + h;
      x = two + (two - big) / 15;
      if (obs) obs(id, t, x);
    }
    double fac = err > 0 ? 0.9 * std::pow(scale / err, 0.2) : 4.0;
    h *= std::clamp(fac, 0.1, 4.0);
    h = std::min(h, cfg.dt);
  }
  return steps;
}

}  // namespace

template <int D>
ParticleCloud<D> integrate(const Field<D>& f, ParticleCloud<D> cloud, double t0, double t1,
                           const IntegratorConfig& cfg, const StepObserver<D>& obs) {
  if (t1 < t0) throw DomainError("integrate requires t0 <= t1");
  std::vector<std::exception_ptr> errs(cloud.size());
  parallel_for(cloud.size(), [&](std::size_t i) {
    try {
      advance(f, cloud.positions[i], t0, t1, cfg, i, obs);
    } catch (...) {
      errs[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < errs.size(); ++i) {
    if (!errs[i]) continue;
    try {
      std::rethrow_exception(errs[i]);
    } catch (const IntegrationError& e) {
      std::vector<double> flat;
      for (auto& p : cloud.positions) flat.insert(flat.end(), p.data(), p.data() + D);
      throw IntegrationError(std::string(e.what()) + " (particle " + std::to_string(i) + ")",
                             flat, e.t_reached);
    }
  }
  return cloud;
}

template <int D>
std::vector<std::vector<Vec<D>>> integrate_history(const Field<D>& f,
                                                   const std::vector<Vec<D>>& start,
                                                   const std::vector<double>& times,
                                                   const IntegratorConfig& cfg) {
  std::vector<std::vector<Vec<D>>> out;
  if (times.empty()) return out;
  out.reserve(times.size());
  out.push_back(start);
  auto cloud = ParticleCloud<D>::from_points(start);
  for (std::size_t s = 1; s < times.size(); ++s) {
    cloud = integrate(f, std::move(cloud), times[s - 1], times[s], cfg);
    out.push_back(cloud.positions);
  }
  return out;
}

template ParticleCloud<2> integrate(const Field<2>&, ParticleCloud<2>, double, double,
                                    const IntegratorConfig&, const StepObserver<2>&);
template ParticleCloud<3> integrate(const Field<3>&, ParticleCloud<3>, double, double,
                                    const IntegratorConfig&, const StepObserver<3>&);
template std::vector<std::vector<Vec<2>>> integrate_history(const Field<2>&,
                                                            const std::vector<Vec<2>>&,
                                                            const std::vector<double>&,
                                                            const IntegratorConfig&);
template std::vector<std::vector<Vec<3>>> integrate_history(const Field<3>&,
                                                            const std::vector<Vec<3>>&,
                                                            const std::vector<double>&,
                                                            const IntegratorConfig&);

std::vector<Vec3> finite_difference_stretch(const Cloud3& plus, const Cloud3& minus, double h) {
  if (plus.size() != minus.size()) throw DomainError("stretch clouds differ in size");
  std::vector<Vec3> out(plus.size());
  for (std::size_t i = 0; i < plus.size(); ++i)
    out[i] = (plus.positions[i] - minus.positions[i]) / (2 * h);
  return out;
}

double rescaled_trajectory_check(const FieldHandle& field, const AffineSimilarity& G,
                                 const Vec2& r, const Cloud2& cloud, double t0, double t1,
                                 const IntegratorConfig& cfg) {
  AffineSimilarity Gr = G;
  Gr.translation = r;
  AffineSimilarity Ginv = Gr.inverse();
  ConjugatedField conj(field, Gr);

  Cloud2 direct = integrate<2>(conj, cloud, t0, t1, cfg);
  Cloud2 pulled = cloud;
  for (auto& p : pulled.positions) p = Ginv(p);
  pulled = integrate<2>(*field, std::move(pulled), t0, t1, cfg);
  double dev = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    dev = std::max(dev, (direct.positions[i] - Gr(pulled.positions[i])).norm());
  return dev;
}

std::vector<ContractionReport> verify_contraction(double alpha, int depth,
                                                  const IntegratorConfig& cfg) {
  SeriesField U(alpha);
  const double g = U.ifs().gamma;
  auto fa = attractor_approx(U.ifs(), depth);
  std::vector<Vec2> pts;
  for (auto& s : fa.segments) {
    pts.push_back(s.a);
    pts.push_back(s.b);
  }
  pts.push_back(Vec2::Zero());  // midpoint of I
  double drift = 0;
  const std::size_t mid = pts.size() - 1;
  auto end = integrate<2>(U, Cloud2::from_points(pts), 0, 1, cfg,
                          [&](std::size_t i, double, const Vec2& x) {
                            if (i == mid) drift = std::max(drift, std::abs(x.y()));
                          });
  std::vector<ContractionReport> out;
  for (std::size_t i = 0; i < fa.segments.size(); ++i) {
    ContractionReport r;
    r.word = fa.segments[i].word;
    r.expected_a = g * fa.segments[i].a;
    r.expected_b = g * fa.segments[i].b;
    r.measured_a = end.positions[2 * i];
    r.measured_b = end.positions[2 * i + 1];
    r.endpoint_error =
        std::max((r.measured_a - r.expected_a).norm(), (r.measured_b - r.expected_b).norm());
    if (r.word.empty()) r.max_axis_drift = std::max(drift, std::abs(end.positions[mid].y()));
    out.push_back(r);
  }
  return out;
}

EnclosureReport enclosure_check(double alpha, double xi, int kmax, const IntegratorConfig& cfg,
                                double slack, int sample_depth) {
  if (kmax < 0) throw DomainError("kmax must be >= 0");
  CollapseField W(alpha, xi);
  const IfsParams& p = W.series().ifs();
  auto fa = attractor_approx(p, sample_depth);
  std::vector<Vec2> pts;
  for (auto& s : fa.segments) {
    pts.push_back(s.a);
    pts.push_back(s.b);
  }
  auto diameter = [](const std::vector<Vec2>& v) {
    double d = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) d = std::max(d, (v[i] - v[j]).norm());
    return d;
  };
  const double d0 = diameter(pts);
  EnclosureReport rep;
  rep.alpha = alpha;
  rep.xi = xi;
  rep.slack = slack;
  rep.samples = pts.size();
  rep.ok = true;
  const Rect Re = rect_R(p.eps);
  Cloud2 cloud = Cloud2::from_points(pts);
  for (int k = 0; k <= kmax; ++k) {
    EnclosureWindow w;
    w.k = k;
    w.t_start = W.window_start(k);
    w.t_end = W.window_start(k + 1);
    const double gk = std::pow(p.gamma, k);
    const Rect box = Re.scaled(gk);
    auto excess = [&](const Vec2& x) {
      return std::max(std::abs(x.x()) - box.half.x(), std::abs(x.y()) - box.half.y());
    };
    // at t_k the sample must equal gamma^k times the start
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      w.pointwise_error = std::max(w.pointwise_error, (cloud.positions[i] - gk * pts[i]).norm());
      w.max_excess = std::max(w.max_excess, excess(cloud.positions[i]));
    }
    w.diameter_ratio = diameter(cloud.positions) / d0;
    IntegratorConfig c = cfg;
    c.dt = cfg.dt * std::pow(xi, k);  // dt is per unit of window length
    std::vector<double> worst(cloud.size(), -1e300);
    cloud = integrate<2>(W, std::move(cloud), w.t_start, w.t_end, c,
                         [&](std::size_t i, double, const Vec2& x) {
                           worst[i] = std::max(worst[i], excess(x));
                         });
    for (double e : worst) w.max_excess = std::max(w.max_excess, e);
    if (w.max_excess > slack) rep.ok = false;
    if (std::abs(w.diameter_ratio - gk) > 1e-4 * gk) rep.ok = false;
    rep.windows.push_back(w);
  }
  return rep;
}

FullDimReport full_dim_scale_check(int kmax, const IntegratorConfig& cfg, int block_depth,
                                   bool run_stages) {
  CombinedField V(kmax);
  FullDimReport rep;
  rep.kmax = kmax;
  const double s78 = 7.0 / 8.0;

  // line samples, plateau points, block endpoints
  std::vector<Vec2> pts;
  const int nline = 96;
  for (int j = 0; j <= nline; ++j) pts.push_back(Vec2(24.0 * j / nline, 0));
  std::size_t plateau0 = pts.size();
  for (int k = 1; k <= kmax; ++k) pts.push_back(Vec2(24 * std::pow(s78, k - 1), 0));
  std::size_t block0 = pts.size();
  struct BlockPt {
    int k;
    Vec2 local;
  };
  std::vector<BlockPt> bps;
  for (int k = 1; k <= kmax; ++k) {
    auto fa = attractor_approx(derive_constants(block_alpha(k)), block_depth);
    AffineSimilarity G = block_map(k);
    for (auto& s : fa.segments)
      for (const Vec2& e : {s.a, s.b}) {
        bps.push_back({k, e});
        pts.push_back(G(e));
      }
  }

  auto at1 = integrate<2>(V, Cloud2::from_points(pts), 0, 1, cfg);
  auto at2 = integrate<2>(V, at1, 1, 2, cfg);

  for (std::size_t b = 0; b < bps.size(); ++b) {
    AffineSimilarity G = block_map(bps[b].k);
    Vec2 e1 = G(s78 * bps[b].local);
    Vec2 e2 = s78 * G(bps[b].local);
    rep.block_error_t1 = std::max(rep.block_error_t1, (at1.positions[block0 + b] - e1).norm());
    rep.block_error_t2 = std::max(rep.block_error_t2, (at2.positions[block0 + b] - e2).norm());
  }
  for (std::size_t i = 0; i < block0; ++i) {
    rep.line_axis_drift = std::max(rep.line_axis_drift, std::abs(at2.positions[i].y()));
    rep.line_max_t2 = std::max(rep.line_max_t2, at2.positions[i].x());
  }
  for (std::size_t i = plateau0; i < block0; ++i)
    rep.plateau_error =
        std::max(rep.plateau_error, (at2.positions[i] - s78 * pts[i]).norm());
  rep.image_24 = at2.positions[nline];
  rep.error_24 = (rep.image_24 - Vec2(21, 0)).norm();
  rep.origin_drift = at2.positions[0].norm();

  rep.t1 = FullField::stage_time(1);
  rep.t2 = FullField::stage_time(2);
  if (run_stages) {
    FullField Vt(kmax);
    Cloud2 c = Cloud2::from_points({Vec2(24, 0)});
    Vec2 target(24, 0);
    for (int k = 0; k < 2; ++k) {
      IntegratorConfig ck = cfg;
      ck.dt = cfg.dt * std::pow(8.0 / 9.0, k);
      // window [t_k, t_{k+1}] maps onto V-time [0,2]; split at its midpoint
      double a = FullField::stage_time(k), b = FullField::stage_time(k + 1);
      double m = 0.5 * (a + b);
      c = integrate<2>(Vt, c, a, m, ck);
      c = integrate<2>(Vt, c, m, b, ck);
      target *= s78;
      rep.stage_error = std::max(rep.stage_error, (c.positions[0] - target).norm());
    }
  }
  rep.ok = rep.error_24 < 1e-4 && rep.origin_drift == 0 && rep.block_error_t2 < 1e-3 &&
           rep.block_error_t1 < 1e-3 && rep.plateau_error < 1e-3 && rep.line_axis_drift < 1e-9 &&
           std::abs(rep.line_max_t2 - 21) < 1e-4 && std::abs(rep.t1 - 2) < 1e-14 &&
           std::abs(rep.t2 - 34.0 / 9.0) < 1e-14 && (!run_stages || rep.stage_error < 1e-3);
  return rep;
}

}  // namespace fracflow
