#pragma once
// Trajectory integration and the contraction / collapse / full-dimension
// verifications built on it.

#include "fracflow/fields.hpp"

#include <functional>
#include <vector>

namespace fracflow {

template <int D>
struct ParticleCloud {
  std::vector<Vec<D>> positions;
  std::vector<Vec<D>> labels;  // initial positions
  std::vector<double> weights;
  std::vector<Vec3> stretch;   // d X / d alpha_2, ribbon only

  static ParticleCloud from_points(const std::vector<Vec<D>>& pts, double w = 1) {
    ParticleCloud c;
    c.positions = pts;
    c.labels = pts;
    c.weights.assign(pts.size(), w);
    return c;
  }
  std::size_t size() const { return positions.size(); }
};
using Cloud2 = ParticleCloud<2>;
using Cloud3 = ParticleCloud<3>;

enum class Method { rk4_fixed, rk4_adaptive };

struct IntegratorConfig {
  Method method = Method::rk4_fixed;
  double dt = 1e-4;
  double tol = 1e-9;
  std::size_t max_steps = 100'000'000;
};

// Thrown when a particle needs more than max_steps steps; carries the
// positions reached so far and the time of the slowest particle.
struct IntegrationError : ResourceError {
  IntegrationError(const std::string& what, std::vector<double> partial, double t)
      : ResourceError(what), partial_state(std::move(partial)), t_reached(t) {}
  std::vector<double> partial_state;
  double t_reached;
};

template <int D>
Vec<D> rk4_step(const Field<D>& f, double t, const Vec<D>& x, double h) {
  Vec<D> k1 = f.eval(t, x);
  Vec<D> k2 = f.eval(t + 0.5 * h, x + 0.5 * h * k1);
  Vec<D> k3 = f.eval(t + 0.5 * h, x + 0.5 * h * k2);
  Vec<D> k4 = f.eval(t + h, x + h * k3);
  return x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

// Called after every accepted step of one particle: (particle, t, x).
template <int D>
using StepObserver = std::function<void(std::size_t, double, const Vec<D>&)>;

template <int D>
ParticleCloud<D> integrate(const Field<D>& f, ParticleCloud<D> cloud, double t0, double t1,
                           const IntegratorConfig& cfg, const StepObserver<D>& obs = {});

// Positions at each requested time (times ascending, times[0] is the start).
template <int D>
std::vector<std::vector<Vec<D>>> integrate_history(const Field<D>& f,
                                                   const std::vector<Vec<D>>& start,
                                                   const std::vector<double>& times,
                                                   const IntegratorConfig& cfg);

// Central difference of neighbouring alpha_2 particles (ribbon cross-check).
std::vector<Vec3> finite_difference_stretch(const Cloud3& plus, const Cloud3& minus, double h);

// max |X_{G u o G_r^{-1}}(t1, x) - G_r X_u(t1, G_r^{-1} x)| over the cloud;
// G_r has the linear part of G and translation r.
double rescaled_trajectory_check(const FieldHandle& field, const AffineSimilarity& G,
                                 const Vec2& r, const Cloud2& cloud, double t0, double t1,
                                 const IntegratorConfig& cfg);

struct ContractionReport {
  BinaryWord word;
  double endpoint_error = 0;
  Vec2 expected_a, expected_b, measured_a, measured_b;
  double max_axis_drift = 0;  // only for the empty word: |x2| of the midpoint
};

std::vector<ContractionReport> verify_contraction(double alpha, int depth,
                                                  const IntegratorConfig& cfg);

struct EnclosureWindow {
  int k = 0;
  double t_start = 0, t_end = 0;
  double max_excess = 0;        // largest distance outside gamma^k R_eps (<= 0 inside)
  double diameter_ratio = 0;    // diam X(t_k) / diam X(0)
  double pointwise_error = 0;   // max |X(t_k) - gamma^k x|
};

struct EnclosureReport {
  double alpha = 0, xi = 0, slack = 0;
  std::size_t samples = 0;
  std::vector<EnclosureWindow> windows;
  bool ok = false;
};

EnclosureReport enclosure_check(double alpha, double xi, int kmax, const IntegratorConfig& cfg,
                                double slack = 1e-5, int sample_depth = 8);

struct FullDimReport {
  int kmax = 0;
  Vec2 image_24 = Vec2::Zero();  // X_V(2, (24,0))
  double error_24 = 0;
  double origin_drift = 0;
  double block_error_t1 = 0;     // vs G_k((7/8) S_k)
  double block_error_t2 = 0;     // vs (7/8) G_k(S_k)
  double plateau_error = 0;      // line points (7/8)^{k-1}(24,0)
  double line_axis_drift = 0;    // max |x2| of line samples
  double line_max_t2 = 0;        // max x1 of the line image
  double stage_error = 0;        // |X_Vtilde(t_k,(24,0)) - (7/8)^k (24,0)|, k = 1,2
  double t1 = 0, t2 = 0;
  bool ok = false;
};

FullDimReport full_dim_scale_check(int kmax, const IntegratorConfig& cfg, int block_depth = 3,
                                   bool run_stages = true);

}  // namespace fracflow
