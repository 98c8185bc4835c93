#pragma once
// Particle measures, weak advection residuals (scalar 2D and vector 3D with
// stretching and the divergence pairing), time reversal and box counting.

#include "fracflow/activescalar.hpp"
#include "fracflow/flow.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fracflow {

template <int D>
struct ParticleMeasure {
  double t = 0;
  std::vector<Vec<D>> points;
  std::vector<double> weights;    // scalar case
  std::vector<Vec<D>> vweights;   // vector case
  // vector case: samples of the two alpha_2 = +-1 boundary curves with
  // their alpha_3 quadrature weights
  std::vector<Vec<D>> bnd_plus, bnd_minus;
  std::vector<double> bnd_weights;

  bool is_vector() const { return !vweights.empty(); }
  double total_mass() const;
  Vec<D> total_vector() const;
};
using Measure2 = ParticleMeasure<2>;
using Measure3 = ParticleMeasure<3>;

// points = cloud positions, weights carried unchanged
template <int D>
ParticleMeasure<D> pushforward(const ParticleCloud<D>& cloud, const std::vector<double>& mu0,
                               double t = 0);
// omega = stretch * area for each particle (d_{alpha_2} X times the alpha weight)
Measure3 pushforward_vector(const Cloud3& cloud, const std::vector<double>& area, double t = 0);

// phi(t,x) = q(t) g(x) [e], g(x) = prod_i b((x_i - c_i)/s) * prod_i z_i^{m_i},
// b(z) = exp(-1/(1-z^2)), q(t) = q0 + q1 t + q2 t^2.
template <int D>
struct TestFunction {
  Vec<D> center = Vec<D>::Zero();
  double scale = 1;
  Eigen::Matrix<int, D, 1> powers = Eigen::Matrix<int, D, 1>::Zero();
  double q0 = 1, q1 = 0, q2 = 0;
  Vec<D> pattern = Vec<D>::Unit(D - 1);  // component direction e (vector case)

  double time_factor(double t) const { return q0 + t * (q1 + t * q2); }
  double time_factor_prime(double t) const { return q1 + 2 * q2 * t; }
  // spatial part g and its gradient
  double spatial(const Vec<D>& x, Vec<D>* grad = nullptr) const;
  bool in_support(const Vec<D>& x) const;
};
using TestFunction2D = TestFunction<2>;
using TestFunction3D = TestFunction<3>;

// `count` functions with seeded random centers in the box, scales in
// [smin, smax], monomial degree <= 3 and random quadratic time factors.
template <int D>
std::vector<TestFunction<D>> test_family(std::size_t count, const Vec<D>& lo, const Vec<D>& hi,
                                         double smin, double smax, std::uint64_t seed);

struct WeakResidualReport {
  std::vector<double> terms;   // T1..T4 (2D) or T1..T6 (3D)
  std::vector<double> signs;   // residual = sum signs[i] * terms[i]
  double residual = 0;
  std::size_t particles = 0, time_samples = 0;
  double dt = 0;
  int quadrature_order = 2;    // trapezoid
  std::string warning;
};

// Measures must share particle order and sit on a uniform time grid. The
// batch forms evaluate u once per sample point for all test functions.
WeakResidualReport weak_residual_2d(const Field2& u, const std::vector<Measure2>& mu,
                                    const TestFunction2D& phi);
WeakResidualReport weak_residual_3d(const Field3& u, const std::vector<Measure3>& omega,
                                    const TestFunction3D& phi);
std::vector<WeakResidualReport> weak_residuals_2d(const Field2& u,
                                                  const std::vector<Measure2>& mu,
                                                  const std::vector<TestFunction2D>& phis);
std::vector<WeakResidualReport> weak_residuals_3d(const Field3& u,
                                                  const std::vector<Measure3>& omega,
                                                  const std::vector<TestFunction3D>& phis);

// mu'(t) = mu(T - t) (negated for vector measures), u'(t) = -u(T - t)
template <int D>
std::vector<ParticleMeasure<D>> reverse_measures(const std::vector<ParticleMeasure<D>>& mu);

template <int D>
struct Reversed {
  std::vector<ParticleMeasure<D>> measures;
  std::shared_ptr<const Field<D>> field;
};
template <int D>
Reversed<D> time_reverse(const std::vector<ParticleMeasure<D>>& mu,
                         std::shared_ptr<const Field<D>> u);

struct BoxCountReport {
  std::vector<double> scales;
  std::vector<std::size_t> counts;
  std::vector<bool> used;  // pairs entering the fit
  double slope = 0;
  double fit_residual = 0;  // rms of log-count residuals
  bool degenerate = false;
};

// Least-squares slope of log N(s) vs log(1/s), N = min over four shifted grids.
template <int D>
BoxCountReport box_dimension(const std::vector<Vec<D>>& pts, const std::vector<double>& scales);
// s_j = 2^-j, j = 2..10
std::vector<double> default_box_scales();
// Quarter-octave scales L 2^{-j/4}, j < 48, L the bounding-box extent; the fit
// keeps counts in [16, n/4].
template <int D>
BoxCountReport box_dimension_auto(const std::vector<Vec<D>>& pts);

// Random-word sampling of the attractor of x -> (+-1, 0) + alpha R x: start
// at the F_1 fixed point, apply `tail` random maps, then `depth` more.
std::vector<Vec2> sample_attractor_tilde(double alpha, std::size_t n, int depth,
                                         std::uint64_t seed, int tail = 40);

// ---- residual scenarios ----

struct ResidualLevel {
  double dt = 0;         // measure sampling step
  std::size_t particles = 0;
  double max_residual = 0;
  std::vector<double> residuals;  // per test function
};

struct ResidualStudy {
  std::string scenario;
  std::vector<ResidualLevel> levels;
  double order = 0;  // least-squares slope of -log2 max_residual per level
  double involution_error = 0;
};

// U-advected measure on the depth-3 attractor approximation, times in [0,1].
ResidualStudy residual_study_U(double alpha, int levels, std::size_t functions = 20,
                               std::uint64_t seed = 1);
// Reversed slit solution on [0,T].
ResidualStudy residual_study_slit(int levels, std::size_t functions = 20, std::uint64_t seed = 1,
                                  int N0 = 100, double T = 2);
// Ribbon solution on [0,T]; level l uses 2^l panels of `nodes` Gauss points
// in alpha_2.
ResidualStudy residual_study_ribbon(int levels, std::size_t functions = 20,
                                    std::uint64_t seed = 1, int N0 = 50, double T = 1,
                                    int nodes = 16);

// Measures of a line history: slit points (Y_j, 0), weights 2/N.
std::vector<Measure2> slit_measures(const LineHistory& h);
// Ribbon particles (0, a2_m, Y_j) with weights (2/N) v_m (0,1,0), (a2_m, v_m)
// a composite Gauss-Legendre rule of `panels` pieces with `nodes` points each;
// boundary curves (0, +-1, Y_j) with weights 2/N.
std::vector<Measure3> ribbon_measures(const LineHistory& h, int nodes = 16, int panels = 1);

}  // namespace fracflow
