#pragma once
// Active-scalar constructions: the slit kernel K = grad-perp kappa in 2D, the
// 3x3 ribbon kernel, the mollified axis kernel M_eps, and the particle
// systems they drive.

#include "fracflow/fields.hpp"
#include "fracflow/grid.hpp"

#include <vector>

namespace fracflow {

enum class KernelKind { slit2d, ribbon3x3 };

// chi == 1 for r <= inner, 0 for r >= outer
struct KernelSpec {
  KernelKind kind = KernelKind::slit2d;
  double inner = 2, outer = 3;
  static KernelSpec slit() { return {KernelKind::slit2d, 2, 3}; }
  static KernelSpec ribbon() { return {KernelKind::ribbon3x3, 3, 4}; }
};

// kappa(x) = x1 x2 |x|^{-1/2} chi(|x|)
double slit_kappa(const Vec2& x, const KernelSpec& k = KernelSpec::slit());
// K = (-d2 kappa, d1 kappa), 0 at the origin
Vec2 slit_kernel(const Vec2& x, const KernelSpec& k = KernelSpec::slit());

// kappa(x) = x1 x3 |(x1,x3)|^{-1/2} chi(|x|)
double ribbon_kappa(const Vec3& x, const KernelSpec& k = KernelSpec::ribbon());
// Second column of the ribbon matrix: (d3 kappa, 0, -d1 kappa). The other
// columns are zero.
Vec3 ribbon_column(const Vec3& x, const KernelSpec& k = KernelSpec::ribbon());
Eigen::Matrix3d ribbon_kernel(const Vec3& x, const KernelSpec& k = KernelSpec::ribbon());

// M_eps = rho_eps * K(., 0) with the 1D bump rho. Tabulated in
// z = sign(s) sqrt|s| where it is nearly linear; odd by construction.
class MollifiedKernel {
 public:
  MollifiedKernel(double eps, HermiteTable table, double zmax);
  double eps() const { return eps_; }
  double operator()(double s) const;
  // support half-width: M vanishes for |s| >= support()
  double support() const { return 3 + eps_; }
  // quadrature evaluations (slow, used to build and check the table)
  static double direct(double s, double eps);
  static double prime_direct(double s, double eps);

 private:
  double eps_, zmax_;
  HermiteTable table_;  // z >= 0 half only
};

// Quadrature-built table; checks oddness and monotonicity on [-2+eps, 2-eps].
MollifiedKernel build_mollified(double eps);

// Markers alpha_i = -1 + (2i+1)/N, positions Y_i on the axis.
struct LineState {
  std::vector<double> alphas, Y;
  double t = 0, eps = 0;
  std::size_t size() const { return Y.size(); }
};
using SlitState = LineState;
// X(t, alpha) = (0, alpha2, Y(t, alpha3)), alpha2 in [-1,1]
using RibbonState = LineState;

LineState initial_line_state(int N, double eps);

// dY_i/dt = factor * (2/N) sum_j M(Y_i - Y_j)
std::vector<double> slit_rhs(const LineState& s, const MollifiedKernel& M, double factor = 1);

struct LineSolveOptions {
  double factor = 1;          // 2 for the ribbon
  int sample_every = 1;       // store every n-th step
  double adaptive_tol = 1e-12;
  bool check_invariants = true;
};

struct LineHistory {
  std::vector<LineState> states;
  std::size_t steps = 0, substeps = 0;
  double dt = 0, factor = 1;
  double max_oddness = 0;
  double min_increment = 1e300, max_increment = 0;  // adjacent differences
  double max_growth = 0;                            // largest increase of max|Y|
  double adaptive_from = -1;                        // first time adaptive substeps ran
  // linear interpolation in time (clamped to the stored range)
  LineState at(double t) const;
  // Y_j(t) = (1-w) states[k].Y_j + w states[k+1].Y_j (k+1 clamped)
  void bracket(double t, std::size_t& k, double& w) const;
};

// RK4 on fixed macro steps of size dt; once max|Y| < 10 eps each macro step
// is split adaptively (step doubling). Invariants are checked per step and
// violations throw InvariantError.
LineHistory solve_line(int N, double eps, double dt, double T, const LineSolveOptions& opt = {});
LineHistory solve_slit(int N, double eps, double dt, double T, int sample_every = 1);
LineHistory solve_ribbon(int N, double eps, double dt, double T, int sample_every = 1);

// u(x) = (2/N) sum_j K(x - (Y_j, 0))
Vec2 slit_velocity(const SlitState& s, const Vec2& x);

// u(x) = (2/N) sum_j int_{-1}^{1} col(x - (0, b, Y_j)) db, Gauss-Legendre in b
// with `nodes` points (4, 8, 16 or 32) on each piece between the cutoff-collar
// crossings; exact shortcut where chi == 1 throughout.
Vec3 ribbon_velocity(const RibbonState& s, const Vec3& x, int nodes = 16);

class SlitVelocityField final : public Field2 {
 public:
  explicit SlitVelocityField(std::shared_ptr<const LineHistory> h) : h_(std::move(h)) {}
  Vec2 eval(double t, const Vec2& x) const override;
  FieldKind kind() const override { return FieldKind::slit_u; }
  const LineHistory& history() const { return *h_; }

 private:
  std::shared_ptr<const LineHistory> h_;
};

class RibbonVelocityField final : public Field3 {
 public:
  RibbonVelocityField(std::shared_ptr<const LineHistory> h, int nodes = 16)
      : h_(std::move(h)), nodes_(nodes) {}
  Vec3 eval(double t, const Vec3& x) const override;
  FieldKind kind() const override { return FieldKind::ribbon_u; }
  const LineHistory& history() const { return *h_; }

 private:
  std::shared_ptr<const LineHistory> h_;
  int nodes_;
};

// Grid estimate of ||grad u||_{L^p} for the slit velocity on `region`.
SobolevEstimate active_sobolev_check(const SlitState& s, double p, const Rect& region, double h);

struct GaussRule {
  std::vector<double> x, w;
};
// Gauss-Legendre rule on [-1,1]; supports 4, 8, 16, 32 nodes.
const GaussRule& gauss_legendre(int nodes);

}  // namespace fracflow
