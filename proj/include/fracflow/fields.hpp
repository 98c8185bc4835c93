#pragma once
// Velocity fields: the fundamental field u, the series U, the collapse field
// W, the auxiliary field nu, and the combined fields V and V-tilde.

#include "fracflow/geometry.hpp"
#include "fracflow/profiles.hpp"

#include <json.hpp>

#include <memory>
#include <string>

namespace fracflow {

enum class FieldKind {
  zero,
  fundamental_u,
  series_U,
  collapse_W,
  aux_nu,
  combined_V,
  full_Vtilde,
  slit_u,
  ribbon_u,
  derived,
};
std::string kind_name(FieldKind k);

// Evaluation is const and thread-safe once constructed.
template <int D>
class Field {
 public:
  virtual ~Field() = default;
  virtual Vec<D> eval(double t, const Vec<D>& x) const = 0;
  Vec<D> operator()(double t, const Vec<D>& x) const { return eval(t, x); }
  virtual FieldKind kind() const = 0;
  // bound on the truncation error of the evaluated series
  virtual double tolerance() const { return 0; }
  virtual nlohmann::json params() const { return nlohmann::json::object(); }
  // smallest geometric feature at time t that a grid must resolve (0: none)
  virtual double finest_scale(double) const { return 0; }
};

using Field2 = Field<2>;
using Field3 = Field<3>;
using FieldHandle = std::shared_ptr<const Field2>;
using FieldHandle3 = std::shared_ptr<const Field3>;

template <int D>
class ZeroField final : public Field<D> {
 public:
  Vec<D> eval(double, const Vec<D>&) const override { return Vec<D>::Zero(); }
  FieldKind kind() const override { return FieldKind::zero; }
};

// u = grad-perp(chi * x2 * S_delta(x1)); time independent.
class FundamentalField final : public Field2 {
 public:
  explicit FundamentalField(double alpha);
  Vec2 u(const Vec2& x) const;
  Vec2 eval(double, const Vec2& x) const override { return u(x); }
  FieldKind kind() const override { return FieldKind::fundamental_u; }
  nlohmann::json params() const override;
  double finest_scale(double) const override { return p_.delta; }
  const IfsParams& ifs() const { return p_; }
  // cutoff chi and its gradient
  double chi(const Vec2& x, Vec2* grad = nullptr) const;
  // explicit upper bound on |u|
  double sup_bound() const;

 private:
  IfsParams p_;
  Falloff cx_, cy_;
};

// U(t,x) = eta(t) sum_k alpha^k sum_{|w|=k} R^k u((F_w^t)^{-1} x), evaluated
// by descending the word tree: at most one word per level is active.
class SeriesField final : public Field2 {
 public:
  explicit SeriesField(double alpha, int depth = 24);
  Vec2 eval(double t, const Vec2& x) const override;
  FieldKind kind() const override { return FieldKind::series_U; }
  double tolerance() const override;
  nlohmann::json params() const override;
  double finest_scale(double) const override { return u_.ifs().delta; }

  const IfsParams& ifs() const { return u_.ifs(); }
  const FundamentalField& fundamental() const { return u_; }
  int depth() const { return depth_; }
  double eta(double t) const { return u_.ifs().delta * TimeProfile::get().rate(t); }
  double eta_integral(double t) const {
    return u_.ifs().delta * TimeProfile::get().cumulative(t);
  }

 private:
  FundamentalField u_;
  int depth_;
};

// F~_w^t u(x) = R^k u((F_w^t)^{-1} x)
Vec2 eval_rescaled(const BinaryWord& w, double eta_integral, double alpha, const Vec2& x);

// t_k = (1 - xi^k)/(1 - xi), k = 0..count
std::vector<double> collapse_schedule(double gamma, double xi, int count);
double default_xi(double gamma);

// W(t,x) = (gamma/xi)^k U((t - t_k)/xi^k, x/gamma^k) on [t_k, t_{k+1}).
class CollapseField final : public Field2 {
 public:
  CollapseField(double alpha, double xi, int depth = 24);
  Vec2 eval(double t, const Vec2& x) const override;
  FieldKind kind() const override { return FieldKind::collapse_W; }
  double tolerance() const override { return U_.tolerance(); }
  nlohmann::json params() const override;
  double finest_scale(double t) const override;
  double xi() const { return xi_; }
  double terminal_time() const { return 1 / (1 - xi_); }
  // window index containing t (t_k <= t < t_{k+1})
  int window(double t) const;
  double window_start(int k) const { return (1 - std::pow(xi_, k)) / (1 - xi_); }
  const SeriesField& series() const { return U_; }

 private:
  SeriesField U_;
  double xi_;
};

// nu(t,x) = eta~(t) (3/8) sum_k grad-perp(x2 Phi chi_k)(int_0^t eta~, x).
// The tail of the chi_k sum is summed in closed form, so the value is exact.
class AuxField final : public Field2 {
 public:
  AuxField() = default;
  Vec2 eval(double t, const Vec2& x) const override;
  FieldKind kind() const override { return FieldKind::aux_nu; }
  double finest_scale(double) const override { return 0; }

  // chi_k(tau, x1) = (7/8)^k s((8/7)^k (x1 - g_k(tau)))
  static double chi_k(int k, double tau, double x1, double* d1 = nullptr);
  // sum_k chi_k and its x1 derivative
  static double chi_sum(double tau, double x1, double* d1 = nullptr);
  // cone cutoff: 1 on {x1 > 10|x2|, |x| <= 26}, 0 outside {x1 > 2|x2|, |x| < 30}
  static double phi(const Vec2& x, Vec2* grad = nullptr);
  // velocity at reparametrised time tau with unit rate
  static Vec2 unit_rate(double tau, const Vec2& x);
};

// alpha_n = 2 sqrt2 ((7/8)^{1/(n+1)} - 3/4), gamma_n = (7/8)^{1/(n+1)}
double block_alpha(int n);
double block_gamma(int n);
// G_n(x) = (7/8)^{n-1} ((1/sqrt2) R x + (24,0))
AffineSimilarity block_map(int n);

// V on [0,2]: block dynamics V_k on [0,1], then nu(t-1) on [1,2].
class CombinedField final : public Field2 {
 public:
  explicit CombinedField(int kmax = 40, int depth = 24);
  Vec2 eval(double t, const Vec2& x) const override;
  FieldKind kind() const override { return FieldKind::combined_V; }
  double tolerance() const override;
  nlohmann::json params() const override;
  int kmax() const { return int(blocks_.size()); }
  // index k >= 1 with x in G_k(R_{1/2}), or 0
  int locate_block(const Vec2& x) const;
  // V_k(t,y) in block-local coordinates
  Vec2 block_velocity(int k, double t, const Vec2& y) const;
  const SeriesField& block_series(int k) const { return blocks_.at(k - 1); }

 private:
  std::vector<SeriesField> blocks_;
  AuxField nu_;
};

// V~(t,x) = (63/64)^k V((9/8)^k (t - t_k), (8/7)^k x), t_k = 18(1 - (8/9)^k).
class FullField final : public Field2 {
 public:
  explicit FullField(int kmax = 40, int depth = 24);
  Vec2 eval(double t, const Vec2& x) const override;
  FieldKind kind() const override { return FieldKind::full_Vtilde; }
  double tolerance() const override { return V_.tolerance(); }
  nlohmann::json params() const override;
  static double stage_time(int k) { return 18 * (1 - std::pow(8.0 / 9.0, k)); }
  static int stage(double t);
  const CombinedField& combined() const { return V_; }

 private:
  CombinedField V_;
};

// G u(t, G_r^{-1} x) with G_r = linear part of G plus translation r.
class ConjugatedField final : public Field2 {
 public:
  ConjugatedField(FieldHandle base, const AffineSimilarity& G_r);
  Vec2 eval(double t, const Vec2& x) const override;
  FieldKind kind() const override { return FieldKind::derived; }

 private:
  FieldHandle base_;
  AffineSimilarity G_, Ginv_;
};

// -u(T - t)
template <int D>
class ReversedField final : public Field<D> {
 public:
  ReversedField(std::shared_ptr<const Field<D>> base, double T) : base_(std::move(base)), T_(T) {}
  Vec<D> eval(double t, const Vec<D>& x) const override { return -base_->eval(T_ - t, x); }
  FieldKind kind() const override { return base_->kind(); }
  double tolerance() const override { return base_->tolerance(); }
  nlohmann::json params() const override {
    auto j = base_->params();
    j["reversed_about"] = T_;
    return j;
  }
  const std::shared_ptr<const Field<D>>& base() const { return base_; }
  double horizon() const { return T_; }

 private:
  std::shared_ptr<const Field<D>> base_;
  double T_;
};

// Free-function forms of the evaluators.
Vec2 eval_u(double alpha, const Vec2& x);
Vec2 eval_U(double alpha, double t, const Vec2& x, int depth = 24);
Vec2 eval_W(double alpha, double xi, double t, const Vec2& x);
Vec2 eval_nu(double t, const Vec2& x);
Vec2 eval_V(double t, const Vec2& x, int kmax = 40);
Vec2 eval_Vtilde(double t, const Vec2& x, int kmax = 40);

// Builds a field from a JSON description {"kind": ..., parameters...}.
FieldHandle make_field(const nlohmann::json& spec);

}  // namespace fracflow
