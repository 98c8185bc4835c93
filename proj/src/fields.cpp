#include "fracflow/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracflow {

namespace {
const double kSqrt2 = std::sqrt(2.0);
constexpr double kSeven8 = 7.0 / 8.0;
}  // namespace

std::string kind_name(FieldKind k) {
  switch (k) {
    case FieldKind::zero: return "zero";
    case FieldKind::fundamental_u: return "fundamental_u";
    case FieldKind::series_U: return "series_U";
    case FieldKind::collapse_W: return "collapse_W";
    case FieldKind::aux_nu: return "aux_nu";
    case FieldKind::combined_V: return "combined_V";
    case FieldKind::full_Vtilde: return "full_Vtilde";
    case FieldKind::slit_u: return "slit_u";
    case FieldKind::ribbon_u: return "ribbon_u";
    case FieldKind::derived: return "derived";
  }
  return "unknown";
}

// ---------------------------------------------------------------- u

FundamentalField::FundamentalField(double alpha)
    : p_(derive_constants(alpha)),
      cx_{2, 2 + p_.eps},
      cy_{kSqrt2, kSqrt2 + p_.eps} {}

double FundamentalField::chi(const Vec2& x, Vec2* grad) const {
  double ax = std::abs(x.x()), ay = std::abs(x.y());
  double fx = cx_(ax), fy = cy_(ay);
  if (grad) {
    double sx = x.x() < 0 ? -1 : 1, sy = x.y() < 0 ? -1 : 1;
    *grad = Vec2(sx * cx_.prime(ax) * fy, sy * fx * cy_.prime(ay));
  }
  return fx * fy;
}

Vec2 FundamentalField::u(const Vec2& x) const {
  if (std::abs(x.x()) >= 2 + p_.eps || std::abs(x.y()) >= kSqrt2 + p_.eps) return Vec2::Zero();
  Vec2 g;
  double c = chi(x, &g);
  double S = smoothed_sign(x.x(), p_.delta);
  double Sp = smoothed_sign_prime(x.x(), p_.delta);
  double x2 = x.y();
  return Vec2(-(g.y() * x2 * S + c * S), g.x() * x2 * S + c * x2 * Sp);
}

double FundamentalField::sup_bound() const {
  // |chi'| <= 15/8 / eps for the quintic ramp, |S| <= 1, |S'| <= 2 m(0)/delta
  double dchi = 1.875 / p_.eps;
  double y = kSqrt2 + p_.eps;
  double m0 = Mollifier2D::get().marginal(0);
  return std::hypot(y * dchi + 1, y * dchi + y * 2 * m0 / p_.delta);
}

nlohmann::json FundamentalField::params() const {
  return {{"kind", kind_name(kind())}, {"alpha", p_.alpha}};
}

Vec2 eval_rescaled(const BinaryWord& w, double eta_integral, double alpha, const Vec2& x) {
  FundamentalField u(alpha);
  auto f = word_map(w, eta_integral, alpha);
  return rotate(u.u(f.inverse()(x)), int(w.size()));
}

// ---------------------------------------------------------------- U

SeriesField::SeriesField(double alpha, int depth) : u_(alpha), depth_(depth) {
  if (depth < 0) throw DomainError("series depth must be >= 0");
}

Vec2 SeriesField::eval(double t, const Vec2& x) const {
  if (t <= 0 || t >= 1) return Vec2::Zero();
  const IfsParams& p = u_.ifs();
  const double Xe = 2 + p.eps, Ye = kSqrt2 + p.eps;
  if (std::abs(x.x()) > Xe || std::abs(x.y()) > Ye) return Vec2::Zero();
  const double c = 1 - eta_integral(t);
  const double inv_a = 1 / p.alpha;
  Vec2 y = x, sum = Vec2::Zero();
  double scale = 1;
  for (int k = 0;; ++k) {
    sum += scale * rotate(u_.u(y), k);
    if (k == depth_) break;
    // children F_1(R_eps), F_2(R_eps) lie in H+^delta and H-^delta
    Vec2 d(y.x() > 0 ? y.x() - c : y.x() + c, y.y());
    Vec2 z(d.y() * inv_a, -d.x() * inv_a);  // alpha^{-1} R^{-1} d
    if (std::abs(z.x()) > Xe || std::abs(z.y()) > Ye) break;
    y = z;
    scale *= p.alpha;
  }
  return eta(t) * sum;
}

double SeriesField::tolerance() const {
  const IfsParams& p = u_.ifs();
  double eta_max = p.delta * TimeProfile::get().sup();
  return eta_max * u_.sup_bound() * std::pow(p.alpha, depth_ + 1) / (1 - p.alpha);
}

nlohmann::json SeriesField::params() const {
  return {{"kind", kind_name(kind())}, {"alpha", ifs().alpha}, {"depth", depth_},
          {"tolerance", tolerance()}};
}

// ---------------------------------------------------------------- W

std::vector<double> collapse_schedule(double gamma, double xi, int count) {
  if (!(xi > std::sqrt(gamma) && xi < 1))
    throw DomainError("xi = " + std::to_string(xi) + " outside (sqrt(gamma), 1) = (" +
                      std::to_string(std::sqrt(gamma)) + ", 1)");
  std::vector<double> t(count + 1);
  double acc = 0, pw = 1;
  for (int k = 0; k <= count; ++k) {
    t[k] = acc;
    acc += pw;
    pw *= xi;
  }
  return t;
}

double default_xi(double gamma) { return 0.5 * (1 + std::sqrt(gamma)); }

CollapseField::CollapseField(double alpha, double xi, int depth) : U_(alpha, depth), xi_(xi) {
  double g = U_.ifs().gamma;
  if (!(xi > std::sqrt(g) && xi < 1))
    throw DomainError("xi = " + std::to_string(xi) + " outside (sqrt(gamma), 1) = (" +
                      std::to_string(std::sqrt(g)) + ", 1)");
}

int CollapseField::window(double t) const {
  if (t < 0) return -1;
  double arg = 1 - t * (1 - xi_);
  if (arg <= 0) return std::numeric_limits<int>::max();
  int k = int(std::floor(std::log(arg) / std::log(xi_)));
  k = std::max(k, 0);
  while (k > 0 && window_start(k) > t) --k;
  while (window_start(k + 1) <= t) ++k;
  return k;
}

Vec2 CollapseField::eval(double t, const Vec2& x) const {
  if (t <= 0 || t >= terminal_time()) return Vec2::Zero();
  int k = window(t);
  double xk = std::pow(xi_, k), gk = std::pow(U_.ifs().gamma, k);
  double s = (t - window_start(k)) / xk;
  return (gk / xk) * U_.eval(s, x / gk);
}

double CollapseField::finest_scale(double t) const {
  int k = std::clamp(window(t), 0, 10000);
  return std::pow(U_.ifs().gamma, k) * U_.ifs().delta;
}

nlohmann::json CollapseField::params() const {
  return {{"kind", kind_name(kind())}, {"alpha", U_.ifs().alpha}, {"xi", xi_},
          {"depth", U_.depth()}, {"tolerance", tolerance()}};
}

// ---------------------------------------------------------------- nu

double AuxField::chi_k(int k, double tau, double x1, double* d1) {
  double a = std::pow(kSeven8, k);
  double g = a * kSeven8 * (25 - 3 * tau);
  double z = (x1 - g) / (a * 0.75);
  if (d1) *d1 = smoothstep_prime(z) / 0.75;
  return a * smoothstep(z);
}

double AuxField::chi_sum(double tau, double x1, double* d1) {
  if (d1) *d1 = 0;
  if (x1 <= 0) return 0;
  // chi_k is on its plateau (7/8)^k once x1 >= (7/8)^k A
  double A = kSeven8 * (25 - 3 * tau) + 0.75;
  int K0 = x1 >= A ? 0 : int(std::ceil(std::log(x1 / A) / std::log(kSeven8)));
  double sum = 0, dsum = 0;
  for (int k = std::max(0, K0 - 3); k <= K0 + 2; ++k) {
    double d = 0;
    sum += chi_k(k, tau, x1, &d);
    dsum += d;
  }
  sum += 8 * std::pow(kSeven8, K0 + 3);
  if (d1) *d1 = dsum;
  return sum;
}

double AuxField::phi(const Vec2& x, Vec2* grad) {
  if (grad) grad->setZero();
  if (x.x() <= 0) return 0;
  static const Falloff ang{0.1, 0.5}, rad{26, 30};
  double ay = std::abs(x.y());
  double tau = ay / x.x();
  double r = x.norm();
  double A = ang(tau), Rr = rad(r);
  if (grad && (A != 0 && Rr != 0)) {
    double sy = x.y() < 0 ? -1 : 1;
    Vec2 dtau(-ay / (x.x() * x.x()), sy / x.x());
    *grad = ang.prime(tau) * Rr * dtau + A * rad.prime(r) * x / r;
  }
  return A * Rr;
}

Vec2 AuxField::unit_rate(double tau, const Vec2& x) {
  if (x.x() <= 0) return Vec2::Zero();
  Vec2 gphi;
  double ph = phi(x, &gphi);
  if (ph == 0 && gphi.isZero()) return Vec2::Zero();
  double X1 = 0;
  double X = chi_sum(tau, x.x(), &X1);
  double x2 = x.y();
  double d2 = ph * X + x2 * gphi.y() * X;
  double d1 = x2 * (gphi.x() * X + ph * X1);
  return 0.375 * Vec2(-d2, d1);
}

Vec2 AuxField::eval(double t, const Vec2& x) const {
  double rate = TimeProfile::get().rate(t);
  if (rate == 0) return Vec2::Zero();
  return rate * unit_rate(TimeProfile::get().cumulative(t), x);
}

// ---------------------------------------------------------------- V

double block_gamma(int n) { return std::pow(kSeven8, 1.0 / (n + 1)); }
double block_alpha(int n) { return 2 * kSqrt2 * (block_gamma(n) - 0.75); }

AffineSimilarity block_map(int n) {
  double a = std::pow(kSeven8, n - 1);
  AffineSimilarity g;
  g.translation = Vec2(24 * a, 0);
  g.rotation_power = 1;
  g.scale = a / kSqrt2;
  return g;
}

CombinedField::CombinedField(int kmax, int depth) {
  if (kmax < 1) throw DomainError("kmax must be >= 1");
  blocks_.reserve(kmax);
  for (int k = 1; k <= kmax; ++k) blocks_.emplace_back(block_alpha(k), depth);
}

int CombinedField::locate_block(const Vec2& x) const {
  if (x.x() <= 0) return 0;
  static const Rect half = rect_R(0.5);
  int kc = 1 + int(std::lround(std::log(x.x() / 24) / std::log(kSeven8)));
  for (int k = std::max(1, kc - 1); k <= std::min(kmax(), kc + 1); ++k) {
    double inv = std::pow(8.0 / 7.0, k - 1);
    Vec2 d = inv * x - Vec2(24, 0);
    Vec2 y(kSqrt2 * d.y(), -kSqrt2 * d.x());
    if (half.contains(y)) return k;
  }
  return 0;
}

Vec2 CombinedField::block_velocity(int k, double t, const Vec2& y) const {
  int n = std::min(int(std::floor((k + 1) * t)), k);
  double g = block_gamma(k), gn = std::pow(g, n);
  double s = (k + 1) * t - n;
  return (k + 1) * gn * blocks_[k - 1].eval(s, y / gn);
}

Vec2 CombinedField::eval(double t, const Vec2& x) const {
  if (t <= 0 || t >= 2) return Vec2::Zero();
  if (t >= 1) return nu_.eval(t - 1, x);
  int k = locate_block(x);
  if (!k) return Vec2::Zero();
  double inv = std::pow(8.0 / 7.0, k - 1);
  Vec2 d = inv * x - Vec2(24, 0);
  Vec2 y(kSqrt2 * d.y(), -kSqrt2 * d.x());
  // pushforward by G_k: its linear part (7/8)^{k-1} (1/sqrt2) R
  return (1 / (inv * kSqrt2)) * rotate(block_velocity(k, t, y), 1);
}

double CombinedField::tolerance() const {
  double tol = 0;
  for (int k = 1; k <= kmax(); ++k)
    tol = std::max(tol, (k + 1) * blocks_[k - 1].tolerance() * std::pow(kSeven8, k - 1) / kSqrt2);
  return tol;
}

nlohmann::json CombinedField::params() const {
  return {{"kind", kind_name(kind())}, {"kmax", kmax()}, {"depth", blocks_.front().depth()},
          {"tolerance", tolerance()}};
}

int FullField::stage(double t) {
  if (t < 0) return -1;
  if (t >= 18) return std::numeric_limits<int>::max();
  int k = std::max(0, int(std::floor(std::log(1 - t / 18) / std::log(8.0 / 9.0))));
  while (k > 0 && stage_time(k) > t) --k;
  while (stage_time(k + 1) <= t) ++k;
  return k;
}

FullField::FullField(int kmax, int depth) : V_(kmax, depth) {}

Vec2 FullField::eval(double t, const Vec2& x) const {
  if (t <= 0 || t >= 18) return Vec2::Zero();
  int k = stage(t);
  double s = std::pow(9.0 / 8.0, k) * (t - stage_time(k));
  return std::pow(63.0 / 64.0, k) * V_.eval(s, std::pow(8.0 / 7.0, k) * x);
}

nlohmann::json FullField::params() const {
  auto j = V_.params();
  j["kind"] = kind_name(kind());
  return j;
}

ConjugatedField::ConjugatedField(FieldHandle base, const AffineSimilarity& G_r)
    : base_(std::move(base)), G_(G_r), Ginv_(G_r.inverse()) {}

Vec2 ConjugatedField::eval(double t, const Vec2& x) const {
  return G_.linear(base_->eval(t, Ginv_(x)));
}

// ---------------------------------------------------------------- free forms

Vec2 eval_u(double alpha, const Vec2& x) { return FundamentalField(alpha).u(x); }
Vec2 eval_U(double alpha, double t, const Vec2& x, int depth) {
  return SeriesField(alpha, depth).eval(t, x);
}
Vec2 eval_W(double alpha, double xi, double t, const Vec2& x) {
  return CollapseField(alpha, xi).eval(t, x);
}
Vec2 eval_nu(double t, const Vec2& x) { return AuxField().eval(t, x); }
Vec2 eval_V(double t, const Vec2& x, int kmax) { return CombinedField(kmax).eval(t, x); }
Vec2 eval_Vtilde(double t, const Vec2& x, int kmax) { return FullField(kmax).eval(t, x); }

FieldHandle make_field(const nlohmann::json& spec) {
  std::string kind = spec.value("kind", std::string("U"));
  double alpha = spec.value("alpha", 0.6);
  int depth = spec.value("depth", 24);
  int kmax = spec.value("kmax", 40);
  if (kind == "zero") return std::make_shared<ZeroField<2>>();
  if (kind == "u" || kind == "fundamental_u") return std::make_shared<FundamentalField>(alpha);
  if (kind == "U" || kind == "series_U") return std::make_shared<SeriesField>(alpha, depth);
  if (kind == "W" || kind == "collapse_W") {
    double xi = spec.value("xi", default_xi(derive_constants(alpha).gamma));
    return std::make_shared<CollapseField>(alpha, xi, depth);
  }
  if (kind == "nu" || kind == "aux_nu") return std::make_shared<AuxField>();
  if (kind == "V" || kind == "combined_V") return std::make_shared<CombinedField>(kmax, depth);
  if (kind == "Vtilde" || kind == "full_Vtilde") return std::make_shared<FullField>(kmax, depth);
  throw DomainError("unknown field kind '" + kind + "'");
}

}  // namespace fracflow
