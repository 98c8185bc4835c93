#include "fracflow/profiles.hpp"

#include <cmath>
#include <numbers>

namespace fracflow {

namespace {
constexpr std::size_t kTimeIntervals = 4096;
constexpr std::size_t kMollifierIntervals = 2048;
}  // namespace

TimeProfile::TimeProfile()
    : z_(integrate(time_bump, 0, 1)),
      cum_([this] {
        std::vector<double> y(kTimeIntervals + 1), dy(kTimeIntervals + 1);
        double h = 1.0 / kTimeIntervals, acc = 0;
        for (std::size_t i = 0; i <= kTimeIntervals; ++i) {
          double t = double(i) * h;
          if (i > 0) acc += integrate(time_bump, t - h, t, 1e-15) / z_;
          y[i] = acc;
          dy[i] = time_bump(t) / z_;
        }
        // pin the endpoint; the accumulated sum is within 1e-15 of it
        y.back() = 1;
        return HermiteTable(std::move(y), std::move(dy), 0.0, h);
      }()) {}

const TimeProfile& TimeProfile::get() {
  static const TimeProfile inst;
  return inst;
}

double TimeProfile::cumulative(double t) const {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return cum_(t);
}

Mollifier2D::Mollifier2D()
    : c_(1 / (2 * std::numbers::pi *
              integrate([](double r) { return r > 0 && r < 1 ? r * std::exp(-1 / (1 - r * r)) : 0; },
                        0, 1))),
      m_(tabulate([this](double s) { return marginal_direct(s); },
                  [this](double s) { return marginal_prime_direct(s); }, 0, 1,
                  kMollifierIntervals)),
      S_([this] {
        std::vector<double> y(kMollifierIntervals + 1), dy(kMollifierIntervals + 1);
        double h = 1.0 / kMollifierIntervals, acc = 0;
        for (std::size_t i = 0; i <= kMollifierIntervals; ++i) {
          double s = double(i) * h;
          if (i > 0)
            acc += 2 * integrate([this](double v) { return marginal_direct(v); }, s - h, s, 1e-15);
          y[i] = acc;
          dy[i] = 2 * marginal_direct(s);
        }
        return HermiteTable(std::move(y), std::move(dy), 0.0, h);
      }()) {}

const Mollifier2D& Mollifier2D::get() {
  static const Mollifier2D inst;
  return inst;
}

double Mollifier2D::density(double r) const {
  if (r >= 1) return 0;
  return c_ * std::exp(-1 / (1 - r * r));
}

// m(s) = c a int_{-1}^{1} exp(-1/(a^2 (1-v^2))) dv with a = sqrt(1-s^2)
double Mollifier2D::marginal_direct(double s) const {
  double a2 = 1 - s * s;
  if (a2 <= 0) return 0;
  double a = std::sqrt(a2);
  auto f = [a2](double v) {
    double q = a2 * (1 - v * v);
    return q > 0 ? std::exp(-1 / q) : 0.0;
  };
  return c_ * a * integrate(f, -1, 1, 1e-15);
}

double Mollifier2D::marginal_prime_direct(double s) const {
  double a2 = 1 - s * s;
  if (a2 <= 0) return 0;
  double a = std::sqrt(a2);
  auto f = [a2](double v) {
    double q = a2 * (1 - v * v);
    return q > 0 ? std::exp(-1 / q) / (q * q) : 0.0;
  };
  return -2 * s * c_ * a * integrate(f, -1, 1, 1e-15);
}

double Mollifier2D::marginal(double s) const {
  double a = std::abs(s);
  return a >= 1 ? 0 : m_(a);
}

double Mollifier2D::sign_profile(double s) const {
  if (s >= 1) return 1;
  if (s <= -1) return -1;
  return s >= 0 ? S_(s) : -S_(-s);
}

Bump1D::Bump1D()
    : z_(integrate([](double z) { return std::abs(z) < 1 ? std::exp(-1 / (1 - z * z)) : 0.0; }, -1,
                   1)) {}

const Bump1D& Bump1D::get() {
  static const Bump1D inst;
  return inst;
}

double Bump1D::operator()(double z) const {
  if (std::abs(z) >= 1) return 0;
  return std::exp(-1 / (1 - z * z)) / z_;
}

double Bump1D::prime(double z) const {
  if (std::abs(z) >= 1) return 0;
  double q = 1 - z * z;
  return std::exp(-1 / q) * (-2 * z / (q * q)) / z_;
}

}  // namespace fracflow
