#include "fracflow/geometry.hpp"

#include <cmath>
#include <sstream>

namespace fracflow {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

IfsParams derive_constants_unchecked(double alpha) {
  IfsParams p;
  p.alpha = alpha;
  p.eps = 1 / (4 * alpha) - 1 / (2 * kSqrt2);
  p.delta = 0.25 - alpha / (2 * kSqrt2);
  p.gamma = 1 - p.delta;
  p.h = -std::log(2.0) / std::log(alpha);
  return p;
}

IfsParams derive_constants(double alpha) {
  if (!(alpha > 0.5 && alpha < 1 / kSqrt2)) {
    std::ostringstream os;
    os << "alpha = " << alpha << " outside the valid interval (1/2, 1/sqrt(2)) = (0.5, "
       << 1 / kSqrt2 << ")";
    throw DomainError(os.str());
  }
  return derive_constants_unchecked(alpha);
}

double alpha_for_dimension(double h) {
  if (!(h > 1 && h < 2)) {
    std::ostringstream os;
    os << "dimension h = " << h << " outside the valid interval (1, 2)";
    throw DomainError(os.str());
  }
  return std::pow(2.0, -1 / h);
}

std::string word_string(const BinaryWord& w) {
  std::string s;
  for (auto l : w) s.push_back(char('0' + l));
  return s;
}

BinaryWord parse_word(const std::string& s) {
  BinaryWord w;
  for (char c : s) {
    if (c != '1' && c != '2') throw DomainError("word letters must be 1 or 2, got '" + s + "'");
    w.push_back(std::uint8_t(c - '0'));
  }
  return w;
}

AffineSimilarity AffineSimilarity::compose(const AffineSimilarity& inner) const {
  AffineSimilarity r;
  r.translation = (*this)(inner.translation);
  r.scale = scale * inner.scale;
  r.rotation_power = (rotation_power + inner.rotation_power) % 4;
  return r;
}

AffineSimilarity AffineSimilarity::inverse() const {
  AffineSimilarity r;
  r.scale = 1 / scale;
  r.rotation_power = (4 - rotation_power % 4) % 4;
  r.translation = -r.linear(translation);
  return r;
}

AffineSimilarity letter_map(int letter, double eta_integral, double alpha) {
  AffineSimilarity f;
  double c = 1 - eta_integral;
  f.translation = Vec2(letter == 1 ? c : -c, 0);
  f.rotation_power = 1;
  f.scale = alpha;
  return f;
}

AffineSimilarity word_map(const BinaryWord& w, double eta_integral, double alpha) {
  AffineSimilarity f;
  for (auto l : w) f = f.compose(letter_map(l, eta_integral, alpha));
  return f;
}

Rect Rect::from_bounds(double x0, double x1, double y0, double y1) {
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  return {Vec2(0.5 * (x0 + x1), 0.5 * (y0 + y1)), Vec2(0.5 * (x1 - x0), 0.5 * (y1 - y0))};
}

bool Rect::contains(const Rect& r, double slack) const {
  return r.xmin() >= xmin() - slack && r.xmax() <= xmax() + slack &&
         r.ymin() >= ymin() - slack && r.ymax() <= ymax() + slack;
}

double Rect::overlap(const Rect& r) const {
  double ox = std::min(xmax(), r.xmax()) - std::max(xmin(), r.xmin());
  double oy = std::min(ymax(), r.ymax()) - std::max(ymin(), r.ymin());
  return std::min(ox, oy);
}

Rect image(const AffineSimilarity& f, const Rect& r) {
  Vec2 half = r.half * f.scale;
  if (f.rotation_power % 2) std::swap(half.x(), half.y());
  return {f(r.center), half};
}

Rect rect_R(double xi) { return {Vec2::Zero(), Vec2(2 + xi, kSqrt2 + xi)}; }

std::vector<Rect> border_rects(const IfsParams& p) {
  double e = p.eps, d = std::abs(p.delta);
  double X = 2 + e, Y = kSqrt2 + e;
  return {
      Rect::from_bounds(-d, d, -Y, Y),               // centre strip
      Rect::from_bounds(-X, -2, -Y, Y),              // left band
      Rect::from_bounds(2, X, -Y, Y),                // right band
      Rect::from_bounds(-X, X, kSqrt2, Y),           // top band
      Rect::from_bounds(-X, X, -Y, -kSqrt2),         // bottom band
  };
}

std::vector<BinaryWord> words_of_length(int k, std::size_t cap) {
  if (k < 0) throw DomainError("word length must be >= 0");
  if (k > 20 || (std::size_t(1) << k) > cap)
    throw ResourceError("2^" + std::to_string(k) + " words exceed the enumeration cap");
  std::vector<BinaryWord> out;
  out.reserve(std::size_t(1) << k);
  for (std::size_t code = 0; code < (std::size_t(1) << k); ++code) {
    BinaryWord w(k);
    for (int j = 0; j < k; ++j) w[j] = std::uint8_t(1 + ((code >> (k - 1 - j)) & 1));
    out.push_back(std::move(w));
  }
  return out;
}

FractalApprox attractor_approx(const IfsParams& p, int depth, std::size_t cap) {
  if (depth < 0) throw DomainError("depth must be >= 0");
  if (depth >= 20 || (std::size_t(1) << (depth + 1)) - 1 > cap)
    throw ResourceError("attractor depth " + std::to_string(depth) +
                        " exceeds the image cap of " + std::to_string(cap));
  FractalApprox fa;
  fa.alpha = p.alpha;
  fa.depth = depth;
  fa.segments.reserve((std::size_t(1) << (depth + 1)) - 1);
  // breadth-first: children of F_w are F_w o F_i
  std::vector<std::pair<BinaryWord, AffineSimilarity>> level{{BinaryWord{}, AffineSimilarity{}}};
  for (int k = 0; k <= depth; ++k) {
    std::vector<std::pair<BinaryWord, AffineSimilarity>> next;
    for (auto& [w, f] : level) {
      fa.segments.push_back({w, f(Vec2(-1, 0)), f(Vec2(1, 0))});
      if (k == depth) continue;
      for (int l = 1; l <= 2; ++l) {
        BinaryWord c = w;
        c.push_back(std::uint8_t(l));
        next.emplace_back(std::move(c), f.compose(letter_map(l, 0, p.alpha)));
      }
    }
    level = std::move(next);
  }
  return fa;
}

SeparationReport separation_check(const IfsParams& p, int depth, int time_samples) {
  if (depth < 1) throw DomainError("separation depth must be >= 1");
  SeparationReport rep;
  rep.depth = depth;
  const Rect R0 = rect_R(0), Re = rect_R(p.eps);
  const double d = p.delta;

  Rect f1r0 = image(letter_map(1, 0, p.alpha), R0);
  Rect f2r0 = image(letter_map(2, 0, p.alpha), R0);
  rep.left_edge = f1r0.xmin();
  if (f1r0.xmin() < 4 * d - kRectSlack)
    rep.violations.push_back({"F1(R0) in H+^{4delta}", {1}, {}, 0, 4 * d - f1r0.xmin()});
  if (f2r0.xmax() > -4 * d + kRectSlack)
    rep.violations.push_back({"F2(R0) in H-^{4delta}", {2}, {}, 0, f2r0.xmax() + 4 * d});

  auto borders = border_rects(p);
  std::vector<BinaryWord> words;
  for (int k = 0; k <= depth; ++k)
    for (auto& w : words_of_length(k)) words.push_back(w);

  int ns = std::max(time_samples, 1);
  for (int s = 0; s < ns; ++s) {
    double e = ns == 1 ? 0 : d * double(s) / double(ns - 1);
    // F_i^t(R_eps) strictly inside R_0 n H+-^delta
    for (int l = 1; l <= 2; ++l) {
      Rect img = image(letter_map(l, e, p.alpha), Re);
      Rect target = l == 1 ? Rect::from_bounds(d, 2, -std::sqrt(2.0), std::sqrt(2.0))
                           : Rect::from_bounds(-2, -d, -std::sqrt(2.0), std::sqrt(2.0));
      if (!target.contains(img, kRectSlack)) {
        double amt = std::max({target.xmin() - img.xmin(), img.xmax() - target.xmax(),
                               target.ymin() - img.ymin(), img.ymax() - target.ymax()});
        rep.violations.push_back({"F_i(R_eps) in R_0 n H^delta", {std::uint8_t(l)}, {}, e, amt});
      }
    }
    std::vector<std::vector<Rect>> imgs;
    std::vector<Rect> supports;
    for (auto& w : words) {
      auto f = word_map(w, e, p.alpha);
      std::vector<Rect> b;
      for (auto& r : borders) b.push_back(image(f, r));
      imgs.push_back(std::move(b));
      supports.push_back(image(f, Re));
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      for (std::size_t j = i + 1; j < words.size(); ++j) {
        ++rep.pairs_checked;
        double worst = -1;
        for (auto& a : imgs[i])
          for (auto& b : imgs[j]) worst = std::max(worst, a.overlap(b));
        if (worst > kRectSlack) rep.violations.push_back({"disjoint borders", words[i], words[j], e, worst});
        if (words[i].size() == words[j].size()) {
          double o = supports[i].overlap(supports[j]);
          if (o > kRectSlack)
            rep.violations.push_back({"disjoint same-level supports", words[i], words[j], e, o});
        }
      }
    }
  }
  return rep;
}

std::vector<BinaryWord> locate_chain(const Vec2& x, double eta_integral, const IfsParams& p,
                                     int max_depth) {
  std::vector<BinaryWord> chain;
  const Rect Re = rect_R(p.eps);
  if (!Re.contains(x)) return chain;
  chain.emplace_back();
  Vec2 y = x;  // (F_w^t)^{-1} x
  BinaryWord w;
  for (int k = 1; k <= max_depth; ++k) {
    int found = 0;
    Vec2 ynext;
    for (int l = 1; l <= 2; ++l) {
      Vec2 z = letter_map(l, eta_integral, p.alpha).inverse()(y);
      if (Re.contains(z)) {
        found = l;
        ynext = z;
        break;
      }
    }
    if (!found) break;
    w.push_back(std::uint8_t(found));
    chain.push_back(w);
    y = ynext;
  }
  return chain;
}

}  // namespace fracflow
