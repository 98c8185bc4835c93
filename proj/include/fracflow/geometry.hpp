#pragma once
// Binary words, the rotation family F_1, F_2 and its attractor, rectangles
// and the finite-depth separation checks.

#include "fracflow/numerics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fracflow {

struct IfsParams {
  double alpha = 0, eps = 0, delta = 0, gamma = 0, h = 0;
};

// Throws DomainError unless alpha lies in (1/2, 1/sqrt 2).
IfsParams derive_constants(double alpha);
// Same formulas without the range check; used for synthetic failure cases.
IfsParams derive_constants_unchecked(double alpha);
double alpha_for_dimension(double h);

// Letters are 1 or 2; the empty word is the identity.
using BinaryWord = std::vector<std::uint8_t>;
std::string word_string(const BinaryWord& w);
BinaryWord parse_word(const std::string& s);

// R^p v with R the counter-clockwise quarter turn; exact for every p.
inline Vec2 rotate(const Vec2& v, int p) {
  switch (((p % 4) + 4) % 4) {
    case 0: return v;
    case 1: return {-v.y(), v.x()};
    case 2: return -v;
    default: return {v.y(), -v.x()};
  }
}

// x -> translation + scale * R^rotation_power x
struct AffineSimilarity {
  Vec2 translation = Vec2::Zero();
  int rotation_power = 0;
  double scale = 1;

  Vec2 operator()(const Vec2& x) const { return translation + scale * rotate(x, rotation_power); }
  Vec2 linear(const Vec2& v) const { return scale * rotate(v, rotation_power); }
  // (*this) o inner
  AffineSimilarity compose(const AffineSimilarity& inner) const;
  AffineSimilarity inverse() const;
};

// F_w^t = F_{w_1}^t o ... o F_{w_k}^t with the shift integral supplied.
AffineSimilarity word_map(const BinaryWord& w, double eta_integral, double alpha);
// F_i^t for a single letter
AffineSimilarity letter_map(int letter, double eta_integral, double alpha);

struct Rect {
  Vec2 center = Vec2::Zero();
  Vec2 half = Vec2::Ones();

  static Rect from_bounds(double x0, double x1, double y0, double y1);
  double xmin() const { return center.x() - half.x(); }
  double xmax() const { return center.x() + half.x(); }
  double ymin() const { return center.y() - half.y(); }
  double ymax() const { return center.y() + half.y(); }
  bool contains(const Vec2& p, double slack = 0) const {
    return std::abs(p.x() - center.x()) <= half.x() + slack &&
           std::abs(p.y() - center.y()) <= half.y() + slack;
  }
  bool contains(const Rect& r, double slack = 0) const;
  // Positive when the closed rectangles share a region thicker than zero in
  // both directions: min of the two interval overlaps.
  double overlap(const Rect& r) const;
  Rect scaled(double s) const { return {center * s, half * s}; }
};

// Image of an axis-aligned rectangle under a similarity (quarter turns keep
// it axis-aligned).
Rect image(const AffineSimilarity& f, const Rect& r);

// [-2-xi, 2+xi] x [-sqrt2-xi, sqrt2+xi]
Rect rect_R(double xi);

// closure(R_eps \ (R_0 n (H+^delta u H-^delta))) as five closed rectangles
std::vector<Rect> border_rects(const IfsParams& p);

struct Segment {
  BinaryWord word;
  Vec2 a, b;
};

struct FractalApprox {
  double alpha = 0;
  int depth = 0;
  std::vector<Segment> segments;
};

inline constexpr std::size_t kWordCap = std::size_t(1) << 20;

FractalApprox attractor_approx(const IfsParams& p, int depth, std::size_t cap = kWordCap);

// All words of length exactly k (k <= 20), lexicographic.
std::vector<BinaryWord> words_of_length(int k, std::size_t cap = kWordCap);

struct SeparationViolation {
  std::string check;
  BinaryWord w1, w2;
  double eta_integral = 0;
  double amount = 0;
};

struct SeparationReport {
  int depth = 0;
  double left_edge = 0;  // of F_1(R_0), equal to 4 delta
  std::size_t pairs_checked = 0;
  std::vector<SeparationViolation> violations;
  bool ok() const { return violations.empty(); }
};

inline constexpr double kRectSlack = 1e-12;

SeparationReport separation_check(const IfsParams& p, int depth, int time_samples = 5);

// Per level k, the unique word of length k with x in F_w^t(R_eps); stops at
// the first level without one.
std::vector<BinaryWord> locate_chain(const Vec2& x, double eta_integral, const IfsParams& p,
                                     int max_depth);

}  // namespace fracflow
