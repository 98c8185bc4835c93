#pragma once
// Uniform grid sampling of fields, central-difference divergence and the
// W^{1,p} seminorm estimate.

#include "fracflow/fields.hpp"

#include <string>
#include <vector>

namespace fracflow {

// Nodes x_ij = origin + (i h, j h), i < nx, j < ny, values row-major in j.
struct GridSample {
  Vec2 origin = Vec2::Zero();
  double h = 0;
  int nx = 0, ny = 0;
  std::vector<Vec2> values;

  Vec2 node(int i, int j) const { return origin + h * Vec2(i, j); }
  const Vec2& at(int i, int j) const { return values[std::size_t(j) * nx + i]; }
};

GridSample sample_grid(const Field2& f, const Rect& region, double h, double t);

// max over interior nodes of |d1 v1 + d2 v2| by central differences
double grid_divergence(const Field2& f, const Rect& region, double h, double t);
double grid_divergence(const GridSample& g);

struct SobolevEstimate {
  double value = 0;
  bool underresolved = false;
  std::string warning;
};

// (sum over interior nodes of |grad v|_F^p h^2)^{1/p}
SobolevEstimate sobolev_norm(const GridSample& g, double p);
SobolevEstimate sobolev_norm(const Field2& f, double t, double p, const Rect& region, double h);

}  // namespace fracflow
