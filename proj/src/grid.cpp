#include "fracflow/grid.hpp"

#include <cmath>
#include <sstream>

namespace fracflow {

GridSample sample_grid(const Field2& f, const Rect& region, double h, double t) {
  if (!(h > 0)) throw DomainError("grid spacing must be positive");
  GridSample g;
  g.origin = Vec2(region.xmin(), region.ymin());
  g.h = h;
  g.nx = int(std::floor(2 * region.half.x() / h + 1e-9)) + 1;
  g.ny = int(std::floor(2 * region.half.y() / h + 1e-9)) + 1;
  if (double(g.nx) * g.ny > 5e7) throw ResourceError("grid exceeds 5e7 nodes");
  g.values.resize(std::size_t(g.nx) * g.ny);
  parallel_for(std::size_t(g.ny), [&](std::size_t j) {
    for (int i = 0; i < g.nx; ++i) g.values[j * g.nx + i] = f.eval(t, g.node(i, int(j)));
  });
  return g;
}

double grid_divergence(const GridSample& g) {
  double worst = 0;
  for (int j = 1; j + 1 < g.ny; ++j)
    for (int i = 1; i + 1 < g.nx; ++i) {
      double d = (g.at(i + 1, j).x() - g.at(i - 1, j).x() + g.at(i, j + 1).y() -
                  g.at(i, j - 1).y()) /
                 (2 * g.h);
      worst = std::max(worst, std::abs(d));
    }
  return worst;
}

double grid_divergence(const Field2& f, const Rect& region, double h, double t) {
  return grid_divergence(sample_grid(f, region, h, t));
}

SobolevEstimate sobolev_norm(const GridSample& g, double p) {
  if (!(p >= 1)) throw DomainError("Sobolev exponent p must be >= 1");
  double acc = 0;
  for (int j = 1; j + 1 < g.ny; ++j)
    for (int i = 1; i + 1 < g.nx; ++i) {
      Vec2 dx = (g.at(i + 1, j) - g.at(i - 1, j)) / (2 * g.h);
      Vec2 dy = (g.at(i, j + 1) - g.at(i, j - 1)) / (2 * g.h);
      double n2 = dx.squaredNorm() + dy.squaredNorm();
      if (n2 > 0) acc += std::pow(n2, 0.5 * p);
    }
  return {std::pow(acc * g.h * g.h, 1 / p), false, {}};
}

SobolevEstimate sobolev_norm(const Field2& f, double t, double p, const Rect& region, double h) {
  auto est = sobolev_norm(sample_grid(f, region, h, t), p);
  double fs = f.finest_scale(t);
  if (fs > 0 && h > fs / 4) {
    std::ostringstream os;
    os << "grid spacing " << h << " does not resolve the active scale " << fs
       << " (need h <= " << fs / 4 << ")";
    est.underresolved = true;
    est.warning = os.str();
  }
  return est;
}

}  // namespace fracflow
