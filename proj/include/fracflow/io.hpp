#pragma once
// Serialization: JSON reports, CSV tables, the binary grid layout and file
// digests for run manifests.

#include "fracflow/measures.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fracflow {

using nlohmann::json;

json to_json(const FractalApprox& fa);
FractalApprox fractal_from_json(const json& j);
json to_json(const SeparationReport& r);
json to_json(const ContractionReport& r);
json to_json(const EnclosureReport& r);
json to_json(const FullDimReport& r);
json to_json(const WeakResidualReport& r);
json to_json(const BoxCountReport& r);
json to_json(const ResidualStudy& s);

void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

// word, ax, ay, bx, by
void write_fractal_csv(const std::string& path, const FractalApprox& fa);
// x, y
void write_points_csv(const std::string& path, const std::vector<Vec2>& pts);
// Reads 2D points from a CSV with a header naming x,y or ax,ay,bx,by
// (segment endpoints both become points). Throws DomainError when unreadable.
std::vector<Vec2> read_points_csv(const std::string& path);

// x, y, vx, vy
void write_grid_csv(const std::string& path, const GridSample& g);
// "FAGRID01", int64 nx, int64 ny, float64 h, origin x, origin y, then per node
// (row j outer, column i inner) float64 vx, vy. Native little-endian.
void write_grid_binary(const std::string& path, const GridSample& g);
GridSample read_grid_binary(const std::string& path);

// t, id, x, y[, z]
template <int D>
void write_trajectory_csv(const std::string& path, const std::vector<double>& times,
                          const std::vector<std::vector<Vec<D>>>& positions);
// t, alpha, Y
void write_line_history_csv(const std::string& path, const LineHistory& h);
// t, x, y[, z], w  or  t, x, y, z, wx, wy, wz
template <int D>
void write_measure_csv(const std::string& path, const std::vector<ParticleMeasure<D>>& mu);

// lowercase hex SHA-256 of the file contents
std::string sha256_file(const std::string& path);

}  // namespace fracflow
