#include "fracflow/io.hpp"

#include <openssl/evp.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fracflow {

namespace {

json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw DomainError("cannot open " + path + " for writing");
  if (!binary) os << std::setprecision(17);
  return os;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.pop_back();
    while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front())))
      cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

}  // namespace

json to_json(const FractalApprox& fa) {
  json segs = json::array();
  for (const auto& s : fa.segments)
    segs.push_back({{"word", word_string(s.word)}, {"a", vec(s.a)}, {"b", vec(s.b)}});
  return {{"alpha", fa.alpha}, {"depth", fa.depth}, {"segments", segs}};
}

FractalApprox fractal_from_json(const json& j) {
  FractalApprox fa;
  fa.alpha = j.at("alpha").get<double>();
  fa.depth = j.at("depth").get<int>();
  for (const auto& s : j.at("segments")) {
    Segment seg;
    seg.word = parse_word(s.at("word").get<std::string>());
    seg.a = Vec2(s.at("a")[0].get<double>(), s.at("a")[1].get<double>());
    seg.b = Vec2(s.at("b")[0].get<double>(), s.at("b")[1].get<double>());
    fa.segments.push_back(seg);
  }
  return fa;
}

json to_json(const SeparationReport& r) {
  json v = json::array();
  for (const auto& x : r.violations)
    v.push_back({{"check", x.check},
                 {"w1", word_string(x.w1)},
                 {"w2", word_string(x.w2)},
                 {"eta_integral", x.eta_integral},
                 {"amount", x.amount}});
  return {{"depth", r.depth},
          {"left_edge", r.left_edge},
          {"pairs_checked", r.pairs_checked},
          {"violations", v},
          {"pass", r.ok()}};
}

json to_json(const ContractionReport& r) {
  return {{"word", word_string(r.word)},
          {"endpoint_error", r.endpoint_error},
          {"expected", {vec(r.expected_a), vec(r.expected_b)}},
          {"measured", {vec(r.measured_a), vec(r.measured_b)}},
          {"max_axis_drift", r.max_axis_drift}};
}

json to_json(const EnclosureReport& r) {
  json w = json::array();
  for (const auto& x : r.windows)
    w.push_back({{"k", x.k},
                 {"t_start", x.t_start},
                 {"t_end", x.t_end},
                 {"max_excess", x.max_excess},
                 {"diameter_ratio", x.diameter_ratio},
                 {"pointwise_error", x.pointwise_error}});
  return {{"alpha", r.alpha}, {"xi", r.xi},   {"slack", r.slack},
          {"samples", r.samples}, {"windows", w}, {"pass", r.ok}};
}

json to_json(const FullDimReport& r) {
  return {{"kmax", r.kmax},
          {"image_24", vec(r.image_24)},
          {"error_24", r.error_24},
          {"origin_drift", r.origin_drift},
          {"block_error_t1", r.block_error_t1},
          {"block_error_t2", r.block_error_t2},
          {"plateau_error", r.plateau_error},
          {"line_axis_drift", r.line_axis_drift},
          {"line_max_t2", r.line_max_t2},
          {"stage_error", r.stage_error},
          {"stage_times", {r.t1, r.t2}},
          {"pass", r.ok}};
}

json to_json(const WeakResidualReport& r) {
  json j = {{"terms", r.terms},
            {"signs", r.signs},
            {"residual", r.residual},
            {"particles", r.particles},
            {"time_samples", r.time_samples},
            {"dt", r.dt},
            {"quadrature_order", r.quadrature_order}};
  if (!r.warning.empty()) j["warning"] = r.warning;
  return j;
}

json to_json(const BoxCountReport& r) {
  std::vector<int> used(r.used.begin(), r.used.end());
  return {{"scales", r.scales},     {"counts", r.counts},
          {"used", used},           {"slope", r.slope},
          {"fit_residual", r.fit_residual}, {"degenerate", r.degenerate}};
}

json to_json(const ResidualStudy& s) {
  json lv = json::array();
  for (const auto& l : s.levels)
    lv.push_back({{"dt", l.dt},
                  {"particles", l.particles},
                  {"max_residual", l.max_residual},
                  {"residuals", l.residuals}});
  return {{"scenario", s.scenario},
          {"levels", lv},
          {"order", s.order},
          {"involution_error", s.involution_error}};
}

void write_json(const std::string& path, const json& j) {
  auto os = open_out(path);
  os << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DomainError("cannot open " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw DomainError(path + ": " + e.what());
  }
}

void write_fractal_csv(const std::string& path, const FractalApprox& fa) {
  auto os = open_out(path);
  os << "word,ax,ay,bx,by\n";
  for (const auto& s : fa.segments)
    os << word_string(s.word) << ',' << s.a.x() << ',' << s.a.y() << ',' << s.b.x() << ','
       << s.b.y() << '\n';
}

void write_points_csv(const std::string& path, const std::vector<Vec2>& pts) {
  auto os = open_out(path);
  os << "x,y\n";
  for (const auto& p : pts) os << p.x() << ',' << p.y() << '\n';
}

std::vector<Vec2> read_points_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DomainError("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw DomainError(path + " is empty");
  auto head = split(line);
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return int(i);
    return -1;
  };
  std::vector<std::pair<int, int>> cols;
  if (col("x") >= 0 && col("y") >= 0) cols.push_back({col("x"), col("y")});
  if (col("ax") >= 0 && col("ay") >= 0) cols.push_back({col("ax"), col("ay")});
  if (col("bx") >= 0 && col("by") >= 0) cols.push_back({col("bx"), col("by")});
  if (cols.empty()) throw DomainError(path + ": header needs x,y or ax,ay,bx,by columns");
  std::vector<Vec2> pts;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = split(line);
    for (auto [cx, cy] : cols) {
      if (std::size_t(std::max(cx, cy)) >= cells.size())
        throw DomainError(path + ": short row " + std::to_string(row));
      try {
        pts.emplace_back(std::stod(cells[cx]), std::stod(cells[cy]));
      } catch (const std::exception&) {
        throw DomainError(path + ": bad number in row " + std::to_string(row));
      }
    }
  }
  return pts;
}

void write_grid_csv(const std::string& path, const GridSample& g) {
  auto os = open_out(path);
  os << "x,y,vx,vy\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      Vec2 p = g.node(i, j);
      const Vec2& v = g.at(i, j);
      os << p.x() << ',' << p.y() << ',' << v.x() << ',' << v.y() << '\n';
    }
}

namespace {
constexpr char kMagic[8] = {'F', 'A', 'G', 'R', 'I', 'D', '0', '1'};
template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw DomainError("truncated grid file");
  return v;
}
}  // namespace

void write_grid_binary(const std::string& path, const GridSample& g) {
  auto os = open_out(path, true);
  os.write(kMagic, 8);
  put<std::int64_t>(os, g.nx);
  put<std::int64_t>(os, g.ny);
  put<double>(os, g.h);
  put<double>(os, g.origin.x());
  put<double>(os, g.origin.y());
  for (const auto& v : g.values) {
    put<double>(os, v.x());
    put<double>(os, v.y());
  }
}

GridSample read_grid_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot open " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw DomainError(path + " is not a FAGRID01 file");
  GridSample g;
  auto nx = get<std::int64_t>(is), ny = get<std::int64_t>(is);
  if (nx < 0 || ny < 0 || double(nx) * double(ny) > 5e7)
    throw DomainError(path + ": implausible grid size");
  g.nx = int(nx);
  g.ny = int(ny);
  g.h = get<double>(is);
  g.origin.x() = get<double>(is);
  g.origin.y() = get<double>(is);
  g.values.resize(std::size_t(nx * ny));
  for (auto& v : g.values) {
    v.x() = get<double>(is);
    v.y() = get<double>(is);
  }
  return g;
}

template <int D>
void write_trajectory_csv(const std::string& path, const std::vector<double>& times,
                          const std::vector<std::vector<Vec<D>>>& positions) {
  if (times.size() != positions.size()) throw DomainError("trajectory times/positions mismatch");
  auto os = open_out(path);
  os << (D == 2 ? "t,id,x,y\n" : "t,id,x,y,z\n");
  for (std::size_t k = 0; k < times.size(); ++k)
    for (std::size_t i = 0; i < positions[k].size(); ++i) {
      os << times[k] << ',' << i;
      for (int d = 0; d < D; ++d) os << ',' << positions[k][i][d];
      os << '\n';
    }
}
template void write_trajectory_csv<2>(const std::string&, const std::vector<double>&,
                                      const std::vector<std::vector<Vec2>>&);
template void write_trajectory_csv<3>(const std::string&, const std::vector<double>&,
                                      const std::vector<std::vector<Vec3>>&);

void write_line_history_csv(const std::string& path, const LineHistory& h) {
  auto os = open_out(path);
  os << "t,alpha,Y\n";
  for (const auto& s : h.states)
    for (std::size_t i = 0; i < s.Y.size(); ++i)
      os << s.t << ',' << s.alphas[i] << ',' << s.Y[i] << '\n';
}

template <int D>
void write_measure_csv(const std::string& path, const std::vector<ParticleMeasure<D>>& mu) {
  auto os = open_out(path);
  const bool vec = !mu.empty() && mu[0].is_vector();
  os << (D == 2 ? "t,x,y" : "t,x,y,z");
  if (vec)
    os << (D == 2 ? ",wx,wy\n" : ",wx,wy,wz\n");
  else
    os << ",w\n";
  for (const auto& m : mu)
    for (std::size_t i = 0; i < m.points.size(); ++i) {
      os << m.t;
      for (int d = 0; d < D; ++d) os << ',' << m.points[i][d];
      if (vec)
        for (int d = 0; d < D; ++d) os << ',' << m.vweights[i][d];
      else
        os << ',' << m.weights[i];
      os << '\n';
    }
}
template void write_measure_csv<2>(const std::string&, const std::vector<Measure2>&);
template void write_measure_csv<3>(const std::string&, const std::vector<Measure3>&);

std::string sha256_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (is.read(buf, sizeof buf) || is.gcount() > 0)
    EVP_DigestUpdate(ctx, buf, std::size_t(is.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

}  // namespace fracflow
