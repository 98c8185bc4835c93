#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracflow/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fracflow;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() / ("fracflow_io_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string operator()(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  std::string l;
  std::getline(in, l);
  return l;
}

void put(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("fractal JSON round trip") {
  auto fa = attractor_approx(derive_constants(0.6), 4);
  auto back = fractal_from_json(to_json(fa));
  CHECK(back.alpha == fa.alpha);
  CHECK(back.depth == fa.depth);
  REQUIRE(back.segments.size() == fa.segments.size());
  for (std::size_t i = 0; i < fa.segments.size(); ++i) {
    CHECK(back.segments[i].word == fa.segments[i].word);
    CHECK(back.segments[i].a == fa.segments[i].a);
    CHECK(back.segments[i].b == fa.segments[i].b);
  }
  TempDir tmp;
  write_json(tmp("f.json"), to_json(fa));
  CHECK(read_json(tmp("f.json")) == to_json(fa));
  CHECK_THROWS_AS(read_json(tmp("missing.json")), DomainError);
}

TEST_CASE("points CSV") {
  TempDir tmp;
  std::vector<Vec2> pts{Vec2(0.1, -0.2), Vec2(1.0 / 3, 2.5e-17), Vec2(-7, 8)};
  write_points_csv(tmp("p.csv"), pts);
  CHECK(first_line(tmp("p.csv")) == "x,y");
  CHECK(read_points_csv(tmp("p.csv")) == pts);

  auto fa = attractor_approx(derive_constants(0.6), 2);
  write_fractal_csv(tmp("s.csv"), fa);
  CHECK(first_line(tmp("s.csv")) == "word,ax,ay,bx,by");
  auto seg = read_points_csv(tmp("s.csv"));
  REQUIRE(seg.size() == 2 * fa.segments.size());
  CHECK(seg[0] == fa.segments[0].a);
  CHECK(seg[1] == fa.segments[0].b);

  CHECK_THROWS_AS(read_points_csv(tmp("none.csv")), DomainError);
  put(tmp("bad.csv"), "u,v\n1,2\n");
  CHECK_THROWS_AS(read_points_csv(tmp("bad.csv")), DomainError);
  put(tmp("nan.csv"), "x,y\n1,abc\n");
  CHECK_THROWS_AS(read_points_csv(tmp("nan.csv")), DomainError);
}

TEST_CASE("binary grid") {
  TempDir tmp;
  GridSample g;
  g.origin = Vec2(-1.5, 0.25);
  g.h = 0.125;
  g.nx = 3;
  g.ny = 2;
  for (int n = 0; n < 6; ++n) g.values.emplace_back(n + 0.5, -n / 3.0);
  write_grid_binary(tmp("g.bin"), g);
  std::string raw = slurp(tmp("g.bin"));
  CHECK(raw.size() == 48 + 16 * 6);
  CHECK(raw.substr(0, 8) == "FAGRID01");
  std::int64_t nx;
  double h, v;
  std::memcpy(&nx, raw.data() + 8, 8);
  std::memcpy(&h, raw.data() + 24, 8);
  // node (i = 1, j = 0) is the second record
  std::memcpy(&v, raw.data() + 48 + 16, 8);
  CHECK(nx == 3);
  CHECK(h == 0.125);
  CHECK(v == 1.5);

  auto back = read_grid_binary(tmp("g.bin"));
  CHECK(back.nx == 3);
  CHECK(back.ny == 2);
  CHECK(back.h == g.h);
  CHECK(back.origin == g.origin);
  CHECK(back.values == g.values);

  put(tmp("junk.bin"), "NOTAGRID and more bytes than the header needs.........");
  CHECK_THROWS_AS(read_grid_binary(tmp("junk.bin")), DomainError);
  std::ofstream(tmp("short.bin"), std::ios::binary).write(raw.data(), 60);
  CHECK_THROWS_AS(read_grid_binary(tmp("short.bin")), DomainError);

  write_grid_csv(tmp("g.csv"), g);
  CHECK(first_line(tmp("g.csv")) == "x,y,vx,vy");
}

TEST_CASE("sha256") {
  TempDir tmp;
  put(tmp("abc"), "abc");
  CHECK(sha256_file(tmp("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  put(tmp("empty"), "");
  CHECK(sha256_file(tmp("empty")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK_THROWS_AS(sha256_file(tmp("nope")), DomainError);
}

TEST_CASE("trajectory, line and measure CSV headers") {
  TempDir tmp;
  write_trajectory_csv<2>(tmp("t2.csv"), {0, 1}, {{Vec2(0, 0)}, {Vec2(1, 1)}});
  CHECK(first_line(tmp("t2.csv")) == "t,id,x,y");
  write_trajectory_csv<3>(tmp("t3.csv"), {0}, {{Vec3(0, 0, 0)}});
  CHECK(first_line(tmp("t3.csv")) == "t,id,x,y,z");
  LineHistory h;
  h.states.push_back(initial_line_state(4, 0.1));
  write_line_history_csv(tmp("l.csv"), h);
  CHECK(first_line(tmp("l.csv")) == "t,alpha,Y");
  Measure2 m;
  m.points = {Vec2(0, 0)};
  m.weights = {1};
  write_measure_csv<2>(tmp("m2.csv"), {m});
  CHECK(first_line(tmp("m2.csv")) == "t,x,y,w");
  auto om = ribbon_measures(h, 4);
  write_measure_csv<3>(tmp("m3.csv"), om);
  CHECK(first_line(tmp("m3.csv")) == "t,x,y,z,wx,wy,wz");
}

TEST_CASE("report JSON keys") {
  auto sep = to_json(separation_check(derive_constants(0.6), 2));
  for (const char* k : {"pass", "depth", "left_edge", "pairs_checked", "violations"})
    CHECK(sep.contains(k));
  CHECK(sep["pass"] == true);
  auto bc = to_json(box_dimension<2>({Vec2(0, 0)}, default_box_scales()));
  for (const char* k : {"scales", "counts", "slope", "degenerate"}) CHECK(bc.contains(k));
  CHECK(bc["slope"] == 0.0);
}
