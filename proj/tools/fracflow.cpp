// fracflow: command-line driver for the constructions, simulations and checks.
// Exit codes: 0 pass, 2 config or input error, 3 verification failure,
// 4 resource cap.

#include "fracflow/io.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

using namespace fracflow;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kPass = 0, kConfig = 2, kVerify = 3, kResource = 4 };

// JSON configuration: top-level keys are global options, nested objects are
// subcommand sections, e.g. {"out": "run", "flow": {"collapse": {"k": 3}}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CLI::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    walk(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }
  static void walk(const json& j, const std::vector<std::string>& parents,
                   std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, v] : j.items()) {
      if (v.is_object()) {
        auto p = parents;
        p.push_back(key);
        // an item per section lets CLI11 select the subcommand
        CLI::ConfigItem sec;
        sec.parents = parents;
        sec.name = "++";
        items.push_back(sec);
        walk(v, p, items);
        CLI::ConfigItem end;
        end.parents = p;
        end.name = "--";
        items.push_back(end);
        continue;
      }
      CLI::ConfigItem it;
      it.parents = parents;
      it.name = key;
      if (v.is_array()) {
        for (const auto& e : v) it.inputs.push_back(scalar(e));
      } else {
        it.inputs.push_back(scalar(v));
      }
      items.push_back(std::move(it));
    }
  }
};

json typed(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.empty()) return s;
  try {
    std::size_t pos = 0;
    long long i = std::stoll(s, &pos);
    if (pos == s.size()) return i;
    double d = std::stod(s, &pos);
    if (pos == s.size()) return d;
  } catch (const std::exception&) {
  }
  return s;
}

// effective values of the options of one app (given or defaulted)
json echo_options(const CLI::App* app) {
  json j = json::object();
  for (const CLI::Option* o : app->get_options()) {
    const std::string name = o->get_single_name();
    if (name.empty() || name == "help" || name == "config" || name == "version") continue;
    if (o->count() > 0) {
      auto r = o->results();
      if (o->get_expected_max() > 1) {
        json a = json::array();
        for (const auto& s : r) a.push_back(typed(s));
        j[name] = a;
      } else if (o->get_type_size() == 0) {
        j[name] = true;  // flag
      } else {
        j[name] = typed(r.back());
      }
    } else if (o->get_type_size() == 0) {
      j[name] = false;
    } else {
      j[name] = typed(o->get_default_str());
    }
  }
  return j;
}

struct Run {
  fs::path out;
  json config, resolved = json::object(), checks = json::array();
  std::vector<std::string> outputs;

  std::string file(const std::string& name) {
    outputs.push_back(name);
    return (out / name).string();
  }
  void check(const std::string& name, bool pass, double value, double limit) {
    checks.push_back({{"name", name}, {"pass", pass}, {"value", value}, {"limit", limit}});
    std::printf("%s %s: %.6g (limit %.6g)\n", pass ? "PASS" : "FAIL", name.c_str(), value, limit);
  }
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c["pass"].get<bool>()) return false;
    return true;
  }
};

// ---- commands ----

struct AttractorOpts {
  double alpha = 0.6, h = 0;
  int depth = 6, sep_depth = 4;
  std::size_t samples = 0;
  int sample_depth = 10;
  std::uint64_t seed = 7;
};

void cmd_attractor(const AttractorOpts& o, Run& run) {
  const double alpha = o.h > 0 ? alpha_for_dimension(o.h) : o.alpha;
  auto p = derive_constants(alpha);
  run.resolved = {{"alpha", alpha}, {"eps", p.eps}, {"delta", p.delta}, {"gamma", p.gamma},
                  {"dimension", p.h}};
  auto fa = attractor_approx(p, o.depth);
  write_json(run.file("attractor.json"), to_json(fa));
  write_fractal_csv(run.file("attractor.csv"), fa);
  auto sep = separation_check(p, std::min(o.sep_depth, o.depth));
  write_json(run.file("separation.json"), to_json(sep));
  std::printf("alpha %.17g  segments %zu\n", alpha, fa.segments.size());
  run.check("separation", sep.ok(), double(sep.violations.size()), 0);
  if (o.samples > 0)
    write_points_csv(run.file("samples.csv"),
                     sample_attractor_tilde(alpha, o.samples, o.sample_depth, o.seed));
}

struct FlowOpts {
  double alpha = 0.6, dt = 1e-4, tol = 1e-5, xi = 0, slack = 1e-5;
  int depth = 3, k = 3, sample_depth = 8, kmax = 5, block_depth = 3, traj_samples = 11;
  bool no_stages = false;
};

IntegratorConfig integrator(double dt) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  return cfg;
}

void cmd_contraction(const FlowOpts& o, Run& run) {
  auto cfg = integrator(o.dt);
  auto reps = verify_contraction(o.alpha, o.depth, cfg);
  json arr = json::array();
  double worst = 0;
  for (const auto& r : reps) {
    arr.push_back(to_json(r));
    worst = std::max(worst, r.endpoint_error);
  }
  write_json(run.file("contraction.json"), arr);
  // endpoint trajectories of every F_w(I) under U on [0,1]
  auto fa = attractor_approx(derive_constants(o.alpha), o.depth);
  std::vector<Vec2> start;
  for (const auto& s : fa.segments) {
    start.push_back(s.a);
    start.push_back(s.b);
  }
  std::vector<double> times;
  for (int i = 0; i < o.traj_samples; ++i) times.push_back(double(i) / (o.traj_samples - 1));
  SeriesField U(o.alpha);
  write_trajectory_csv<2>(run.file("trajectory.csv"), times,
                          integrate_history<2>(U, start, times, cfg));
  run.check("contraction endpoint error", worst < o.tol, worst, o.tol);
}

void cmd_collapse(const FlowOpts& o, Run& run) {
  const double g = derive_constants(o.alpha).gamma;
  const double xi = o.xi > 0 ? o.xi : default_xi(g);
  run.resolved = {{"xi", xi}, {"gamma", g}};
  auto r = enclosure_check(o.alpha, xi, o.k, integrator(o.dt), o.slack, o.sample_depth);
  write_json(run.file("enclosure.json"), to_json(r));
  double excess = -1e300;
  for (const auto& w : r.windows) excess = std::max(excess, w.max_excess);
  run.check("enclosure", r.ok, excess, o.slack);
}

void cmd_full_dim(const FlowOpts& o, Run& run) {
  auto r = full_dim_scale_check(o.kmax, integrator(o.dt), o.block_depth, !o.no_stages);
  write_json(run.file("fulldim.json"), to_json(r));
  std::printf("X(2,(24,0)) = (%.10f, %.3g)\n", r.image_24.x(), r.image_24.y());
  run.check("(24,0) -> (21,0)", r.error_24 < 1e-4, r.error_24, 1e-4);
  run.check("all full-dimension checks", r.ok, r.ok ? 1 : 0, 1);
}

struct LineOpts {
  int N = 400, save_every = 10, grid_nodes = 0;
  double eps = 0, dt = 1e-3, T = 2.1, grid_h = 0;
};

// the ribbon velocity on the plane x2 = 0 as a planar field (u1, u3)
class RibbonSection final : public Field2 {
 public:
  explicit RibbonSection(std::shared_ptr<const LineHistory> h) : u_(std::move(h)) {}
  Vec2 eval(double t, const Vec2& x) const override {
    Vec3 v = u_.eval(t, Vec3(x.x(), 0, x.y()));
    return {v.x(), v.z()};
  }
  FieldKind kind() const override { return FieldKind::ribbon_u; }

 private:
  RibbonVelocityField u_;
};

void cmd_line(const LineOpts& o, bool ribbon, Run& run) {
  if (o.N < 2 || o.N % 2) throw DomainError("N must be even and >= 2 (got " + std::to_string(o.N) + ")");
  const double eps = o.eps > 0 ? o.eps : 2.0 / o.N;
  // collapse time of the comparison bound (1 - t/c)^2
  const double c = ribbon ? 1.0 : 2.0;
  run.resolved = {{"eps", eps}, {"collapse_time", c}};
  auto hist = std::make_shared<LineHistory>(ribbon ? solve_ribbon(o.N, eps, o.dt, o.T)
                                                   : solve_slit(o.N, eps, o.dt, o.T));
  LineHistory thin = *hist;
  thin.states.clear();
  for (std::size_t k = 0; k < hist->states.size(); ++k)
    if (k % std::size_t(o.save_every) == 0 || k + 1 == hist->states.size())
      thin.states.push_back(hist->states[k]);
  write_line_history_csv(run.file(ribbon ? "ribbon_history.csv" : "slit_history.csv"), thin);

  double bound_excess = -1e300;
  for (const auto& s : hist->states)
    if (s.t <= c) bound_excess = std::max(bound_excess, s.Y.back() - std::pow(1 - s.t / c, 2));
  double final_extent = 0;
  for (double y : hist->states.back().Y) final_extent = std::max(final_extent, std::abs(y));
  json log = {{"steps", hist->steps},
              {"substeps", hist->substeps},
              {"adaptive_from", hist->adaptive_from},
              {"max_oddness", hist->max_oddness},
              {"min_increment", hist->min_increment},
              {"max_increment", hist->max_increment},
              {"max_growth", hist->max_growth},
              {"bound_excess", bound_excess},
              {"final_extent", final_extent}};
  write_json(run.file("invariants.json"), log);

  run.check("oddness", hist->max_oddness <= 1e-10, hist->max_oddness, 1e-10);
  run.check("increments nonnegative", hist->min_increment >= 0, hist->min_increment, 0);
  const double inc = (2.0 / o.N) * (1 + 1e-10);
  run.check("increments at most 2/N", hist->max_increment <= inc, hist->max_increment, inc);
  run.check("comparison bound (+0.05)", bound_excess <= 0.05, bound_excess, 0.05);
  if (o.T >= c + 0.05) run.check("collapse max|Y(T)|", final_extent < 1e-2, final_extent, 1e-2);

  if (o.grid_h > 0) {
    std::shared_ptr<const LineHistory> hp = hist;
    FieldHandle f = ribbon ? FieldHandle(std::make_shared<RibbonSection>(hp))
                           : FieldHandle(std::make_shared<SlitVelocityField>(hp));
    auto g = sample_grid(*f, Rect::from_bounds(-1.5, 1.5, -1.5, 1.5), o.grid_h, o.T);
    write_grid_binary(run.file("velocity.bin"), g);
  }
}

struct ResidualOpts {
  std::string scenario = "slit";
  int refine = 2;
  std::size_t functions = 20;
  std::uint64_t seed = 1;
  double alpha = 0.6, min_order = 1;
};

void cmd_residual(const ResidualOpts& o, Run& run) {
  const int levels = o.refine + 1;
  ResidualStudy st;
  if (o.scenario == "U")
    st = residual_study_U(o.alpha, levels, o.functions, o.seed);
  else if (o.scenario == "slit")
    st = residual_study_slit(levels, o.functions, o.seed);
  else if (o.scenario == "ribbon")
    st = residual_study_ribbon(levels, o.functions, o.seed);
  else
    throw DomainError("scenario must be U, slit or ribbon");
  write_json(run.file("residual.json"), to_json(st));
  bool decreasing = true;
  for (std::size_t l = 0; l < st.levels.size(); ++l) {
    std::printf("level %zu  dt %.4g  particles %zu  max residual %.4e\n", l, st.levels[l].dt,
                st.levels[l].particles, st.levels[l].max_residual);
    if (l > 0 && !(st.levels[l].max_residual < st.levels[l - 1].max_residual)) decreasing = false;
  }
  run.check("residuals decrease", decreasing, decreasing ? 1 : 0, 1);
  if (levels > 1) run.check("measured order", st.order >= o.min_order, st.order, o.min_order);
  run.check("reversal involution", st.involution_error == 0, st.involution_error, 0);
}

struct DimensionOpts {
  std::string input, scales = "auto";
  double expect = NAN, tol = 0.1;
};

void cmd_dimension(const DimensionOpts& o, Run& run) {
  auto pts = read_points_csv(o.input);
  run.resolved = {{"points", pts.size()}, {"input_sha256", sha256_file(o.input)}};
  BoxCountReport r;
  if (o.scales == "auto")
    r = box_dimension_auto<2>(pts);
  else if (o.scales == "default")
    r = box_dimension<2>(pts, default_box_scales());
  else
    throw DomainError("scales must be auto or default");
  write_json(run.file("dimension.json"), to_json(r));
  std::printf("box-count slope %.6f%s\n", r.slope, r.degenerate ? " (degenerate)" : "");
  if (!std::isnan(o.expect))
    run.check("dimension", std::abs(r.slope - o.expect) <= o.tol, r.slope - o.expect, o.tol);
}

struct FieldOpts {
  std::string field = "U";
  double alpha = 0.6, t = 0.5, h = 0.05, xi = 0, p = 1, div_tol = 0;
  std::vector<double> region{-2, 2, -1.5, 1.5};
  int depth = 24;
  bool csv = false;
};

void cmd_field_sample(const FieldOpts& o, Run& run) {
  if (o.region.size() != 4) throw DomainError("region needs x0,x1,y0,y1");
  json spec = {{"kind", o.field}, {"alpha", o.alpha}, {"depth", o.depth}};
  if (o.xi > 0) spec["xi"] = o.xi;
  auto f = make_field(spec);
  auto reg = Rect::from_bounds(o.region[0], o.region[1], o.region[2], o.region[3]);
  auto g = sample_grid(*f, reg, o.h, o.t);
  write_grid_binary(run.file("field.bin"), g);
  if (o.csv) write_grid_csv(run.file("field.csv"), g);
  double div = grid_divergence(g);
  auto sob = sobolev_norm(g, o.p);
  json rep = {{"field", f->params()},
              {"nx", g.nx},
              {"ny", g.ny},
              {"divergence", div},
              {"sobolev_p", o.p},
              {"sobolev", sob.value},
              {"underresolved", sob.underresolved},
              {"warning", sob.warning}};
  write_json(run.file("field.json"), rep);
  std::printf("grid %dx%d  max|div| %.3e  |grad v|_L%g %.6g\n", g.nx, g.ny, div, o.p, sob.value);
  if (!sob.warning.empty()) std::printf("warning: %s\n", sob.warning.c_str());
  if (o.div_tol > 0) run.check("grid divergence", div <= o.div_tol, div, o.div_tol);
}

void write_manifest(Run& run, const std::string& command, double wall) {
  json digests = json::object();
  for (const auto& f : run.outputs) digests[f] = sha256_file((run.out / f).string());
  json m = {{"command", command},
            {"config", run.config},
            {"resolved", run.resolved},
            {"versions",
             {{"fracflow", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"boost", BOOST_LIB_VERSION},
              {"cli11", CLI11_VERSION}}},
            {"threads", threads()},
            {"wall_clock_s", wall},
            {"checks", run.checks},
            {"pass", run.all_pass()},
            {"outputs", digests}};
  write_json((run.out / "manifest.json").string(), m);
  write_json((run.out / "config.json").string(), run.config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractal flows: constructions, simulations and verification"};
  app.set_help_flag("--help", "print this help and exit");
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON configuration; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string out = "fracflow_out";
  unsigned nthreads = 0;
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", nthreads, "worker threads (0: FA_THREADS or all cores)");

  AttractorOpts ao;
  auto* att = app.add_subcommand("attractor", "attractor approximation and separation check");
  att->add_option("--alpha", ao.alpha, "contraction ratio in (1/2, 1/sqrt2)");
  att->add_option("--h", ao.h, "target dimension in (1,2); overrides --alpha when > 0");
  att->add_option("--depth", ao.depth, "word depth")->check(CLI::Range(0, 40));
  att->add_option("--sep-depth", ao.sep_depth, "separation check depth")->check(CLI::Range(0, 20));
  att->add_option("--samples", ao.samples, "random-word samples of the shifted attractor");
  att->add_option("--sample-depth", ao.sample_depth, "random word length");
  att->add_option("--seed", ao.seed, "sampler seed");

  FlowOpts fo;
  auto* flow = app.add_subcommand("flow", "trajectory checks for the velocity fields");
  flow->require_subcommand(1);
  auto* vc = flow->add_subcommand("verify-contraction", "U maps F_w(I) onto gamma F_w(I)");
  vc->add_option("--alpha", fo.alpha);
  vc->add_option("--depth", fo.depth)->check(CLI::Range(0, 40));
  vc->add_option("--dt", fo.dt)->check(CLI::PositiveNumber);
  vc->add_option("--tol", fo.tol, "endpoint error tolerance");
  vc->add_option("--traj-samples", fo.traj_samples)->check(CLI::Range(2, 100000));
  auto* co = flow->add_subcommand("collapse", "enclosure of the advected attractor under W");
  co->add_option("--alpha", fo.alpha);
  co->add_option("--xi", fo.xi, "window ratio (0: default)");
  co->add_option("--k", fo.k, "last window")->check(CLI::Range(0, 12));
  co->add_option("--dt", fo.dt)->check(CLI::PositiveNumber);
  co->add_option("--slack", fo.slack);
  co->add_option("--sample-depth", fo.sample_depth)->check(CLI::Range(0, 16));
  auto* fd = flow->add_subcommand("full-dim", "scale checks for V and Vtilde");
  fd->add_option("--kmax", fo.kmax)->check(CLI::Range(1, 40));
  fd->add_option("--dt", fo.dt)->check(CLI::PositiveNumber);
  fd->add_option("--block-depth", fo.block_depth)->check(CLI::Range(0, 8));
  fd->add_flag("--no-stages", fo.no_stages, "skip the Vtilde stage integration");

  LineOpts so, ro;
  ro.T = 1.1;
  auto line_opts = [](CLI::App* s, LineOpts& o) {
    s->add_option("--N", o.N, "particle count (even)");
    s->add_option("--eps", o.eps, "mollification radius (0: 2/N)");
    s->add_option("--dt", o.dt)->check(CLI::PositiveNumber);
    s->add_option("--T", o.T, "final time")->check(CLI::PositiveNumber);
    s->add_option("--save-every", o.save_every, "history CSV cadence in steps")
        ->check(CLI::PositiveNumber);
    s->add_option("--grid-h", o.grid_h, "velocity grid spacing at T (0: none)");
  };
  auto* slit = app.add_subcommand("slit", "particle solution of the slit equation");
  line_opts(slit, so);
  auto* ribbon = app.add_subcommand("ribbon", "particle solution of the ribbon equation");
  line_opts(ribbon, ro);

  ResidualOpts rs;
  auto* res = app.add_subcommand("residual", "weak residual convergence study");
  res->add_option("--scenario", rs.scenario)->check(CLI::IsMember({"U", "slit", "ribbon"}));
  res->add_option("--refine", rs.refine, "number of halvings")->check(CLI::Range(0, 6));
  res->add_option("--functions", rs.functions)->check(CLI::Range(1, 10000));
  res->add_option("--seed", rs.seed);
  res->add_option("--alpha", rs.alpha, "for scenario U");
  res->add_option("--min-order", rs.min_order);

  DimensionOpts dopt;
  auto* dim = app.add_subcommand("dimension", "box-counting dimension of a point file");
  dim->add_option("--input", dopt.input, "CSV with x,y or ax,ay,bx,by")->required();
  dim->add_option("--scales", dopt.scales)->check(CLI::IsMember({"auto", "default"}));
  dim->add_option("--expect", dopt.expect, "expected slope (enables the check)");
  dim->add_option("--tol", dopt.tol);

  FieldOpts fopt;
  auto* fs_ = app.add_subcommand("field-sample", "sample a velocity field on a grid");
  fs_->add_option("--field", fopt.field)
      ->check(CLI::IsMember({"zero", "u", "U", "W", "nu", "V", "Vtilde"}));
  fs_->add_option("--alpha", fopt.alpha);
  fs_->add_option("--xi", fopt.xi, "for W (0: default)");
  fs_->add_option("--depth", fopt.depth);
  fs_->add_option("--t", fopt.t);
  fs_->add_option("--h", fopt.h)->check(CLI::PositiveNumber);
  fs_->add_option("--region", fopt.region, "x0 x1 y0 y1")->expected(4)->delimiter(',');
  fs_->add_option("--p", fopt.p, "Sobolev exponent in [1,2]");
  fs_->add_option("--div-tol", fopt.div_tol, "divergence tolerance (0: report only)");
  fs_->add_flag("--csv", fopt.csv, "also write the grid as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  Run run;
  run.out = out;
  std::string command;
  const CLI::App* leaf = &app;
  run.config = echo_options(&app);
  json* section = &run.config;
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    command += (command.empty() ? "" : " ") + leaf->get_name();
    (*section)[leaf->get_name()] = echo_options(leaf);
    section = &(*section)[leaf->get_name()];
  }
  run.config.erase("threads");

  const auto start = std::chrono::steady_clock::now();
  try {
    if (nthreads > 0) set_threads(nthreads);
    fs::create_directories(run.out);
    if (att->parsed()) cmd_attractor(ao, run);
    else if (vc->parsed()) cmd_contraction(fo, run);
    else if (co->parsed()) cmd_collapse(fo, run);
    else if (fd->parsed()) cmd_full_dim(fo, run);
    else if (slit->parsed()) cmd_line(so, false, run);
    else if (ribbon->parsed()) cmd_line(ro, true, run);
    else if (res->parsed()) cmd_residual(rs, run);
    else if (dim->parsed()) cmd_dimension(dopt, run);
    else if (fs_->parsed()) cmd_field_sample(fopt, run);
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  } catch (const ResourceError& e) {
    std::fprintf(stderr, "resource cap: %s\n", e.what());
    return kResource;
  } catch (const InvariantError& e) {
    std::fprintf(stderr, "invariant violated: %s\n", e.what());
    run.checks.push_back({{"name", "invariants"}, {"pass", false}, {"detail", e.what()}});
    write_manifest(run, command, 0);
    return kVerify;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(run, command, wall);
  std::printf("%s in %.2f s, outputs in %s\n", run.all_pass() ? "pass" : "FAIL", wall,
              run.out.string().c_str());
  return run.all_pass() ? kPass : kVerify;
}
