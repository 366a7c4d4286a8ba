#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "lognls/field_io.hpp"
#include "lognls/pipeline.hpp"
#include "support.hpp"

using namespace lognls;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("lognls_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::io;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LOGNLS_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.params.alpha = -0.02;
  c.shape = Shape::square;
  c.R_list = {3.0, 5.0};
  c.V_list = {};
  c.solver.s_homotopy = true;
  RunConfig back;
  apply_json(back, to_json_value(c));
  EXPECT_EQ(to_json_value(back), to_json_value(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, HashIsStableAndSensitive) {
  const RunConfig a;
  EXPECT_EQ(config_hash(a), config_hash(RunConfig{}));
  EXPECT_EQ(config_hash(a).size(), 16u);
  RunConfig b;
  b.seed = 8;
  EXPECT_NE(config_hash(a), config_hash(b));
  nlohmann::json art = {{"config_hash", config_hash(a)}};
  EXPECT_TRUE(artifact_matches(art, a));
  EXPECT_FALSE(artifact_matches(art, b));
  EXPECT_FALSE(artifact_matches(nlohmann::json::object(), a));
}

TEST(Config, UnknownKeyIsAParameterError) {
  RunConfig c;
  EXPECT_EQ(kind_of([&] { apply_json(c, {{"alpah", -0.1}}); }), ErrorKind::parameter);
}

TEST(Config, MalformedInputIsAnIoError) {
  const fs::path d = scratch("config");
  write_text(d / "bad.json", "{\"p\": 6,");
  EXPECT_EQ(kind_of([&] { load_config(d / "bad.json"); }), ErrorKind::io);
  write_text(d / "typed.json", "{\"n\": \"many\"}");
  EXPECT_EQ(kind_of([&] { load_config(d / "typed.json"); }), ErrorKind::io);
  EXPECT_EQ(kind_of([&] { load_config(d / "missing.json"); }), ErrorKind::io);
  write_text(d / "ok.json", "{\"p\": 5.5, \"R_list\": [2, 4]}");
  const RunConfig c = load_config(d / "ok.json");
  EXPECT_EQ(c.params.p, 5.5);
  EXPECT_EQ(c.R_list, (std::vector<double>{2.0, 4.0}));
}

TEST(FieldIo, RoundTripIsBitwise) {
  const fs::path d = scratch("field");
  const GridPtr g = build_grid(Shape::square, 3.0, 21);
  std::mt19937_64 rng(3);
  const Field u = lognls::testing::noise_field(g, rng);
  write_field(d / "u", u);
  const Field v = read_field(d / "u.json");
  EXPECT_EQ(v.grid->n(), 21);
  EXPECT_EQ(v.grid->shape(), Shape::square);
  ASSERT_EQ(v.size(), u.size());
  EXPECT_EQ(std::memcmp(u.v.data(), v.v.data(), u.size() * sizeof(double)), 0);
}

TEST(FieldIo, InconsistentFilesAreIoErrors) {
  const fs::path d = scratch("field_bad");
  const GridPtr g = build_grid(Shape::disk, 2.0, 17);
  std::mt19937_64 rng(4);
  write_field(d / "u", lognls::testing::noise_field(g, rng));
  fs::resize_file(d / "u.f64", fs::file_size(d / "u.f64") - 8);
  EXPECT_EQ(kind_of([&] { read_field(d / "u.json"); }), ErrorKind::io);

  write_field(d / "w", lognls::testing::noise_field(g, rng));
  std::ifstream in(d / "w.json");
  nlohmann::json head;
  in >> head;
  head["n"] = 19;
  write_text(d / "w.json", head.dump());
  EXPECT_EQ(kind_of([&] { read_field(d / "w.json"); }), ErrorKind::io);

  write_text(d / "x.json", "not json");
  EXPECT_EQ(kind_of([&] { read_field(d / "x.json"); }), ErrorKind::io);
}

TEST(Artifacts, CarryTheConfigHash) {
  RunConfig c;
  c.out_dir = scratch("artifacts").string();
  const Artifacts out(c);
  out.json("a.json", {{"x", 1}});
  out.csv("b.csv", {"x", "y"}, {{1.0, 0.1}});
  std::ifstream ja(fs::path(c.out_dir) / "a.json");
  nlohmann::json j;
  ja >> j;
  EXPECT_TRUE(artifact_matches(j, c));
  std::ifstream cb(fs::path(c.out_dir) / "b.csv");
  std::string first, second, third;
  std::getline(cb, first);
  std::getline(cb, second);
  std::getline(cb, third);
  EXPECT_EQ(first, "# config_hash " + config_hash(c));
  EXPECT_EQ(second, "x,y");
  EXPECT_EQ(third, "1,0.10000000000000001");
}

TEST(Landscape, EmptyListsGiveEmptyArtifacts) {
  RunConfig c;
  c.out_dir = scratch("landscape").string();
  c.V_list = {};
  c.W_list = {};
  const Artifacts out(c);
  const LandscapeResult r = run_landscape(c, &out);
  EXPECT_TRUE(r.V.empty());
  EXPECT_TRUE(r.W.empty());
  std::ifstream in(fs::path(c.out_dir) / "landscape_V.csv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 2);  // hash line and header only
}

TEST(Landscape, FittedSlopeOfALine) {
  EXPECT_NEAR(ls_slope({1.0, 2.0, 3.0}, {2.0, 4.5, 7.0}), 2.5, 1e-14);
  EXPECT_EQ(ls_slope({1.0}, {1.0}), 0.0);
}

TEST(Cli, ExitCodes) {
  const std::string out = " --out " + scratch("cli").string();
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli(out + " fibration --n 33 --R 4"), 0);
  EXPECT_EQ(run_cli(out + " --p 3.5 fibration"), 2);
  EXPECT_EQ(run_cli(out + " bogus"), 2);
  EXPECT_EQ(run_cli(out + " --config /nonexistent/cfg.json fibration"), 4);
  const fs::path cfg = scratch("cli_cfg") / "c.json";
  write_text(cfg, "{\"unknown\": 1}");
  EXPECT_EQ(run_cli(out + " --config " + cfg.string() + " fibration"), 2);
  // A fiber scan that cannot bracket the maximum is a convergence failure.
  write_text(cfg, "{\"t_min\": 0.999, \"t_max\": 1.001, \"t_points\": 3}");
  EXPECT_EQ(run_cli(out + " --config " + cfg.string() + " fibration"), 3);
}
