#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gbpn/io.hpp"
#include "gbpn/synth.hpp"
#include "gbpn_cli/commands.hpp"
#include "test_support.hpp"

namespace gbpn::cli {
namespace {

std::string read_file(const Path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Scene {
  Path guide, gt, sparse;
};

Scene write_scene(const Path& dir, int h, int w, std::size_t points, std::uint64_t seed) {
  SynthOptions o;
  o.height = h;
  o.width = w;
  o.seed = seed;
  const auto scene = make_piecewise_planar_scene(o);
  Scene s{dir / "guide.pfm", dir / "gt.pfm", dir / "sparse.csv"};
  write_pfm(s.guide, scene.guide);
  write_pfm(s.gt, scene.depth);
  write_sparse_csv(s.sparse, sample_sparse(read_pfm(s.gt), points, seed));
  return s;
}

TEST(RunConfig, TextRoundTripAndOverrides) {
  RunConfig c;
  c.iterations = 17;
  c.beta_const = 0.55;
  c.sigma_color = 0.123456789012345;
  c.early_stop_tol = 1e-7;
  c.connectivity = Connectivity::Four;
  c.seed = 99;
  EXPECT_EQ(parse_config_text(c.to_text()), c);

  const auto d = parse_config_text("# comment\n\niterations = 3\nlambda-smooth=2.5\nconnectivity=4\n");
  EXPECT_EQ(d.iterations, 3);
  EXPECT_EQ(d.lambda_smooth, 2.5);
  EXPECT_EQ(d.connectivity, Connectivity::Four);
  EXPECT_THROW(parse_config_text("no_such_key=1\n"), ParameterError);
  EXPECT_THROW(parse_config_text("iterations=many\n"), ParameterError);
  EXPECT_THROW(parse_config_text("beta_const=1.0\n").validate(), ParameterError);
  EXPECT_THROW(parse_config_text("connectivity=6\n"), ParameterError);
}

TEST(RunConfig, ThreadsFromEnvironment) {
  ::setenv("GBPN_THREADS", "3", 1);
  EXPECT_EQ(threads_from_env(), 3);
  ::setenv("GBPN_THREADS", "zero", 1);
  EXPECT_GE(threads_from_env(), 1);
  ::unsetenv("GBPN_THREADS");
  EXPECT_GE(threads_from_env(), 1);
}

TEST(Commands, ConstantSceneCompletesToConstant) {
  const auto dir = testing::scratch_dir("cli_const");
  DepthGrid guide(12, 14, 3);
  for (auto& v : guide.data()) v = 0.5;
  guide.set_all_valid(true);
  DepthGrid sparse(12, 14, 1);
  for (PixelIndex i : {3u, 50u, 120u}) {
    sparse.at(i) = 4.0;
    sparse.set_valid(i, true);
  }
  write_pfm(dir / "g.pfm", guide);
  write_pfm(dir / "s.pfm", sparse);
  CompleteArgs args{dir / "g.pfm", dir / "s.pfm", dir / "mu.pfm", dir / "lambda.pfm"};
  std::ostringstream out, err;
  ASSERT_EQ(cmd_complete(args, out, err), kExitOk) << err.str();
  const auto mu = read_pfm(dir / "mu.pfm");
  for (double v : mu.data()) EXPECT_NEAR(v, 4.0, 1e-6);
}

TEST(Commands, SingleMeasurementCoversImageInOneIteration) {
  const auto dir = testing::scratch_dir("cli_single");
  DepthGrid guide(64, 64, 3);
  testing::Rng rng(1);
  for (auto& v : guide.data()) v = testing::uniform(rng, 0, 1);
  guide.set_all_valid(true);
  write_pfm(dir / "g.pfm", guide);
  { std::ofstream(dir / "s.csv") << "31,20,2.5\n"; }
  CompleteArgs args{dir / "g.pfm", dir / "s.csv", dir / "mu.pfm", dir / "lambda.pfm"};
  args.config.iterations = 1;
  args.config.nonlocal_steps = 0;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_complete(args, out, err), kExitOk) << err.str();
  const auto lambda = read_pfm(dir / "lambda.pfm");
  for (double v : lambda.data()) EXPECT_GT(v, 0.0);
  EXPECT_EQ(read_pfm(dir / "mu.pfm").valid_count(), 64U * 64U);
}

TEST(Commands, CompleteIsBitReproducibleAcrossThreadCounts) {
  const auto dir = testing::scratch_dir("cli_det");
  const auto s = write_scene(dir, 48, 56, 150, 3);
  std::string first;
  for (int threads : {1, 1, 4}) {
    CompleteArgs args{s.guide, s.sparse, dir / "mu.pfm", dir / "lambda.pfm"};
    args.threads = threads;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_complete(args, out, err), kExitOk) << err.str();
    const auto bytes = read_file(dir / "mu.pfm") + read_file(dir / "lambda.pfm");
    if (first.empty()) first = bytes;
    EXPECT_EQ(bytes, first) << "threads=" << threads;
  }
}

TEST(Commands, OracleMatchesConvergedCompletion) {
  const auto dir = testing::scratch_dir("cli_oracle");
  const auto s = write_scene(dir, 16, 16, 40, 4);
  RunConfig cfg;
  cfg.iterations = 3000;
  cfg.early_stop_tol = 1e-12;
  CompleteArgs c{s.guide, s.sparse, dir / "mu.pfm", dir / "lambda.pfm"};
  c.config = cfg;
  OracleArgs o{s.guide, s.sparse, dir / "exact.pfm", cfg};
  std::ostringstream out, err;
  ASSERT_EQ(cmd_complete(c, out, err), kExitOk) << err.str();
  ASSERT_EQ(cmd_oracle(o, out, err), kExitOk) << err.str();
  const auto a = read_pfm(dir / "mu.pfm");
  const auto b = read_pfm(dir / "exact.pfm");
  double sq = 0.0;
  for (PixelIndex i = 0; i < a.pixel_count(); ++i) sq += (a.at(i) - b.at(i)) * (a.at(i) - b.at(i));
  EXPECT_LT(std::sqrt(sq / a.pixel_count()), 1e-6);
}

TEST(Commands, ExitCodes) {
  const auto dir = testing::scratch_dir("cli_exit");
  const auto s = write_scene(dir, 10, 12, 10, 5);
  std::ostringstream out, err;
  CompleteArgs missing{dir / "nope.pfm", s.sparse, dir / "mu.pfm", dir / "l.pfm"};
  EXPECT_EQ(cmd_complete(missing, out, err), kExitIo);

  write_pfm(dir / "small.pfm", DepthGrid(5, 5, 1));
  CompleteArgs shape{s.guide, dir / "small.pfm", dir / "mu.pfm", dir / "l.pfm"};
  EXPECT_EQ(cmd_complete(shape, out, err), kExitIo);

  { std::ofstream(dir / "empty.csv") << ""; }
  OracleArgs singular{s.guide, dir / "empty.csv", dir / "x.pfm"};
  EXPECT_EQ(cmd_oracle(singular, out, err), kExitNumerical);

  CompleteArgs bad{s.guide, s.sparse, dir / "mu.pfm", dir / "l.pfm"};
  bad.config.beta_const = 2.0;
  EXPECT_EQ(cmd_complete(bad, out, err), kExitUsage);
}

TEST(Commands, SampleEvalAndTraceOutputs) {
  const auto dir = testing::scratch_dir("cli_misc");
  const auto s = write_scene(dir, 20, 24, 60, 6);
  std::ostringstream out, err;
  SampleArgs sample{s.gt, dir / "pts.csv", 75, 8};
  ASSERT_EQ(cmd_sample(sample, out, err), kExitOk);
  EXPECT_EQ(read_sparse_csv(dir / "pts.csv", 20, 24).valid_count(), 75U);

  CompleteArgs c{s.guide, dir / "pts.csv", dir / "mu.pfm", dir / "lambda.pfm"};
  c.config.record_trace = true;
  c.config.iterations = 4;
  c.trace_out = dir / "trace.tsv";
  c.echo_config = dir / "effective.cfg";
  ASSERT_EQ(cmd_complete(c, out, err), kExitOk) << err.str();
  const auto trace = read_file(dir / "trace.tsv");
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 4);
  EXPECT_EQ(load_config(dir / "effective.cfg"), c.config);

  EvalArgs e{dir / "mu.pfm", s.gt, dir / "lambda.pfm"};
  e.json = true;
  std::ostringstream report;
  ASSERT_EQ(cmd_eval(e, report, err), kExitOk) << err.str();
  EXPECT_NE(report.str().find("\"rmse\""), std::string::npos);
  EXPECT_NE(report.str().find("\"nll\""), std::string::npos);
}

TEST(Commands, SweepDensitySingleSeedEqualsEvaluate) {
  SynthOptions o;
  o.height = 24;
  o.width = 30;
  o.seed = 2;
  const auto scene = make_piecewise_planar_scene(o);
  RunConfig cfg;
  cfg.seed = 11;
  const auto rows = sweep_density(scene.depth, scene.guide, {100}, 1, cfg, 1);
  ASSERT_EQ(rows.size(), 1U);
  const auto sparse = sample_sparse(scene.depth, 100, 11);
  const auto model = build_scene_mrf(scene.guide, sparse, cfg);
  const auto res = run_gbp(model.params, model.graph, cfg.solver(1));
  const auto direct = evaluate(mean_grid(res.beliefs), nullptr, scene.depth);
  EXPECT_EQ(rows[0].gbp.rmse, direct.rmse);
  EXPECT_EQ(rows[0].gbp.mae, direct.mae);

  // Dense measurements that dominate the smoothness prior reproduce the truth.
  cfg.w_meas = 1e6;
  const auto all = sweep_density(scene.depth, scene.guide, {scene.depth.pixel_count()}, 1, cfg, 1);
  EXPECT_LT(all[0].gbp.rmse, 1e-5);
  std::ostringstream table;
  write_density_table(table, rows);
  EXPECT_NE(table.str().find("baseline_rmse"), std::string::npos);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GBPN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

TEST(Binary, EndToEndAndUsageErrors) {
  const auto dir = testing::scratch_dir("cli_bin");
  const std::string d = dir.string();
  EXPECT_EQ(run_cli("synth --height 20 --width 24 --seed 1 --out-guide " + d + "/g.pfm --out-gt " + d + "/gt.pgm"), 0);
  EXPECT_EQ(run_cli("sample --gt " + d + "/gt.pgm --n-points 40 --seed 2 --out " + d + "/s.csv"), 0);
  EXPECT_EQ(run_cli("complete --guide " + d + "/g.pfm --sparse " + d + "/s.csv --out-mu " + d +
                    "/mu.pfm --out-lambda " + d + "/l.pfm --iterations 3 --record-trace"),
            0);
  EXPECT_EQ(run_cli("eval --pred-mu " + d + "/mu.pfm --pred-lambda " + d + "/l.pfm --gt " + d + "/gt.pgm"), 0);
  EXPECT_EQ(run_cli("sweep-density --gt " + d + "/gt.pgm --guide " + d + "/g.pfm --points 20,80 --seeds 2"), 0);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("complete --guide x.pfm"), 1);
  EXPECT_EQ(run_cli("complete --guide " + d + "/g.pfm --sparse " + d + "/s.csv --out-mu " + d +
                    "/mu.pfm --out-lambda " + d + "/l.pfm --no-such-flag 1"),
            1);
  EXPECT_EQ(run_cli("complete --guide " + d + "/missing.pfm --sparse " + d + "/s.csv --out-mu " + d +
                    "/mu.pfm --out-lambda " + d + "/l.pfm"),
            2);
  EXPECT_EQ(run_cli("--help"), 0);
}

}  // namespace
}  // namespace gbpn::cli
