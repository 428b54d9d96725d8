#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "gbpn/error.hpp"
#include "gbpn_cli/commands.hpp"

namespace {

using gbpn::cli::RunConfig;

constexpr const char* kConfigKeys[] = {
    "iterations",    "nonlocal-steps", "epsilon-cavity", "early-stop-tol", "w-meas",
    "lambda-smooth", "sigma-color",    "w-min",          "beta-const",     "connectivity",
    "k-nonlocal",    "search-radius",  "patch-radius",   "min-distance",   "seed",
    "depth-scale"};

// Config file first, then any explicit flag on top of it.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  bool record_trace = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "flat key=value config file");
    for (const char* key : kConfigKeys) app->add_option(std::string("--") + key, values[key]);
    app->add_flag("--record-trace", record_trace, "emit the per-iteration convergence trace");
  }

  RunConfig resolve(CLI::App* app) const {
    RunConfig config;
    if (!config_path.empty()) config = gbpn::cli::load_config(config_path);
    for (const char* key : kConfigKeys) {
      if (app->count(std::string("--") + key) > 0) config.set(key, values.at(key));
    }
    if (record_trace) config.record_trace = true;
    return config;
  }
};

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    out.push_back(static_cast<std::size_t>(std::stoull(text.substr(start, end - start))));
    start = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian belief propagation depth completion on grid MRFs"};
  app.require_subcommand(1);

  // complete
  gbpn::cli::CompleteArgs complete;
  ConfigFlags complete_flags;
  std::string trace_out, echo_config;
  auto* c = app.add_subcommand("complete", "infer dense depth mean and precision");
  c->add_option("--guide", complete.guide, "guide image (.pfm or .pgm)")->required();
  c->add_option("--sparse", complete.sparse, "sparse depth (.pgm, .pfm or .csv)")->required();
  c->add_option("--out-mu", complete.out_mu, "posterior mean output (.pfm)")->required();
  c->add_option("--out-lambda", complete.out_lambda, "posterior precision output (.pfm)")->required();
  c->add_option("--trace-out", trace_out, "write the trace here instead of stdout");
  c->add_option("--echo-config", echo_config, "write the effective config here");
  complete_flags.attach(c);

  // oracle
  gbpn::cli::OracleArgs oracle;
  ConfigFlags oracle_flags;
  auto* o = app.add_subcommand("oracle", "exact posterior mean by a direct linear solve");
  o->add_option("--guide", oracle.guide)->required();
  o->add_option("--sparse", oracle.sparse)->required();
  o->add_option("--out-mu", oracle.out_mu)->required();
  oracle_flags.attach(o);

  // sample
  gbpn::cli::SampleArgs sample;
  auto* s = app.add_subcommand("sample", "draw sparse points from a dense depth map");
  s->add_option("--gt", sample.gt)->required();
  s->add_option("--n-points", sample.n_points)->required();
  s->add_option("--seed", sample.seed);
  s->add_option("--out", sample.out, "output (.csv, .pgm or .pfm)")->required();
  s->add_option("--depth-scale", sample.depth_scale, "meters per PGM unit");

  // eval
  gbpn::cli::EvalArgs eval;
  std::string pred_lambda;
  auto* e = app.add_subcommand("eval", "score a prediction against ground truth");
  e->add_option("--pred-mu", eval.pred_mu)->required();
  e->add_option("--pred-lambda", pred_lambda, "precision map; enables the nll loss");
  e->add_option("--gt", eval.gt)->required();
  e->add_option("--thetas", eval.options.thetas, "delta thresholds")->delimiter(',');
  e->add_option("--alpha", eval.options.alpha, "L1 weight inside the depth loss");
  e->add_flag("--json", eval.json, "machine-readable output");
  e->add_option("--depth-scale", eval.depth_scale);

  // sweep-density
  gbpn::cli::SweepArgs sweep;
  ConfigFlags sweep_flags;
  std::string counts_text, table_out;
  auto* d = app.add_subcommand("sweep-density", "seed-averaged metrics across sparsity levels");
  d->add_option("--gt", sweep.gt)->required();
  d->add_option("--guide", sweep.guide)->required();
  d->add_option("--points", counts_text, "comma-separated point counts");
  d->add_option("--seeds", sweep.seeds, "random samples per density");
  d->add_option("--out", table_out, "write the table here instead of stdout");
  sweep_flags.attach(d);

  // synth
  gbpn::cli::SynthArgs synth;
  std::string labels_out;
  auto* y = app.add_subcommand("synth", "generate a piecewise-planar test scene");
  y->add_option("--height", synth.options.height);
  y->add_option("--width", synth.options.width);
  y->add_option("--regions", synth.options.regions);
  y->add_option("--seed", synth.options.seed);
  y->add_option("--out-guide", synth.out_guide)->required();
  y->add_option("--out-gt", synth.out_gt, "ground truth (.pfm or .pgm)")->required();
  y->add_option("--out-labels", labels_out);
  y->add_option("--depth-scale", synth.depth_scale);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? 0 : gbpn::cli::kExitUsage;
  }

  const int threads = gbpn::cli::threads_from_env();
  try {
    if (c->parsed()) {
      complete.config = complete_flags.resolve(c);
      complete.threads = threads;
      if (!trace_out.empty()) complete.trace_out = trace_out;
      if (!echo_config.empty()) complete.echo_config = echo_config;
      return gbpn::cli::cmd_complete(complete, std::cout, std::cerr);
    }
    if (o->parsed()) {
      oracle.config = oracle_flags.resolve(o);
      return gbpn::cli::cmd_oracle(oracle, std::cout, std::cerr);
    }
    if (s->parsed()) return gbpn::cli::cmd_sample(sample, std::cout, std::cerr);
    if (e->parsed()) {
      if (!pred_lambda.empty()) eval.pred_lambda = pred_lambda;
      return gbpn::cli::cmd_eval(eval, std::cout, std::cerr);
    }
    if (d->parsed()) {
      sweep.config = sweep_flags.resolve(d);
      sweep.threads = threads;
      if (!counts_text.empty()) sweep.point_counts = parse_counts(counts_text);
      if (!table_out.empty()) sweep.out_table = table_out;
      return gbpn::cli::cmd_sweep_density(sweep, std::cout, std::cerr);
    }
    if (y->parsed()) {
      if (!labels_out.empty()) synth.out_labels = labels_out;
      return gbpn::cli::cmd_synth(synth, std::cout, std::cerr);
    }
  } catch (const gbpn::IoError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return gbpn::cli::kExitIo;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return gbpn::cli::kExitUsage;
  }
  return gbpn::cli::kExitUsage;
}
