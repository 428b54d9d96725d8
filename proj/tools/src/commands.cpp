#include "gbpn_cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "gbpn/error.hpp"
#include "gbpn/gbp.hpp"
#include "gbpn/io.hpp"
#include "gbpn/oracle.hpp"

namespace gbpn::cli {

namespace {

void write_text_file(const Path& path, const std::string& text) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << text;
  if (!file) throw IoError("failed writing " + path.string());
}

void warn_if_unanchored(const DepthGrid& sparse, std::ostream& err) {
  if (sparse.valid_count() == 0) {
    err << "warning: sparse input has no valid point; beliefs stay vacuous wherever no "
           "measurement reaches\n";
  }
}

}  // namespace

GridGraph build_scene_graph(const DepthGrid& guide, const RunConfig& config) {
  GridGraph graph = GridGraph::build_local(guide.height(), guide.width(), config.connectivity);
  if (config.k_nonlocal > 0) {
    graph = graph.with_nonlocal(propose_nonlocal_edges(guide, config.nonlocal()));
  }
  return graph;
}

MrfModel build_scene_mrf(const DepthGrid& guide, const DepthGrid& sparse, const RunConfig& config) {
  if (!guide.same_shape(sparse)) {
    throw DimensionError("guide is " + std::to_string(guide.height()) + "x" +
                         std::to_string(guide.width()) + " but sparse depth is " +
                         std::to_string(sparse.height()) + "x" + std::to_string(sparse.width()));
  }
  MrfModel model;
  model.graph = build_scene_graph(guide, config);
  model.params = params_from_guide(guide, sparse, model.graph, config.potentials());
  return model;
}

DepthGrid read_sparse_input(const Path& path, const DepthGrid& guide, double depth_scale) {
  DepthGrid sparse = read_depth(path, depth_scale, guide.height(), guide.width());
  if (sparse.channels() != 1) throw DimensionError(path.string() + ": sparse depth needs one channel");
  return sparse;
}

DepthGrid mean_grid(const BeliefMap& beliefs) {
  DepthGrid g(beliefs.height(), beliefs.width(), 1);
  for (PixelIndex i = 0; i < beliefs.size(); ++i) {
    if (beliefs.informative(i)) {
      g.at(i) = beliefs.mean(i);
      g.set_valid(i, true);
    }
  }
  return g;
}

DepthGrid precision_grid(const BeliefMap& beliefs) {
  DepthGrid g(beliefs.height(), beliefs.width(), 1);
  for (PixelIndex i = 0; i < beliefs.size(); ++i) g.at(i) = beliefs.precision(i);
  g.set_all_valid(true);
  return g;
}

int cmd_complete(const CompleteArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    args.config.validate();
    const DepthGrid guide = read_guide(args.guide);
    const DepthGrid sparse = read_sparse_input(args.sparse, guide, args.config.depth_scale);
    warn_if_unanchored(sparse, err);
    if (args.echo_config) write_text_file(*args.echo_config, args.config.to_text());

    const MrfModel model = build_scene_mrf(guide, sparse, args.config);
    const SolveResult result = run_gbp(model.params, model.graph, args.config.solver(args.threads));
    write_pfm(args.out_mu, mean_grid(result.beliefs));
    write_pfm(args.out_lambda, precision_grid(result.beliefs));

    if (args.config.record_trace) {
      if (args.trace_out) {
        std::ofstream trace(*args.trace_out, std::ios::trunc);
        if (!trace) throw IoError("cannot open " + args.trace_out->string());
        write_trace(trace, result.trace);
      } else {
        write_trace(out, result.trace);
      }
    }
    return kExitOk;
  });
}

int cmd_oracle(const OracleArgs& args, std::ostream& out, std::ostream& err) {
  (void)out;
  return guarded(err, [&] {
    args.config.validate();
    const DepthGrid guide = read_guide(args.guide);
    const DepthGrid sparse = read_sparse_input(args.sparse, guide, args.config.depth_scale);
    const MrfModel model = build_scene_mrf(guide, sparse, args.config);
    const InformationSystem sys = assemble_system(model.params, model.graph);
    const Eigen::VectorXd mu = solve_exact(sys);
    DepthGrid g(guide.height(), guide.width(), 1);
    for (PixelIndex i = 0; i < g.pixel_count(); ++i) g.at(i) = mu[i];
    g.set_all_valid(true);
    write_pfm(args.out_mu, g);
    return kExitOk;
  });
}

int cmd_sample(const SampleArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const DepthGrid gt = read_depth(args.gt, args.depth_scale);
    const DepthGrid sparse = sample_sparse(gt, args.n_points, args.seed);
    write_depth(args.out, sparse, args.depth_scale);
    out << "sampled " << sparse.valid_count() << " of " << gt.valid_count() << " valid pixels\n";
    return kExitOk;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const DepthGrid mu = read_depth(args.pred_mu, args.depth_scale);
    const DepthGrid gt = read_depth(args.gt, args.depth_scale);
    std::optional<DepthGrid> lambda;
    if (args.pred_lambda) lambda = read_depth(*args.pred_lambda, args.depth_scale);
    const EvalReport report = evaluate(mu, lambda ? &*lambda : nullptr, gt, args.options);
    if (args.json) {
      write_report_json(out, report);
    } else {
      write_report_text(out, report);
    }
    return kExitOk;
  });
}

std::vector<DensityRow> sweep_density(const DepthGrid& gt, const DepthGrid& guide,
                                      const std::vector<std::size_t>& point_counts, int seeds,
                                      const RunConfig& config, int threads,
                                      const EvalOptions& eval) {
  if (seeds < 1) throw ParameterError("seeds must be >= 1");
  if (!gt.same_shape(guide)) throw DimensionError("ground truth and guide shapes differ");
  config.validate();
  const GridGraph graph = build_scene_graph(guide, config);
  const SolverConfig solver = config.solver(threads);

  std::vector<DensityRow> rows;
  for (std::size_t points : point_counts) {
    std::vector<EvalReport> gbp_reports;
    std::vector<EvalReport> base_reports;
    for (int s = 0; s < seeds; ++s) {
      const DepthGrid sparse = sample_sparse(gt, points, config.seed + static_cast<std::uint64_t>(s));
      const MrfParams params = params_from_guide(guide, sparse, graph, config.potentials());
      const SolveResult result = run_gbp(params, graph, solver);
      const DepthGrid lambda = precision_grid(result.beliefs);
      gbp_reports.push_back(evaluate(mean_grid(result.beliefs), &lambda, gt, eval));
      base_reports.push_back(evaluate(nearest_valid_fill(sparse), nullptr, gt, eval));
    }
    rows.push_back({points, aggregate(gbp_reports), aggregate(base_reports)});
  }
  return rows;
}

void write_density_table(std::ostream& out, const std::vector<DensityRow>& rows) {
  out << "points\trmse\tmae\tirmse\timae\trel";
  if (!rows.empty()) {
    for (const auto& [theta, frac] : rows.front().gbp.delta) out << '\t' << theta_key(theta);
  }
  out << "\tnll\tbaseline_rmse\tbaseline_mae\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(8);
  for (const auto& row : rows) {
    const auto& r = row.gbp;
    out << row.points << '\t' << r.rmse << '\t' << r.mae << '\t' << r.irmse << '\t' << r.imae
        << '\t' << r.rel;
    for (const auto& [theta, frac] : r.delta) out << '\t' << frac;
    out << '\t' << r.nll.value_or(std::numeric_limits<double>::quiet_NaN()) << '\t'
        << row.baseline.rmse << '\t' << row.baseline.mae << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

int cmd_sweep_density(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const DepthGrid gt = read_depth(args.gt, args.config.depth_scale);
    const DepthGrid guide = read_guide(args.guide);
    std::vector<std::size_t> counts = args.point_counts;
    if (counts.empty()) counts.push_back(gt.valid_count());
    const auto rows = sweep_density(gt, guide, counts, args.seeds, args.config, args.threads);
    if (args.out_table) {
      std::ofstream file(*args.out_table, std::ios::trunc);
      if (!file) throw IoError("cannot open " + args.out_table->string());
      write_density_table(file, rows);
    } else {
      write_density_table(out, rows);
    }
    return kExitOk;
  });
}

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SynthScene scene = make_piecewise_planar_scene(args.options);
    write_pfm(args.out_guide, scene.guide);
    write_depth(args.out_gt, scene.depth, args.depth_scale);
    if (args.out_labels) write_pfm(*args.out_labels, scene.labels);
    out << "wrote " << scene.depth.height() << "x" << scene.depth.width() << " scene with "
        << args.options.regions << " planar regions\n";
    return kExitOk;
  });
}

}  // namespace gbpn::cli
