#include "gbpn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gbpn/error.hpp"

namespace gbpn {

std::string theta_key(double theta) {
  std::ostringstream os;
  os << std::setprecision(12) << theta;
  return "delta_" + os.str();
}

std::vector<double> depth_loss_terms(const std::vector<double>& mu, const std::vector<double>& gt,
                                     double alpha) {
  std::vector<double> out(mu.size(), 0.0);
  double max_l1 = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) max_l1 = std::max(max_l1, std::abs(mu[i] - gt[i]));
  if (max_l1 == 0.0) return out;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double e = std::abs(mu[i] - gt[i]);
    out[i] = (e * e + alpha * e) / max_l1;
  }
  return out;
}

double probability_loss(const std::vector<double>& lambda, const std::vector<double>& loss_terms) {
  if (lambda.empty()) throw ParameterError("probability loss over an empty pixel set");
  double sum = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] > 0.0)) return std::numeric_limits<double>::infinity();
    sum += lambda[i] * loss_terms[i] - std::log(lambda[i]);
  }
  return sum / static_cast<double>(lambda.size());
}

EvalReport evaluate(const DepthGrid& pred_mu, const DepthGrid* pred_lambda, const DepthGrid& gt,
                    const EvalOptions& options) {
  if (!pred_mu.same_shape(gt) || (pred_lambda && !pred_lambda->same_shape(gt))) {
    throw DimensionError("prediction and ground truth shapes differ");
  }
  std::vector<double> pred, truth, lambda;
  for (PixelIndex i = 0; i < gt.pixel_count(); ++i) {
    if (!gt.valid(i)) continue;
    const bool has_pred = pred_mu.valid(i) && std::isfinite(pred_mu.at(i));
    pred.push_back(has_pred ? pred_mu.at(i) : 0.0);
    truth.push_back(gt.at(i));
    if (pred_lambda) {
      lambda.push_back(pred_lambda->valid(i) ? pred_lambda->at(i) : 0.0);
    }
  }
  if (truth.empty()) throw ParameterError("ground truth has no valid pixel");

  EvalReport report;
  report.n_valid = truth.size();
  const auto n = static_cast<double>(truth.size());
  double sq = 0.0, ab = 0.0, rel = 0.0, isq = 0.0, iab = 0.0;
  std::size_t n_inverse = 0;
  std::vector<std::size_t> within(options.thetas.size(), 0);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double g = truth[k];
    const double x = pred[k];
    const double e = g - x;
    sq += e * e;
    ab += std::abs(e);
    rel += std::abs(e) / g;
    if (g > 0.0 && x > 0.0) {
      const double ie = 1.0 / g - 1.0 / x;
      isq += ie * ie;
      iab += std::abs(ie);
      ++n_inverse;
      const double ratio = std::max(g / x, x / g);
      for (std::size_t t = 0; t < options.thetas.size(); ++t) {
        if (ratio < options.thetas[t]) ++within[t];
      }
    }
  }
  report.rmse = std::sqrt(sq / n);
  report.mae = ab / n;
  report.rel = rel / n;
  report.n_inverse_skipped = truth.size() - n_inverse;
  if (report.n_inverse_skipped > 0) {
    std::cerr << "warning: " << report.n_inverse_skipped
              << " pixel(s) with non-positive depth skipped in inverse metrics\n";
  }
  if (n_inverse > 0) {
    report.irmse = std::sqrt(isq / static_cast<double>(n_inverse));
    report.imae = iab / static_cast<double>(n_inverse);
  }
  for (std::size_t t = 0; t < options.thetas.size(); ++t) {
    report.delta[options.thetas[t]] = static_cast<double>(within[t]) / n;
  }
  if (pred_lambda) {
    report.nll = probability_loss(lambda, depth_loss_terms(pred, truth, options.alpha));
  }
  return report;
}

EvalReport aggregate(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw ParameterError("cannot aggregate an empty list of reports");
  EvalReport out;
  const auto n = static_cast<double>(reports.size());
  bool all_nll = true;
  double nll_sum = 0.0;
  for (const auto& r : reports) {
    out.rmse += r.rmse / n;
    out.mae += r.mae / n;
    out.irmse += r.irmse / n;
    out.imae += r.imae / n;
    out.rel += r.rel / n;
    for (const auto& [theta, frac] : r.delta) out.delta[theta] += frac / n;
    out.n_valid += r.n_valid;
    out.n_inverse_skipped += r.n_inverse_skipped;
    if (r.nll) {
      nll_sum += *r.nll;
    } else {
      all_nll = false;
    }
  }
  if (all_nll) out.nll = nll_sum / n;
  return out;
}

void write_report_text(std::ostream& out, const EvalReport& report) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(10);
  out << "rmse=" << report.rmse << '\n'
      << "mae=" << report.mae << '\n'
      << "irmse=" << report.irmse << '\n'
      << "imae=" << report.imae << '\n'
      << "rel=" << report.rel << '\n';
  for (const auto& [theta, frac] : report.delta) out << theta_key(theta) << '=' << frac << '\n';
  if (report.nll) out << "nll=" << *report.nll << '\n';
  out << "n_valid=" << report.n_valid << '\n';
  out.flags(flags);
  out.precision(precision);
}

void write_report_json(std::ostream& out, const EvalReport& report) {
  nlohmann::ordered_json j;
  j["rmse"] = report.rmse;
  j["mae"] = report.mae;
  j["irmse"] = report.irmse;
  j["imae"] = report.imae;
  j["rel"] = report.rel;
  nlohmann::ordered_json delta = nlohmann::ordered_json::object();
  for (const auto& [theta, frac] : report.delta) delta[theta_key(theta).substr(6)] = frac;
  j["delta"] = delta;
  if (report.nll) {
    j["nll"] = std::isfinite(*report.nll) ? nlohmann::ordered_json(*report.nll)
                                          : nlohmann::ordered_json("inf");
  }
  j["n_valid"] = report.n_valid;
  out << j.dump(2) << '\n';
}

}  // namespace gbpn
