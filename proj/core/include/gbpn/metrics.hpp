#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gbpn/depth_grid.hpp"

namespace gbpn {

inline const std::vector<double> kDefaultThetas{1.02, 1.05, 1.10, 1.25, 1.5625, 1.953125};
inline constexpr double kDefaultLossAlpha = 0.5;

// Per-sample evaluation against ground truth, or the mean of several.
struct EvalReport {
  double rmse = 0.0;   // m
  double mae = 0.0;    // m
  double irmse = 0.0;  // 1/m
  double imae = 0.0;   // 1/m
  double rel = 0.0;
  std::map<double, double> delta;  // theta -> fraction of pixels within theta
  std::optional<double> nll;       // probability-based loss, needs precisions
  std::size_t n_valid = 0;
  std::size_t n_inverse_skipped = 0;  // pixels left out of iRMSE / iMAE
};

struct EvalOptions {
  std::vector<double> thetas = kDefaultThetas;
  double alpha = kDefaultLossAlpha;
};

// Metrics over pixels with valid ground truth. Prediction pixels flagged
// invalid are scored as depth 0. Inverse metrics skip pixels where either
// depth is non-positive and count them in n_inverse_skipped.
EvalReport evaluate(const DepthGrid& pred_mu, const DepthGrid* pred_lambda, const DepthGrid& gt,
                    const EvalOptions& options = {});

// Normalised depth loss per valid pixel: (e^2 + alpha |e|) / max |e|, with
// e = mu - gt. All zeros when the prediction is exact.
std::vector<double> depth_loss_terms(const std::vector<double>& mu, const std::vector<double>& gt,
                                     double alpha);

// (1/n) sum(lambda_i * loss_i - log lambda_i); +inf if any lambda_i <= 0.
double probability_loss(const std::vector<double>& lambda, const std::vector<double>& loss_terms);

// Unweighted mean of every field; n_valid and n_inverse_skipped are summed.
// nll is averaged only when every report carries one.
EvalReport aggregate(const std::vector<EvalReport>& reports);

// key=value, one metric per line.
void write_report_text(std::ostream& out, const EvalReport& report);
// Single JSON object.
void write_report_json(std::ostream& out, const EvalReport& report);

std::string theta_key(double theta);

}  // namespace gbpn
