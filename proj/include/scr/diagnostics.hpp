#pragma once

#include <string>
#include <vector>

#include "scr/freq.hpp"
#include "scr/posterior.hpp"

namespace scr {

// potential scale reduction factor over m >= 2 equal-length chains
double psrf(const std::vector<std::vector<double>>& chains);

struct SummaryRow {
  std::string name;
  double median = 0, lower = 0, upper = 0;
  double r_hat = std::numeric_limits<double>::quiet_NaN();  // NaN for one chain
  bool exp_scale = false;  // regression coefficient, also reported as exp()
  double e_median = 0, e_lower = 0, e_upper = 0;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;
  int n_chains = 0;
  long draws_per_chain = 0;
  std::vector<std::string> warnings;
};

SummaryTable summarize_posterior(const PosteriorSamples& s, double level = 0.95);

std::string format_summary(const SummaryTable& t);
void write_summary_csv(const std::string& path, const SummaryTable& t);

// Per-draw baseline hazard and survivor curves with pointwise quantile bands.
// Supports Weibull and piecewise-constant draws (by column detection).
std::vector<PredictedCurve> bayes_baseline_curves(const PosteriorSamples& s,
                                                  const std::vector<double>& tgrid,
                                                  double level = 0.95);

Table curve_to_table(const PredictedCurve& c);

}  // namespace scr
