#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scr/dataset.hpp"
#include "scr/model.hpp"

namespace scr {

// Free-parameter layout for the Weibull illness-death likelihood.  All
// baseline parameters live on the log scale: a_g = log alpha_g,
// k_g = log kappa_g, h = log theta.  With fix_alpha the shapes are pinned
// to 1 (exponential sub-model) and the a_g slots disappear.
struct FreqLayout {
  int p1 = 0, p2 = 0, p3 = 0;
  bool frailty = true;
  bool fix_alpha = false;

  int width(int g) const {
    const int p = g == 1 ? p1 : g == 2 ? p2 : p3;
    return (fix_alpha ? 1 : 2) + p;
  }
  int offset(int g) const {
    int o = 0;
    for (int gg = 1; gg < g; ++gg) o += width(gg);
    return o;
  }
  int idx_a(int g) const { return offset(g); }  // only when !fix_alpha
  int idx_k(int g) const { return offset(g) + (fix_alpha ? 0 : 1); }
  int idx_beta(int g, int j) const { return idx_k(g) + 1 + j; }
  int idx_h() const { return offset(4); }
  int dim() const { return offset(4) + (frailty ? 1 : 0); }

  std::vector<std::string> names(const Covariates& cov) const;
};

// Precomputed data view consumed by the likelihood.
struct IDView {
  Eigen::VectorXd y1, y2, d1, d2;
  Eigen::VectorXd ly1, ly2, lz;  // guarded logs; lz is the transition-3 clock log
  Eigen::MatrixXd x1, x2, x3;
  H3Clock h3 = H3Clock::SemiMarkov;
};

IDView make_id_view(const SemiCompDataset& d, H3Clock h3);

// Marginal log-likelihood of the Weibull illness-death model; the shared
// Gamma frailty is integrated out analytically when layout.frailty is set.
double loglik_weibull_id(const Eigen::VectorXd& psi, const IDView& v, const FreqLayout& lay);
Eigen::VectorXd grad_loglik_weibull_id(const Eigen::VectorXd& psi, const IDView& v,
                                       const FreqLayout& lay);

struct FitOptions {
  int max_iter = 500;
  double tol = 1e-8;  // sup-norm of the score at the reported maximum
  bool fix_alpha = false;
};

struct FreqFit {
  std::vector<std::string> names;
  Eigen::VectorXd estimates;
  Eigen::MatrixXd covariance;
  bool covariance_ok = false;
  double loglik = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
  FreqLayout layout;
  ModelSpec model;
  std::vector<std::string> covnames1, covnames2, covnames3;
};

FreqFit fit_freq_id(const SemiCompDataset& d, const ModelSpec& m, const FitOptions& opt = {});

// Univariate Weibull proportional-hazards fit on right-censored data.
FreqFit fit_freq_univariate(const UniDataset& d, const FitOptions& opt = {});

struct CurvePoint {
  double t = 0, point = 0, lo = 0, hi = 0;
};

struct PredictedCurve {
  int g = 1;                 // transition
  std::string kind;          // "Surv" or "Haz"
  std::vector<CurvePoint> pts;
};

// Baseline survivor and hazard curves with pointwise delta-method intervals
// computed on log h(t) and log cumulative hazard.
std::vector<PredictedCurve> predict_baseline(const FreqFit& fit, const std::vector<double>& tgrid,
                                             double level = 0.95);

}  // namespace scr
