#include "scr/simulator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "scr/rng.hpp"

namespace scr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// inverse-CDF draw: S(t) = exp(-rate * t^alpha)
double weibull_time(double u, double alpha, double rate) {
  return std::pow(-std::log(u) / rate, 1.0 / alpha);
}

void check_truth(const WeibullIDTruth& t) {
  for (int g = 0; g < 3; ++g)
    if (!(t.alpha[g] > 0) || !(t.kappa[g] > 0))
      throw ConfigError("simulate: alpha and kappa must be positive");
  if (t.theta < 0) throw ConfigError("simulate: theta must be >= 0");
  if (t.cens_hi < t.cens_lo || t.cens_lo < 0)
    throw ConfigError("simulate: censoring window must satisfy 0 <= lower <= upper");
}

Eigen::MatrixXd normalize_x(const Eigen::MatrixXd& x, std::size_t n, const char* which) {
  if (x.size() == 0) return Eigen::MatrixXd(static_cast<Eigen::Index>(n), 0);
  if (x.rows() != static_cast<Eigen::Index>(n))
    throw ConfigError(std::string("simulate: ") + which + " has " + std::to_string(x.rows()) +
                      " rows, expected " + std::to_string(n));
  return x;
}

void check_beta(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, const char* which) {
  if (beta.size() != x.cols())
    throw ConfigError(std::string("simulate: ") + which + " coefficient length " +
                      std::to_string(beta.size()) + " does not match " +
                      std::to_string(x.cols()) + " covariate columns");
}

int check_cluster(const std::vector<int>& cluster, std::size_t n) {
  if (cluster.empty()) return 0;
  if (cluster.size() != n)
    throw ConfigError("simulate: cluster assignment length does not match n");
  int j_max = -1;
  for (const int j : cluster) {
    if (j < 0) throw ConfigError("simulate: cluster ids must be >= 0");
    j_max = std::max(j_max, j);
  }
  return j_max + 1;
}

}  // namespace

SemiCompDataset simulate_id(std::size_t n, const Covariates& cov, const WeibullIDTruth& truth,
                            std::uint64_t seed) {
  check_truth(truth);
  SemiCompDataset out;
  out.cov = cov;
  out.cov.x1 = normalize_x(cov.x1, n, "x1");
  out.cov.x2 = normalize_x(cov.x2, n, "x2");
  out.cov.x3 = normalize_x(cov.x3, n, "x3");
  check_beta(truth.beta1, out.cov.x1, "beta1");
  check_beta(truth.beta2, out.cov.x2, "beta2");
  check_beta(truth.beta3, out.cov.x3, "beta3");
  const int n_clusters = check_cluster(cov.cluster, n);
  out.cov.n_clusters = n_clusters;

  Rng rng_v(seed, streams::kClusterEffects);
  Rng rng_gam(seed, streams::kFrailty);
  Rng rng_t(seed, streams::kEventTimes);
  Rng rng_c(seed, streams::kCensoring);

  Eigen::MatrixXd v(n_clusters, 3);
  if (n_clusters > 0) {
    Eigen::LLT<Eigen::Matrix3d> llt(truth.sigma_v);
    if (llt.info() != Eigen::Success)
      throw ConfigError("simulate: sigma_v is not positive definite");
    const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
    for (int j = 0; j < n_clusters; ++j) v.row(j) = rng_v.mvnormal(zero, truth.sigma_v).transpose();
  }

  out.rec.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double log_gam = truth.theta > 0
                               ? std::log(rng_gam.rgamma(1.0 / truth.theta, 1.0 / truth.theta))
                               : 0.0;
    Eigen::Vector3d eta{log_gam, log_gam, log_gam};
    if (out.cov.x1.cols() > 0) eta[0] += out.cov.x1.row(i).dot(truth.beta1);
    if (out.cov.x2.cols() > 0) eta[1] += out.cov.x2.row(i).dot(truth.beta2);
    if (out.cov.x3.cols() > 0) eta[2] += out.cov.x3.row(i).dot(truth.beta3);
    if (n_clusters > 0) eta += v.row(cov.cluster[i]).transpose();

    // fixed draw count per subject keeps the stream aligned across variants
    const double u1 = rng_t.unif01();
    const double u2 = rng_t.unif01();
    const double u3 = rng_t.unif01();
    const double t1s = weibull_time(u1, truth.alpha[0], truth.kappa[0] * std::exp(eta[0]));
    const double t2s = weibull_time(u2, truth.alpha[1], truth.kappa[1] * std::exp(eta[1]));
    double t1, t2;
    if (t1s <= t2s) {
      t1 = t1s;
      t2 = t1s + weibull_time(u3, truth.alpha[2], truth.kappa[2] * std::exp(eta[2]));
    } else {
      t1 = kInf;
      t2 = t2s;
    }
    const double c = truth.cens_lo + (truth.cens_hi - truth.cens_lo) * rng_c.unif01();

    SemiCompRecord r;
    if (t1 < c) {
      if (t2 < c)
        r = {t1, 1, t2, 1};
      else
        r = {t1, 1, c, 0};
    } else if (std::isinf(t1) && t2 < c) {
      r = {t2, 0, t2, 1};
    } else {
      r = {c, 0, c, 0};
    }
    out.rec[i] = r;
  }
  return out;
}

UniDataset simulate_univariate(std::size_t n, const Eigen::MatrixXd& x,
                               const std::vector<std::string>& names,
                               const std::vector<int>& cluster, const WeibullUniTruth& truth,
                               std::uint64_t seed) {
  if (!(truth.alpha > 0) || !(truth.kappa > 0))
    throw ConfigError("simulate: alpha and kappa must be positive");
  if (truth.sigma_v2 < 0) throw ConfigError("simulate: sigma_v2 must be >= 0");
  if (truth.cens_hi < truth.cens_lo || truth.cens_lo < 0)
    throw ConfigError("simulate: censoring window must satisfy 0 <= lower <= upper");
  UniDataset out;
  out.x = normalize_x(x, n, "x");
  if (truth.beta.size() != out.x.cols())
    throw ConfigError("simulate: coefficient length does not match covariate columns");
  out.names = names;
  if (names.size() != static_cast<std::size_t>(out.x.cols()))
    throw ConfigError("simulate: covariate name count does not match columns");
  out.cluster = cluster;
  out.n_clusters = check_cluster(cluster, n);

  Rng rng_v(seed, streams::kClusterEffects);
  Rng rng_t(seed, streams::kEventTimes);
  Rng rng_c(seed, streams::kCensoring);

  std::vector<double> v(static_cast<std::size_t>(out.n_clusters));
  for (auto& vj : v) vj = rng_v.normal(0.0, std::sqrt(truth.sigma_v2));

  out.rec.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = out.x.cols() > 0 ? out.x.row(i).dot(truth.beta) : 0.0;
    if (out.n_clusters > 0) eta += v[static_cast<std::size_t>(cluster[i])];
    const double t = weibull_time(rng_t.unif01(), truth.alpha, truth.kappa * std::exp(eta));
    const double c = truth.cens_lo + (truth.cens_hi - truth.cens_lo) * rng_c.unif01();
    out.rec[i] = t < c ? UniRecord{t, 1} : UniRecord{c, 0};
  }
  return out;
}

}  // namespace scr
