#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scr/dataset.hpp"
#include "scr/freq.hpp"
#include "scr/model.hpp"
#include "scr/posterior.hpp"
#include "scr/rng.hpp"

namespace scr {

struct PHRHyper {
  // Gamma(a, b) on the frailty precision 1/theta
  double theta_a = 0.7, theta_b = 0.7;
  // Gamma shape/rate priors on the Weibull parameters, per transition
  std::array<double, 3> alpha_a{0.5, 0.5, 0.5}, alpha_b{0.01, 0.01, 0.01};
  std::array<double, 3> kappa_a{0.5, 0.5, 0.5}, kappa_b{0.01, 0.01, 0.01};
  // piecewise baseline: Gamma(a, b) on 1/sigma_lambda^2 and Poisson mean for K
  std::array<double, 3> pem_a{0.7, 0.7, 0.7}, pem_b{0.7, 0.7, 0.7};
  std::array<double, 3> pem_k_mean{10, 10, 10};
  // inverse-Wishart prior on the cluster covariance
  Eigen::Matrix3d psi_v = Eigen::Matrix3d::Identity();
  double rho_v = 7;
};

struct PHRTuning {
  double theta_var = 0.05;   // random-walk variance on log(theta)
  std::array<double, 3> alpha_var{0.01, 0.01, 0.01};  // on log(alpha_g)
  double beta_var = 0.01;    // per-coordinate random walk
  double v_var = 0.05;       // per-coordinate, cluster effect triple
  double lambda_var = 0.1;   // per-interval log-height walk
  std::array<double, 3> c_g{0.2, 0.2, 0.2};  // per-transition split-move budget
  std::array<double, 3> del_pert{0.5, 0.5, 0.5};
  int rj_scheme = 1;         // 1: integer grid, 2: observed event times
  std::array<int, 3> k_max{50, 50, 50};
  std::array<double, 3> s_max{0, 0, 0};  // 0: use the largest observed time
  std::array<std::vector<double>, 3> time_lambda;  // log-hazard report grids
};

struct MCMCConfig {
  long num_reps = 10000;
  int thin = 10;
  double burnin_perc = 0.5;
  int n_chains = 1;
  int threads = 1;
  int n_gam_save = 0;   // leading frailties to store
  bool store_v = false;
  PHRTuning tuning;
};

struct PemTransition {
  int k = 0;                   // number of interior split points
  std::vector<double> s;       // k+1 right endpoints, s.back() == s_max
  std::vector<double> lambda;  // k+1 log heights
  double mu = 0;
  double sigma_sq = 1;
};

struct PhrState {
  std::array<Eigen::VectorXd, 3> beta;
  std::array<double, 3> alpha{1, 1, 1};
  std::array<double, 3> kappa{1, 1, 1};
  std::array<PemTransition, 3> pem;
  double theta = 0.5;
  Eigen::VectorXd gamma;   // n, all ones when the frailty is off
  Eigen::MatrixXd v;       // clusters x 3
  Eigen::Matrix3d sigma_v = Eigen::Matrix3d::Identity();
};

// Per-transition view of an illness-death dataset: event indicator, the event
// time on the transition's clock, and the at-risk span [lo, hi] on that clock.
// Cumulative hazards over [lo, hi] are what every kernel consumes, which makes
// the Markov and semi-Markov clocks differ only here.
struct PhrData {
  int n = 0;
  std::array<Eigen::VectorXd, 3> ev, risk_lo, risk_hi;
  std::array<Eigen::MatrixXd, 3> x;
  std::vector<int> cluster;  // dense ids, empty when not clustered
  int n_clusters = 0;
  std::array<std::vector<std::string>, 3> covnames;
};

PhrData make_phr_data(const SemiCompDataset& d, H3Clock h3);

// linear predictor x_g beta_g + V_{cluster,g}
Eigen::VectorXd phr_eta(const PhrData& d, const PhrState& st, int g);
// Weibull cumulative baseline hazard over each subject's risk span
Eigen::VectorXd weibull_cumhaz(const PhrData& d, const PhrState& st, int g);
// piecewise-constant counterpart; spans past s_max extend the last height
Eigen::VectorXd pem_cumhaz(const PemTransition& pem, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi);
double pem_cumhaz1(const PemTransition& pem, double lo, double hi);
// log baseline hazard at the event time (only meaningful where ev == 1)
double pem_loghaz(const PemTransition& pem, double t);

// --- conjugate updates (posterior parameters exposed for testing) ---

// gamma_i | rest ~ Gamma(1/theta + d_i, 1/theta + H_i)
void gamma_posterior_params(const PhrData& d, const PhrState& st, Baseline bl,
                            Eigen::VectorXd& shape, Eigen::VectorXd& rate);
void update_gamma(const PhrData& d, PhrState& st, Baseline bl, Rng& rng);

// kappa_g | rest ~ Gamma(a + events, b + sum_i gamma_i e^eta (hi^alpha - lo^alpha))
void kappa_posterior_params(const PhrData& d, const PhrState& st, const PHRHyper& hy,
                            int g, double& shape, double& rate);
void update_kappa(const PhrData& d, PhrState& st, const PHRHyper& hy, int g, Rng& rng);

void update_sigma_v(PhrState& st, const PHRHyper& hy, Rng& rng);

// 1/sigma_lambda_g^2 ~ Gamma(a + (K+1)/2, b + sum_k (lambda_k - mu)^2 / 2)
void pem_sigma_posterior_params(const PemTransition& pem, const PHRHyper& hy, int g,
                                double& shape, double& rate);
// mu_lambda_g ~ N(mean(lambda), sigma^2 / (K+1))
void pem_mu_posterior_params(const PemTransition& pem, double& mean, double& var);
void update_pem_mu_sigma(PemTransition& pem, const PHRHyper& hy, int g, Rng& rng);

// --- Metropolis updates (log acceptance ratios exposed for testing) ---

double log_accept_beta(const PhrData& d, const PhrState& st, Baseline bl, int g,
                       int coord, double proposal);
void update_beta(const PhrData& d, PhrState& st, Baseline bl, int g, double sd,
                 Rng& rng, std::pair<long, long>& acc);

double log_accept_alpha(const PhrData& d, const PhrState& st, const PHRHyper& hy,
                        int g, double log_alpha_prop);
void update_alpha(const PhrData& d, PhrState& st, const PHRHyper& hy, int g,
                  double sd, Rng& rng, std::pair<long, long>& acc);

double log_accept_theta(const PhrData& d, const PhrState& st, const PHRHyper& hy,
                        double log_theta_prop);
void update_theta(const PhrData& d, PhrState& st, const PHRHyper& hy, double sd,
                  Rng& rng, std::pair<long, long>& acc);

double log_accept_v(const PhrData& d, const PhrState& st, Baseline bl, int j,
                    const Eigen::Vector3d& proposal);
void update_v(const PhrData& d, PhrState& st, Baseline bl, double sd, Rng& rng,
              std::pair<long, long>& acc);

// per-interval event counts and frailty-weighted exposures
void pem_interval_stats(const PhrData& d, const PhrState& st, int g,
                        Eigen::VectorXd& events, Eigen::VectorXd& exposure);
double log_accept_lambda(const PemTransition& pem, int k, double proposal,
                         double events_k, double exposure_k);
void update_lambda(const PhrData& d, PhrState& st, int g, double sd, Rng& rng,
                   std::pair<long, long>& acc);

// log density of the split-point configuration given K (even order statistics
// of 2K+1 uniforms on (0, s_max])
double log_partition_prior(int k, const std::vector<double>& s, double s_max);

// dimension-matching map between one height and two: the weighted-mean
// identity w_l*lam1 + w_r*lam2 = lam_old with perturbation u; merge recovers
// (lam_old, u) from (lam1, lam2)
void split_heights(double lam_old, double u, double w_l, double w_r,
                   double& lam1, double& lam2);
void merge_heights(double lam1, double lam2, double w_l, double w_r,
                   double& lam_old, double& u);

struct RJResult {
  bool attempted_birth = false, attempted_death = false;
  bool accepted = false;
  double log_ratio = -std::numeric_limits<double>::infinity();
};
// one birth/death move on transition g's partition
RJResult update_partition(const PhrData& d, PhrState& st, const PHRHyper& hy,
                          const PHRTuning& tn, int g, Rng& rng);

// transition-g log likelihood (given frailties and cluster effects)
double phr_loglik_g(const PhrData& d, const PhrState& st, Baseline bl, int g);

PhrState init_start_values_phr(const PhrData& d, const ModelSpec& m, const PHRHyper& hy,
                               const PHRTuning& tn, Rng& rng);

PosteriorSamples mcmc_phr(const SemiCompDataset& d, const ModelSpec& m,
                          const PHRHyper& hy, const MCMCConfig& cfg,
                          std::uint64_t seed);

}  // namespace scr
