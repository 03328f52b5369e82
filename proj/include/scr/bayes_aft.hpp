#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scr/dataset.hpp"
#include "scr/posterior.hpp"
#include "scr/rng.hpp"

namespace scr {

struct AFTHyper {
  // inverse-Gamma (a, b) on the frailty variance theta
  double theta_a = 0.7, theta_b = 0.7;
  // inverse-Gamma (a, b) on each sigma_g^2
  std::array<double, 3> sigma_a{0.7, 0.7, 0.7}, sigma_b{0.7, 0.7, 0.7};
};

struct AFTTuning {
  double beta_var = 0.01;
  double mu_var = 0.1;
  double zeta_var = 0.1;   // on log(1/sigma^2)
  double gamma_var = 0.1;
};

struct AFTConfig {
  long num_reps = 10000;
  int thin = 10;
  double burnin_perc = 0.5;
  int n_chains = 1;
  int threads = 1;
  int n_gam_save = 0;
  int n_y1_save = 0;
  int n_y2_save = 0;
  int n_y1na_save = 0;
  AFTTuning tuning;
};

// Log-scale latent event times.  A subject is either on the "present" path
// (non-terminal event happened: z1 = log T1, w = log(T2 - T1), z2 = log of the
// competing terminal time that was pre-empted, z2 >= z1) or the "absent" path
// (z2 = log T2, z1 = log of the ruled-out non-terminal time, z1 >= z2).
struct AftSubject {
  bool present = true;
  double z1 = 0, z2 = 0, w = 0;  // w is meaningful only when present
};

struct AftState {
  std::array<Eigen::VectorXd, 3> beta;
  std::array<double, 3> mu{0, 0, 0};
  std::array<double, 3> sigma2{1, 1, 1};
  double theta = 0.5;
  Eigen::VectorXd gamma;
  std::vector<AftSubject> sub;
};

struct AftData {
  int n = 0;
  std::array<Eigen::MatrixXd, 3> x;
  std::array<std::vector<std::string>, 3> covnames;
  Eigen::VectorXd y1l, y1u, y2l, y2u, lt;
  // the same bounds in natural logs; log 0 = -Inf, log Inf = +Inf
  Eigen::VectorXd ly1l, ly1u, ly2l, ly2u, llt;
  std::vector<char> can_present, can_absent;
};

AftData make_aft_data(const IntervalDataset& d);

// mass of Normal(m, sd^2) on [lo, hi], as a log; -Inf when it underflows
double log_norm_interval_mass(double m, double sd, double lo, double hi);

AftState init_start_values_aft(const AftData& d, Rng& rng);

// one full imputation pass: optional path switch plus a refresh of the
// current path's latents for every subject
void impute_latent_times(const AftData& d, AftState& st, Rng& rng,
                         std::pair<long, long>* switch_acc = nullptr);

// throws DataError naming the first subject whose latents violate an
// interval, ordering, or truncation constraint
void aft_check_invariants(const AftData& d, const AftState& st);

double log_accept_aft_beta(const AftData& d, const AftState& st, int g, int coord,
                           double proposal);
double log_accept_aft_mu(const AftData& d, const AftState& st, int g, double proposal);
// zeta = log(1/sigma^2); the ratio includes the change-of-variables term
double log_accept_zeta(const AftData& d, const AftState& st, const AFTHyper& hy,
                       int g, double zeta_prop);
double log_accept_aft_gamma(const AftData& d, const AftState& st, int i,
                            double proposal);

void aft_update_beta(const AftData& d, AftState& st, const AFTTuning& tn, Rng& rng,
                     std::array<std::pair<long, long>, 3>& acc);
void aft_update_mu(const AftData& d, AftState& st, const AFTTuning& tn, Rng& rng,
                   std::array<std::pair<long, long>, 3>& acc);
void aft_update_zeta(const AftData& d, AftState& st, const AFTHyper& hy,
                     const AFTTuning& tn, Rng& rng,
                     std::array<std::pair<long, long>, 3>& acc);
void aft_update_gamma(const AftData& d, AftState& st, const AFTTuning& tn, Rng& rng,
                      std::pair<long, long>& acc);

// theta | gamma ~ inverse-Gamma(a + n/2, b + sum gamma_i^2 / 2); exposed as the
// Gamma parameters of the precision 1/theta
void theta_posterior_params(const AftState& st, const AFTHyper& hy, double& shape,
                            double& rate);
void aft_update_theta(AftState& st, const AFTHyper& hy, Rng& rng);

PosteriorSamples mcmc_aft(const IntervalDataset& d, const AFTHyper& hy,
                          const AFTConfig& cfg, std::uint64_t seed);

}  // namespace scr
