#include <algorithm>
#include <cmath>

#include "scr/bayes_phr.hpp"
#include "scr/stats.hpp"

namespace scr {

double pem_loghaz(const PemTransition& pem, double t) {
  // heights extend past the last boundary
  for (std::size_t k = 0; k + 1 < pem.s.size(); ++k)
    if (t <= pem.s[k]) return pem.lambda[k];
  return pem.lambda.back();
}

double pem_cumhaz1(const PemTransition& pem, double lo, double hi) {
  if (hi <= lo) return 0;
  double total = 0, left = 0;
  for (std::size_t k = 0; k < pem.s.size(); ++k) {
    const double right = pem.s[k];
    const double ov = std::min(hi, right) - std::max(lo, left);
    if (ov > 0) total += std::exp(pem.lambda[k]) * ov;
    left = right;
  }
  const double beyond = std::max(0.0, hi - std::max(lo, pem.s.back()));
  if (beyond > 0) total += std::exp(pem.lambda.back()) * beyond;
  return total;
}

Eigen::VectorXd pem_cumhaz(const PemTransition& pem, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi) {
  Eigen::VectorXd out(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) out[i] = pem_cumhaz1(pem, lo[i], hi[i]);
  return out;
}

static void interval_stats_for(const PhrData& d, const Eigen::VectorXd& eta,
                               const Eigen::VectorXd& gamma, int g,
                               const std::vector<double>& s, Eigen::VectorXd& events,
                               Eigen::VectorXd& exposure) {
  const int nk = static_cast<int>(s.size());
  events = Eigen::VectorXd::Zero(nk);
  exposure = Eigen::VectorXd::Zero(nk);
  for (int i = 0; i < d.n; ++i) {
    const double w = gamma[i] * std::exp(eta[i]);
    const double lo = d.risk_lo[g][i], hi = d.risk_hi[g][i];
    double left = 0;
    for (int k = 0; k < nk; ++k) {
      const double right = s[k];
      const double ov = std::min(hi, right) - std::max(lo, left);
      if (ov > 0) exposure[k] += w * ov;
      left = right;
    }
    const double beyond = std::max(0.0, hi - std::max(lo, s.back()));
    if (beyond > 0) exposure[nk - 1] += w * beyond;
    if (d.ev[g][i] > 0.5) {
      const double t = hi;
      int k = nk - 1;
      for (int j = 0; j + 1 < nk; ++j)
        if (t <= s[j]) {
          k = j;
          break;
        }
      events[k] += 1;
    }
  }
}

void pem_interval_stats(const PhrData& d, const PhrState& st, int g,
                        Eigen::VectorXd& events, Eigen::VectorXd& exposure) {
  interval_stats_for(d, phr_eta(d, st, g), st.gamma, g, st.pem[g].s, events, exposure);
}

double log_accept_lambda(const PemTransition& pem, int k, double proposal,
                         double events_k, double exposure_k) {
  const double cur = pem.lambda[k];
  double lr = (proposal - cur) * events_k - (std::exp(proposal) - std::exp(cur)) * exposure_k;
  lr += -0.5 * (proposal - pem.mu) * (proposal - pem.mu) / pem.sigma_sq +
        0.5 * (cur - pem.mu) * (cur - pem.mu) / pem.sigma_sq;
  return lr;
}

void pem_sigma_posterior_params(const PemTransition& pem, const PHRHyper& hy, int g,
                                double& shape, double& rate) {
  shape = hy.pem_a[g] + 0.5 * static_cast<double>(pem.lambda.size());
  rate = hy.pem_b[g];
  for (double l : pem.lambda) rate += 0.5 * (l - pem.mu) * (l - pem.mu);
}

void pem_mu_posterior_params(const PemTransition& pem, double& mean, double& var) {
  const double nk = static_cast<double>(pem.lambda.size());
  double s = 0;
  for (double l : pem.lambda) s += l;
  mean = s / nk;
  var = pem.sigma_sq / nk;
}

void update_pem_mu_sigma(PemTransition& pem, const PHRHyper& hy, int g, Rng& rng) {
  double shape, rate;
  pem_sigma_posterior_params(pem, hy, g, shape, rate);
  pem.sigma_sq = 1.0 / rng.rgamma(shape, rate);
  double mean, var;
  pem_mu_posterior_params(pem, mean, var);
  pem.mu = rng.normal(mean, std::sqrt(var));
}

void split_heights(double lam_old, double u, double w_l, double w_r,
                   double& lam1, double& lam2) {
  const double r = std::log((1 - u) / u);
  lam1 = lam_old - w_r * r;
  lam2 = lam_old + w_l * r;
}

void merge_heights(double lam1, double lam2, double w_l, double w_r,
                   double& lam_old, double& u) {
  lam_old = w_l * lam1 + w_r * lam2;
  u = 1.0 / (1.0 + std::exp(-(lam1 - lam2)));
}

double log_partition_prior(int k, const std::vector<double>& s, double s_max) {
  // density of the even-order statistics of 2k+1 uniforms on (0, s_max]
  double lp = std::lgamma(2.0 * k + 2.0) - (2.0 * k + 1.0) * std::log(s_max);
  double left = 0;
  for (double right : s) {
    lp += std::log(right - left);
    left = right;
  }
  return lp;
}

namespace {

double normal_logpdf(double x, double m, double var) {
  return -0.5 * std::log(2 * M_PI * var) - 0.5 * (x - m) * (x - m) / var;
}

double pem_loglik_terms(const std::vector<double>& lambda, const Eigen::VectorXd& events,
                        const Eigen::VectorXd& exposure) {
  double ll = 0;
  for (std::size_t k = 0; k < lambda.size(); ++k)
    ll += lambda[k] * events[k] - std::exp(lambda[k]) * exposure[k];
  return ll;
}

// candidate split points: scheme 1 uses the integer grid 1..floor(sMax),
// scheme 2 the distinct observed event times on the transition's clock
std::vector<double> split_candidates(const PhrData& d, int g, int scheme, double s_max) {
  std::vector<double> out;
  if (scheme == 1) {
    const long top = static_cast<long>(std::floor(s_max));
    for (long v = 1; v <= top; ++v) out.push_back(static_cast<double>(v));
  } else {
    for (int i = 0; i < d.n; ++i)
      if (d.ev[g][i] > 0.5) out.push_back(d.risk_hi[g][i]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

}  // namespace

RJResult update_partition(const PhrData& d, PhrState& st, const PHRHyper& hy,
                          const PHRTuning& tn, int g, Rng& rng) {
  RJResult res;
  PemTransition& pem = st.pem[g];
  const double s_max = pem.s.back();
  const double del = tn.del_pert[g];
  const Eigen::VectorXd eta = phr_eta(d, st, g);
  const std::vector<double> cand = split_candidates(d, g, tn.rj_scheme, s_max);
  const double n_grid = static_cast<double>(cand.size());

  const bool birth = rng.unif01() < 0.5;
  if (birth) {
    res.attempted_birth = true;
    if (pem.k >= tn.k_max[g] || cand.empty()) return res;
    const double s_star = cand[rng.unif_int(0, static_cast<int>(cand.size()) - 1)];
    if (s_star <= 0 || s_star >= s_max) return res;
    if (std::find(pem.s.begin(), pem.s.end(), s_star) != pem.s.end()) return res;
    const double u = rng.unif(0.5 - del, 0.5 + del);

    std::size_t j = 0;
    while (pem.s[j] < s_star) ++j;
    const double s_l = j == 0 ? 0 : pem.s[j - 1];
    const double s_r = pem.s[j];
    const double w_l = (s_star - s_l) / (s_r - s_l);
    const double w_r = (s_r - s_star) / (s_r - s_l);
    const double lam_old = pem.lambda[j];
    double lam1, lam2;
    split_heights(lam_old, u, w_l, w_r, lam1, lam2);

    std::vector<double> s_new = pem.s, lam_new = pem.lambda;
    s_new.insert(s_new.begin() + j, s_star);
    lam_new[j] = lam1;
    lam_new.insert(lam_new.begin() + j + 1, lam2);

    Eigen::VectorXd ev0, ex0, ev1, ex1;
    interval_stats_for(d, eta, st.gamma, g, pem.s, ev0, ex0);
    interval_stats_for(d, eta, st.gamma, g, s_new, ev1, ex1);

    double lr = pem_loglik_terms(lam_new, ev1, ex1) - pem_loglik_terms(pem.lambda, ev0, ex0);
    lr += normal_logpdf(lam1, pem.mu, pem.sigma_sq) +
          normal_logpdf(lam2, pem.mu, pem.sigma_sq) -
          normal_logpdf(lam_old, pem.mu, pem.sigma_sq);
    lr += std::log(hy.pem_k_mean[g]) - std::log(pem.k + 1.0);
    lr += log_partition_prior(pem.k + 1, s_new, s_max) -
          log_partition_prior(pem.k, pem.s, s_max);
    lr += std::log(2 * del * n_grid) - std::log(pem.k + 1.0);
    lr -= std::log(u * (1 - u));
    res.log_ratio = lr;
    if (std::log(rng.unif01()) < lr) {
      pem.s = std::move(s_new);
      pem.lambda = std::move(lam_new);
      pem.k += 1;
      res.accepted = true;
    }
  } else {
    res.attempted_death = true;
    if (pem.k == 0) return res;
    const int j = rng.unif_int(0, pem.k - 1);
    const double s_star = pem.s[j];
    const double s_l = j == 0 ? 0 : pem.s[j - 1];
    const double s_r = pem.s[j + 1];
    const double lam1 = pem.lambda[j], lam2 = pem.lambda[j + 1];
    const double w_l = (s_star - s_l) / (s_r - s_l);
    const double w_r = (s_r - s_star) / (s_r - s_l);
    double lam_merged, u;
    merge_heights(lam1, lam2, w_l, w_r, lam_merged, u);
    res.log_ratio = -std::numeric_limits<double>::infinity();
    if (u <= 0.5 - del || u >= 0.5 + del) return res;  // no matching birth exists

    std::vector<double> s_new = pem.s, lam_new = pem.lambda;
    s_new.erase(s_new.begin() + j);
    lam_new[j] = lam_merged;
    lam_new.erase(lam_new.begin() + j + 1);

    Eigen::VectorXd ev0, ex0, ev1, ex1;
    interval_stats_for(d, eta, st.gamma, g, pem.s, ev0, ex0);
    interval_stats_for(d, eta, st.gamma, g, s_new, ev1, ex1);

    double lr = pem_loglik_terms(lam_new, ev1, ex1) - pem_loglik_terms(pem.lambda, ev0, ex0);
    lr += normal_logpdf(lam_merged, pem.mu, pem.sigma_sq) -
          normal_logpdf(lam1, pem.mu, pem.sigma_sq) -
          normal_logpdf(lam2, pem.mu, pem.sigma_sq);
    lr += std::log(static_cast<double>(pem.k)) - std::log(hy.pem_k_mean[g]);
    lr += log_partition_prior(pem.k - 1, s_new, s_max) -
          log_partition_prior(pem.k, pem.s, s_max);
    lr += std::log(static_cast<double>(pem.k)) - std::log(2 * del * n_grid);
    lr += std::log(u * (1 - u));
    res.log_ratio = lr;
    if (std::log(rng.unif01()) < lr) {
      pem.s = std::move(s_new);
      pem.lambda = std::move(lam_new);
      pem.k -= 1;
      res.accepted = true;
    }
  }
  return res;
}

}  // namespace scr
