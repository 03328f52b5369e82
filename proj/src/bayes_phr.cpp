#include "scr/bayes_phr.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "scr/stats.hpp"

namespace scr {

PhrData make_phr_data(const SemiCompDataset& d, H3Clock h3) {
  const int n = static_cast<int>(d.n());
  PhrData out;
  out.n = n;
  out.x = {d.cov.x1, d.cov.x2, d.cov.x3};
  out.covnames = {d.cov.names1, d.cov.names2, d.cov.names3};
  for (int g = 0; g < 3; ++g) {
    if (out.x[g].size() == 0) out.x[g].resize(n, 0);
    out.ev[g].resize(n);
    out.risk_lo[g].resize(n);
    out.risk_hi[g].resize(n);
  }
  out.cluster = d.cov.cluster;
  out.n_clusters = d.cov.n_clusters;
  for (int i = 0; i < n; ++i) {
    const auto& r = d.rec[i];
    out.ev[0][i] = r.event1;
    out.risk_lo[0][i] = 0;
    out.risk_hi[0][i] = r.time1;
    out.ev[1][i] = (1 - r.event1) * r.event2;
    out.risk_lo[1][i] = 0;
    out.risk_hi[1][i] = r.time1;
    out.ev[2][i] = r.event1 * r.event2;
    if (h3 == H3Clock::Markov) {
      out.risk_lo[2][i] = r.time1;
      out.risk_hi[2][i] = r.time2;
    } else {
      out.risk_lo[2][i] = 0;
      out.risk_hi[2][i] = r.time2 - r.time1;
    }
  }
  return out;
}

Eigen::VectorXd phr_eta(const PhrData& d, const PhrState& st, int g) {
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(d.n);
  if (d.x[g].cols() > 0) eta = d.x[g] * st.beta[g];
  if (!d.cluster.empty() && st.v.rows() == d.n_clusters)
    for (int i = 0; i < d.n; ++i) eta[i] += st.v(d.cluster[i], g);
  return eta;
}

Eigen::VectorXd weibull_cumhaz(const PhrData& d, const PhrState& st, int g) {
  const double a = st.alpha[g], k = st.kappa[g];
  Eigen::VectorXd out(d.n);
  for (int i = 0; i < d.n; ++i)
    out[i] = k * (std::pow(d.risk_hi[g][i], a) - std::pow(d.risk_lo[g][i], a));
  return out;
}

static Eigen::VectorXd baseline_cumhaz(const PhrData& d, const PhrState& st,
                                       Baseline bl, int g) {
  if (bl == Baseline::Weibull) return weibull_cumhaz(d, st, g);
  return pem_cumhaz(st.pem[g], d.risk_lo[g], d.risk_hi[g]);
}

double phr_loglik_g(const PhrData& d, const PhrState& st, Baseline bl, int g) {
  const Eigen::VectorXd eta = phr_eta(d, st, g);
  const Eigen::VectorXd cum = baseline_cumhaz(d, st, bl, g);
  double ll = 0;
  for (int i = 0; i < d.n; ++i) {
    if (d.ev[g][i] > 0.5) {
      const double t = d.risk_hi[g][i];
      const double lh = (bl == Baseline::Weibull)
                            ? std::log(st.alpha[g]) + std::log(st.kappa[g]) +
                                  (st.alpha[g] - 1) * std::log(t)
                            : pem_loghaz(st.pem[g], t);
      ll += lh + eta[i] + std::log(st.gamma[i]);
    }
    ll -= st.gamma[i] * std::exp(eta[i]) * cum[i];
  }
  return ll;
}

void gamma_posterior_params(const PhrData& d, const PhrState& st, Baseline bl,
                            Eigen::VectorXd& shape, Eigen::VectorXd& rate) {
  const double xi = 1.0 / st.theta;
  shape = Eigen::VectorXd::Constant(d.n, xi);
  rate = Eigen::VectorXd::Constant(d.n, xi);
  for (int g = 0; g < 3; ++g) {
    const Eigen::VectorXd eta = phr_eta(d, st, g);
    const Eigen::VectorXd cum = baseline_cumhaz(d, st, bl, g);
    for (int i = 0; i < d.n; ++i) {
      shape[i] += d.ev[g][i];
      rate[i] += std::exp(eta[i]) * cum[i];
    }
  }
}

void update_gamma(const PhrData& d, PhrState& st, Baseline bl, Rng& rng) {
  Eigen::VectorXd shape, rate;
  gamma_posterior_params(d, st, bl, shape, rate);
  for (int i = 0; i < d.n; ++i) st.gamma[i] = rng.rgamma(shape[i], rate[i]);
}

void kappa_posterior_params(const PhrData& d, const PhrState& st, const PHRHyper& hy,
                            int g, double& shape, double& rate) {
  const Eigen::VectorXd eta = phr_eta(d, st, g);
  const double a = st.alpha[g];
  shape = hy.kappa_a[g];
  rate = hy.kappa_b[g];
  for (int i = 0; i < d.n; ++i) {
    shape += d.ev[g][i];
    rate += st.gamma[i] * std::exp(eta[i]) *
            (std::pow(d.risk_hi[g][i], a) - std::pow(d.risk_lo[g][i], a));
  }
}

void update_kappa(const PhrData& d, PhrState& st, const PHRHyper& hy, int g, Rng& rng) {
  double shape, rate;
  kappa_posterior_params(d, st, hy, g, shape, rate);
  st.kappa[g] = rng.rgamma(shape, rate);
}

void update_sigma_v(PhrState& st, const PHRHyper& hy, Rng& rng) {
  const int nj = static_cast<int>(st.v.rows());
  Eigen::Matrix3d scale = hy.psi_v;
  for (int j = 0; j < nj; ++j) {
    const Eigen::Vector3d vj = st.v.row(j).transpose();
    scale += vj * vj.transpose();
  }
  st.sigma_v = rng.inv_wishart(scale, hy.rho_v + nj);
}

double log_accept_beta(const PhrData& d, const PhrState& st, Baseline bl, int g,
                       int coord, double proposal) {
  const Eigen::VectorXd eta = phr_eta(d, st, g);
  const Eigen::VectorXd cum = baseline_cumhaz(d, st, bl, g);
  const double db = proposal - st.beta[g][coord];
  double lr = 0;
  for (int i = 0; i < d.n; ++i) {
    const double de = d.x[g](i, coord) * db;
    if (d.ev[g][i] > 0.5) lr += de;
    lr -= st.gamma[i] * cum[i] * (std::exp(eta[i] + de) - std::exp(eta[i]));
  }
  return lr;
}

void update_beta(const PhrData& d, PhrState& st, Baseline bl, int g, double sd,
                 Rng& rng, std::pair<long, long>& acc) {
  for (int j = 0; j < st.beta[g].size(); ++j) {
    const double prop = st.beta[g][j] + rng.normal(0, sd);
    const double lr = log_accept_beta(d, st, bl, g, j, prop);
    ++acc.second;
    if (std::log(rng.unif01()) < lr) {
      st.beta[g][j] = prop;
      ++acc.first;
    }
  }
}

double log_accept_alpha(const PhrData& d, const PhrState& st, const PHRHyper& hy,
                        int g, double log_alpha_prop) {
  const double a0 = st.alpha[g], a1 = std::exp(log_alpha_prop);
  const Eigen::VectorXd eta = phr_eta(d, st, g);
  double lr = 0;
  for (int i = 0; i < d.n; ++i) {
    if (d.ev[g][i] > 0.5)
      lr += (log_alpha_prop - std::log(a0)) +
            (a1 - a0) * std::log(d.risk_hi[g][i]);
    const double d1 = std::pow(d.risk_hi[g][i], a1) - std::pow(d.risk_lo[g][i], a1);
    const double d0 = std::pow(d.risk_hi[g][i], a0) - std::pow(d.risk_lo[g][i], a0);
    lr -= st.gamma[i] * std::exp(eta[i]) * st.kappa[g] * (d1 - d0);
  }
  // Gamma(a, b) prior on alpha plus the log-scale Jacobian
  lr += hy.alpha_a[g] * (log_alpha_prop - std::log(a0)) - hy.alpha_b[g] * (a1 - a0);
  return lr;
}

void update_alpha(const PhrData& d, PhrState& st, const PHRHyper& hy, int g,
                  double sd, Rng& rng, std::pair<long, long>& acc) {
  const double prop = std::log(st.alpha[g]) + rng.normal(0, sd);
  const double lr = log_accept_alpha(d, st, hy, g, prop);
  ++acc.second;
  if (std::log(rng.unif01()) < lr) {
    st.alpha[g] = std::exp(prop);
    ++acc.first;
  }
}

double log_accept_theta(const PhrData& d, const PhrState& st, const PHRHyper& hy,
                        double log_theta_prop) {
  const double xi0 = 1.0 / st.theta, xi1 = std::exp(-log_theta_prop);
  double lr = 0;
  for (int i = 0; i < d.n; ++i) {
    const double lg = std::log(st.gamma[i]);
    lr += (xi1 * std::log(xi1) - std::lgamma(xi1) + (xi1 - 1) * lg - xi1 * st.gamma[i]) -
          (xi0 * std::log(xi0) - std::lgamma(xi0) + (xi0 - 1) * lg - xi0 * st.gamma[i]);
  }
  // Gamma(a, b) prior on the precision 1/theta; Jacobian of log(theta) -> 1/theta
  lr += hy.theta_a * (std::log(xi1) - std::log(xi0)) - hy.theta_b * (xi1 - xi0);
  return lr;
}

void update_theta(const PhrData& d, PhrState& st, const PHRHyper& hy, double sd,
                  Rng& rng, std::pair<long, long>& acc) {
  const double prop = std::log(st.theta) + rng.normal(0, sd);
  const double lr = log_accept_theta(d, st, hy, prop);
  ++acc.second;
  if (std::log(rng.unif01()) < lr) {
    st.theta = std::exp(prop);
    ++acc.first;
  }
}

double log_accept_v(const PhrData& d, const PhrState& st, Baseline bl, int j,
                    const Eigen::Vector3d& proposal) {
  const Eigen::Vector3d cur = st.v.row(j).transpose();
  double lr = 0;
  for (int g = 0; g < 3; ++g) {
    const Eigen::VectorXd eta = phr_eta(d, st, g);
    const Eigen::VectorXd cum = baseline_cumhaz(d, st, bl, g);
    const double dv = proposal[g] - cur[g];
    for (int i = 0; i < d.n; ++i) {
      if (d.cluster[i] != j) continue;
      if (d.ev[g][i] > 0.5) lr += dv;
      lr -= st.gamma[i] * cum[i] * (std::exp(eta[i] + dv) - std::exp(eta[i]));
    }
  }
  const Eigen::Matrix3d prec = st.sigma_v.inverse();
  lr += -0.5 * proposal.dot(prec * proposal) + 0.5 * cur.dot(prec * cur);
  return lr;
}

void update_v(const PhrData& d, PhrState& st, Baseline bl, double sd, Rng& rng,
              std::pair<long, long>& acc) {
  for (int j = 0; j < d.n_clusters; ++j) {
    Eigen::Vector3d prop = st.v.row(j).transpose();
    for (int g = 0; g < 3; ++g) prop[g] += rng.normal(0, sd);
    const double lr = log_accept_v(d, st, bl, j, prop);
    ++acc.second;
    if (std::log(rng.unif01()) < lr) {
      st.v.row(j) = prop.transpose();
      ++acc.first;
    }
  }
}

void update_lambda(const PhrData& d, PhrState& st, int g, double sd, Rng& rng,
                   std::pair<long, long>& acc) {
  PemTransition& pem = st.pem[g];
  Eigen::VectorXd events, exposure;
  pem_interval_stats(d, st, g, events, exposure);
  for (std::size_t k = 0; k < pem.lambda.size(); ++k) {
    const double prop = pem.lambda[k] + rng.normal(0, sd);
    const double lr =
        log_accept_lambda(pem, static_cast<int>(k), prop, events[k], exposure[k]);
    ++acc.second;
    if (std::log(rng.unif01()) < lr) {
      pem.lambda[k] = prop;
      ++acc.first;
    }
  }
}

PhrState init_start_values_phr(const PhrData& d, const ModelSpec& m, const PHRHyper& hy,
                               const PHRTuning& tn, Rng& rng) {
  PhrState st;
  st.gamma = Eigen::VectorXd::Ones(d.n);
  for (int g = 0; g < 3; ++g) {
    st.beta[g].resize(d.x[g].cols());
    for (int j = 0; j < st.beta[g].size(); ++j) st.beta[g][j] = rng.normal(0, 0.1);
    const double nev = d.ev[g].sum();
    const double expo = (d.risk_hi[g] - d.risk_lo[g]).sum();
    const double rate = std::max(nev, 0.5) / std::max(expo, 1e-8);
    if (m.baseline == Baseline::Weibull) {
      st.alpha[g] = std::exp(rng.normal(0, 0.1));
      st.kappa[g] = rate * std::exp(rng.normal(0, 0.1));
    } else {
      PemTransition& pem = st.pem[g];
      double smax = tn.s_max[g];
      if (smax <= 0) smax = d.risk_hi[g].maxCoeff();
      if (smax <= 0) smax = 1;
      pem.k = std::min(4, tn.k_max[g]);
      pem.s.clear();
      pem.lambda.clear();
      for (int k = 0; k <= pem.k; ++k) {
        pem.s.push_back(smax * (k + 1) / (pem.k + 1));
        pem.lambda.push_back(std::log(rate));
      }
      pem.s.back() = smax;
      pem.mu = std::log(rate);
      pem.sigma_sq = 1;
    }
  }
  if (m.frailty) {
    st.theta = 0.5;
    for (int tries = 0; tries < 100; ++tries) {
      const double xi = rng.rgamma(hy.theta_a, hy.theta_b);
      if (xi > 0.2 && xi < 10) {
        st.theta = 1.0 / xi;
        break;
      }
    }
  } else {
    st.theta = 0;
  }
  if (m.cluster == ClusterEffects::MVN) {
    st.v = Eigen::MatrixXd::Zero(d.n_clusters, 3);
    st.sigma_v = hy.psi_v / std::max(hy.rho_v - 4, 1.0);
  } else {
    st.v.resize(0, 3);
  }
  return st;
}

namespace {

struct ColumnPlan {
  std::vector<std::string> names;
  std::array<int, 3> k_max{0, 0, 0};
  std::array<double, 3> s_max{0, 0, 0};
  int n_gam = 0;
  bool store_v = false;
};

ColumnPlan plan_columns(const PhrData& d, const ModelSpec& m, const MCMCConfig& cfg,
                        const std::array<double, 3>& smax) {
  ColumnPlan plan;
  plan.s_max = smax;
  for (int g = 0; g < 3; ++g)
    for (const auto& nm : d.covnames[g])
      plan.names.push_back("beta" + std::to_string(g + 1) + ":" + nm);
  if (m.baseline == Baseline::Weibull) {
    for (int g = 0; g < 3; ++g) {
      plan.names.push_back("alpha" + std::to_string(g + 1));
      plan.names.push_back("kappa" + std::to_string(g + 1));
    }
  } else {
    for (int g = 0; g < 3; ++g) {
      const std::string sg = std::to_string(g + 1);
      plan.k_max[g] = cfg.tuning.k_max[g];
      plan.names.push_back("K" + sg);
      plan.names.push_back("mu_lambda" + sg);
      plan.names.push_back("sigmaSq_lambda" + sg);
      for (int k = 0; k <= plan.k_max[g]; ++k)
        plan.names.push_back("s" + sg + "." + std::to_string(k + 1));
      for (int k = 0; k <= plan.k_max[g]; ++k)
        plan.names.push_back("lambda" + sg + "." + std::to_string(k + 1));
      for (std::size_t j = 0; j < cfg.tuning.time_lambda[g].size(); ++j)
        plan.names.push_back("loghaz" + sg + "." + std::to_string(j + 1));
    }
  }
  if (m.frailty) {
    plan.names.push_back("theta");
    plan.n_gam = std::min<int>(cfg.n_gam_save, d.n);
    for (int i = 0; i < plan.n_gam; ++i)
      plan.names.push_back("gamma." + std::to_string(i + 1));
  }
  if (m.cluster == ClusterEffects::MVN) {
    plan.store_v = cfg.store_v;
    if (plan.store_v)
      for (int g = 0; g < 3; ++g)
        for (int j = 0; j < d.n_clusters; ++j)
          plan.names.push_back("V" + std::to_string(g + 1) + "." + std::to_string(j + 1));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        plan.names.push_back("SigmaV." + std::to_string(r + 1) + "." + std::to_string(c + 1));
  }
  return plan;
}

void store_row(Eigen::MatrixXd& draws, long row, const ColumnPlan& plan,
               const PhrData& d, const ModelSpec& m, const MCMCConfig& cfg,
               const PhrState& st) {
  long c = 0;
  for (int g = 0; g < 3; ++g)
    for (int j = 0; j < st.beta[g].size(); ++j) draws(row, c++) = st.beta[g][j];
  if (m.baseline == Baseline::Weibull) {
    for (int g = 0; g < 3; ++g) {
      draws(row, c++) = st.alpha[g];
      draws(row, c++) = st.kappa[g];
    }
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int g = 0; g < 3; ++g) {
      const PemTransition& pem = st.pem[g];
      draws(row, c++) = pem.k;
      draws(row, c++) = pem.mu;
      draws(row, c++) = pem.sigma_sq;
      for (int k = 0; k <= plan.k_max[g]; ++k)
        draws(row, c++) = k < static_cast<int>(pem.s.size()) ? pem.s[k] : nan;
      for (int k = 0; k <= plan.k_max[g]; ++k)
        draws(row, c++) = k < static_cast<int>(pem.lambda.size()) ? pem.lambda[k] : nan;
      for (double t : cfg.tuning.time_lambda[g]) draws(row, c++) = pem_loghaz(pem, t);
    }
  }
  if (m.frailty) {
    draws(row, c++) = st.theta;
    for (int i = 0; i < plan.n_gam; ++i) draws(row, c++) = st.gamma[i];
  }
  if (m.cluster == ClusterEffects::MVN) {
    if (plan.store_v)
      for (int g = 0; g < 3; ++g)
        for (int j = 0; j < d.n_clusters; ++j) draws(row, c++) = st.v(j, g);
    for (int r = 0; r < 3; ++r)
      for (int cc = 0; cc < 3; ++cc) draws(row, c++) = st.sigma_v(r, cc);
  }
}

enum class Block { Beta, BaselineBlk, Gamma, Theta, V, SigmaV };

ChainSamples run_chain(const PhrData& d, const ModelSpec& m, const PHRHyper& hy,
                       const MCMCConfig& cfg, const ColumnPlan& plan,
                       std::uint64_t chain_seed, std::uint64_t init_seed) {
  Rng rng(chain_seed);
  Rng init_rng(init_seed);
  PHRTuning tn = cfg.tuning;
  tn.s_max = plan.s_max;
  PhrState st = init_start_values_phr(d, m, hy, tn, init_rng);

  std::vector<Block> blocks;
  int pcov = 0;
  for (int g = 0; g < 3; ++g) pcov += static_cast<int>(d.x[g].cols());
  if (pcov > 0) blocks.push_back(Block::Beta);
  blocks.push_back(Block::BaselineBlk);
  if (m.frailty) {
    blocks.push_back(Block::Gamma);
    blocks.push_back(Block::Theta);
  }
  if (m.cluster == ClusterEffects::MVN) {
    blocks.push_back(Block::V);
    blocks.push_back(Block::SigmaV);
  }
  double rj_prob = 0;
  if (m.baseline == Baseline::PEM)
    rj_prob = tn.c_g[0] + tn.c_g[1] + tn.c_g[2];

  const long nburn = burnin_draws(cfg.num_reps, cfg.thin, cfg.burnin_perc);
  const long nkeep = retained_draws(cfg.num_reps, cfg.thin, cfg.burnin_perc);
  ChainSamples out;
  out.names = plan.names;
  out.draws.resize(nkeep, static_cast<long>(plan.names.size()));

  auto& acc = out.accept;
  auto slot = [&](const std::string& k) -> std::pair<long, long>& {
    return acc.emplace(k, std::pair<long, long>{0, 0}).first->second;
  };

  long ti = 0, stored = 0;
  for (long rep = 1; rep <= cfg.num_reps; ++rep) {
    const double u = rng.unif01();
    if (u < rj_prob) {
      double accum = 0;
      int g = 2;
      const double target = u;
      for (int gg = 0; gg < 3; ++gg) {
        accum += tn.c_g[gg];
        if (target < accum) {
          g = gg;
          break;
        }
      }
      const RJResult r = update_partition(d, st, hy, tn, g, rng);
      auto& s = slot((r.attempted_birth ? "birth" : "death") + std::to_string(g + 1));
      ++s.second;
      if (r.accepted) ++s.first;
    } else {
      const Block b = blocks[rng.unif_int(0, static_cast<int>(blocks.size()) - 1)];
      switch (b) {
        case Block::Beta:
          for (int g = 0; g < 3; ++g)
            if (d.x[g].cols() > 0)
              update_beta(d, st, m.baseline, g, std::sqrt(tn.beta_var), rng,
                          slot("beta" + std::to_string(g + 1)));
          break;
        case Block::BaselineBlk:
          for (int g = 0; g < 3; ++g) {
            if (m.baseline == Baseline::Weibull) {
              update_alpha(d, st, hy, g, std::sqrt(tn.alpha_var[g]), rng,
                           slot("alpha" + std::to_string(g + 1)));
              update_kappa(d, st, hy, g, rng);
            } else {
              update_lambda(d, st, g, std::sqrt(tn.lambda_var), rng,
                            slot("lambda" + std::to_string(g + 1)));
              update_pem_mu_sigma(st.pem[g], hy, g, rng);
            }
          }
          break;
        case Block::Gamma:
          update_gamma(d, st, m.baseline, rng);
          break;
        case Block::Theta:
          update_theta(d, st, hy, std::sqrt(tn.theta_var), rng, slot("theta"));
          break;
        case Block::V:
          update_v(d, st, m.baseline, std::sqrt(tn.v_var), rng, slot("V"));
          break;
        case Block::SigmaV:
          update_sigma_v(st, hy, rng);
          break;
      }
    }
    if (rep % cfg.thin == 0) {
      ++ti;
      if (ti > nburn && stored < nkeep)
        store_row(out.draws, stored++, plan, d, m, cfg, st);
    }
  }
  return out;
}

}  // namespace

PosteriorSamples mcmc_phr(const SemiCompDataset& d, const ModelSpec& m,
                          const PHRHyper& hy, const MCMCConfig& cfg,
                          std::uint64_t seed) {
  ModelSpec spec = m;
  spec.inference = Inference::Bayesian;
  spec.analysis = Analysis::IllnessDeath;
  check_model_spec(spec);
  if (spec.baseline != Baseline::Weibull && spec.baseline != Baseline::PEM)
    throw ConfigError("hazard-regression sampler: baseline must be Weibull or piecewise constant");
  {
    const auto viols = validate(d);
    if (!viols.empty())
      throw DataError("row " + std::to_string(viols.front().row) + ": " +
                      viols.front().message);
  }
  for (std::size_t i = 0; i < d.n(); ++i) {
    const auto& r = d.rec[i];
    if ((r.event1 > 0.5 && r.time1 <= 0) || (r.event2 > 0.5 && r.time2 <= 0))
      throw DataError("row " + std::to_string(i + 1) + ": event times must be positive");
  }
  if (cfg.num_reps < 1 || cfg.thin < 1) throw ConfigError("numReps and thin must be positive");
  if (cfg.burnin_perc < 0 || cfg.burnin_perc >= 1)
    throw ConfigError("burninPerc must lie in [0, 1)");
  if (retained_draws(cfg.num_reps, cfg.thin, cfg.burnin_perc) < 1)
    throw ConfigError("numReps, thin and burninPerc leave no retained draws");
  if (cfg.n_chains < 1) throw ConfigError("at least one chain is required");
  if (spec.cluster == ClusterEffects::MVN && d.cov.cluster.empty())
    throw ConfigError("clustered model requires a cluster column");

  const PhrData data = make_phr_data(d, spec.h3);
  std::array<double, 3> smax{0, 0, 0};
  if (spec.baseline == Baseline::PEM) {
    const double csum = cfg.tuning.c_g[0] + cfg.tuning.c_g[1] + cfg.tuning.c_g[2];
    // rounding slack so the default 0.2 + 0.2 + 0.2 budget passes
    if (cfg.tuning.c_g[0] < 0 || cfg.tuning.c_g[1] < 0 || cfg.tuning.c_g[2] < 0 ||
        csum > 0.6 + 1e-12)
      throw ConfigError("split-move probabilities must be nonnegative and sum to at most 0.6");
    for (int g = 0; g < 3; ++g) {
      if (cfg.tuning.k_max[g] < 0) throw ConfigError("Kmax must be nonnegative");
      if (cfg.tuning.del_pert[g] <= 0 || cfg.tuning.del_pert[g] > 0.5)
        throw ConfigError("delPert must lie in (0, 0.5]");
      const double top = data.risk_hi[g].size() ? data.risk_hi[g].maxCoeff() : 0;
      smax[g] = cfg.tuning.s_max[g] > 0 ? cfg.tuning.s_max[g] : std::max(top, 1.0);
      if (smax[g] < top)
        throw ConfigError("sMax for transition " + std::to_string(g + 1) +
                          " is below the largest observed time");
    }
  }

  const ColumnPlan plan = plan_columns(data, spec, cfg, smax);

  PosteriorSamples out;
  out.info.num_reps = cfg.num_reps;
  out.info.thin = cfg.thin;
  out.info.burnin_perc = cfg.burnin_perc;
  out.info.seed = seed;
  out.info.model = spec.baseline == Baseline::Weibull ? "phr-weibull" : "phr-pem";
  out.info.s_max = smax;
  out.info.time_lambda = cfg.tuning.time_lambda;
  out.chains.resize(cfg.n_chains);
  for (int c = 0; c < cfg.n_chains; ++c)
    out.info.chain_seeds.push_back(derive_seed(seed, streams::kChainBase + c));

  const int nthreads = std::max(1, std::min(cfg.threads, cfg.n_chains));
  std::vector<std::thread> pool;
  auto work = [&](int c) {
    out.chains[c] = run_chain(data, spec, hy, cfg, plan, out.info.chain_seeds[c],
                              derive_seed(seed, streams::kInitBase + c));
  };
  if (nthreads == 1) {
    for (int c = 0; c < cfg.n_chains; ++c) work(c);
  } else {
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&, t]() {
        for (int c = t; c < cfg.n_chains; c += nthreads) work(c);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace scr
