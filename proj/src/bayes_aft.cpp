#include "scr/bayes_aft.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "scr/stats.hpp"

namespace scr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sd_of(double var) { return std::sqrt(var); }

}  // namespace

AftData make_aft_data(const IntervalDataset& d) {
  const int n = static_cast<int>(d.n());
  AftData out;
  out.n = n;
  out.x = {d.cov.x1, d.cov.x2, d.cov.x3};
  out.covnames = {d.cov.names1, d.cov.names2, d.cov.names3};
  for (int g = 0; g < 3; ++g)
    if (out.x[g].size() == 0) out.x[g].resize(n, 0);
  for (Eigen::VectorXd* v : {&out.y1l, &out.y1u, &out.y2l, &out.y2u, &out.lt,
                             &out.ly1l, &out.ly1u, &out.ly2l, &out.ly2u, &out.llt})
    v->resize(n);
  out.can_present.resize(n);
  out.can_absent.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& r = d.rec[i];
    out.y1l[i] = r.y1l;
    out.y1u[i] = r.y1u;
    out.y2l[i] = r.y2l;
    out.y2u[i] = r.y2u;
    out.lt[i] = r.lt;
    out.ly1l[i] = std::log(r.y1l);
    out.ly1u[i] = std::log(r.y1u);
    out.ly2l[i] = std::log(r.y2l);
    out.ly2u[i] = std::log(r.y2u);
    out.llt[i] = std::log(r.lt);
    out.can_present[i] = std::max(r.y1l, r.lt) < r.y2u;
    out.can_absent[i] = std::isinf(r.y1u);
  }
  return out;
}

double log_norm_interval_mass(double m, double sd, double lo, double hi) {
  const double za = std::isinf(lo) && lo < 0 ? -kInf : (lo - m) / sd;
  const double zb = std::isinf(hi) && hi > 0 ? kInf : (hi - m) / sd;
  if (zb <= za) return -kInf;
  // evaluate in whichever tail keeps the difference accurate
  const double p = za > 0 ? norm_sf(za) - norm_sf(zb) : norm_cdf(zb) - norm_cdf(za);
  if (!(p > 0)) return -kInf;
  return std::log(p);
}

namespace {

struct SubjMeans {
  double m1, m2, m3, s1, s2, s3;
};

SubjMeans means_for(const AftData& d, const AftState& st, int i) {
  SubjMeans sm;
  const double g = st.gamma[i];
  sm.m1 = st.mu[0] + g + (d.x[0].cols() ? d.x[0].row(i).dot(st.beta[0]) : 0.0);
  sm.m2 = st.mu[1] + g + (d.x[1].cols() ? d.x[1].row(i).dot(st.beta[1]) : 0.0);
  sm.m3 = st.mu[2] + g + (d.x[2].cols() ? d.x[2].row(i).dot(st.beta[2]) : 0.0);
  sm.s1 = sd_of(st.sigma2[0]);
  sm.s2 = sd_of(st.sigma2[1]);
  sm.s3 = sd_of(st.sigma2[2]);
  return sm;
}

double tdraw(Rng& rng, double m, double sd, double lo, double hi, int subject) {
  if (lo > hi) {
    // bounds derived from the same degenerate observation can cross by
    // rounding; collapse those to a point instead of rejecting the subject
    if (lo - hi <= 1e-9 * std::max({1.0, std::fabs(lo), std::fabs(hi)}))
      return 0.5 * (lo + hi);
    throw DataError("imputation: empty interval for subject " +
                    std::to_string(subject + 1));
  }
  return rng.trunc_normal(m, sd, lo, hi);
}

// bounds of log T1 on the present path given the sojourn and the pre-empted
// terminal latent
void present_z1_bounds(const AftData& d, int i, double w, double z2c, double& lo,
                       double& hi) {
  lo = std::max(d.ly1l[i], d.llt[i]);
  hi = std::min(d.ly1u[i], z2c);
  const double ew = std::exp(w);
  if (d.y2l[i] - ew > 0) lo = std::max(lo, std::log(d.y2l[i] - ew));
  if (std::isfinite(d.y2u[i])) {
    const double gap = d.y2u[i] - ew;
    hi = gap > 0 ? std::min(hi, std::log(gap)) : -kInf;
  }
}

void sojourn_bounds(const AftData& d, int i, double z1, double& lo, double& hi) {
  const double t1 = std::exp(z1);
  lo = d.y2l[i] - t1 > 0 ? std::log(d.y2l[i] - t1) : -kInf;
  if (std::isfinite(d.y2u[i])) {
    const double gap = d.y2u[i] - t1;
    hi = gap > 0 ? std::log(gap) : -kInf;
  } else {
    hi = kInf;
  }
}

void refresh_present(const AftData& d, AftState& st, int i, const SubjMeans& sm,
                     Rng& rng) {
  AftSubject& s = st.sub[i];
  double lo, hi;
  present_z1_bounds(d, i, s.w, s.z2, lo, hi);
  s.z1 = tdraw(rng, sm.m1, sm.s1, lo, hi, i);
  sojourn_bounds(d, i, s.z1, lo, hi);
  s.w = tdraw(rng, sm.m3, sm.s3, lo, hi, i);
  s.z2 = tdraw(rng, sm.m2, sm.s2, s.z1, kInf, i);
}

void refresh_absent(const AftData& d, AftState& st, int i, const SubjMeans& sm,
                    Rng& rng) {
  AftSubject& s = st.sub[i];
  const double lo2 = std::max(d.ly2l[i], d.llt[i]);
  const double hi2 = std::min(d.ly2u[i], s.z1);
  s.z2 = tdraw(rng, sm.m2, sm.s2, lo2, hi2, i);
  s.z1 = tdraw(rng, sm.m1, sm.s1, std::max(s.z2, d.ly1l[i]), kInf, i);
}

// reversible jump between the two latent paths via independence proposals
// drawn from the truncated base model; the acceptance ratio reduces to a
// ratio of truncation masses
void try_switch(const AftData& d, AftState& st, int i, const SubjMeans& sm, Rng& rng,
                std::pair<long, long>* acc) {
  AftSubject& s = st.sub[i];
  if (s.present) {
    if (!d.can_absent[i]) return;
    if (acc) ++acc->second;
    const double lo2 = std::max(d.ly2l[i], d.llt[i]);
    const double lm2 = log_norm_interval_mass(sm.m2, sm.s2, lo2, d.ly2u[i]);
    if (std::isinf(lm2)) return;
    const double z2p = tdraw(rng, sm.m2, sm.s2, lo2, d.ly2u[i], i);
    const double lo1 = std::max(z2p, d.ly1l[i]);
    const double lm1 = log_norm_interval_mass(sm.m1, sm.s1, lo1, kInf);
    if (std::isinf(lm1)) return;
    const double z1p = tdraw(rng, sm.m1, sm.s1, lo1, kInf, i);

    const double c1lo = std::max(d.ly1l[i], d.llt[i]);
    const double c1hi = std::min(d.ly1u[i], d.ly2u[i]);
    double wlo, whi;
    sojourn_bounds(d, i, s.z1, wlo, whi);
    const double rev = log_norm_interval_mass(sm.m1, sm.s1, c1lo, c1hi) +
                       log_norm_interval_mass(sm.m3, sm.s3, wlo, whi) +
                       log_norm_interval_mass(sm.m2, sm.s2, s.z1, kInf);
    const double lr = (lm2 + lm1) - rev;
    if (std::log(rng.unif01()) < lr) {
      s.present = false;
      s.z1 = z1p;
      s.z2 = z2p;
      s.w = kNaN;
      if (acc) ++acc->first;
    }
  } else {
    if (!d.can_present[i]) return;
    if (acc) ++acc->second;
    const double c1lo = std::max(d.ly1l[i], d.llt[i]);
    const double c1hi = std::min(d.ly1u[i], d.ly2u[i]);
    const double lm1 = log_norm_interval_mass(sm.m1, sm.s1, c1lo, c1hi);
    if (std::isinf(lm1)) return;
    const double z1p = tdraw(rng, sm.m1, sm.s1, c1lo, c1hi, i);
    double wlo, whi;
    sojourn_bounds(d, i, z1p, wlo, whi);
    if (wlo > whi) return;
    const double lmw = log_norm_interval_mass(sm.m3, sm.s3, wlo, whi);
    if (std::isinf(lmw)) return;
    const double wp = tdraw(rng, sm.m3, sm.s3, wlo, whi, i);
    const double lm2c = log_norm_interval_mass(sm.m2, sm.s2, z1p, kInf);
    if (std::isinf(lm2c)) return;
    const double z2cp = tdraw(rng, sm.m2, sm.s2, z1p, kInf, i);

    const double lo2 = std::max(d.ly2l[i], d.llt[i]);
    const double rev = log_norm_interval_mass(sm.m2, sm.s2, lo2, d.ly2u[i]) +
                       log_norm_interval_mass(sm.m1, sm.s1,
                                              std::max(s.z2, d.ly1l[i]), kInf);
    const double lr = (lm1 + lmw + lm2c) - rev;
    if (std::log(rng.unif01()) < lr) {
      s.present = true;
      s.z1 = z1p;
      s.z2 = z2cp;
      s.w = wp;
      if (acc) ++acc->first;
    }
  }
}

}  // namespace

void impute_latent_times(const AftData& d, AftState& st, Rng& rng,
                         std::pair<long, long>* switch_acc) {
  for (int i = 0; i < d.n; ++i) {
    const SubjMeans sm = means_for(d, st, i);
    if (rng.unif01() < 0.5) try_switch(d, st, i, sm, rng, switch_acc);
    if (st.sub[i].present)
      refresh_present(d, st, i, sm, rng);
    else
      refresh_absent(d, st, i, sm, rng);
  }
}

void aft_check_invariants(const AftData& d, const AftState& st) {
  const double tol = 1e-9;
  for (int i = 0; i < d.n; ++i) {
    const AftSubject& s = st.sub[i];
    auto fail = [&](const std::string& what) {
      throw DataError("latent state violates " + what + " for subject " +
                      std::to_string(i + 1));
    };
    if (s.present) {
      if (!(s.z1 >= d.ly1l[i] - tol && s.z1 <= d.ly1u[i] + tol)) fail("the y1 interval");
      if (!(s.z1 >= d.llt[i] - tol)) fail("left truncation");
      const double t2 = std::exp(s.z1) + std::exp(s.w);
      if (!(t2 >= d.y2l[i] * (1 - 1e-9) - 1e-12 && t2 <= d.y2u[i] * (1 + 1e-9) + 1e-12))
        fail("the y2 interval");
      if (!(s.z2 >= s.z1 - tol)) fail("the competing-risk ordering");
    } else {
      if (!(s.z2 >= d.ly2l[i] - tol && s.z2 <= d.ly2u[i] + tol)) fail("the y2 interval");
      if (!(s.z2 >= d.llt[i] - tol)) fail("left truncation");
      if (!(s.z1 >= std::max(s.z2, d.ly1l[i]) - tol)) fail("the ruled-out ordering");
    }
  }
}

AftState init_start_values_aft(const AftData& d, Rng& rng) {
  AftState st;
  st.gamma = Eigen::VectorXd::Zero(d.n);
  st.theta = 0.5;
  st.sub.resize(d.n);
  for (int g = 0; g < 3; ++g) {
    st.beta[g].resize(d.x[g].cols());
    for (int j = 0; j < st.beta[g].size(); ++j) st.beta[g][j] = rng.normal(0, 0.1);
  }
  auto midpoint = [](double lo, double hi) {
    return std::isfinite(hi) ? 0.5 * (lo + hi) : (lo > 0 ? 2 * lo : 1.0);
  };
  for (int i = 0; i < d.n; ++i) {
    AftSubject& s = st.sub[i];
    if (std::isfinite(d.y1u[i])) {
      s.present = true;
      double t1 = midpoint(d.y1l[i], d.y1u[i]);
      if (std::isfinite(d.y2u[i])) {
        if (d.y1l[i] >= d.y2u[i])
          throw DataError("start values: no feasible latent times for subject " +
                          std::to_string(i + 1));
        t1 = std::min(t1, 0.5 * (d.y1l[i] + d.y2u[i]));
      }
      const double base = std::max(d.y2l[i], t1);
      const double t2 = std::isfinite(d.y2u[i]) ? 0.5 * (base + d.y2u[i]) : 2 * base;
      s.z1 = std::log(t1);
      s.w = std::log(t2 - t1);
      s.z2 = std::log(2 * t2);
    } else {
      s.present = false;
      const double t2 = midpoint(d.y2l[i], d.y2u[i]);
      s.z2 = std::log(t2);
      s.z1 = std::log(2 * std::max(t2, d.y1l[i]));
      s.w = kNaN;
    }
  }
  // moments of log midpoints give location/scale starts per transition
  for (int g = 0; g < 3; ++g) {
    std::vector<double> logs;
    for (int i = 0; i < d.n; ++i) {
      if (g == 0 && std::isfinite(d.y1u[i]))
        logs.push_back(std::log(midpoint(d.y1l[i], d.y1u[i])));
      else if (g == 1 && std::isfinite(d.y2u[i]))
        logs.push_back(std::log(midpoint(d.y2l[i], d.y2u[i])));
      else if (g == 2 && std::isfinite(d.y1u[i]) && std::isfinite(d.y2u[i])) {
        const double gap = midpoint(d.y2l[i], d.y2u[i]) - midpoint(d.y1l[i], d.y1u[i]);
        if (gap > 0) logs.push_back(std::log(gap));
      }
    }
    if (logs.empty())
      throw DataError("start values: no finite intervals for transition " +
                      std::to_string(g + 1));
    double mean = 0;
    for (double v : logs) mean += v;
    mean /= static_cast<double>(logs.size());
    st.mu[g] = mean;
    double var = 1;
    if (logs.size() > 1) {
      double ss = 0;
      for (double v : logs) ss += (v - mean) * (v - mean);
      var = ss / static_cast<double>(logs.size() - 1);
    }
    st.sigma2[g] = var > 0 && std::isfinite(var) ? var : 1.0;
  }
  return st;
}

namespace {

template <class F>
void for_each_carrier(const AftData& d, const AftState& st, int g, F&& f) {
  for (int i = 0; i < d.n; ++i) {
    if (g == 2 && !st.sub[i].present) continue;
    const double z = g == 0 ? st.sub[i].z1 : g == 1 ? st.sub[i].z2 : st.sub[i].w;
    f(i, z);
  }
}

double carrier_mean(const AftData& d, const AftState& st, int g, int i) {
  return st.mu[g] + st.gamma[i] +
         (d.x[g].cols() ? d.x[g].row(i).dot(st.beta[g]) : 0.0);
}

}  // namespace

double log_accept_aft_beta(const AftData& d, const AftState& st, int g, int coord,
                           double proposal) {
  const double db = proposal - st.beta[g][coord];
  double dss = 0;
  for_each_carrier(d, st, g, [&](int i, double z) {
    const double r = z - carrier_mean(d, st, g, i);
    const double rp = r - d.x[g](i, coord) * db;
    dss += rp * rp - r * r;
  });
  return -0.5 * dss / st.sigma2[g];
}

double log_accept_aft_mu(const AftData& d, const AftState& st, int g, double proposal) {
  const double dm = proposal - st.mu[g];
  double dss = 0;
  for_each_carrier(d, st, g, [&](int i, double z) {
    const double r = z - carrier_mean(d, st, g, i);
    const double rp = r - dm;
    dss += rp * rp - r * r;
  });
  return -0.5 * dss / st.sigma2[g];
}

double log_accept_zeta(const AftData& d, const AftState& st, const AFTHyper& hy,
                       int g, double zeta_prop) {
  const double zeta = -std::log(st.sigma2[g]);
  double ssr = 0;
  long ng = 0;
  for_each_carrier(d, st, g, [&](int i, double z) {
    const double r = z - carrier_mean(d, st, g, i);
    ssr += r * r;
    ++ng;
  });
  const double dv = zeta_prop - zeta;
  const double de = std::exp(zeta_prop) - std::exp(zeta);
  // Gaussian likelihood in the precision, inverse-Gamma prior on sigma^2,
  // and the Jacobian of the log transform
  return 0.5 * static_cast<double>(ng) * dv - 0.5 * ssr * de + hy.sigma_a[g] * dv -
         hy.sigma_b[g] * de;
}

double log_accept_aft_gamma(const AftData& d, const AftState& st, int i,
                            double proposal) {
  const double dg = proposal - st.gamma[i];
  double lr = 0;
  for (int g = 0; g < 3; ++g) {
    if (g == 2 && !st.sub[i].present) continue;
    const double z = g == 0 ? st.sub[i].z1 : g == 1 ? st.sub[i].z2 : st.sub[i].w;
    const double r = z - carrier_mean(d, st, g, i);
    const double rp = r - dg;
    lr += -0.5 * (rp * rp - r * r) / st.sigma2[g];
  }
  lr += -0.5 * (proposal * proposal - st.gamma[i] * st.gamma[i]) / st.theta;
  return lr;
}

void aft_update_beta(const AftData& d, AftState& st, const AFTTuning& tn, Rng& rng,
                     std::array<std::pair<long, long>, 3>& acc) {
  for (int g = 0; g < 3; ++g)
    for (int j = 0; j < st.beta[g].size(); ++j) {
      const double prop = st.beta[g][j] + rng.normal(0, std::sqrt(tn.beta_var));
      const double lr = log_accept_aft_beta(d, st, g, j, prop);
      ++acc[g].second;
      if (std::log(rng.unif01()) < lr) {
        st.beta[g][j] = prop;
        ++acc[g].first;
      }
    }
}

void aft_update_mu(const AftData& d, AftState& st, const AFTTuning& tn, Rng& rng,
                   std::array<std::pair<long, long>, 3>& acc) {
  for (int g = 0; g < 3; ++g) {
    const double prop = st.mu[g] + rng.normal(0, std::sqrt(tn.mu_var));
    const double lr = log_accept_aft_mu(d, st, g, prop);
    ++acc[g].second;
    if (std::log(rng.unif01()) < lr) {
      st.mu[g] = prop;
      ++acc[g].first;
    }
  }
}

void aft_update_zeta(const AftData& d, AftState& st, const AFTHyper& hy,
                     const AFTTuning& tn, Rng& rng,
                     std::array<std::pair<long, long>, 3>& acc) {
  for (int g = 0; g < 3; ++g) {
    const double zeta = -std::log(st.sigma2[g]);
    const double prop = zeta + rng.normal(0, std::sqrt(tn.zeta_var));
    const double lr = log_accept_zeta(d, st, hy, g, prop);
    ++acc[g].second;
    if (std::log(rng.unif01()) < lr) {
      st.sigma2[g] = std::exp(-prop);
      ++acc[g].first;
    }
  }
}

void aft_update_gamma(const AftData& d, AftState& st, const AFTTuning& tn, Rng& rng,
                      std::pair<long, long>& acc) {
  for (int i = 0; i < d.n; ++i) {
    const double prop = st.gamma[i] + rng.normal(0, std::sqrt(tn.gamma_var));
    const double lr = log_accept_aft_gamma(d, st, i, prop);
    ++acc.second;
    if (std::log(rng.unif01()) < lr) {
      st.gamma[i] = prop;
      ++acc.first;
    }
  }
}

void theta_posterior_params(const AftState& st, const AFTHyper& hy, double& shape,
                            double& rate) {
  shape = hy.theta_a + 0.5 * static_cast<double>(st.gamma.size());
  rate = hy.theta_b + 0.5 * st.gamma.squaredNorm();
}

void aft_update_theta(AftState& st, const AFTHyper& hy, Rng& rng) {
  double shape, rate;
  theta_posterior_params(st, hy, shape, rate);
  st.theta = 1.0 / rng.rgamma(shape, rate);
}

namespace {

struct AftPlan {
  std::vector<std::string> names;
  int n_gam = 0, n_y1 = 0, n_y2 = 0, n_y1na = 0;
};

AftPlan plan_columns_aft(const AftData& d, const AFTConfig& cfg) {
  AftPlan plan;
  for (int g = 0; g < 3; ++g)
    for (const auto& nm : d.covnames[g])
      plan.names.push_back("beta" + std::to_string(g + 1) + ":" + nm);
  for (int g = 0; g < 3; ++g) plan.names.push_back("mu" + std::to_string(g + 1));
  for (int g = 0; g < 3; ++g) plan.names.push_back("sigmaSq" + std::to_string(g + 1));
  plan.names.push_back("theta");
  plan.n_gam = std::min(cfg.n_gam_save, d.n);
  plan.n_y1 = std::min(cfg.n_y1_save, d.n);
  plan.n_y2 = std::min(cfg.n_y2_save, d.n);
  plan.n_y1na = std::min(cfg.n_y1na_save, d.n);
  for (int i = 0; i < plan.n_gam; ++i)
    plan.names.push_back("gamma." + std::to_string(i + 1));
  for (int i = 0; i < plan.n_y1; ++i)
    plan.names.push_back("y1." + std::to_string(i + 1));
  for (int i = 0; i < plan.n_y2; ++i)
    plan.names.push_back("y2." + std::to_string(i + 1));
  for (int i = 0; i < plan.n_y1na; ++i)
    plan.names.push_back("y1NA." + std::to_string(i + 1));
  return plan;
}

void store_row_aft(Eigen::MatrixXd& draws, long row, const AftPlan& plan,
                   const AftState& st) {
  long c = 0;
  for (int g = 0; g < 3; ++g)
    for (int j = 0; j < st.beta[g].size(); ++j) draws(row, c++) = st.beta[g][j];
  for (int g = 0; g < 3; ++g) draws(row, c++) = st.mu[g];
  for (int g = 0; g < 3; ++g) draws(row, c++) = st.sigma2[g];
  draws(row, c++) = st.theta;
  for (int i = 0; i < plan.n_gam; ++i) draws(row, c++) = st.gamma[i];
  for (int i = 0; i < plan.n_y1; ++i) {
    const auto& s = st.sub[i];
    draws(row, c++) = s.present ? std::exp(s.z1) : kNaN;
  }
  for (int i = 0; i < plan.n_y2; ++i) {
    const auto& s = st.sub[i];
    draws(row, c++) = s.present ? std::exp(s.z1) + std::exp(s.w) : std::exp(s.z2);
  }
  for (int i = 0; i < plan.n_y1na; ++i)
    draws(row, c++) = st.sub[i].present ? 0.0 : 1.0;
}

enum class AftBlock { Beta, Mu, Zeta, Gamma, Theta };

ChainSamples run_chain_aft(const AftData& d, const AFTHyper& hy, const AFTConfig& cfg,
                           const AftPlan& plan, std::uint64_t chain_seed,
                           std::uint64_t init_seed) {
  Rng rng(chain_seed);
  Rng init_rng(init_seed);
  AftState st = init_start_values_aft(d, init_rng);

  std::vector<AftBlock> blocks;
  int pcov = 0;
  for (int g = 0; g < 3; ++g) pcov += static_cast<int>(d.x[g].cols());
  if (pcov > 0) blocks.push_back(AftBlock::Beta);
  blocks.push_back(AftBlock::Mu);
  blocks.push_back(AftBlock::Zeta);
  blocks.push_back(AftBlock::Gamma);
  blocks.push_back(AftBlock::Theta);

  const long nburn = burnin_draws(cfg.num_reps, cfg.thin, cfg.burnin_perc);
  const long nkeep = retained_draws(cfg.num_reps, cfg.thin, cfg.burnin_perc);
  ChainSamples out;
  out.names = plan.names;
  out.draws.resize(nkeep, static_cast<long>(plan.names.size()));
  auto slot = [&](const std::string& k) -> std::pair<long, long>& {
    return out.accept.emplace(k, std::pair<long, long>{0, 0}).first->second;
  };
  std::array<std::pair<long, long>, 3> beta_acc{}, mu_acc{}, zeta_acc{};

  long ti = 0, stored = 0;
  for (long rep = 1; rep <= cfg.num_reps; ++rep) {
    impute_latent_times(d, st, rng, &slot("switch"));
    switch (blocks[rng.unif_int(0, static_cast<int>(blocks.size()) - 1)]) {
      case AftBlock::Beta:
        aft_update_beta(d, st, cfg.tuning, rng, beta_acc);
        break;
      case AftBlock::Mu:
        aft_update_mu(d, st, cfg.tuning, rng, mu_acc);
        break;
      case AftBlock::Zeta:
        aft_update_zeta(d, st, hy, cfg.tuning, rng, zeta_acc);
        break;
      case AftBlock::Gamma:
        aft_update_gamma(d, st, cfg.tuning, rng, slot("gamma"));
        break;
      case AftBlock::Theta:
        aft_update_theta(st, hy, rng);
        break;
    }
#ifndef NDEBUG
    aft_check_invariants(d, st);
#endif
    if (rep % cfg.thin == 0) {
      ++ti;
      if (ti > nburn && stored < nkeep) store_row_aft(out.draws, stored++, plan, st);
    }
  }
  for (int g = 0; g < 3; ++g) {
    out.accept["beta" + std::to_string(g + 1)] = beta_acc[g];
    out.accept["mu" + std::to_string(g + 1)] = mu_acc[g];
    out.accept["zeta" + std::to_string(g + 1)] = zeta_acc[g];
  }
  return out;
}

}  // namespace

PosteriorSamples mcmc_aft(const IntervalDataset& d, const AFTHyper& hy,
                          const AFTConfig& cfg, std::uint64_t seed) {
  {
    const auto viols = validate(d);
    if (!viols.empty())
      throw DataError("row " + std::to_string(viols.front().row) + ": " +
                      viols.front().message);
  }
  if (d.n() == 0) throw DataError("empty dataset");
  for (std::size_t i = 0; i < d.n(); ++i) {
    const auto& r = d.rec[i];
    if (r.y1u == 0 || r.y2u == 0)
      throw DataError("row " + std::to_string(i + 1) +
                      ": log-time model requires positive event times");
  }
  if (cfg.num_reps < 1 || cfg.thin < 1) throw ConfigError("numReps and thin must be positive");
  if (cfg.burnin_perc < 0 || cfg.burnin_perc >= 1)
    throw ConfigError("burninPerc must lie in [0, 1)");
  if (retained_draws(cfg.num_reps, cfg.thin, cfg.burnin_perc) < 1)
    throw ConfigError("numReps, thin and burninPerc leave no retained draws");
  if (cfg.n_chains < 1) throw ConfigError("at least one chain is required");
  if (cfg.tuning.beta_var <= 0 || cfg.tuning.mu_var <= 0 || cfg.tuning.zeta_var <= 0 ||
      cfg.tuning.gamma_var <= 0)
    throw ConfigError("proposal variances must be positive");

  const AftData data = make_aft_data(d);
  const AftPlan plan = plan_columns_aft(data, cfg);

  PosteriorSamples out;
  out.info.num_reps = cfg.num_reps;
  out.info.thin = cfg.thin;
  out.info.burnin_perc = cfg.burnin_perc;
  out.info.seed = seed;
  out.info.model = "aft-lognormal";
  out.chains.resize(cfg.n_chains);
  for (int c = 0; c < cfg.n_chains; ++c)
    out.info.chain_seeds.push_back(derive_seed(seed, streams::kChainBase + c));

  const int nthreads = std::max(1, std::min(cfg.threads, cfg.n_chains));
  auto work = [&](int c) {
    out.chains[c] = run_chain_aft(data, hy, cfg, plan, out.info.chain_seeds[c],
                                  derive_seed(seed, streams::kInitBase + c));
  };
  if (nthreads == 1) {
    for (int c = 0; c < cfg.n_chains; ++c) work(c);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&, t]() {
        for (int c = t; c < cfg.n_chains; c += nthreads) work(c);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace scr
