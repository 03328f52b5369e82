#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace oracle {

namespace {

double dot_row(const Eigen::MatrixXd& x, std::size_t i, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t j = 0; j < b.size(); ++j)
    s += x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * b[j];
  return s;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double m, double b,
                        double fa, double fm, double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, m, b, fa, fm, fb, whole, tol, 60);
}

}  // namespace

double marginal_loglik(const scr::SemiCompDataset& d, scr::H3Clock h3, const IDParams& p) {
  double total = 0;
  const double xi = p.theta > 0 ? 1.0 / p.theta : 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    const auto& r = d.rec[i];
    const double eta1 = dot_row(d.cov.x1, i, p.beta1);
    const double eta2 = dot_row(d.cov.x2, i, p.beta2);
    const double eta3 = dot_row(d.cov.x3, i, p.beta3);
    const double d1 = r.event1, d2 = r.event2;
    const double dd = d1 + d2;

    auto haz = [&](int g, double t) {
      return p.alpha[g] * p.kappa[g] * std::pow(t, p.alpha[g] - 1.0);
    };
    auto chaz = [&](int g, double t) { return p.kappa[g] * std::pow(t, p.alpha[g]); };

    double log_c = 0;
    if (d1 == 1.0) log_c += std::log(haz(0, r.time1)) + eta1;
    if (d1 == 0.0 && d2 == 1.0) log_c += std::log(haz(1, r.time1)) + eta2;
    if (d1 == 1.0 && d2 == 1.0) {
      const double z = h3 == scr::H3Clock::Markov ? r.time2 : r.time2 - r.time1;
      log_c += std::log(haz(2, z)) + eta3;
    }
    double big_h = chaz(0, r.time1) * std::exp(eta1) + chaz(1, r.time1) * std::exp(eta2);
    if (h3 == scr::H3Clock::Markov)
      big_h += (chaz(2, r.time2) - chaz(2, r.time1)) * std::exp(eta3);
    else
      big_h += chaz(2, r.time2 - r.time1) * std::exp(eta3);

    if (p.theta == 0) {
      total += log_c - big_h;
      continue;
    }
    // log integrand of gamma^dd * exp(-gamma*H) * Gamma(gamma; xi, xi) at gamma = e^u
    auto w = [&](double u) {
      const double g = std::exp(u);
      return (xi + dd) * u - (big_h + xi) * g + xi * std::log(xi) - std::lgamma(xi);
    };
    const double u_star = std::log((xi + dd) / (big_h + xi));
    const double w_peak = w(u_star);
    double lo = u_star, hi = u_star;
    while (w(lo) > w_peak - 60.0 && u_star - lo < 400.0) lo -= 1.0;
    while (w(hi) > w_peak - 60.0 && hi - u_star < 400.0) hi += 1.0;
    auto f = [&](double u) { return std::exp(w(u) - w_peak); };
    const double integral = integrate(f, lo, hi, 1e-12);
    total += log_c + w_peak + std::log(integral);
  }
  return total;
}

std::array<double, 4> exp_category_probs(double k1, double k2, double k3, double c) {
  const double k12 = k1 + k2;
  if (std::fabs(k12 - k3) < 1e-9)
    throw std::invalid_argument("exp_category_probs: k1+k2 == k3 not supported");
  const double p_first = 1.0 - std::exp(-k12 * c);
  const double p10 = k1 * std::exp(-k3 * c) * (1.0 - std::exp(-(k12 - k3) * c)) / (k12 - k3);
  const double p11 = k1 / k12 * p_first - p10;
  const double p01 = k2 / k12 * p_first;
  const double p00 = std::exp(-k12 * c);
  return {p11, p10, p01, p00};
}

std::array<double, 4> brute_category_freqs(std::size_t n, const IDParams& p, double cens_lo,
                                           double cens_hi, std::uint32_t seed) {
  std::mt19937 eng(seed);  // deliberately a different engine than the library
  std::array<double, 4> counts{0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    double gam = 1.0;
    if (p.theta > 0) {
      std::gamma_distribution<double> gd(1.0 / p.theta, p.theta);
      gam = gd(eng);
    }
    auto draw = [&](int g) {
      std::exponential_distribution<double> ed(p.kappa[g] * gam);
      return std::pow(ed(eng), 1.0 / p.alpha[g]);
    };
    const double t1s = draw(0);
    const double t2s = draw(1);
    double t1, t2;
    if (t1s <= t2s) {
      t1 = t1s;
      t2 = t1s + draw(2);
    } else {
      t1 = std::numeric_limits<double>::infinity();
      t2 = t2s;
    }
    std::uniform_real_distribution<double> ud(cens_lo, cens_hi);
    const double c = cens_lo == cens_hi ? cens_lo : ud(eng);
    if (t1 < c && t2 < c)
      counts[0] += 1;
    else if (t1 < c)
      counts[1] += 1;
    else if (t2 < c)
      counts[2] += 1;
    else
      counts[3] += 1;
  }
  for (auto& x : counts) x /= static_cast<double>(n);
  return counts;
}

double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::fabs((static_cast<double>(i) + 1.0) / n - f));
    d = std::max(d, std::fabs(static_cast<double>(i) / n - f));
  }
  return d;
}

scr::SemiCompDataset aft_forward_simulate(std::size_t n, const scr::Covariates& cov,
                                          const AFTParams& p, double cens_lo, double cens_hi,
                                          std::uint32_t seed) {
  std::mt19937 eng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(cens_lo, cens_hi);
  scr::SemiCompDataset out;
  out.cov = cov;
  if (out.cov.x1.size() == 0) out.cov.x1.resize(static_cast<Eigen::Index>(n), 0);
  if (out.cov.x2.size() == 0) out.cov.x2.resize(static_cast<Eigen::Index>(n), 0);
  if (out.cov.x3.size() == 0) out.cov.x3.resize(static_cast<Eigen::Index>(n), 0);
  out.rec.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double gam = p.theta > 0 ? std::sqrt(p.theta) * nd(eng) : 0.0;
    const double m1 = dot_row(out.cov.x1, i, p.beta1) + gam + p.mu[0];
    const double m2 = dot_row(out.cov.x2, i, p.beta2) + gam + p.mu[1];
    const double m3 = dot_row(out.cov.x3, i, p.beta3) + gam + p.mu[2];
    const double t1s = std::exp(m1 + std::sqrt(p.sigma2[0]) * nd(eng));
    const double t2s = std::exp(m2 + std::sqrt(p.sigma2[1]) * nd(eng));
    double t1, t2;
    if (t1s <= t2s) {
      t1 = t1s;
      t2 = t1s + std::exp(m3 + std::sqrt(p.sigma2[2]) * nd(eng));
    } else {
      t1 = std::numeric_limits<double>::infinity();
      t2 = t2s;
    }
    const double c = cens_lo == cens_hi ? cens_lo : ud(eng);
    scr::SemiCompRecord r;
    if (t1 < c && t2 < c)
      r = {t1, 1, t2, 1};
    else if (t1 < c)
      r = {t1, 1, c, 0};
    else if (t2 < c && std::isinf(t1))
      r = {t2, 0, t2, 1};
    else
      r = {c, 0, c, 0};
    out.rec[i] = r;
  }
  return out;
}

}  // namespace oracle
