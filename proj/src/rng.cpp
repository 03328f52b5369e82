#include "scr/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "scr/stats.hpp"

namespace scr {

namespace {
std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s = h ^ (stream + 0x632be59bd9b4e019ULL);
  h = splitmix64(s);
  return splitmix64(s) ^ h;
}

double Rng::unif01() {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  double u = d(eng_);
  while (u <= 0.0) u = d(eng_);
  return u;
}

double Rng::unif(double a, double b) { return a + (b - a) * unif01(); }

long Rng::unif_int(long lo, long hi) {
  std::uniform_int_distribution<long> d(lo, hi);
  return d(eng_);
}

double Rng::normal(double mean, double sd) {
  std::normal_distribution<double> d(mean, sd);
  return d(eng_);
}

double Rng::rgamma(double shape, double rate) {
  std::gamma_distribution<double> d(shape, 1.0 / rate);
  return d(eng_);
}

double Rng::rexp(double rate) {
  std::exponential_distribution<double> d(rate);
  return d(eng_);
}

Eigen::VectorXd Rng::mvnormal(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("mvnormal: covariance not positive definite");
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(0.0, 1.0);
  return mean + llt.matrixL() * z;
}

Eigen::MatrixXd Rng::inv_wishart(const Eigen::MatrixXd& psi, double nu) {
  const Eigen::Index p = psi.rows();
  if (!(nu > static_cast<double>(p) - 1.0))
    throw std::invalid_argument("inv_wishart: nu too small");
  Eigen::LLT<Eigen::MatrixXd> psi_llt(psi);
  if (psi_llt.info() != Eigen::Success)
    throw std::invalid_argument("inv_wishart: scale matrix not positive definite");
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(p, p);
  const Eigen::MatrixXd psi_inv = psi_llt.solve(id);
  Eigen::LLT<Eigen::MatrixXd> inv_llt(psi_inv);
  const Eigen::MatrixXd l = inv_llt.matrixL();
  // Bartlett decomposition of Wishart(psi^{-1}, nu)
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(rgamma((nu - static_cast<double>(i)) / 2.0, 0.5));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = normal(0.0, 1.0);
  }
  const Eigen::MatrixXd la = l * a;
  const Eigen::MatrixXd w = la * la.transpose();
  Eigen::LLT<Eigen::MatrixXd> w_llt(w);
  return w_llt.solve(id);
}

namespace {

// draws from the standard normal restricted to [a, b] where the interval
// midpoint is <= 0 (so the CDF values are computed away from 1)
double trunc_std_lower(Rng& rng, double a, double b) {
  const double pa = std::isinf(a) ? 0.0 : norm_cdf(a);
  const double pb = norm_cdf(b);
  const double mass = pb - pa;
  if (mass > 1e-290) {
    double q = pa + rng.unif01() * mass;
    if (q <= 0.0) q = std::numeric_limits<double>::min();
    if (q >= 1.0) q = 1.0 - 1e-16;
    double x = norm_quantile(q);
    if (x < a) x = a;
    if (x > b) x = b;
    return x;
  }
  // Interval mass underflows: both bounds sit in the far lower tail.
  // Reflect and use the exponential rejection sampler for the upper tail.
  const double lo = -b;
  const double hi = -a;
  const double lam = 0.5 * (lo + std::sqrt(lo * lo + 4.0));
  for (int it = 0; it < 10000; ++it) {
    const double x = lo + rng.rexp(lam);
    if (x > hi) continue;
    const double d = x - lam;
    if (rng.unif01() <= std::exp(-0.5 * d * d)) return -x;
  }
  return -(std::isinf(hi) ? lo : 0.5 * (lo + hi));
}

}  // namespace

double Rng::trunc_normal(double mean, double sd, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("trunc_normal: empty interval");
  if (lo == hi) return lo;
  const double za = (lo - mean) / sd;
  const double zb = (hi - mean) / sd;
  double z;
  const double za0 = std::isinf(za) ? 0.0 : za;
  const double zb0 = std::isinf(zb) ? 0.0 : zb;
  if (za0 + zb0 > 0.0)
    z = -trunc_std_lower(*this, -zb, -za);
  else
    z = trunc_std_lower(*this, za, zb);
  double x = mean + sd * z;
  if (x < lo) x = lo;
  if (x > hi) x = hi;
  return x;
}

}  // namespace scr
