#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "scr/bayes_aft.hpp"
#include "scr/dataset.hpp"
#include "scr/stats.hpp"
#include "support/oracles.hpp"

using namespace scr;
using Catch::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

IntervalDataset intervals(std::vector<IntervalRecord> rec) {
  IntervalDataset d;
  d.rec = std::move(rec);
  return d;
}

// feasible latents built by hand so kernels can run on data the moment-based
// start-value routine refuses (e.g. every record censored)
AftState flat_state(const AftData& d) {
  AftState st;
  for (int g = 0; g < 3; ++g) st.beta[g] = Eigen::VectorXd::Zero(d.x[g].cols());
  st.gamma = Eigen::VectorXd::Zero(d.n);
  st.theta = 0.5;
  st.sub.resize(d.n);
  for (int i = 0; i < d.n; ++i) {
    auto& s = st.sub[i];
    if (d.can_absent[i]) {
      s.present = false;
      const double lo = std::max(d.y2l[i], d.lt[i]);
      const double t2 =
          std::isfinite(d.y2u[i]) ? 0.5 * (lo + d.y2u[i]) : (lo > 0 ? 2 * lo : 1.0);
      s.z2 = std::log(t2);
      s.z1 = std::log(2 * std::max(t2, d.y1l[i]));
      s.w = std::numeric_limits<double>::quiet_NaN();
    } else {
      s.present = true;
      double t1 = std::isfinite(d.y1u[i]) ? 0.5 * (d.y1l[i] + d.y1u[i])
                                          : (d.y1l[i] > 0 ? 2 * d.y1l[i] : 1.0);
      if (t1 >= d.y2u[i]) t1 = 0.5 * (std::max(d.y1l[i], d.lt[i]) + d.y2u[i]);
      const double lo2 = std::max(d.y2l[i], t1);
      const double t2 = std::isfinite(d.y2u[i]) ? 0.5 * (lo2 + d.y2u[i]) : 2 * lo2;
      s.z1 = std::log(t1);
      s.w = std::log(t2 - t1);
      s.z2 = std::log(2 * t2);
    }
  }
  return st;
}

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("interval bounds carry to the log scale with the path flags") {
  const auto d = make_aft_data(intervals({
      {0.0, 2.0, 2.0, 4.0, 4.0},    // both events exact
      {0.0, 5.0, kInf, 5.0, kInf},  // censored at 5
      {0.0, 4.0, kInf, 4.0, 4.0},   // terminal only, exact
      {1.0, 3.0, 7.0, 3.0, 9.0},    // coarsened, left-truncated at 1
  }));
  CHECK(d.ly1l[0] == std::log(2.0));
  CHECK(d.ly1u[0] == std::log(2.0));
  CHECK(d.ly2u[1] == kInf);
  CHECK(d.llt[0] == -kInf);
  CHECK(d.llt[3] == 0.0);

  CHECK(d.can_present[0] == 1);
  CHECK(d.can_absent[0] == 0);  // the non-terminal event was observed
  CHECK(d.can_present[1] == 1);
  CHECK(d.can_absent[1] == 1);
  CHECK(d.can_present[2] == 0);  // y1 cannot precede the terminal time
  CHECK(d.can_absent[2] == 1);
  CHECK(d.can_present[3] == 1);
  CHECK(d.can_absent[3] == 0);
}

TEST_CASE("normal interval masses agree with the cdf in both tails") {
  CHECK(log_norm_interval_mass(0, 1, -kInf, kInf) == Approx(0.0).margin(1e-12));
  CHECK(log_norm_interval_mass(0, 1, -kInf, 0) == Approx(std::log(0.5)).margin(1e-12));
  CHECK(log_norm_interval_mass(0, 1, -1, 1) ==
        Approx(std::log(norm_cdf(1) - norm_cdf(-1))).margin(1e-12));
  // far right tail: difference of survival functions keeps precision
  const double got = log_norm_interval_mass(0, 1, 10, 11);
  const double want = std::log(norm_sf(10) - norm_sf(11));
  CHECK(got == Approx(want).epsilon(1e-10));
  CHECK(std::isfinite(log_norm_interval_mass(0, 1, 37, 38)));
  CHECK(log_norm_interval_mass(0, 1, 2, 2) == -kInf);
  CHECK(log_norm_interval_mass(0, 1, 3, 1) == -kInf);
  // translation and scale equivariance
  CHECK(log_norm_interval_mass(2, 3, -1, 5) ==
        Approx(log_norm_interval_mass(0, 1, -1.0, 1.0)).margin(1e-12));
}

TEST_CASE("start values sit at interval midpoints and satisfy the invariants") {
  const auto d = make_aft_data(intervals({
      {0.0, 2.0, 6.0, 8.0, 10.0},
      {0.0, 5.0, kInf, 5.0, kInf},
      {0.0, 4.0, kInf, 4.0, 4.0},
  }));
  Rng rng(1, 1);
  const AftState st = init_start_values_aft(d, rng);
  REQUIRE(st.sub.size() == 3);
  CHECK(st.sub[0].present);
  CHECK(std::exp(st.sub[0].z1) == Approx(4.0).margin(1e-12));
  CHECK(!st.sub[1].present);
  // semi-infinite interval starts at twice the lower bound
  CHECK(std::exp(st.sub[1].z2) == Approx(10.0).margin(1e-12));
  CHECK(std::exp(st.sub[2].z2) == Approx(4.0).margin(1e-9));
  CHECK_NOTHROW(aft_check_invariants(d, st));

  // reproducible per stream, different across streams
  Rng r2(1, 1), r3(1, 2);
  const AftState s2 = init_start_values_aft(d, r2);
  const AftState s3 = init_start_values_aft(d, r3);
  CHECK(st.beta[0].size() == 0);
  CHECK(s2.sub[0].z2 == st.sub[0].z2);
  CHECK(s3.theta == st.theta);

  // infeasible record: the non-terminal window opens after the terminal closes
  const auto bad = make_aft_data(intervals({{0.0, 5.0, 6.0, 1.0, 2.0}}));
  Rng r4(1, 3);
  CHECK_THROWS_WITH(init_start_values_aft(bad, r4),
                    Catch::Matchers::ContainsSubstring("subject 1"));
}

TEST_CASE("exact records pin their latent times through imputation") {
  const auto d = make_aft_data(intervals({
      {0.0, 2.0, 2.0, 4.0, 4.0},
      {0.0, 4.0, kInf, 4.0, 4.0},
  }));
  Rng rng(9, 1);
  AftState st = flat_state(d);
  for (int scan = 0; scan < 200; ++scan) {
    impute_latent_times(d, st, rng);
    aft_check_invariants(d, st);
    CHECK(st.sub[0].present);
    CHECK(st.sub[0].z1 == Approx(std::log(2.0)).margin(1e-9));
    CHECK(st.sub[0].w == Approx(std::log(2.0)).margin(1e-9));
    CHECK(st.sub[0].z2 >= st.sub[0].z1 - 1e-9);
    CHECK(!st.sub[1].present);
    CHECK(st.sub[1].z2 == Approx(std::log(4.0)).margin(1e-9));
    CHECK(st.sub[1].z1 >= st.sub[1].z2 - 1e-9);
  }
}

TEST_CASE("path switching is exercised on censored records") {
  std::vector<IntervalRecord> rec(30, {0.0, 2.0, kInf, 2.0, kInf});
  const auto d = make_aft_data(intervals(std::move(rec)));
  Rng rng(4, 1);
  AftState st = flat_state(d);
  std::pair<long, long> acc{0, 0};
  int present_seen = 0, absent_seen = 0;
  for (int scan = 0; scan < 300; ++scan) {
    impute_latent_times(d, st, rng, &acc);
    aft_check_invariants(d, st);
    for (const auto& s : st.sub) (s.present ? present_seen : absent_seen) += 1;
  }
  CHECK(acc.second > 0);
  CHECK(acc.first > 0);
  CHECK(present_seen > 0);
  CHECK(absent_seen > 0);
}

TEST_CASE("imputation keeps the invariants on randomized interval data") {
  std::mt19937 g(2024);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  std::bernoulli_distribution coin(0.5);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<IntervalRecord> rec;
    for (int i = 0; i < 8; ++i) {
      const double a = u(g), b = a + u(g);
      IntervalRecord r;
      r.lt = coin(g) ? 0.0 : 0.05;
      switch (i % 4) {
        case 0:  // both events, possibly coarsened
          r.y1l = a;
          r.y1u = coin(g) ? a : a + 0.3;
          r.y2l = b;
          r.y2u = coin(g) ? b : b + 0.4;
          break;
        case 1:  // non-terminal then censored
          r.y1l = a;
          r.y1u = a;
          r.y2l = b;
          r.y2u = kInf;
          break;
        case 2:  // terminal only
          r.y1l = b;
          r.y1u = kInf;
          r.y2l = b;
          r.y2u = coin(g) ? b : b + 0.2;
          break;
        default:  // censored
          r.y1l = a;
          r.y1u = kInf;
          r.y2l = a;
          r.y2u = kInf;
      }
      rec.push_back(r);
    }
    const IntervalDataset ds = intervals(std::move(rec));
    REQUIRE(validate(ds).empty());
    const auto d = make_aft_data(ds);
    Rng rng(100 + static_cast<std::uint64_t>(rep), 1);
    AftState st = flat_state(d);
    CHECK_NOTHROW(aft_check_invariants(d, st));
    for (int scan = 0; scan < 30; ++scan) {
      impute_latent_times(d, st, rng);
      CHECK_NOTHROW(aft_check_invariants(d, st));
    }
  }
}

TEST_CASE("one-sided truncated draws have the half-normal mean") {
  Rng rng(123);
  const int n = 1000000;
  double mean = 0;
  for (int i = 0; i < n; ++i) mean += rng.trunc_normal(0, 1, 0, kInf) / n;
  const double want = std::sqrt(2.0 / M_PI);
  const double sd = std::sqrt(1.0 - want * want);
  CHECK(mean == Approx(want).margin(3.5 * sd / std::sqrt(static_cast<double>(n))));
}

TEST_CASE("frailty variance full conditional matches the closed form") {
  AftState st;
  st.gamma.resize(2);
  st.gamma << 1.0, -1.0;
  AFTHyper hy;
  hy.theta_a = 0.5;
  hy.theta_b = 0.05;
  double shape = 0, rate = 0;
  theta_posterior_params(st, hy, shape, rate);
  CHECK(shape == Approx(1.5).margin(1e-14));
  CHECK(rate == Approx(1.05).margin(1e-14));

  Rng r1(8, 4), r2(8, 4);
  aft_update_theta(st, hy, r1);
  CHECK(st.theta == 1.0 / r2.rgamma(1.5, 1.05));
}

TEST_CASE("metropolis ratios vanish on identity proposals and are antisymmetric") {
  IntervalDataset ds = intervals({
      {0.0, 2.0, 2.0, 4.0, 4.0},
      {0.0, 5.0, kInf, 5.0, kInf},
      {0.0, 1.0, 3.0, 4.0, 6.0},
  });
  ds.cov.x1.resize(3, 1);
  ds.cov.x1 << 0.5, -0.5, 1.0;
  ds.cov.names1 = {"x"};
  const auto d = make_aft_data(ds);
  AftState st = flat_state(d);
  st.beta[0][0] = 0.2;
  st.mu = {0.1, 0.4, -0.3};
  st.sigma2 = {0.8, 1.2, 0.9};
  st.gamma << 0.05, -0.1, 0.2;
  AFTHyper hy;

  CHECK(log_accept_aft_beta(d, st, 0, 0, 0.2) == Approx(0.0).margin(1e-13));
  CHECK(log_accept_aft_mu(d, st, 1, 0.4) == Approx(0.0).margin(1e-13));
  CHECK(log_accept_zeta(d, st, hy, 2, -std::log(0.9)) == Approx(0.0).margin(1e-13));
  CHECK(log_accept_aft_gamma(d, st, 1, -0.1) == Approx(0.0).margin(1e-13));

  SECTION("beta antisymmetry") {
    const double fwd = log_accept_aft_beta(d, st, 0, 0, 0.6);
    AftState st2 = st;
    st2.beta[0][0] = 0.6;
    CHECK(fwd == Approx(-log_accept_aft_beta(d, st2, 0, 0, 0.2)).margin(1e-12));
  }
  SECTION("mu antisymmetry") {
    const double fwd = log_accept_aft_mu(d, st, 2, 0.25);
    AftState st2 = st;
    st2.mu[2] = 0.25;
    CHECK(fwd == Approx(-log_accept_aft_mu(d, st2, 2, -0.3)).margin(1e-12));
  }
  SECTION("zeta antisymmetry") {
    const double z0 = -std::log(st.sigma2[1]);
    const double fwd = log_accept_zeta(d, st, hy, 1, 0.7);
    AftState st2 = st;
    st2.sigma2[1] = std::exp(-0.7);
    CHECK(fwd == Approx(-log_accept_zeta(d, st2, hy, 1, z0)).margin(1e-12));
  }
  SECTION("gamma antisymmetry") {
    const double fwd = log_accept_aft_gamma(d, st, 0, 0.3);
    AftState st2 = st;
    st2.gamma[0] = 0.3;
    CHECK(fwd == Approx(-log_accept_aft_gamma(d, st2, 0, 0.05)).margin(1e-12));
  }
}

TEST_CASE("scale ratio matches the hand formula on one subject") {
  const auto d = make_aft_data(intervals({{0.0, 2.0, 2.0, 4.0, 4.0}}));
  AftState st = flat_state(d);
  REQUIRE(st.sub[0].present);
  st.mu = {0.1, 0.2, 0.3};
  st.sigma2 = {1.0, 1.0, 0.7};
  AFTHyper hy;
  // transition 3 carries the log sojourn of present subjects
  const double r = st.sub[0].w - (st.mu[2] + st.gamma[0]);
  const double zeta = -std::log(0.7), prop = 0.9;
  const double want = 0.5 * (prop - zeta) - 0.5 * r * r * (std::exp(prop) - std::exp(zeta)) +
                      hy.sigma_a[2] * (prop - zeta) -
                      hy.sigma_b[2] * (std::exp(prop) - std::exp(zeta));
  CHECK(log_accept_zeta(d, st, hy, 2, prop) == Approx(want).margin(1e-12));
}

TEST_CASE("with vacuous intervals the scale parameters keep their prior") {
  std::vector<IntervalRecord> rec(5, {0.0, 0.0, kInf, 0.0, kInf});
  const IntervalDataset ds = intervals(std::move(rec));
  const auto d = make_aft_data(ds);
  Rng rng(31, 1);
  AftState st = flat_state(d);
  AFTHyper hy;
  AFTTuning tn;
  tn.zeta_var = 1.5;
  std::array<std::pair<long, long>, 3> acc{};
  std::vector<double> draws;
  draws.reserve(30000);
  for (int it = 0; it < 30000; ++it) {
    impute_latent_times(d, st, rng);
    aft_update_zeta(d, st, hy, tn, rng, acc);
    draws.push_back(st.sigma2[0]);
  }
  CHECK(acc[0].first > 0);
  const double ks = oracle::ks_distance(std::move(draws), [&](double x) {
    return inv_gamma_cdf(x, hy.sigma_a[0], hy.sigma_b[0]);
  });
  CHECK(ks < 0.05);
}

TEST_CASE("the sampler is reproducible and labels its outputs") {
  Covariates cov;
  cov.x1.resize(20, 1);
  cov.x2.resize(20, 1);
  cov.x3.resize(20, 1);
  cov.names1 = cov.names2 = cov.names3 = {"x"};
  std::mt19937 g(10);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 20; ++i) {
    const double x = u(g);
    cov.x1(i, 0) = x;
    cov.x2(i, 0) = x;
    cov.x3(i, 0) = x;
  }
  oracle::AFTParams p;
  p.beta1 = {0.3};
  p.beta2 = {-0.2};
  p.beta3 = {0.1};
  p.mu = {0.5, 1.0, 0.2};
  p.sigma2 = {0.4, 0.4, 0.4};
  p.theta = 0.3;
  const SemiCompDataset sc = oracle::aft_forward_simulate(20, cov, p, 2.0, 6.0, 99);
  const IntervalDataset iv = to_interval_representation(sc);

  AFTHyper hy;
  AFTConfig cfg;
  cfg.num_reps = 1000;
  cfg.thin = 10;
  cfg.burnin_perc = 0.5;
  cfg.n_chains = 2;
  cfg.n_y1_save = 3;
  cfg.n_y2_save = 2;
  cfg.n_y1na_save = 2;
  cfg.n_gam_save = 2;
  const auto s1 = mcmc_aft(iv, hy, cfg, 55);
  const auto s2 = mcmc_aft(iv, hy, cfg, 55);
  const auto s3 = mcmc_aft(iv, hy, cfg, 56);
  REQUIRE(s1.chains.size() == 2);
  CHECK(s1.n_retained() == 50);
  // y1 columns hold NaN while a subject sits on the absent path, so compare bits
  CHECK(same_bits(s1.chains[0].draws, s2.chains[0].draws));
  CHECK(same_bits(s1.chains[1].draws, s2.chains[1].draws));
  CHECK(!same_bits(s1.chains[0].draws, s3.chains[0].draws));
  CHECK(s1.info.model == "aft-lognormal");
  for (const std::string nm :
       {"beta1:x", "beta2:x", "beta3:x", "mu1", "mu2", "mu3", "sigmaSq1", "sigmaSq2", "sigmaSq3",
        "theta", "gamma.1", "gamma.2", "y1.1", "y1.3", "y2.1", "y2.2", "y1NA.1", "y1NA.2"}) {
    INFO(nm);
    CHECK(s1.has(nm));
  }
  CHECK(!s1.has("y1.4"));
  for (double v : s1.pooled("sigmaSq2")) CHECK(v > 0);
  for (double v : s1.pooled("theta")) CHECK(v > 0);

  // stored latent y2 draws respect their subject's interval censoring
  const auto y2 = s1.pooled("y2.1");
  for (double v : y2) {
    CHECK(v >= iv.rec[0].y2l - 1e-9);
    if (std::isfinite(iv.rec[0].y2u)) CHECK(v <= iv.rec[0].y2u + 1e-9);
  }
}

TEST_CASE("posterior centers near the truth on exactly observed log-normal data") {
  const std::size_t n = 600;
  Covariates cov;
  oracle::AFTParams p;
  p.mu = {0.6, 1.2, 0.1};
  p.sigma2 = {0.3, 0.3, 0.3};
  p.theta = 0.0;
  const SemiCompDataset sc = oracle::aft_forward_simulate(n, cov, p, 40.0, 80.0, 7);
  const IntervalDataset iv = to_interval_representation(sc);
  AFTHyper hy;
  AFTConfig cfg;
  cfg.num_reps = 12000;
  cfg.thin = 10;
  cfg.burnin_perc = 0.5;
  cfg.tuning.mu_var = 0.01;
  const auto s = mcmc_aft(iv, hy, cfg, 5);
  const auto mu1 = s.pooled("mu1");
  const auto mu2 = s.pooled("mu2");
  CHECK(median_of(mu1) == Approx(0.6).margin(0.15));
  CHECK(median_of(mu2) == Approx(1.2).margin(0.15));
}
