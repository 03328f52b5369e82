#include "scr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "scr/bayes_phr.hpp"
#include "scr/stats.hpp"

namespace scr {

double psrf(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw ConfigError("PSRF needs at least two chains");
  const std::size_t n = chains.front().size();
  if (n < 2) throw ConfigError("PSRF needs at least two draws per chain");
  for (const auto& ch : chains)
    if (ch.size() != n) throw ConfigError("PSRF needs equal-length chains");

  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    double mu = 0;
    for (double v : chains[c]) mu += v;
    mu /= static_cast<double>(n);
    double ss = 0;
    for (double v : chains[c]) ss += (v - mu) * (v - mu);
    means[c] = mu;
    vars[c] = ss / static_cast<double>(n - 1);
  }
  double w = 0, grand = 0;
  for (std::size_t c = 0; c < m; ++c) {
    w += vars[c];
    grand += means[c];
  }
  w /= static_cast<double>(m);
  grand /= static_cast<double>(m);
  double bn = 0;  // B/n = variance of the chain means
  for (std::size_t c = 0; c < m; ++c) bn += (means[c] - grand) * (means[c] - grand);
  bn /= static_cast<double>(m - 1);

  if (w == 0) {
    for (std::size_t c = 1; c < m; ++c)
      if (means[c] != means[0]) return std::numeric_limits<double>::infinity();
    return 1.0;
  }
  const double nn = static_cast<double>(n);
  const double vhat = (nn - 1) / nn * w + bn;
  return std::sqrt(vhat / w);
}

SummaryTable summarize_posterior(const PosteriorSamples& s, double level) {
  if (s.chains.empty() || s.n_retained() < 2)
    throw ConfigError("summary needs at least one chain with two retained draws");
  if (level <= 0 || level >= 1) throw ConfigError("level must lie in (0, 1)");
  SummaryTable out;
  out.n_chains = static_cast<int>(s.chains.size());
  out.draws_per_chain = s.n_retained();
  if (out.n_chains < 2)
    out.warnings.push_back("single chain: PSRF not computed");

  const double p_lo = (1 - level) / 2, p_hi = 1 - (1 - level) / 2;
  const auto& names = s.chains.front().names;
  for (std::size_t j = 0; j < names.size(); ++j) {
    std::vector<double> pooled;
    std::vector<std::vector<double>> per_chain;
    bool finite = true;
    for (const auto& ch : s.chains) {
      std::vector<double> col(ch.draws.rows());
      for (Eigen::Index i = 0; i < ch.draws.rows(); ++i) {
        col[i] = ch.draws(i, static_cast<Eigen::Index>(j));
        if (!std::isfinite(col[i])) finite = false;
      }
      pooled.insert(pooled.end(), col.begin(), col.end());
      per_chain.push_back(std::move(col));
    }
    if (!finite) continue;  // padded or path-dependent columns are not summarized

    SummaryRow row;
    row.name = names[j];
    row.median = quantile_type7(pooled, 0.5);
    row.lower = quantile_type7(pooled, p_lo);
    row.upper = quantile_type7(pooled, p_hi);
    if (out.n_chains >= 2) row.r_hat = psrf(per_chain);
    if (names[j].rfind("beta", 0) == 0) {
      row.exp_scale = true;
      row.e_median = std::exp(row.median);
      row.e_lower = std::exp(row.lower);
      row.e_upper = std::exp(row.upper);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

static std::string fmt_num(double v) {
  if (std::isnan(v)) return "NaN";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

std::string format_summary(const SummaryTable& t) {
  const bool with_psrf = t.n_chains >= 2;
  std::size_t name_w = 9;
  for (const auto& r : t.rows) {
    name_w = std::max(name_w, r.name.size());
    if (r.exp_scale) name_w = std::max(name_w, r.name.size() + 5);
  }
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(name_w) + 2) << "parameter" << std::right
     << std::setw(12) << "PM" << std::setw(12) << "LL" << std::setw(12) << "UL";
  if (with_psrf) os << std::setw(12) << "PSRF";
  os << "\n";
  for (const auto& r : t.rows) {
    os << std::left << std::setw(static_cast<int>(name_w) + 2) << r.name << std::right
       << std::setw(12) << fmt_num(r.median) << std::setw(12) << fmt_num(r.lower)
       << std::setw(12) << fmt_num(r.upper);
    if (with_psrf) os << std::setw(12) << fmt_num(r.r_hat);
    os << "\n";
    if (r.exp_scale) {
      os << std::left << std::setw(static_cast<int>(name_w) + 2)
         << ("exp(" + r.name + ")") << std::right << std::setw(12) << fmt_num(r.e_median)
         << std::setw(12) << fmt_num(r.e_lower) << std::setw(12) << fmt_num(r.e_upper);
      os << "\n";
    }
  }
  for (const auto& w : t.warnings) os << "note: " << w << "\n";
  return os.str();
}

void write_summary_csv(const std::string& path, const SummaryTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "parameter,PM,LL,UL,PSRF,expPM,expLL,expUL\n";
  for (const auto& r : t.rows) {
    out << r.name << ',' << format_double(r.median) << ',' << format_double(r.lower)
        << ',' << format_double(r.upper) << ',' << format_double(r.r_hat) << ',';
    if (r.exp_scale)
      out << format_double(r.e_median) << ',' << format_double(r.e_lower) << ','
          << format_double(r.e_upper);
    else
      out << "NaN,NaN,NaN";
    out << "\n";
  }
}

std::vector<PredictedCurve> bayes_baseline_curves(const PosteriorSamples& s,
                                                  const std::vector<double>& tgrid,
                                                  double level) {
  if (s.chains.empty() || s.n_retained() < 1) throw ConfigError("no retained draws");
  if (level <= 0 || level >= 1) throw ConfigError("level must lie in (0, 1)");
  for (double t : tgrid)
    if (!(t >= 0) || !std::isfinite(t))
      throw ConfigError("curve grid must be finite and nonnegative");
  const bool weibull = s.has("alpha1");
  const bool pem = s.has("K1");
  if (!weibull && !pem)
    throw ConfigError("baseline curves require Weibull or piecewise-constant draws");

  const double p_lo = (1 - level) / 2, p_hi = 1 - (1 - level) / 2;
  std::vector<PredictedCurve> out;
  for (int g = 1; g <= 3; ++g) {
    const std::string sg = std::to_string(g);
    // hazard and cumulative hazard per draw per grid point
    std::vector<std::vector<double>> haz(tgrid.size()), surv(tgrid.size());
    if (weibull) {
      const int ca = s.col("alpha" + sg), ck = s.col("kappa" + sg);
      if (ca < 0 || ck < 0) throw ConfigError("samples lack alpha/kappa columns");
      for (const auto& ch : s.chains)
        for (Eigen::Index i = 0; i < ch.draws.rows(); ++i) {
          const double a = ch.draws(i, ca), k = ch.draws(i, ck);
          for (std::size_t ti = 0; ti < tgrid.size(); ++ti) {
            const double t = tgrid[ti];
            haz[ti].push_back(t > 0 ? a * k * std::pow(t, a - 1)
                                    : (a == 1 ? k : (a > 1 ? 0
                                                           : std::numeric_limits<double>::infinity())));
            surv[ti].push_back(std::exp(-k * std::pow(t, a)));
          }
        }
    } else {
      const double smax = s.info.s_max[static_cast<std::size_t>(g - 1)];
      if (smax > 0)
        for (double t : tgrid)
          if (t > smax)
            throw ConfigError("curve grid exceeds sMax for transition " + sg);
      const int ckcol = s.col("K" + sg);
      if (ckcol < 0) throw ConfigError("samples lack K columns");
      std::vector<int> s_cols, l_cols;
      for (int k = 0;; ++k) {
        const int cs = s.col("s" + sg + "." + std::to_string(k + 1));
        const int cl = s.col("lambda" + sg + "." + std::to_string(k + 1));
        if (cs < 0 || cl < 0) break;
        s_cols.push_back(cs);
        l_cols.push_back(cl);
      }
      if (s_cols.empty()) throw ConfigError("samples lack partition columns");
      for (const auto& ch : s.chains)
        for (Eigen::Index i = 0; i < ch.draws.rows(); ++i) {
          PemTransition pem_draw;
          pem_draw.k = static_cast<int>(ch.draws(i, ckcol));
          if (pem_draw.k + 1 > static_cast<int>(s_cols.size()))
            throw DataError("draw has more intervals than stored columns");
          for (int k = 0; k <= pem_draw.k; ++k) {
            pem_draw.s.push_back(ch.draws(i, s_cols[k]));
            pem_draw.lambda.push_back(ch.draws(i, l_cols[k]));
          }
          for (std::size_t ti = 0; ti < tgrid.size(); ++ti) {
            const double t = tgrid[ti];
            haz[ti].push_back(std::exp(pem_loghaz(pem_draw, t)));
            surv[ti].push_back(std::exp(-pem_cumhaz1(pem_draw, 0, t)));
          }
        }
    }
    PredictedCurve hc, sc;
    hc.g = g;
    hc.kind = "Haz";
    sc.g = g;
    sc.kind = "Surv";
    for (std::size_t ti = 0; ti < tgrid.size(); ++ti) {
      CurvePoint hp, sp;
      hp.t = sp.t = tgrid[ti];
      hp.point = quantile_type7(haz[ti], 0.5);
      hp.lo = quantile_type7(haz[ti], p_lo);
      hp.hi = quantile_type7(haz[ti], p_hi);
      sp.point = quantile_type7(surv[ti], 0.5);
      sp.lo = quantile_type7(surv[ti], p_lo);
      sp.hi = quantile_type7(surv[ti], p_hi);
      hc.pts.push_back(hp);
      sc.pts.push_back(sp);
    }
    out.push_back(std::move(sc));
    out.push_back(std::move(hc));
  }
  return out;
}

Table curve_to_table(const PredictedCurve& c) {
  Table t;
  t.names = {"t", "point", "lower", "upper"};
  t.cols.resize(4);
  for (const auto& p : c.pts) {
    t.cols[0].push_back(p.t);
    t.cols[1].push_back(p.point);
    t.cols[2].push_back(p.lo);
    t.cols[3].push_back(p.hi);
  }
  return t;
}

}  // namespace scr
