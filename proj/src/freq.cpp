#include "scr/freq.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "scr/optim.hpp"
#include "scr/stats.hpp"

namespace scr {

namespace {

double guarded_log(double t) {
  // log(0) only ever multiplies a vanishing hazard factor here
  return t > 0 ? std::log(t) : 0.0;
}

struct TransitionTerms {
  double lam;       // cumulative baseline hazard over the at-risk span
  double dlam_da;   // derivative of lam w.r.t. a = log alpha
  double ev;        // event indicator for this transition
  double log_t;     // log event-time on this transition's clock
  double eta;
};

}  // namespace

std::vector<std::string> FreqLayout::names(const Covariates& cov) const {
  std::vector<std::string> out(static_cast<std::size_t>(dim()));
  const std::vector<std::string>* covn[3] = {&cov.names1, &cov.names2, &cov.names3};
  for (int g = 1; g <= 3; ++g) {
    const std::string sg = std::to_string(g);
    if (!fix_alpha) out[static_cast<std::size_t>(idx_a(g))] = "log_alpha" + sg;
    out[static_cast<std::size_t>(idx_k(g))] = "log_kappa" + sg;
    const auto& nm = *covn[g - 1];
    for (std::size_t j = 0; j < nm.size(); ++j)
      out[static_cast<std::size_t>(idx_beta(g, static_cast<int>(j)))] = "beta" + sg + ":" + nm[j];
  }
  if (frailty) out[static_cast<std::size_t>(idx_h())] = "log_theta";
  return out;
}

IDView make_id_view(const SemiCompDataset& d, H3Clock h3) {
  const auto n = static_cast<Eigen::Index>(d.n());
  IDView v;
  v.h3 = h3;
  v.y1.resize(n);
  v.y2.resize(n);
  v.d1.resize(n);
  v.d2.resize(n);
  v.ly1.resize(n);
  v.ly2.resize(n);
  v.lz.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = d.rec[static_cast<std::size_t>(i)];
    v.y1[i] = r.time1;
    v.y2[i] = r.time2;
    v.d1[i] = r.event1;
    v.d2[i] = r.event2;
    v.ly1[i] = guarded_log(r.time1);
    v.ly2[i] = guarded_log(r.time2);
    v.lz[i] = h3 == H3Clock::Markov ? guarded_log(r.time2) : guarded_log(r.time2 - r.time1);
  }
  v.x1 = d.cov.x1;
  v.x2 = d.cov.x2;
  v.x3 = d.cov.x3;
  return v;
}

namespace {

// per-subject pieces shared between value and gradient
void transition_terms(const Eigen::VectorXd& psi, const IDView& v, const FreqLayout& lay,
                      Eigen::Index i, TransitionTerms out[3]) {
  for (int g = 1; g <= 3; ++g) {
    const double a = lay.fix_alpha ? 0.0 : psi[lay.idx_a(g)];
    const double k = psi[lay.idx_k(g)];
    const double ea = std::exp(a);
    const double ek = std::exp(k);
    TransitionTerms& t = out[g - 1];
    const Eigen::MatrixXd& x = g == 1 ? v.x1 : g == 2 ? v.x2 : v.x3;
    t.eta = 0;
    const int p = g == 1 ? lay.p1 : g == 2 ? lay.p2 : lay.p3;
    for (int j = 0; j < p; ++j) t.eta += x(i, j) * psi[lay.idx_beta(g, j)];
    if (g < 3) {
      const double pw = std::pow(v.y1[i], ea);
      t.lam = ek * pw;
      t.dlam_da = t.lam * ea * v.ly1[i];
      t.ev = g == 1 ? v.d1[i] : (1.0 - v.d1[i]) * v.d2[i];
      t.log_t = v.ly1[i];
    } else {
      if (v.h3 == H3Clock::Markov) {
        const double p2w = std::pow(v.y2[i], ea);
        const double p1w = std::pow(v.y1[i], ea);
        t.lam = ek * (p2w - p1w);
        t.dlam_da = ek * ea * (p2w * v.ly2[i] - p1w * v.ly1[i]);
      } else {
        const double diff = v.y2[i] - v.y1[i];
        const double pw = std::pow(diff, ea);
        t.lam = ek * pw;
        t.dlam_da = t.lam * ea * guarded_log(diff);
      }
      t.ev = v.d1[i] * v.d2[i];
      t.log_t = v.lz[i];
    }
  }
}

}  // namespace

double loglik_weibull_id(const Eigen::VectorXd& psi, const IDView& v, const FreqLayout& lay) {
  const double th = lay.frailty ? std::exp(psi[lay.idx_h()]) : 0.0;
  double ll = 0;
  TransitionTerms t[3];
  for (Eigen::Index i = 0; i < v.y1.size(); ++i) {
    transition_terms(psi, v, lay, i, t);
    double avec = 0;
    for (int g = 0; g < 3; ++g) {
      const double a = lay.fix_alpha ? 0.0 : psi[lay.idx_a(g + 1)];
      const double k = psi[lay.idx_k(g + 1)];
      const double ea = std::exp(a);
      if (t[g].ev != 0.0) ll += t[g].ev * (a + k + (ea - 1.0) * t[g].log_t + t[g].eta);
      avec += t[g].lam * std::exp(t[g].eta);
    }
    if (lay.frailty) {
      const double d = v.d1[i] + v.d2[i];
      if (v.d1[i] != 0.0 && v.d2[i] != 0.0) ll += std::log1p(th);
      ll -= (1.0 / th + d) * std::log1p(th * avec);
    } else {
      ll -= avec;
    }
  }
  return ll;
}

Eigen::VectorXd grad_loglik_weibull_id(const Eigen::VectorXd& psi, const IDView& v,
                                       const FreqLayout& lay) {
  const double th = lay.frailty ? std::exp(psi[lay.idx_h()]) : 0.0;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(lay.dim());
  TransitionTerms t[3];
  for (Eigen::Index i = 0; i < v.y1.size(); ++i) {
    transition_terms(psi, v, lay, i, t);
    double avec = 0;
    for (int gg = 0; gg < 3; ++gg) avec += t[gg].lam * std::exp(t[gg].eta);
    const double d = v.d1[i] + v.d2[i];
    // s multiplies dA/dparam in the score
    const double s = lay.frailty ? (1.0 / th + d) * th / (1.0 + th * avec) : 1.0;
    for (int gi = 1; gi <= 3; ++gi) {
      const TransitionTerms& tt = t[gi - 1];
      const double ee = std::exp(tt.eta);
      const double common = tt.ev - s * tt.lam * ee;
      g[lay.idx_k(gi)] += common;
      if (!lay.fix_alpha) {
        const double ea = std::exp(psi[lay.idx_a(gi)]);
        g[lay.idx_a(gi)] += tt.ev * (1.0 + ea * tt.log_t) - s * tt.dlam_da * ee;
      }
      const Eigen::MatrixXd& x = gi == 1 ? v.x1 : gi == 2 ? v.x2 : v.x3;
      const int p = gi == 1 ? lay.p1 : gi == 2 ? lay.p2 : lay.p3;
      for (int j = 0; j < p; ++j) g[lay.idx_beta(gi, j)] += x(i, j) * common;
    }
    if (lay.frailty) {
      double dh = std::log1p(th * avec) / th - (1.0 / th + d) * th * avec / (1.0 + th * avec);
      if (v.d1[i] != 0.0 && v.d2[i] != 0.0) dh += th / (1.0 + th);
      g[lay.idx_h()] += dh;
    }
  }
  return g;
}

namespace {

void check_fit_preconditions(const SemiCompDataset& d) {
  if (const auto viol = validate(d); !viol.empty())
    throw DataError("fit: dataset fails validation at row " + std::to_string(viol.front().row) +
                    ": " + viol.front().message);
  double e1 = 0, e2 = 0, e3 = 0;
  for (const auto& r : d.rec) {
    e1 += r.event1;
    e2 += (1.0 - r.event1) * r.event2;
    e3 += r.event1 * r.event2;
    if ((r.event1 != 0.0 || r.event2 != 0.0) && r.time1 <= 0)
      throw DataError("fit: event times must be strictly positive");
  }
  if (e1 < 1 || e2 < 1 || e3 < 1)
    throw DataError("fit: each transition needs at least one observed event (counts: " +
                    std::to_string(static_cast<long>(e1)) + ", " +
                    std::to_string(static_cast<long>(e2)) + ", " +
                    std::to_string(static_cast<long>(e3)) + ")");
  if (!d.cov.x1.allFinite() || !d.cov.x2.allFinite() || !d.cov.x3.allFinite())
    throw DataError("fit: covariates must be finite");
}

Eigen::VectorXd start_values_id(const IDView& v, const FreqLayout& lay) {
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(lay.dim());
  double e[3] = {0, 0, 0}, r[3] = {0, 0, 0};
  for (Eigen::Index i = 0; i < v.y1.size(); ++i) {
    e[0] += v.d1[i];
    e[1] += (1.0 - v.d1[i]) * v.d2[i];
    e[2] += v.d1[i] * v.d2[i];
    r[0] += v.y1[i];
    r[1] += v.y1[i];
    r[2] += v.y2[i] - v.y1[i];
  }
  for (int g = 1; g <= 3; ++g) {
    psi[lay.idx_k(g)] = std::log(e[g - 1] / std::max(r[g - 1], 1e-300));
    if (!lay.fix_alpha) psi[lay.idx_a(g)] = 0.0;
  }
  if (lay.frailty) psi[lay.idx_h()] = std::log(0.5);
  return psi;
}

// drives the score below tol with fd-Hessian Newton steps once BFGS stalls
void newton_polish(const ObjFn& f, const GradFn& grad, Eigen::VectorXd& x, double& fx,
                   Eigen::VectorXd& gx, double tol, int max_steps) {
  for (int it = 0; it < max_steps; ++it) {
    if (gx.lpNorm<Eigen::Infinity>() < tol) return;
    const Eigen::MatrixXd h = fd_jacobian_symmetric(grad, x, 1e-6);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success) return;
    const Eigen::VectorXd step = ldlt.solve(-gx);
    if (!step.allFinite()) return;
    double sc = 1.0;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::VectorXd xn = x + sc * step;
      const double fn = f(xn);
      const Eigen::VectorXd gn = grad(xn);
      if (std::isfinite(fn) &&
          (fn < fx || gn.lpNorm<Eigen::Infinity>() < gx.lpNorm<Eigen::Infinity>())) {
        x = xn;
        fx = fn;
        gx = gn;
        sc = -1;
        break;
      }
      sc *= 0.5;
    }
    if (sc > 0) return;  // no progress
  }
}

FreqFit finish_fit(const ObjFn& f, const GradFn& grad, const Eigen::VectorXd& start,
                   const FitOptions& opt) {
  FreqFit fit;
  OptimResult r = bfgs_minimize(f, grad, start, opt.tol, opt.max_iter);
  // polish cleans up quasi-Newton stalls but must not override an exhausted
  // iteration budget
  if (r.iterations < opt.max_iter) newton_polish(f, grad, r.x, r.f, r.grad, opt.tol, 50);
  fit.estimates = r.x;
  fit.loglik = -r.f;
  fit.iterations = r.iterations;
  fit.converged = r.grad.lpNorm<Eigen::Infinity>() < opt.tol;
  if (!fit.converged)
    fit.warnings.push_back("optimizer did not reach the score tolerance: sup|score| = " +
                           format_double(r.grad.lpNorm<Eigen::Infinity>()));
  // observed information: central differences of the negated score
  const Eigen::MatrixXd neg_hess = fd_jacobian_symmetric(grad, r.x, 1e-5);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_hess);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    fit.covariance = ldlt.solve(Eigen::MatrixXd::Identity(neg_hess.rows(), neg_hess.cols()));
    fit.covariance_ok = fit.covariance.allFinite();
  }
  if (!fit.covariance_ok) {
    fit.covariance = Eigen::MatrixXd::Constant(neg_hess.rows(), neg_hess.cols(),
                                               std::numeric_limits<double>::quiet_NaN());
    fit.warnings.push_back("observed information is not positive definite; covariance unavailable");
  }
  return fit;
}

}  // namespace

FreqFit fit_freq_id(const SemiCompDataset& d, const ModelSpec& m, const FitOptions& opt) {
  ModelSpec spec = m;
  spec.inference = Inference::Frequentist;
  spec.baseline = Baseline::Weibull;
  check_model_spec(spec);
  check_fit_preconditions(d);
  const IDView view = make_id_view(d, spec.h3);
  FreqLayout lay;
  lay.p1 = static_cast<int>(d.cov.x1.cols());
  lay.p2 = static_cast<int>(d.cov.x2.cols());
  lay.p3 = static_cast<int>(d.cov.x3.cols());
  lay.frailty = spec.frailty;
  lay.fix_alpha = opt.fix_alpha;

  const ObjFn f = [&](const Eigen::VectorXd& x) { return -loglik_weibull_id(x, view, lay); };
  const GradFn g = [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(-grad_loglik_weibull_id(x, view, lay));
  };
  FreqFit fit = finish_fit(f, g, start_values_id(view, lay), opt);
  fit.layout = lay;
  fit.model = spec;
  fit.covnames1 = d.cov.names1;
  fit.covnames2 = d.cov.names2;
  fit.covnames3 = d.cov.names3;
  fit.names = lay.names(d.cov);
  return fit;
}

namespace {

struct UniView {
  Eigen::VectorXd y, dlt, ly;
  Eigen::MatrixXd x;
};

double loglik_weibull_uni(const Eigen::VectorXd& psi, const UniView& v, bool fix_alpha) {
  const int off = fix_alpha ? 0 : 1;
  const double a = fix_alpha ? 0.0 : psi[0];
  const double k = psi[off];
  const double ea = std::exp(a);
  double ll = 0;
  for (Eigen::Index i = 0; i < v.y.size(); ++i) {
    double eta = 0;
    for (Eigen::Index j = 0; j < v.x.cols(); ++j) eta += v.x(i, j) * psi[off + 1 + j];
    ll += v.dlt[i] * (a + k + (ea - 1.0) * v.ly[i] + eta);
    ll -= std::exp(k) * std::pow(v.y[i], ea) * std::exp(eta);
  }
  return ll;
}

Eigen::VectorXd grad_loglik_weibull_uni(const Eigen::VectorXd& psi, const UniView& v,
                                        bool fix_alpha) {
  const int off = fix_alpha ? 0 : 1;
  const double a = fix_alpha ? 0.0 : psi[0];
  const double k = psi[off];
  const double ea = std::exp(a);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(psi.size());
  for (Eigen::Index i = 0; i < v.y.size(); ++i) {
    double eta = 0;
    for (Eigen::Index j = 0; j < v.x.cols(); ++j) eta += v.x(i, j) * psi[off + 1 + j];
    const double lam = std::exp(k) * std::pow(v.y[i], ea) * std::exp(eta);
    const double common = v.dlt[i] - lam;
    g[off] += common;
    if (!fix_alpha) g[0] += v.dlt[i] * (1.0 + ea * v.ly[i]) - lam * ea * v.ly[i];
    for (Eigen::Index j = 0; j < v.x.cols(); ++j) g[off + 1 + j] += v.x(i, j) * common;
  }
  return g;
}

}  // namespace

FreqFit fit_freq_univariate(const UniDataset& d, const FitOptions& opt) {
  if (const auto viol = validate(d); !viol.empty())
    throw DataError("fit: dataset fails validation at row " + std::to_string(viol.front().row) +
                    ": " + viol.front().message);
  UniView v;
  const auto n = static_cast<Eigen::Index>(d.n());
  v.y.resize(n);
  v.dlt.resize(n);
  v.ly.resize(n);
  double events = 0, risk = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = d.rec[static_cast<std::size_t>(i)];
    if (r.event != 0.0 && r.time <= 0)
      throw DataError("fit: event times must be strictly positive");
    v.y[i] = r.time;
    v.dlt[i] = r.event;
    v.ly[i] = guarded_log(r.time);
    events += r.event;
    risk += r.time;
  }
  if (events < 1) throw DataError("fit: at least one observed event is required");
  v.x = d.x;

  const bool fix_alpha = opt.fix_alpha;
  const int dim = (fix_alpha ? 1 : 2) + static_cast<int>(d.x.cols());
  Eigen::VectorXd start = Eigen::VectorXd::Zero(dim);
  start[fix_alpha ? 0 : 1] = std::log(events / std::max(risk, 1e-300));

  const ObjFn f = [&](const Eigen::VectorXd& x) { return -loglik_weibull_uni(x, v, fix_alpha); };
  const GradFn g = [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(-grad_loglik_weibull_uni(x, v, fix_alpha));
  };
  FreqFit fit = finish_fit(f, g, start, opt);
  fit.model.analysis = Analysis::Univariate;
  fit.model.frailty = false;
  fit.layout.p1 = static_cast<int>(d.x.cols());
  fit.layout.frailty = false;
  fit.layout.fix_alpha = fix_alpha;
  fit.names.clear();
  if (!fix_alpha) fit.names.push_back("log_alpha");
  fit.names.push_back("log_kappa");
  for (const auto& nm : d.names) fit.names.push_back("beta:" + nm);
  fit.covnames1 = d.names;
  return fit;
}

std::vector<PredictedCurve> predict_baseline(const FreqFit& fit, const std::vector<double>& tgrid,
                                             double level) {
  if (!(level > 0 && level < 1)) throw ConfigError("predict: level must lie in (0,1)");
  for (const double t : tgrid)
    if (!(t >= 0) || !std::isfinite(t)) throw ConfigError("predict: time grid must be finite and >= 0");
  if (fit.model.analysis != Analysis::IllnessDeath)
    throw ConfigError("predict: baseline curves require an illness-death fit");
  const double z = norm_quantile(0.5 + level / 2.0);
  const FreqLayout& lay = fit.layout;
  std::vector<PredictedCurve> out;
  for (int g = 1; g <= 3; ++g) {
    PredictedCurve surv{g, "Surv", {}}, haz{g, "Haz", {}};
    const double a = lay.fix_alpha ? 0.0 : fit.estimates[lay.idx_a(g)];
    const double k = fit.estimates[lay.idx_k(g)];
    const double ea = std::exp(a);
    for (const double t : tgrid) {
      CurvePoint sp, hp;
      sp.t = hp.t = t;
      if (t == 0) {
        sp.point = sp.lo = sp.hi = 1.0;
        hp.point = ea * std::exp(k) * std::pow(t, ea - 1.0);
        hp.lo = hp.hi = hp.point;
      } else {
        const double lt = std::log(t);
        const double log_h = a + k + (ea - 1.0) * lt;
        const double log_ch = k + ea * lt;
        double var_lh = 0, var_lch = 0;
        if (fit.covariance_ok) {
          Eigen::VectorXd vh = Eigen::VectorXd::Zero(fit.estimates.size());
          Eigen::VectorXd vc = Eigen::VectorXd::Zero(fit.estimates.size());
          vh[lay.idx_k(g)] = 1.0;
          vc[lay.idx_k(g)] = 1.0;
          if (!lay.fix_alpha) {
            vh[lay.idx_a(g)] = 1.0 + ea * lt;
            vc[lay.idx_a(g)] = ea * lt;
          }
          var_lh = vh.dot(fit.covariance * vh);
          var_lch = vc.dot(fit.covariance * vc);
        } else {
          var_lh = var_lch = std::numeric_limits<double>::quiet_NaN();
        }
        hp.point = std::exp(log_h);
        hp.lo = std::exp(log_h - z * std::sqrt(var_lh));
        hp.hi = std::exp(log_h + z * std::sqrt(var_lh));
        const double ch = std::exp(log_ch);
        sp.point = std::exp(-ch);
        // interval transferred through the log cumulative hazard
        sp.lo = std::exp(-ch * std::exp(z * std::sqrt(var_lch)));
        sp.hi = std::exp(-ch * std::exp(-z * std::sqrt(var_lch)));
      }
      surv.pts.push_back(sp);
      haz.pts.push_back(hp);
    }
    out.push_back(std::move(surv));
    out.push_back(std::move(haz));
  }
  return out;
}

}  // namespace scr
