#include "scr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scr/bayes_aft.hpp"
#include "scr/bayes_phr.hpp"
#include "scr/csv.hpp"
#include "scr/dataset.hpp"
#include "scr/diagnostics.hpp"
#include "scr/freq.hpp"
#include "scr/model.hpp"
#include "scr/posterior.hpp"
#include "scr/simulator.hpp"

namespace scr {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
  throw ConfigError("config field '" + path + "': " + why);
}

std::string subpath(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// JSON object accessor that reports every problem by full field path.
class Ctx {
 public:
  Ctx(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j_->is_object()) bad_field(path_.empty() ? "(top level)" : path_, "must be a JSON object");
  }

  const std::string& path() const { return path_; }
  bool has(const std::string& k) const { return j_->contains(k); }
  const json& raw(const std::string& k) const {
    require(k);
    return (*j_)[k];
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!ok.count(it.key())) bad_field(subpath(path_, it.key()), "is not a recognized field");
  }

  Ctx obj(const std::string& k) const {
    require(k);
    return Ctx((*j_)[k], subpath(path_, k));
  }
  std::optional<Ctx> opt_obj(const std::string& k) const {
    if (!has(k)) return std::nullopt;
    return obj(k);
  }

  double num(const std::string& k) const {
    require(k);
    const json& v = (*j_)[k];
    if (!v.is_number()) bad_field(subpath(path_, k), "must be a number");
    return v.get<double>();
  }
  double num_or(const std::string& k, double def) const { return has(k) ? num(k) : def; }

  long long integer(const std::string& k) const {
    require(k);
    const json& v = (*j_)[k];
    if (!v.is_number_integer() && !v.is_number_unsigned())
      bad_field(subpath(path_, k), "must be an integer");
    return v.get<long long>();
  }
  long long integer_or(const std::string& k, long long def) const {
    return has(k) ? integer(k) : def;
  }

  std::uint64_t uint64(const std::string& k) const {
    require(k);
    const json& v = (*j_)[k];
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0)
      return static_cast<std::uint64_t>(v.get<long long>());
    bad_field(subpath(path_, k), "must be a nonnegative integer");
  }

  bool flag_or(const std::string& k, bool def) const {
    if (!has(k)) return def;
    const json& v = (*j_)[k];
    if (!v.is_boolean()) bad_field(subpath(path_, k), "must be true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& k) const {
    require(k);
    const json& v = (*j_)[k];
    if (!v.is_string()) bad_field(subpath(path_, k), "must be a string");
    return v.get<std::string>();
  }
  std::string str_or(const std::string& k, const std::string& def) const {
    return has(k) ? str(k) : def;
  }

  std::vector<std::string> str_list_or_empty(const std::string& k) const {
    if (!has(k)) return {};
    const json& v = (*j_)[k];
    if (!v.is_array()) bad_field(subpath(path_, k), "must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) bad_field(subpath(path_, k), "must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  std::vector<double> num_vector(const std::string& k) const {
    require(k);
    const json& v = (*j_)[k];
    if (!v.is_array()) bad_field(subpath(path_, k), "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) bad_field(subpath(path_, k), "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<double> num_vector_or_empty(const std::string& k) const {
    return has(k) ? num_vector(k) : std::vector<double>{};
  }

  // scalar broadcast or exactly three entries, one per transition
  std::array<double, 3> triple(const std::string& k, const std::array<double, 3>& def) const {
    if (!has(k)) return def;
    const json& v = (*j_)[k];
    if (v.is_number()) {
      const double x = v.get<double>();
      return {x, x, x};
    }
    const auto a = num_vector(k);
    if (a.size() != 3) bad_field(subpath(path_, k), "must be a number or an array of 3 numbers");
    return {a[0], a[1], a[2]};
  }
  std::array<int, 3> int_triple(const std::string& k, const std::array<int, 3>& def) const {
    if (!has(k)) return def;
    const auto a = triple(k, {0, 0, 0});
    std::array<int, 3> out{};
    for (int g = 0; g < 3; ++g) {
      if (a[g] != std::floor(a[g]))
        bad_field(subpath(path_, k), "must hold integers");
      out[g] = static_cast<int>(a[g]);
    }
    return out;
  }

  Eigen::Matrix3d mat3(const std::string& k) const {
    require(k);
    const json& v = (*j_)[k];
    const std::string p = subpath(path_, k);
    if (!v.is_array() || v.size() != 3) bad_field(p, "must be a 3x3 array of numbers");
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r) {
      const json& row = v[r];
      if (!row.is_array() || row.size() != 3) bad_field(p, "must be a 3x3 array of numbers");
      for (int c = 0; c < 3; ++c) {
        if (!row[c].is_number()) bad_field(p, "must be a 3x3 array of numbers");
        m(r, c) = row[c].get<double>();
      }
    }
    return m;
  }

 private:
  void require(const std::string& k) const {
    if (!has(k)) bad_field(subpath(path_, k), "is required");
  }
  const json* j_;
  std::string path_;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> output_dir;
};

json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

std::uint64_t resolve_seed(const Ctx& c, const Overrides& ov) {
  if (ov.seed) return *ov.seed;
  if (c.has("seed")) return c.uint64("seed");
  bad_field("seed", "is required (or pass --seed)");
}

fs::path resolve_outdir(const Ctx& c, const Overrides& ov) {
  const std::string d = ov.output_dir ? *ov.output_dir : c.str_or("outputDir", "");
  if (d.empty()) bad_field("outputDir", "is required (or pass --output-dir)");
  return fs::path(d);
}

void check_subcommand_tag(const Ctx& c, const std::string& name) {
  if (c.has("subcommand") && c.str("subcommand") != name)
    bad_field("subcommand", "does not match the invoked subcommand '" + name + "'");
}

// Refuses to write any file that was read as an input.
class OutputGuard {
 public:
  void protect(const fs::path& p) {
    if (!p.empty()) inputs_.insert(fs::weakly_canonical(p));
  }
  std::string checked(const fs::path& p) const {
    if (inputs_.count(fs::weakly_canonical(p)))
      throw ConfigError("output file '" + p.string() + "' would overwrite an input file");
    return p.string();
  }

 private:
  std::set<fs::path> inputs_;
};

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void note_written(const std::string& path) { std::cout << "wrote " << path << "\n"; }

void write_echo(const fs::path& outdir, const std::string& name, const json& echo,
                const OutputGuard& guard) {
  const std::string p = guard.checked(outdir / name);
  write_text_file(p, echo.dump(2) + "\n");
  note_written(p);
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::VectorXd vec_from_std(const std::vector<double>& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i];
  return v;
}

std::string h3_name(H3Clock h) { return h == H3Clock::Markov ? "markov" : "semi-markov"; }

H3Clock h3_from(const std::string& s, const std::string& field) {
  if (s == "markov") return H3Clock::Markov;
  if (s == "semi-markov") return H3Clock::SemiMarkov;
  bad_field(field, "must be \"markov\" or \"semi-markov\"");
}

std::string baseline_name(Baseline b) {
  switch (b) {
    case Baseline::Weibull: return "weibull";
    case Baseline::PEM: return "pem";
    default: return "log-normal";
  }
}

Baseline baseline_from(const std::string& s, const std::string& field) {
  if (s == "weibull") return Baseline::Weibull;
  if (s == "pem") return Baseline::PEM;
  if (s == "log-normal") return Baseline::LogNormal;
  bad_field(field, "must be \"weibull\", \"pem\" or \"log-normal\"");
}

ModelSpec parse_model(const Ctx& root, Inference inf) {
  ModelSpec m;
  m.inference = inf;
  if (auto c = root.opt_obj("model")) {
    c->allow_only({"h3", "baseline", "frailty", "clusterEffects"});
    m.h3 = h3_from(c->str_or("h3", "semi-markov"), subpath(c->path(), "h3"));
    m.baseline = baseline_from(c->str_or("baseline", "weibull"), subpath(c->path(), "baseline"));
    m.frailty = c->flag_or("frailty", true);
    m.cluster = c->flag_or("clusterEffects", false) ? ClusterEffects::MVN : ClusterEffects::None;
  }
  check_model_spec(m);
  return m;
}

json model_to_json(const ModelSpec& m) {
  json j;
  j["h3"] = h3_name(m.h3);
  j["baseline"] = baseline_name(m.baseline);
  j["frailty"] = m.frailty;
  j["clusterEffects"] = m.cluster == ClusterEffects::MVN;
  return j;
}

struct SemiCompSource {
  std::string path;
  ColumnBinding bind;
};

SemiCompSource parse_semicomp_source(const Ctx& root) {
  const Ctx c = root.obj("data");
  c.allow_only({"path", "columns"});
  SemiCompSource s;
  s.path = c.str("path");
  if (auto cols = c.opt_obj("columns")) {
    cols->allow_only({"time1", "event1", "time2", "event2", "x1", "x2", "x3", "cluster"});
    s.bind.time1 = cols->str_or("time1", s.bind.time1);
    s.bind.event1 = cols->str_or("event1", s.bind.event1);
    s.bind.time2 = cols->str_or("time2", s.bind.time2);
    s.bind.event2 = cols->str_or("event2", s.bind.event2);
    s.bind.x1 = cols->str_list_or_empty("x1");
    s.bind.x2 = cols->str_list_or_empty("x2");
    s.bind.x3 = cols->str_list_or_empty("x3");
    s.bind.cluster = cols->str_or("cluster", "");
  }
  return s;
}

json semicomp_source_to_json(const SemiCompSource& s) {
  json cols;
  cols["time1"] = s.bind.time1;
  cols["event1"] = s.bind.event1;
  cols["time2"] = s.bind.time2;
  cols["event2"] = s.bind.event2;
  cols["x1"] = s.bind.x1;
  cols["x2"] = s.bind.x2;
  cols["x3"] = s.bind.x3;
  cols["cluster"] = s.bind.cluster;
  json j;
  j["path"] = s.path;
  j["columns"] = cols;
  return j;
}

struct IntervalSource {
  std::string path;
  IntervalBinding bind;
};

IntervalSource parse_interval_source(const Ctx& root) {
  const Ctx c = root.obj("data");
  c.allow_only({"path", "columns"});
  IntervalSource s;
  s.path = c.str("path");
  if (auto cols = c.opt_obj("columns")) {
    cols->allow_only({"LT", "y1L", "y1U", "y2L", "y2U", "x1", "x2", "x3"});
    s.bind.lt = cols->str_or("LT", s.bind.lt);
    s.bind.y1l = cols->str_or("y1L", s.bind.y1l);
    s.bind.y1u = cols->str_or("y1U", s.bind.y1u);
    s.bind.y2l = cols->str_or("y2L", s.bind.y2l);
    s.bind.y2u = cols->str_or("y2U", s.bind.y2u);
    s.bind.x1 = cols->str_list_or_empty("x1");
    s.bind.x2 = cols->str_list_or_empty("x2");
    s.bind.x3 = cols->str_list_or_empty("x3");
  }
  return s;
}

json interval_source_to_json(const IntervalSource& s) {
  json cols;
  cols["LT"] = s.bind.lt;
  cols["y1L"] = s.bind.y1l;
  cols["y1U"] = s.bind.y1u;
  cols["y2L"] = s.bind.y2l;
  cols["y2U"] = s.bind.y2u;
  cols["x1"] = s.bind.x1;
  cols["x2"] = s.bind.x2;
  cols["x3"] = s.bind.x3;
  json j;
  j["path"] = s.path;
  j["columns"] = cols;
  return j;
}

json triple_to_json(const std::array<double, 3>& a) { return json::array({a[0], a[1], a[2]}); }
json triple_to_json(const std::array<int, 3>& a) { return json::array({a[0], a[1], a[2]}); }

void require_positive(const std::array<double, 3>& a, const std::string& field) {
  for (double v : a)
    if (!(v > 0) || !std::isfinite(v)) bad_field(field, "entries must be positive");
}

PHRHyper parse_phr_hyper(const Ctx& root) {
  PHRHyper h;
  if (auto c = root.opt_obj("hyper")) {
    c->allow_only({"thetaA", "thetaB", "alphaA", "alphaB", "kappaA", "kappaB", "pemA", "pemB",
                   "pemKMean", "psiV", "rhoV"});
    h.theta_a = c->num_or("thetaA", h.theta_a);
    h.theta_b = c->num_or("thetaB", h.theta_b);
    h.alpha_a = c->triple("alphaA", h.alpha_a);
    h.alpha_b = c->triple("alphaB", h.alpha_b);
    h.kappa_a = c->triple("kappaA", h.kappa_a);
    h.kappa_b = c->triple("kappaB", h.kappa_b);
    h.pem_a = c->triple("pemA", h.pem_a);
    h.pem_b = c->triple("pemB", h.pem_b);
    h.pem_k_mean = c->triple("pemKMean", h.pem_k_mean);
    if (c->has("psiV")) h.psi_v = c->mat3("psiV");
    h.rho_v = c->num_or("rhoV", h.rho_v);
    const std::string p = c->path();
    if (!(h.theta_a > 0) || !(h.theta_b > 0)) bad_field(subpath(p, "thetaA"), "must be positive");
    require_positive(h.alpha_a, subpath(p, "alphaA"));
    require_positive(h.alpha_b, subpath(p, "alphaB"));
    require_positive(h.kappa_a, subpath(p, "kappaA"));
    require_positive(h.kappa_b, subpath(p, "kappaB"));
    require_positive(h.pem_a, subpath(p, "pemA"));
    require_positive(h.pem_b, subpath(p, "pemB"));
    require_positive(h.pem_k_mean, subpath(p, "pemKMean"));
    if (!(h.rho_v > 2)) bad_field(subpath(p, "rhoV"), "must exceed 2");
    Eigen::LLT<Eigen::Matrix3d> llt(h.psi_v);
    if (llt.info() != Eigen::Success)
      bad_field(subpath(p, "psiV"), "must be symmetric positive definite");
  }
  return h;
}

json phr_hyper_to_json(const PHRHyper& h) {
  json j;
  j["thetaA"] = h.theta_a;
  j["thetaB"] = h.theta_b;
  j["alphaA"] = triple_to_json(h.alpha_a);
  j["alphaB"] = triple_to_json(h.alpha_b);
  j["kappaA"] = triple_to_json(h.kappa_a);
  j["kappaB"] = triple_to_json(h.kappa_b);
  j["pemA"] = triple_to_json(h.pem_a);
  j["pemB"] = triple_to_json(h.pem_b);
  j["pemKMean"] = triple_to_json(h.pem_k_mean);
  j["psiV"] = mat_to_json(h.psi_v);
  j["rhoV"] = h.rho_v;
  return j;
}

AFTHyper parse_aft_hyper(const Ctx& root) {
  AFTHyper h;
  if (auto c = root.opt_obj("hyper")) {
    c->allow_only({"thetaA", "thetaB", "sigmaA", "sigmaB"});
    h.theta_a = c->num_or("thetaA", h.theta_a);
    h.theta_b = c->num_or("thetaB", h.theta_b);
    h.sigma_a = c->triple("sigmaA", h.sigma_a);
    h.sigma_b = c->triple("sigmaB", h.sigma_b);
    const std::string p = c->path();
    if (!(h.theta_a > 0) || !(h.theta_b > 0)) bad_field(subpath(p, "thetaA"), "must be positive");
    require_positive(h.sigma_a, subpath(p, "sigmaA"));
    require_positive(h.sigma_b, subpath(p, "sigmaB"));
  }
  return h;
}

json aft_hyper_to_json(const AFTHyper& h) {
  json j;
  j["thetaA"] = h.theta_a;
  j["thetaB"] = h.theta_b;
  j["sigmaA"] = triple_to_json(h.sigma_a);
  j["sigmaB"] = triple_to_json(h.sigma_b);
  return j;
}

MCMCConfig parse_phr_mcmc(const Ctx& root, const Overrides& ov) {
  MCMCConfig cfg;
  if (auto c = root.opt_obj("mcmc")) {
    c->allow_only(
        {"numReps", "thin", "burninPerc", "chains", "threads", "nGamSave", "storeV", "tuning"});
    cfg.num_reps = c->integer_or("numReps", cfg.num_reps);
    cfg.thin = static_cast<int>(c->integer_or("thin", cfg.thin));
    cfg.burnin_perc = c->num_or("burninPerc", cfg.burnin_perc);
    cfg.n_chains = static_cast<int>(c->integer_or("chains", cfg.n_chains));
    cfg.threads = static_cast<int>(c->integer_or("threads", cfg.threads));
    cfg.n_gam_save = static_cast<int>(c->integer_or("nGamSave", cfg.n_gam_save));
    cfg.store_v = c->flag_or("storeV", cfg.store_v);
    if (auto t = c->opt_obj("tuning")) {
      t->allow_only({"thetaVar", "alphaVar", "betaVar", "vVar", "lambdaVar", "cG", "delPert",
                     "rjScheme", "kMax", "sMax", "timeLambda"});
      auto& tn = cfg.tuning;
      tn.theta_var = t->num_or("thetaVar", tn.theta_var);
      tn.alpha_var = t->triple("alphaVar", tn.alpha_var);
      tn.beta_var = t->num_or("betaVar", tn.beta_var);
      tn.v_var = t->num_or("vVar", tn.v_var);
      tn.lambda_var = t->num_or("lambdaVar", tn.lambda_var);
      tn.c_g = t->triple("cG", tn.c_g);
      tn.del_pert = t->triple("delPert", tn.del_pert);
      tn.rj_scheme = static_cast<int>(t->integer_or("rjScheme", tn.rj_scheme));
      tn.k_max = t->int_triple("kMax", tn.k_max);
      tn.s_max = t->triple("sMax", tn.s_max);
      if (t->has("timeLambda")) {
        const json& v = t->raw("timeLambda");
        const std::string p = subpath(t->path(), "timeLambda");
        if (!v.is_array() || v.size() != 3) bad_field(p, "must be an array of 3 number arrays");
        for (int g = 0; g < 3; ++g) {
          if (!v[g].is_array()) bad_field(p, "must be an array of 3 number arrays");
          std::vector<double> grid;
          for (const auto& e : v[g]) {
            if (!e.is_number()) bad_field(p, "must be an array of 3 number arrays");
            grid.push_back(e.get<double>());
          }
          tn.time_lambda[g] = std::move(grid);
        }
      }
      if (tn.rj_scheme != 1 && tn.rj_scheme != 2)
        bad_field(subpath(t->path(), "rjScheme"), "must be 1 or 2");
      if (!(tn.theta_var > 0) || !(tn.beta_var > 0) || !(tn.v_var > 0) || !(tn.lambda_var > 0))
        bad_field(subpath(t->path(), "thetaVar"), "proposal variances must be positive");
      require_positive(tn.alpha_var, subpath(t->path(), "alphaVar"));
    }
  }
  if (ov.threads) cfg.threads = *ov.threads;
  return cfg;
}

json phr_mcmc_to_json(const MCMCConfig& cfg) {
  const auto& tn = cfg.tuning;
  json t;
  t["thetaVar"] = tn.theta_var;
  t["alphaVar"] = triple_to_json(tn.alpha_var);
  t["betaVar"] = tn.beta_var;
  t["vVar"] = tn.v_var;
  t["lambdaVar"] = tn.lambda_var;
  t["cG"] = triple_to_json(tn.c_g);
  t["delPert"] = triple_to_json(tn.del_pert);
  t["rjScheme"] = tn.rj_scheme;
  t["kMax"] = triple_to_json(tn.k_max);
  t["sMax"] = triple_to_json(tn.s_max);
  t["timeLambda"] = json::array({tn.time_lambda[0], tn.time_lambda[1], tn.time_lambda[2]});
  json j;
  j["numReps"] = cfg.num_reps;
  j["thin"] = cfg.thin;
  j["burninPerc"] = cfg.burnin_perc;
  j["chains"] = cfg.n_chains;
  j["threads"] = cfg.threads;
  j["nGamSave"] = cfg.n_gam_save;
  j["storeV"] = cfg.store_v;
  j["tuning"] = t;
  return j;
}

AFTConfig parse_aft_mcmc(const Ctx& root, const Overrides& ov) {
  AFTConfig cfg;
  if (auto c = root.opt_obj("mcmc")) {
    c->allow_only({"numReps", "thin", "burninPerc", "chains", "threads", "nGamSave", "nY1Save",
                   "nY2Save", "nY1naSave", "tuning"});
    cfg.num_reps = c->integer_or("numReps", cfg.num_reps);
    cfg.thin = static_cast<int>(c->integer_or("thin", cfg.thin));
    cfg.burnin_perc = c->num_or("burninPerc", cfg.burnin_perc);
    cfg.n_chains = static_cast<int>(c->integer_or("chains", cfg.n_chains));
    cfg.threads = static_cast<int>(c->integer_or("threads", cfg.threads));
    cfg.n_gam_save = static_cast<int>(c->integer_or("nGamSave", cfg.n_gam_save));
    cfg.n_y1_save = static_cast<int>(c->integer_or("nY1Save", cfg.n_y1_save));
    cfg.n_y2_save = static_cast<int>(c->integer_or("nY2Save", cfg.n_y2_save));
    cfg.n_y1na_save = static_cast<int>(c->integer_or("nY1naSave", cfg.n_y1na_save));
    if (auto t = c->opt_obj("tuning")) {
      t->allow_only({"betaVar", "muVar", "zetaVar", "gammaVar"});
      auto& tn = cfg.tuning;
      tn.beta_var = t->num_or("betaVar", tn.beta_var);
      tn.mu_var = t->num_or("muVar", tn.mu_var);
      tn.zeta_var = t->num_or("zetaVar", tn.zeta_var);
      tn.gamma_var = t->num_or("gammaVar", tn.gamma_var);
    }
  }
  if (ov.threads) cfg.threads = *ov.threads;
  return cfg;
}

json aft_mcmc_to_json(const AFTConfig& cfg) {
  json t;
  t["betaVar"] = cfg.tuning.beta_var;
  t["muVar"] = cfg.tuning.mu_var;
  t["zetaVar"] = cfg.tuning.zeta_var;
  t["gammaVar"] = cfg.tuning.gamma_var;
  json j;
  j["numReps"] = cfg.num_reps;
  j["thin"] = cfg.thin;
  j["burninPerc"] = cfg.burnin_perc;
  j["chains"] = cfg.n_chains;
  j["threads"] = cfg.threads;
  j["nGamSave"] = cfg.n_gam_save;
  j["nY1Save"] = cfg.n_y1_save;
  j["nY2Save"] = cfg.n_y2_save;
  j["nY1naSave"] = cfg.n_y1na_save;
  j["tuning"] = t;
  return j;
}

std::vector<double> parse_times(const Ctx& root) {
  if (!root.has("times")) bad_field("times", "is required");
  const json& v = root.raw("times");
  if (v.is_array()) {
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) bad_field("times", "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    if (out.empty()) bad_field("times", "must not be empty");
    return out;
  }
  const Ctx t = root.obj("times");
  t.allow_only({"from", "to", "length"});
  const double from = t.num("from");
  const double to = t.num("to");
  const long long len = t.integer("length");
  if (!std::isfinite(from) || from < 0) bad_field("times.from", "must be finite and >= 0");
  if (!std::isfinite(to) || to <= from) bad_field("times.to", "must be finite and > times.from");
  if (len < 2) bad_field("times.length", "must be at least 2");
  std::vector<double> out(static_cast<std::size_t>(len));
  for (long long i = 0; i < len; ++i)
    out[static_cast<std::size_t>(i)] = from + (to - from) * static_cast<double>(i) /
                                                  static_cast<double>(len - 1);
  return out;
}

json fit_to_json(const FreqFit& f) {
  json j;
  j["names"] = f.names;
  j["estimates"] = vec_to_json(f.estimates);
  j["covariance"] = mat_to_json(f.covariance);
  j["covarianceOk"] = f.covariance_ok;
  if (f.covariance_ok) {
    json se = json::array();
    for (Eigen::Index i = 0; i < f.estimates.size(); ++i) se.push_back(std::sqrt(f.covariance(i, i)));
    j["se"] = se;
  }
  j["loglik"] = f.loglik;
  j["iterations"] = f.iterations;
  j["converged"] = f.converged;
  j["warnings"] = f.warnings;
  json lay;
  lay["p1"] = f.layout.p1;
  lay["p2"] = f.layout.p2;
  lay["p3"] = f.layout.p3;
  lay["frailty"] = f.layout.frailty;
  lay["fixAlpha"] = f.layout.fix_alpha;
  j["layout"] = lay;
  j["model"] = model_to_json(f.model);
  json cn;
  cn["x1"] = f.covnames1;
  cn["x2"] = f.covnames2;
  cn["x3"] = f.covnames3;
  j["covariateNames"] = cn;
  return j;
}

FreqFit fit_from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("invalid fit file '" + path + "': " + e.what());
  }
  try {
    FreqFit f;
    f.names = j.at("names").get<std::vector<std::string>>();
    f.estimates = vec_from_std(j.at("estimates").get<std::vector<double>>());
    const auto rows = j.at("covariance").get<std::vector<std::vector<double>>>();
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    f.covariance.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != n)
        throw DataError("invalid fit file '" + path + "': covariance is not square");
      for (Eigen::Index c = 0; c < n; ++c)
        f.covariance(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    f.covariance_ok = j.at("covarianceOk").get<bool>();
    f.loglik = j.value("loglik", 0.0);
    f.iterations = j.value("iterations", 0);
    f.converged = j.value("converged", false);
    if (j.contains("warnings")) f.warnings = j["warnings"].get<std::vector<std::string>>();
    const json& lay = j.at("layout");
    f.layout.p1 = lay.at("p1").get<int>();
    f.layout.p2 = lay.at("p2").get<int>();
    f.layout.p3 = lay.at("p3").get<int>();
    f.layout.frailty = lay.at("frailty").get<bool>();
    f.layout.fix_alpha = lay.at("fixAlpha").get<bool>();
    const json& mdl = j.at("model");
    f.model.analysis = Analysis::IllnessDeath;
    f.model.inference = Inference::Frequentist;
    f.model.baseline = Baseline::Weibull;
    f.model.h3 = mdl.at("h3").get<std::string>() == "markov" ? H3Clock::Markov : H3Clock::SemiMarkov;
    f.model.frailty = mdl.at("frailty").get<bool>();
    if (j.contains("covariateNames")) {
      f.covnames1 = j["covariateNames"].value("x1", std::vector<std::string>{});
      f.covnames2 = j["covariateNames"].value("x2", std::vector<std::string>{});
      f.covnames3 = j["covariateNames"].value("x3", std::vector<std::string>{});
    }
    if (f.estimates.size() != static_cast<Eigen::Index>(f.names.size()) ||
        f.covariance.rows() != f.estimates.size())
      throw DataError("invalid fit file '" + path + "': inconsistent dimensions");
    return f;
  } catch (const json::exception& e) {
    throw DataError("invalid fit file '" + path + "': " + e.what());
  }
}

// ---- subcommands ----

int cmd_simulate(const json& cfg_json, const Overrides& ov) {
  const Ctx c(cfg_json, "");
  c.allow_only({"subcommand", "seed", "outputDir", "n", "truth", "covariates", "output"});
  check_subcommand_tag(c, "simulate");
  const std::uint64_t seed = resolve_seed(c, ov);
  const fs::path outdir = resolve_outdir(c, ov);

  OutputGuard guard;
  Covariates cov;
  std::string cov_path, cluster_name;
  std::size_t n = 0;
  if (auto cc = c.opt_obj("covariates")) {
    cc->allow_only({"path", "x1", "x2", "x3", "cluster"});
    cov_path = cc->str("path");
    guard.protect(cov_path);
    const Table t = read_csv_file(cov_path);
    n = t.nrow();
    auto pick = [&](const std::vector<std::string>& names, Eigen::MatrixXd& x,
                    std::vector<std::string>& out_names) {
      x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(names.size()));
      for (std::size_t j = 0; j < names.size(); ++j) {
        const auto& col = t.col(names[j]);
        for (std::size_t i = 0; i < n; ++i)
          x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
      }
      out_names = names;
    };
    pick(cc->str_list_or_empty("x1"), cov.x1, cov.names1);
    pick(cc->str_list_or_empty("x2"), cov.x2, cov.names2);
    pick(cc->str_list_or_empty("x3"), cov.x3, cov.names3);
    cluster_name = cc->str_or("cluster", "");
    if (!cluster_name.empty()) {
      const auto& col = t.col(cluster_name);
      std::map<double, int> ids;
      for (const double v : col) {
        if (!std::isfinite(v))
          throw DataError("cluster column '" + cluster_name + "' has a non-finite label");
        ids.emplace(v, 0);
      }
      int next = 0;
      for (auto& kv : ids) kv.second = next++;
      cov.cluster.reserve(n);
      for (const double v : col) cov.cluster.push_back(ids[v]);
      cov.n_clusters = next;
    }
    if (c.has("n") && static_cast<std::size_t>(c.integer("n")) != n)
      bad_field("n", "must equal the covariate file's row count");
  } else {
    const long long nn = c.integer("n");
    if (nn < 1) bad_field("n", "must be at least 1");
    n = static_cast<std::size_t>(nn);
  }

  WeibullIDTruth truth;
  {
    const Ctx tc = c.obj("truth");
    tc.allow_only({"alpha", "kappa", "beta1", "beta2", "beta3", "theta", "sigmaV", "censoring"});
    const auto al = tc.triple("alpha", {1, 1, 1});
    const auto ka = tc.triple("kappa", {1, 1, 1});
    for (int g = 0; g < 3; ++g) {
      truth.alpha[g] = al[g];
      truth.kappa[g] = ka[g];
    }
    truth.beta1 = vec_from_std(tc.num_vector_or_empty("beta1"));
    truth.beta2 = vec_from_std(tc.num_vector_or_empty("beta2"));
    truth.beta3 = vec_from_std(tc.num_vector_or_empty("beta3"));
    auto check_len = [&](const Eigen::VectorXd& b, const Eigen::MatrixXd& x, const char* key) {
      if (b.size() != x.cols())
        bad_field(subpath("truth", key), "must have one entry per covariate column");
    };
    check_len(truth.beta1, cov.x1, "beta1");
    check_len(truth.beta2, cov.x2, "beta2");
    check_len(truth.beta3, cov.x3, "beta3");
    truth.theta = tc.num_or("theta", 0.0);
    if (tc.has("sigmaV")) {
      if (cluster_name.empty())
        bad_field("truth.sigmaV", "requires covariates.cluster to be set");
      truth.sigma_v = tc.mat3("sigmaV");
    } else if (!cluster_name.empty()) {
      bad_field("truth.sigmaV", "is required when covariates.cluster is set");
    }
    const auto cw = tc.num_vector("censoring");
    if (cw.size() != 2) bad_field("truth.censoring", "must be [lower, upper]");
    truth.cens_lo = cw[0];
    truth.cens_hi = cw[1];
  }

  const SemiCompDataset d = simulate_id(n, cov, truth, seed);

  ColumnBinding out_bind;
  out_bind.cluster = cluster_name;
  const std::string base = c.str_or("output", "simulated.csv");
  fs::create_directories(outdir);
  const std::string out_path = guard.checked(outdir / base);
  write_csv_file(out_path, to_table(d, out_bind));
  note_written(out_path);

  json echo;
  echo["subcommand"] = "simulate";
  echo["seed"] = seed;
  echo["outputDir"] = outdir.string();
  echo["n"] = n;
  json tj;
  tj["alpha"] = json::array({truth.alpha[0], truth.alpha[1], truth.alpha[2]});
  tj["kappa"] = json::array({truth.kappa[0], truth.kappa[1], truth.kappa[2]});
  tj["beta1"] = vec_to_json(truth.beta1);
  tj["beta2"] = vec_to_json(truth.beta2);
  tj["beta3"] = vec_to_json(truth.beta3);
  tj["theta"] = truth.theta;
  if (!cluster_name.empty()) tj["sigmaV"] = mat_to_json(truth.sigma_v);
  tj["censoring"] = json::array({truth.cens_lo, truth.cens_hi});
  echo["truth"] = tj;
  if (!cov_path.empty()) {
    json cj;
    cj["path"] = cov_path;
    cj["x1"] = cov.names1;
    cj["x2"] = cov.names2;
    cj["x3"] = cov.names3;
    cj["cluster"] = cluster_name;
    echo["covariates"] = cj;
  }
  echo["output"] = base;
  write_echo(outdir, "simulate_config.json", echo, guard);
  return 0;
}

int cmd_fit_freq(const json& cfg_json, const Overrides& ov) {
  const Ctx c(cfg_json, "");
  c.allow_only({"subcommand", "seed", "outputDir", "data", "model", "fit", "output"});
  check_subcommand_tag(c, "fit-freq");
  const fs::path outdir = resolve_outdir(c, ov);
  const SemiCompSource src = parse_semicomp_source(c);
  const ModelSpec m = parse_model(c, Inference::Frequentist);

  FitOptions opt;
  if (auto fo = c.opt_obj("fit")) {
    fo->allow_only({"maxIter", "tol", "fixAlpha"});
    opt.max_iter = static_cast<int>(fo->integer_or("maxIter", opt.max_iter));
    opt.tol = fo->num_or("tol", opt.tol);
    opt.fix_alpha = fo->flag_or("fixAlpha", opt.fix_alpha);
    if (opt.max_iter < 1) bad_field("fit.maxIter", "must be at least 1");
    if (!(opt.tol > 0)) bad_field("fit.tol", "must be positive");
  }

  OutputGuard guard;
  guard.protect(src.path);
  const SemiCompDataset d = load_semicomp_csv(src.path, src.bind);
  const FreqFit fit = fit_freq_id(d, m, opt);

  const std::string base = c.str_or("output", "fit.json");
  fs::create_directories(outdir);
  const std::string out_path = guard.checked(outdir / base);
  write_text_file(out_path, fit_to_json(fit).dump(2) + "\n");
  note_written(out_path);
  if (!fit.converged)
    std::cout << "warning: optimization did not converge; converged=false recorded\n";
  for (const auto& w : fit.warnings) std::cout << "warning: " << w << "\n";

  json echo;
  echo["subcommand"] = "fit-freq";
  echo["outputDir"] = outdir.string();
  echo["data"] = semicomp_source_to_json(src);
  echo["model"] = model_to_json(m);
  json fo;
  fo["maxIter"] = opt.max_iter;
  fo["tol"] = opt.tol;
  fo["fixAlpha"] = opt.fix_alpha;
  echo["fit"] = fo;
  echo["output"] = base;
  write_echo(outdir, "fit_freq_config.json", echo, guard);
  return 0;
}

int cmd_fit_bayes(const json& cfg_json, const Overrides& ov) {
  const Ctx c(cfg_json, "");
  c.allow_only({"subcommand", "seed", "outputDir", "data", "model", "hyper", "mcmc", "output"});
  check_subcommand_tag(c, "fit-bayes");
  const std::uint64_t seed = resolve_seed(c, ov);
  const fs::path outdir = resolve_outdir(c, ov);
  const SemiCompSource src = parse_semicomp_source(c);
  const ModelSpec m = parse_model(c, Inference::Bayesian);
  if (m.baseline == Baseline::LogNormal)
    bad_field("model.baseline", "the log-normal model is fitted by the fit-aft subcommand");
  const PHRHyper hy = parse_phr_hyper(c);
  const MCMCConfig mc = parse_phr_mcmc(c, ov);
  const std::string base = c.str_or("output", "samples");

  OutputGuard guard;
  guard.protect(src.path);
  const SemiCompDataset d = load_semicomp_csv(src.path, src.bind);

  json echo;
  echo["subcommand"] = "fit-bayes";
  echo["seed"] = seed;
  echo["outputDir"] = outdir.string();
  echo["data"] = semicomp_source_to_json(src);
  echo["model"] = model_to_json(m);
  echo["hyper"] = phr_hyper_to_json(hy);
  echo["mcmc"] = phr_mcmc_to_json(mc);
  echo["output"] = base;

  PosteriorSamples s = mcmc_phr(d, m, hy, mc, seed);
  s.info.config_echo = echo.dump();

  for (int ch = 1; ch <= mc.n_chains; ++ch)
    guard.checked(outdir / (base + "_chain" + std::to_string(ch) + ".csv"));
  guard.checked(outdir / (base + "_meta.json"));
  const std::string meta_path = write_samples(outdir.string(), base, s);
  note_written(meta_path);
  write_echo(outdir, "fit_bayes_config.json", echo, guard);
  return 0;
}

int cmd_fit_aft(const json& cfg_json, const Overrides& ov) {
  const Ctx c(cfg_json, "");
  c.allow_only({"subcommand", "seed", "outputDir", "data", "hyper", "mcmc", "output"});
  check_subcommand_tag(c, "fit-aft");
  const std::uint64_t seed = resolve_seed(c, ov);
  const fs::path outdir = resolve_outdir(c, ov);
  const IntervalSource src = parse_interval_source(c);
  const AFTHyper hy = parse_aft_hyper(c);
  const AFTConfig mc = parse_aft_mcmc(c, ov);
  const std::string base = c.str_or("output", "samples");

  OutputGuard guard;
  guard.protect(src.path);
  const Table t = read_csv_file(src.path);
  const IntervalDataset d = load_interval(t, src.bind);

  json echo;
  echo["subcommand"] = "fit-aft";
  echo["seed"] = seed;
  echo["outputDir"] = outdir.string();
  echo["data"] = interval_source_to_json(src);
  echo["hyper"] = aft_hyper_to_json(hy);
  echo["mcmc"] = aft_mcmc_to_json(mc);
  echo["output"] = base;

  PosteriorSamples s = mcmc_aft(d, hy, mc, seed);
  s.info.config_echo = echo.dump();

  for (int ch = 1; ch <= mc.n_chains; ++ch)
    guard.checked(outdir / (base + "_chain" + std::to_string(ch) + ".csv"));
  guard.checked(outdir / (base + "_meta.json"));
  const std::string meta_path = write_samples(outdir.string(), base, s);
  note_written(meta_path);
  write_echo(outdir, "fit_aft_config.json", echo, guard);
  return 0;
}

int cmd_diagnose(const json& cfg_json, const Overrides& ov) {
  const Ctx c(cfg_json, "");
  c.allow_only({"subcommand", "outputDir", "samples", "level", "output"});
  check_subcommand_tag(c, "diagnose");
  const fs::path outdir = resolve_outdir(c, ov);
  const std::string samples_path = c.str("samples");
  const double level = c.num_or("level", 0.95);
  const std::string base = c.str_or("output", "summary");

  OutputGuard guard;
  guard.protect(samples_path);
  const PosteriorSamples s = read_samples(samples_path);
  const SummaryTable table = summarize_posterior(s, level);
  std::cout << format_summary(table);

  fs::create_directories(outdir);
  const std::string txt_path = guard.checked(outdir / (base + ".txt"));
  write_text_file(txt_path, format_summary(table));
  note_written(txt_path);
  const std::string csv_path = guard.checked(outdir / (base + ".csv"));
  write_summary_csv(csv_path, table);
  note_written(csv_path);

  json echo;
  echo["subcommand"] = "diagnose";
  echo["outputDir"] = outdir.string();
  echo["samples"] = samples_path;
  echo["level"] = level;
  echo["output"] = base;
  write_echo(outdir, "diagnose_config.json", echo, guard);
  return 0;
}

int cmd_predict(const json& cfg_json, const Overrides& ov) {
  const Ctx c(cfg_json, "");
  c.allow_only({"subcommand", "outputDir", "fit", "samples", "times", "level", "output"});
  check_subcommand_tag(c, "predict");
  const fs::path outdir = resolve_outdir(c, ov);
  if (c.has("fit") == c.has("samples"))
    bad_field("fit", "exactly one of 'fit' and 'samples' must be given");
  const std::vector<double> times = parse_times(c);
  const double level = c.num_or("level", 0.95);
  const std::string base = c.str_or("output", "curve");

  OutputGuard guard;
  std::vector<PredictedCurve> curves;
  json echo;
  echo["subcommand"] = "predict";
  echo["outputDir"] = outdir.string();
  if (c.has("fit")) {
    const std::string fit_path = c.str("fit");
    guard.protect(fit_path);
    curves = predict_baseline(fit_from_json_file(fit_path), times, level);
    echo["fit"] = fit_path;
  } else {
    const std::string samples_path = c.str("samples");
    guard.protect(samples_path);
    curves = bayes_baseline_curves(read_samples(samples_path), times, level);
    echo["samples"] = samples_path;
  }

  fs::create_directories(outdir);
  for (const auto& curve : curves) {
    const std::string fname = base + "_g" + std::to_string(curve.g) + "_" + curve.kind + ".csv";
    const std::string p = guard.checked(outdir / fname);
    write_csv_file(p, curve_to_table(curve));
    note_written(p);
  }

  echo["times"] = times;
  echo["level"] = level;
  echo["output"] = base;
  write_echo(outdir, "predict_config.json", echo, guard);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"illness-death model toolkit: simulation, fitting, diagnostics, prediction"};
  app.name("scr");
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string outdir;

  struct Sub {
    const char* name;
    const char* desc;
    bool has_seed;
    bool has_threads;
    int (*fn)(const json&, const Overrides&);
  };
  const Sub subs[] = {
      {"simulate", "generate illness-death data from known parameters", true, false, cmd_simulate},
      {"fit-freq", "maximum-likelihood Weibull illness-death fit", false, false, cmd_fit_freq},
      {"fit-bayes", "Bayesian hazard-regression fit (Weibull or piecewise baseline)", true, true,
       cmd_fit_bayes},
      {"fit-aft", "Bayesian log-normal accelerated failure time fit", true, true, cmd_fit_aft},
      {"diagnose", "posterior summaries and convergence diagnostics", false, false, cmd_diagnose},
      {"predict", "baseline survivor and hazard curves", false, false, cmd_predict},
  };

  std::map<std::string, const Sub*> dispatch;
  for (const Sub& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.desc);
    sc->add_option("--config", config_path, "JSON config file")->required();
    sc->add_option("--output-dir", outdir, "output directory (overrides the config)");
    if (s.has_seed) sc->add_option("--seed", seed, "master seed (overrides the config)");
    if (s.has_threads)
      sc->add_option("--threads", threads, "chain thread limit (overrides the config)");
    dispatch[s.name] = &s;
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  CLI::App* picked = app.get_subcommands().front();
  const Sub* sub = dispatch.at(picked->get_name());
  Overrides ov;
  if (sub->has_seed && picked->count("--seed")) ov.seed = seed;
  if (sub->has_threads && picked->count("--threads")) ov.threads = threads;
  if (picked->count("--output-dir")) ov.output_dir = outdir;

  try {
    const json cfg = load_config(config_path);
    return sub->fn(cfg, ov);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace scr
