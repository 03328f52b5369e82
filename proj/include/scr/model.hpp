#pragma once

#include "scr/csv.hpp"

namespace scr {

enum class Analysis { IllnessDeath, Univariate };
enum class H3Clock { Markov, SemiMarkov };
enum class Baseline { Weibull, PEM, LogNormal };
enum class Inference { Frequentist, Bayesian };
enum class ClusterEffects { None, MVN };

struct ModelSpec {
  Analysis analysis = Analysis::IllnessDeath;
  H3Clock h3 = H3Clock::SemiMarkov;
  Baseline baseline = Baseline::Weibull;
  Inference inference = Inference::Frequentist;
  bool frailty = true;
  ClusterEffects cluster = ClusterEffects::None;
};

// Rejects unsupported combinations.  Each rule is reported by name.
inline void check_model_spec(const ModelSpec& m) {
  if (m.baseline == Baseline::LogNormal) {
    if (m.inference != Inference::Bayesian)
      throw ConfigError("model spec: log-Normal baseline requires bayesian inference");
    if (m.h3 != H3Clock::SemiMarkov)
      throw ConfigError("model spec: log-Normal baseline requires the semi-Markov clock");
    if (m.cluster != ClusterEffects::None)
      throw ConfigError("model spec: log-Normal baseline does not support cluster effects");
  }
  if (m.baseline == Baseline::PEM) {
    if (m.inference != Inference::Bayesian)
      throw ConfigError("model spec: piecewise-constant baseline requires bayesian inference");
    if (m.cluster != ClusterEffects::None)
      throw ConfigError("model spec: piecewise-constant baseline does not support cluster effects");
  }
  if (m.inference == Inference::Frequentist && m.baseline != Baseline::Weibull)
    throw ConfigError("model spec: frequentist fitting supports only the Weibull baseline");
  if (m.cluster == ClusterEffects::MVN && m.inference != Inference::Bayesian)
    throw ConfigError("model spec: cluster effects require bayesian inference");
}

}  // namespace scr
