#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scr/csv.hpp"

namespace scr {

struct ChainSamples {
  std::vector<std::string> names;
  Eigen::MatrixXd draws;  // retained draws x parameters, NaN-padded where noted
  std::map<std::string, std::pair<long, long>> accept;  // move -> (accepted, attempted)
};

struct RunInfo {
  long num_reps = 0;
  int thin = 1;
  double burnin_perc = 0.5;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> chain_seeds;
  std::string model;  // short text tag, e.g. "phr-weibull" / "phr-pem" / "aft-lognormal"
  std::array<double, 3> s_max{0, 0, 0};
  std::array<std::vector<double>, 3> time_lambda;
  std::string config_echo;  // JSON text of the run configuration, may be empty
};

struct PosteriorSamples {
  std::vector<ChainSamples> chains;
  RunInfo info;

  long n_retained() const { return chains.empty() ? 0 : chains.front().draws.rows(); }
  int col(const std::string& name) const;  // -1 when absent
  bool has(const std::string& name) const { return col(name) >= 0; }
  // pooled post-burn-in draws of one parameter across chains
  std::vector<double> pooled(const std::string& name) const;
};

// retained draws per chain: floor(numReps/thin) thinned scans minus the
// leading burn-in fraction
long retained_draws(long num_reps, int thin, double burnin_perc);
long burnin_draws(long num_reps, int thin, double burnin_perc);

// Writes <base>_chain<c>.csv per chain plus <base>_meta.json and returns the
// metadata path.  The padding convention for variable-dimension parameters
// is recorded in the metadata.
std::string write_samples(const std::string& dir, const std::string& base,
                          const PosteriorSamples& s);

PosteriorSamples read_samples(const std::string& meta_path);

}  // namespace scr
