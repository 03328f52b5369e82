#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace scr {

// Substream ids used throughout.  A single master seed plus one of these
// offsets determines every random draw, so e.g. adding cluster effects to a
// simulation does not perturb the subject-level event times.
namespace streams {
inline constexpr std::uint64_t kClusterEffects = 1;
inline constexpr std::uint64_t kFrailty = 2;
inline constexpr std::uint64_t kEventTimes = 3;
inline constexpr std::uint64_t kCensoring = 4;
inline constexpr std::uint64_t kChainBase = 16;   // chain c -> kChainBase + c
inline constexpr std::uint64_t kInitBase = 4096;  // start values of chain c -> kInitBase + c
}  // namespace streams

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Seeded random stream.  All distribution helpers construct their std::
// distribution per call so the engine state is the only state that matters.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  Rng(std::uint64_t master, std::uint64_t stream) : eng_(derive_seed(master, stream)) {}

  std::mt19937_64& engine() { return eng_; }

  // uniform on the open interval (0,1)
  double unif01();
  double unif(double a, double b);
  // uniform on the integers {lo, ..., hi}
  long unif_int(long lo, long hi);
  double normal(double mean, double sd);
  double rgamma(double shape, double rate);
  double rexp(double rate);

  Eigen::VectorXd mvnormal(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);
  // Inverse-Wishart(Psi, nu): X^{-1} ~ Wishart(Psi^{-1}, nu); E[X] = Psi/(nu-p-1).
  Eigen::MatrixXd inv_wishart(const Eigen::MatrixXd& psi, double nu);

  // Normal(mean, sd^2) restricted to [lo, hi] by inverse-CDF, with a
  // rejection fallback once the interval mass underflows.  lo == hi returns
  // the bound exactly; bounds may be infinite.
  double trunc_normal(double mean, double sd, double lo, double hi);

 private:
  std::mt19937_64 eng_;
};

}  // namespace scr
