#include "scr/posterior.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace scr {

namespace fs = std::filesystem;
using nlohmann::json;

int PosteriorSamples::col(const std::string& name) const {
  if (chains.empty()) return -1;
  const auto& nm = chains.front().names;
  for (std::size_t j = 0; j < nm.size(); ++j)
    if (nm[j] == name) return static_cast<int>(j);
  return -1;
}

std::vector<double> PosteriorSamples::pooled(const std::string& name) const {
  const int j = col(name);
  if (j < 0) throw DataError("parameter '" + name + "' not found in samples");
  std::vector<double> out;
  for (const auto& ch : chains) {
    out.reserve(out.size() + ch.draws.rows());
    for (Eigen::Index i = 0; i < ch.draws.rows(); ++i) out.push_back(ch.draws(i, j));
  }
  return out;
}

long burnin_draws(long num_reps, int thin, double burnin_perc) {
  const long nth = num_reps / thin;
  return static_cast<long>(std::floor(nth * burnin_perc + 1e-9));
}

long retained_draws(long num_reps, int thin, double burnin_perc) {
  const long nth = num_reps / thin;
  return nth - burnin_draws(num_reps, thin, burnin_perc);
}

static Table chain_to_table(const ChainSamples& ch) {
  Table t;
  t.names = ch.names;
  t.cols.resize(ch.names.size());
  for (std::size_t j = 0; j < ch.names.size(); ++j) {
    t.cols[j].resize(ch.draws.rows());
    for (Eigen::Index i = 0; i < ch.draws.rows(); ++i) t.cols[j][i] = ch.draws(i, static_cast<Eigen::Index>(j));
  }
  return t;
}

std::string write_samples(const std::string& dir, const std::string& base,
                          const PosteriorSamples& s) {
  fs::create_directories(dir);
  json meta;
  meta["model"] = s.info.model;
  meta["numReps"] = s.info.num_reps;
  meta["thin"] = s.info.thin;
  meta["burninPerc"] = s.info.burnin_perc;
  meta["seed"] = s.info.seed;
  meta["chainSeeds"] = s.info.chain_seeds;
  meta["retainedPerChain"] = s.n_retained();
  meta["padding"] =
      "variable-dimension columns (s<g>.<k>, lambda<g>.<k>) hold NaN beyond "
      "the draw's K<g>+1 intervals";
  if (!s.info.config_echo.empty()) meta["config"] = json::parse(s.info.config_echo);
  {
    json sm = json::array();
    for (double v : s.info.s_max) sm.push_back(v);
    meta["sMax"] = sm;
    json tl = json::array();
    for (const auto& g : s.info.time_lambda) tl.push_back(g);
    meta["timeLambda"] = tl;
  }
  json files = json::array();
  json acc = json::array();
  for (std::size_t c = 0; c < s.chains.size(); ++c) {
    const std::string fname = base + "_chain" + std::to_string(c + 1) + ".csv";
    write_csv_file((fs::path(dir) / fname).string(), chain_to_table(s.chains[c]));
    files.push_back(fname);
    json a = json::object();
    for (const auto& [k, v] : s.chains[c].accept)
      a[k] = json::array({v.first, v.second});
    acc.push_back(a);
  }
  meta["chainFiles"] = files;
  meta["acceptance"] = acc;

  const std::string meta_path = (fs::path(dir) / (base + "_meta.json")).string();
  std::ofstream out(meta_path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + meta_path + "' for writing");
  out << meta.dump(2) << "\n";
  return meta_path;
}

PosteriorSamples read_samples(const std::string& meta_path) {
  std::ifstream in(meta_path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + meta_path + "'");
  json meta;
  try {
    in >> meta;
  } catch (const json::exception& e) {
    throw DataError("invalid samples metadata '" + meta_path + "': " + e.what());
  }
  PosteriorSamples s;
  try {
    s.info.model = meta.value("model", "");
    s.info.num_reps = meta.value("numReps", 0L);
    s.info.thin = meta.value("thin", 1);
    s.info.burnin_perc = meta.value("burninPerc", 0.0);
    s.info.seed = meta.value("seed", std::uint64_t{0});
    if (meta.contains("chainSeeds"))
      s.info.chain_seeds = meta["chainSeeds"].get<std::vector<std::uint64_t>>();
    if (meta.contains("sMax"))
      for (int g = 0; g < 3; ++g) s.info.s_max[g] = meta["sMax"][g].get<double>();
    if (meta.contains("timeLambda"))
      for (int g = 0; g < 3; ++g)
        s.info.time_lambda[g] = meta["timeLambda"][g].get<std::vector<double>>();
    if (meta.contains("config")) s.info.config_echo = meta["config"].dump();
    const fs::path dir = fs::path(meta_path).parent_path();
    for (const auto& f : meta["chainFiles"]) {
      const std::string fname = f.get<std::string>();
      Table t = read_csv_file((dir / fname).string());
      ChainSamples ch;
      ch.names = t.names;
      ch.draws.resize(static_cast<Eigen::Index>(t.nrow()), static_cast<Eigen::Index>(t.ncol()));
      for (std::size_t j = 0; j < t.ncol(); ++j)
        for (std::size_t i = 0; i < t.nrow(); ++i)
          ch.draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.cols[j][i];
      s.chains.push_back(std::move(ch));
    }
  } catch (const json::exception& e) {
    throw DataError("invalid samples metadata '" + meta_path + "': " + e.what());
  }
  if (!s.chains.empty()) {
    for (const auto& ch : s.chains)
      if (ch.names != s.chains.front().names)
        throw DataError("chains disagree on parameter names");
  }
  return s;
}

}  // namespace scr
