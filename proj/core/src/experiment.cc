// Copyright 2026 The SPS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sps/experiment.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "sps/baselines.h"
#include "sps/sps.h"

namespace sps {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> SplitList(std::string_view s, char sep = ',') {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto end = s.find(sep, start);
    parts.push_back(Trim(s.substr(start, end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

template <typename T>
bool ParseNumber(std::string_view s, T* out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, *out);
  return ec == std::errc() && ptr == end;
}

// Shortest text that round-trips.
std::string FormatDouble(double v) {
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return ec == std::errc() ? std::string(buffer, ptr) : std::string("nan");
}

template <typename T>
std::string FormatOptional(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return FormatDouble(*v);
  } else {
    return std::to_string(*v);
  }
}

struct LineContext {
  std::string_view origin;
  int line;
  std::string_view key;

  [[noreturn]] void Fail(const std::string& message) const {
    std::ostringstream os;
    os << origin << ":" << line << ": " << key << ": " << message;
    throw ConfigError(os.str());
  }
};

template <typename T>
T ParseScalar(const LineContext& ctx, std::string_view value) {
  T out{};
  if (!ParseNumber(value, &out)) {
    ctx.Fail("cannot parse '" + std::string(value) + "' as a number");
  }
  return out;
}

template <typename T>
std::vector<T> ParseVector(const LineContext& ctx, std::string_view value) {
  std::vector<T> out;
  for (std::string_view part : SplitList(value)) {
    if (part.empty()) ctx.Fail("empty list entry");
    out.push_back(ParseScalar<T>(ctx, part));
  }
  return out;
}

bool ParseBool(const LineContext& ctx, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  ctx.Fail("expected true or false, got '" + std::string(value) + "'");
}

template <typename T>
void SortUnique(std::vector<T>* v) {
  std::sort(v->begin(), v->end());
  v->erase(std::unique(v->begin(), v->end()), v->end());
}

using GridKey = std::tuple<std::string, int, std::optional<double>,
                           std::optional<int>, std::optional<double>,
                           std::optional<double>>;

GridKey KeyOf(const ResultRow& r) {
  return {r.algorithm, r.d, r.tau, r.s, r.eta, r.h};
}

void Require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string_view AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kSpsSgld:
      return "sps-sgld";
    case Algorithm::kSpsMala:
      return "sps-mala";
    case Algorithm::kSgld:
      return "sgld";
  }
  return "unknown";
}

Algorithm ParseAlgorithm(std::string_view name) {
  if (name == "sps-sgld") return Algorithm::kSpsSgld;
  if (name == "sps-mala") return Algorithm::kSpsMala;
  if (name == "sgld") return Algorithm::kSgld;
  throw ConfigError("unknown algorithm '" + std::string(name) +
                    "' (expected sps-sgld, sps-mala or sgld)");
}

void ExperimentConfig::Validate() const {
  Require(!dims.empty(), "d: at least one dimension is required");
  for (int d : dims) Require(d >= 1, "d: dimensions must be >= 1");
  Require(num_components >= 1, "n: must be >= 1");
  Require(std::isfinite(bias) && std::isfinite(mu_mean),
          "bias, mu_mean: must be finite");
  Require(!algorithms.empty(), "algorithms: at least one is required");
  Require(gradient_budget >= 1, "gradient_budget: must be >= 1");
  Require(n_chains >= 1, "n_chains: must be >= 1");
  Require(outer_batch >= 1 && outer_batch <= num_components,
          "outer_batch: must lie in [1, n]");
  Require(inner_batch >= 1 && inner_batch <= outer_batch,
          "inner_batch: must lie in [1, outer_batch]");
  Require(sgld_batch >= 1 && sgld_batch <= num_components,
          "sgld_batch: must lie in [1, n]");
  Require(sgld_window >= 1, "sgld_window: must be >= 1");
  Require(!seeds.empty(), "seeds: at least one seed is required");

  const bool sps = std::any_of(algorithms.begin(), algorithms.end(), [](Algorithm a) {
    return a != Algorithm::kSgld;
  });
  const bool sgld = std::find(algorithms.begin(), algorithms.end(),
                              Algorithm::kSgld) != algorithms.end();
  if (sps) {
    Require(!tau_grid.empty() && !s_grid.empty() && !eta_grid.empty(),
            "tau, S, eta: SPS algorithms need non-empty grids");
    for (double t : tau_grid) Require(t > 0.0, "tau: entries must be positive");
    for (double e : eta_grid) Require(e > 0.0, "eta: entries must be positive");
    for (int s : s_grid) Require(s >= 1, "S: entries must be >= 1");
  }
  if (std::find(algorithms.begin(), algorithms.end(), Algorithm::kSpsSgld) !=
      algorithms.end()) {
    for (int s : s_grid) {
      Require(s - 1 - sgld_window >= 0,
              "S: every entry must be >= sgld_window + 1 for sps-sgld");
    }
    for (double t : tau_grid) {
      for (double e : eta_grid) {
        Require(t < 4.0 * e, "tau, eta: sps-sgld needs tau < 4 eta");
      }
    }
  }
  if (sgld) {
    Require(!h_grid.empty(), "h: sgld needs a non-empty grid");
    for (double h : h_grid) Require(h > 0.0, "h: entries must be positive");
    Require(gradient_budget / static_cast<std::uint64_t>(sgld_batch) <=
                static_cast<std::uint64_t>(std::numeric_limits<int>::max()),
            "gradient_budget: too large for sgld iteration count");
  }
  try {
    histogram.Validate();
    reference.Validate();
    UldInnerConfig{uld_gamma, uld_tau, uld_steps}.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

MixtureTarget::Params ExperimentConfig::TargetParams(int dim) const {
  MixtureTarget::Params p;
  p.dim = dim;
  p.num_components = num_components;
  p.seed = target_seed;
  p.bias = bias;
  p.mu_mean = mu_mean;
  return p;
}

ExperimentConfig ParseExperimentConfig(std::string_view text,
                                       std::string_view origin) {
  ExperimentConfig c;
  using Setter = std::function<void(const LineContext&, std::string_view)>;
  const std::unordered_map<std::string_view, Setter> setters = {
      {"d", [&](auto& ctx, auto v) { c.dims = ParseVector<int>(ctx, v); }},
      {"n", [&](auto& ctx, auto v) { c.num_components = ParseScalar<int>(ctx, v); }},
      {"target_seed",
       [&](auto& ctx, auto v) { c.target_seed = ParseScalar<std::uint64_t>(ctx, v); }},
      {"bias", [&](auto& ctx, auto v) { c.bias = ParseScalar<double>(ctx, v); }},
      {"mu_mean", [&](auto& ctx, auto v) { c.mu_mean = ParseScalar<double>(ctx, v); }},
      {"algorithms",
       [&](auto& ctx, auto v) {
         c.algorithms.clear();
         for (std::string_view name : SplitList(v)) {
           try {
             c.algorithms.push_back(ParseAlgorithm(name));
           } catch (const ConfigError& e) {
             ctx.Fail(e.what());
           }
         }
       }},
      {"gradient_budget",
       [&](auto& ctx, auto v) { c.gradient_budget = ParseScalar<std::uint64_t>(ctx, v); }},
      {"n_chains", [&](auto& ctx, auto v) { c.n_chains = ParseScalar<int>(ctx, v); }},
      {"outer_batch", [&](auto& ctx, auto v) { c.outer_batch = ParseScalar<int>(ctx, v); }},
      {"inner_batch", [&](auto& ctx, auto v) { c.inner_batch = ParseScalar<int>(ctx, v); }},
      {"sgld_batch", [&](auto& ctx, auto v) { c.sgld_batch = ParseScalar<int>(ctx, v); }},
      {"sgld_window", [&](auto& ctx, auto v) { c.sgld_window = ParseScalar<int>(ctx, v); }},
      {"tau", [&](auto& ctx, auto v) { c.tau_grid = ParseVector<double>(ctx, v); }},
      {"S", [&](auto& ctx, auto v) { c.s_grid = ParseVector<int>(ctx, v); }},
      {"eta", [&](auto& ctx, auto v) { c.eta_grid = ParseVector<double>(ctx, v); }},
      {"h", [&](auto& ctx, auto v) { c.h_grid = ParseVector<double>(ctx, v); }},
      {"uld_gamma", [&](auto& ctx, auto v) { c.uld_gamma = ParseScalar<double>(ctx, v); }},
      {"uld_tau", [&](auto& ctx, auto v) { c.uld_tau = ParseScalar<double>(ctx, v); }},
      {"uld_steps", [&](auto& ctx, auto v) { c.uld_steps = ParseScalar<int>(ctx, v); }},
      {"seeds", [&](auto& ctx, auto v) { c.seeds = ParseVector<std::uint64_t>(ctx, v); }},
      {"bins", [&](auto& ctx, auto v) { c.histogram.bins = ParseScalar<int>(ctx, v); }},
      {"padding",
       [&](auto& ctx, auto v) { c.histogram.padding = ParseScalar<double>(ctx, v); }},
      {"reference_budget",
       [&](auto& ctx, auto v) { c.reference.budget = ParseScalar<std::uint64_t>(ctx, v); }},
      {"reference_chains",
       [&](auto& ctx, auto v) { c.reference.chains = ParseScalar<int>(ctx, v); }},
      {"reference_burn_in",
       [&](auto& ctx, auto v) { c.reference.burn_in = ParseScalar<int>(ctx, v); }},
      {"reference_thin",
       [&](auto& ctx, auto v) { c.reference.thin = ParseScalar<int>(ctx, v); }},
      {"reference_step",
       [&](auto& ctx, auto v) { c.reference.step = ParseScalar<double>(ctx, v); }},
      {"reference_reflect",
       [&](auto& ctx, auto v) { c.reference.reflect = ParseBool(ctx, v); }},
      {"output", [&](auto&, auto v) { c.output = std::string(v); }},
      {"cache_dir", [&](auto&, auto v) { c.cache_dir = std::string(v); }},
      {"record_wall_time",
       [&](auto& ctx, auto v) { c.record_wall_time = ParseBool(ctx, v); }},
      {"threads",
       [&](auto& ctx, auto v) {
         c.threads = ParseScalar<int>(ctx, v);
         c.reference.threads = c.threads;
       }},
  };

  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    LineContext ctx{origin, line_no, Trim(line.substr(0, eq))};
    if (eq == std::string_view::npos) ctx.Fail("expected 'key = value'");
    const std::string_view value = Trim(line.substr(eq + 1));
    const auto it = setters.find(ctx.key);
    if (it == setters.end()) ctx.Fail("unknown key");
    if (!seen.insert(std::string(ctx.key)).second) ctx.Fail("duplicate key");
    if (value.empty()) ctx.Fail("missing value");
    it->second(ctx, value);
  }

  SortUnique(&c.dims);
  SortUnique(&c.tau_grid);
  SortUnique(&c.s_grid);
  SortUnique(&c.eta_grid);
  SortUnique(&c.h_grid);
  SortUnique(&c.seeds);
  try {
    c.Validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  ExperimentConfig config = ParseExperimentConfig(text.str(), path.string());
  if (const char* dir = std::getenv(std::string(kCacheDirEnv).c_str());
      dir != nullptr && *dir != '\0') {
    config.cache_dir = dir;
  }
  return config;
}

ResultRow RunCell(const ExperimentConfig& config, Algorithm algorithm,
                  const MixtureTarget& target, const Ensemble& reference,
                  std::optional<double> tau, std::optional<int> s,
                  std::optional<double> eta, std::optional<double> h,
                  std::uint64_t seed) {
  ResultRow row;
  row.algorithm = std::string(AlgorithmName(algorithm));
  row.d = target.dim();
  row.seed = seed;
  const auto start = std::chrono::steady_clock::now();

  Ensemble particles;
  if (algorithm == Algorithm::kSgld) {
    if (!h) throw std::invalid_argument("sgld cell needs h");
    row.h = h;
    SgldBaselineConfig cfg;
    cfg.step = *h;
    cfg.batch = config.sgld_batch;
    cfg.iters = static_cast<int>(config.gradient_budget /
                                 static_cast<std::uint64_t>(config.sgld_batch));
    cfg.n_chains = config.n_chains;
    cfg.threads = config.threads;
    BaselineResult run = VanillaSgld(target, cfg, seed);
    row.grads_used = run.gradients_per_chain;
    particles = std::move(run.particles);
  } else {
    if (!tau || !s || !eta) throw std::invalid_argument("SPS cell needs tau, S, eta");
    row.tau = tau;
    row.s = s;
    row.eta = eta;
    OuterConfig outer;
    outer.eta = *eta;
    outer.outer_batch = config.outer_batch;
    outer.n_chains = config.n_chains;
    outer.threads = config.threads;
    outer.gradient_budget = config.gradient_budget;
    if (algorithm == Algorithm::kSpsSgld) {
      SgldInnerConfig inner;
      inner.tau1 = *tau;
      inner.tau2 = *tau;
      inner.s_total = *s;
      inner.s_switch = *s - 1 - config.sgld_window;
      inner.inner_batch = config.inner_batch;
      outer.inner = inner;
    } else {
      MalaInnerConfig inner;
      inner.tau = *tau;
      inner.s_total = *s;
      inner.warm_start = {config.uld_gamma, config.uld_tau, config.uld_steps};
      outer.inner = inner;
    }
    const std::uint64_t cost = StepGradientCost(outer);
    outer.k_total = static_cast<int>(std::min<std::uint64_t>(
        config.gradient_budget / std::max<std::uint64_t>(cost, 1),
        static_cast<std::uint64_t>(std::numeric_limits<int>::max())));
    if (outer.k_total < 1) {
      throw ConfigError("gradient_budget " + std::to_string(config.gradient_budget) +
                        " cannot fund one outer step of " + row.algorithm +
                        " (cost " + std::to_string(cost) + ")");
    }
    RunResult run = SpsRun(target, outer, seed);
    row.grads_used = run.gradients_per_chain;
    particles = std::move(run.particles);
  }

  const TvEstimate tv = TvMarginalEstimate(particles, reference, config.histogram);
  row.tv_aggregate = tv.aggregate;
  row.tv_min = tv.min();
  row.tv_median = tv.median();
  row.tv_max = tv.max();
  if (config.record_wall_time) {
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                     .count();
  }
  return row;
}

ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const ProgressCallback& progress) {
  config.Validate();
  ExperimentResult result;
  for (Algorithm algorithm : config.algorithms) {
    for (int d : config.dims) {
      const MixtureTarget::Params params = config.TargetParams(d);
      const MixtureTarget target(params);
      const Ensemble reference =
          ReferenceEnsemble(params, config.reference, config.cache_dir).particles;
      auto emit = [&](std::optional<double> tau, std::optional<int> s,
                      std::optional<double> eta, std::optional<double> h) {
        for (std::uint64_t seed : config.seeds) {
          result.rows.push_back(
              RunCell(config, algorithm, target, reference, tau, s, eta, h, seed));
          if (progress) progress(result.rows.back());
        }
      };
      if (algorithm == Algorithm::kSgld) {
        for (double h : config.h_grid) emit(std::nullopt, std::nullopt, std::nullopt, h);
      } else {
        for (double tau : config.tau_grid) {
          for (int s : config.s_grid) {
            for (double eta : config.eta_grid) emit(tau, s, eta, std::nullopt);
          }
        }
      }
    }
  }
  result.best = BestPerAlgorithm(result.rows);
  return result;
}

std::vector<GridSummary> SummarizeGrid(const std::vector<ResultRow>& rows) {
  std::vector<GridSummary> out;
  std::vector<std::vector<double>> values;
  std::map<GridKey, std::size_t> index;
  for (const ResultRow& r : rows) {
    auto [it, inserted] = index.try_emplace(KeyOf(r), out.size());
    if (inserted) {
      GridSummary g;
      g.algorithm = r.algorithm;
      g.d = r.d;
      g.tau = r.tau;
      g.s = r.s;
      g.eta = r.eta;
      g.h = r.h;
      out.push_back(g);
      values.emplace_back();
    }
    values[it->second].push_back(r.tv_aggregate);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::vector<double>& v = values[i];
    const auto n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out[i].mean_tv = mean;
    out[i].stderr_tv = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    out[i].seeds = static_cast<int>(v.size());
  }
  return out;
}

std::vector<GridSummary> BestPerAlgorithm(const std::vector<ResultRow>& rows) {
  std::vector<GridSummary> best;
  std::map<std::pair<std::string, int>, std::size_t> index;
  for (const GridSummary& g : SummarizeGrid(rows)) {
    auto [it, inserted] = index.try_emplace({g.algorithm, g.d}, best.size());
    if (inserted) {
      best.push_back(g);
    } else if (g.mean_tv < best[it->second].mean_tv) {
      best[it->second] = g;
    }
  }
  return best;
}

std::string FormatResultsCsv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << kResultsCsvHeader << "\n";
  for (const ResultRow& r : rows) {
    os << r.algorithm << ',' << r.d << ',' << FormatOptional(r.tau) << ','
       << FormatOptional(r.s) << ',' << FormatOptional(r.eta) << ','
       << FormatOptional(r.h) << ',' << r.seed << ',' << r.grads_used << ','
       << FormatDouble(r.tv_aggregate) << ',' << FormatDouble(r.tv_min) << ','
       << FormatDouble(r.tv_median) << ',' << FormatDouble(r.tv_max) << ','
       << FormatOptional(r.wall_s) << "\n";
  }
  return os.str();
}

std::vector<ResultRow> ParseResultsCsv(std::string_view text) {
  std::vector<ResultRow> rows;
  int line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = Trim(text.substr(
        pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    pos = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    if (line.empty()) continue;
    auto fail = [&](const std::string& message) {
      throw std::runtime_error("results csv line " + std::to_string(line_no) + ": " +
                               message);
    };
    if (!header_seen) {
      if (line != kResultsCsvHeader) fail("unexpected header");
      header_seen = true;
      continue;
    }
    const std::vector<std::string_view> f = SplitList(line);
    if (f.size() != 13) fail("expected 13 fields, got " + std::to_string(f.size()));
    ResultRow r;
    r.algorithm = std::string(f[0]);
    auto req = [&](std::string_view s, auto* out) {
      if (!ParseNumber(s, out)) fail("bad number '" + std::string(s) + "'");
    };
    auto opt = [&](std::string_view s, auto* out) {
      if (s.empty()) return;
      typename std::remove_reference_t<decltype(*out)>::value_type v{};
      req(s, &v);
      *out = v;
    };
    req(f[1], &r.d);
    opt(f[2], &r.tau);
    opt(f[3], &r.s);
    opt(f[4], &r.eta);
    opt(f[5], &r.h);
    req(f[6], &r.seed);
    req(f[7], &r.grads_used);
    req(f[8], &r.tv_aggregate);
    req(f[9], &r.tv_min);
    req(f[10], &r.tv_median);
    req(f[11], &r.tv_max);
    opt(f[12], &r.wall_s);
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw std::runtime_error("results csv: missing header");
  return rows;
}

namespace {

nlohmann::json SummaryToJson(const GridSummary& g) {
  nlohmann::json j;
  j["algorithm"] = g.algorithm;
  j["d"] = g.d;
  j["tau"] = g.tau ? nlohmann::json(*g.tau) : nlohmann::json();
  j["S"] = g.s ? nlohmann::json(*g.s) : nlohmann::json();
  j["eta"] = g.eta ? nlohmann::json(*g.eta) : nlohmann::json();
  j["h"] = g.h ? nlohmann::json(*g.h) : nlohmann::json();
  j["mean_tv"] = g.mean_tv;
  j["stderr"] = g.stderr_tv;
  j["seeds"] = g.seeds;
  return j;
}

}  // namespace

std::string FormatSummaryJson(const ExperimentConfig& config,
                              const ExperimentResult& result) {
  nlohmann::json j;
  j["schema_version"] = kResultsSchemaVersion;
  j["gradient_budget"] = config.gradient_budget;
  j["n_chains"] = config.n_chains;
  j["seeds"] = config.seeds;
  j["best"] = nlohmann::json::array();
  for (const GridSummary& g : result.best) j["best"].push_back(SummaryToJson(g));
  j["grid"] = nlohmann::json::array();
  for (const GridSummary& g : SummarizeGrid(result.rows)) {
    j["grid"].push_back(SummaryToJson(g));
  }
  return j.dump(2) + "\n";
}

void WriteExperimentOutputs(const ExperimentConfig& config,
                            const ExperimentResult& result) {
  const std::filesystem::path base = config.output;
  if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
  };
  write(base.string() + ".csv", FormatResultsCsv(result.rows));
  write(base.string() + ".json", FormatSummaryJson(config, result));
}

PlotAxis ParsePlotAxis(std::string_view name) {
  if (name == "step-size" || name == "step_size" || name == "step") {
    return PlotAxis::kStepSize;
  }
  if (name == "dimension" || name == "d") return PlotAxis::kDimension;
  throw std::invalid_argument("unknown plot axis '" + std::string(name) +
                              "' (expected step-size or dimension)");
}

std::vector<PlotPoint> EmitPlotData(const std::vector<ResultRow>& rows,
                                    PlotAxis axis) {
  std::vector<PlotPoint> out;
  std::map<std::pair<std::string, double>, std::size_t> index;
  std::vector<std::string> order;
  for (const GridSummary& g : SummarizeGrid(rows)) {
    double x = 0.0;
    if (axis == PlotAxis::kDimension) {
      x = g.d;
    } else if (g.h) {
      x = *g.h;
    } else if (g.tau) {
      x = *g.tau;
    } else {
      continue;
    }
    if (std::find(order.begin(), order.end(), g.algorithm) == order.end()) {
      order.push_back(g.algorithm);
    }
    auto [it, inserted] = index.try_emplace({g.algorithm, x}, out.size());
    if (inserted) {
      out.push_back({g.algorithm, x, g.mean_tv, g.stderr_tv});
    } else if (g.mean_tv < out[it->second].mean_tv) {
      out[it->second].mean_tv = g.mean_tv;
      out[it->second].stderr_tv = g.stderr_tv;
    }
  }
  std::stable_sort(out.begin(), out.end(), [&](const PlotPoint& a, const PlotPoint& b) {
    const auto ra = std::find(order.begin(), order.end(), a.algorithm);
    const auto rb = std::find(order.begin(), order.end(), b.algorithm);
    return ra != rb ? ra < rb : a.x < b.x;
  });
  return out;
}

std::string FormatPlotCsv(const std::vector<PlotPoint>& points) {
  std::ostringstream os;
  os << kPlotCsvHeader << "\n";
  for (const PlotPoint& p : points) {
    os << p.algorithm << ',' << FormatDouble(p.x) << ',' << FormatDouble(p.mean_tv)
       << ',' << FormatDouble(p.stderr_tv) << "\n";
  }
  return os.str();
}

ScheduleInputs ParseScheduleInputs(std::string_view text, std::string_view origin) {
  ScheduleInputs in;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    LineContext ctx{origin, line_no, Trim(line.substr(0, eq))};
    if (eq == std::string_view::npos) ctx.Fail("expected 'key = value'");
    const std::string_view value = Trim(line.substr(eq + 1));
    if (!seen.insert(std::string(ctx.key)).second) ctx.Fail("duplicate key");
    const std::string_view key = ctx.key;
    constexpr std::string_view kPrefix = "multiplier.";
    if (key == "L") {
      in.smoothness = ParseScalar<double>(ctx, value);
    } else if (key == "alpha") {
      in.alpha_star = ParseScalar<double>(ctx, value);
    } else if (key == "sigma") {
      in.sigma = ParseScalar<double>(ctx, value);
    } else if (key == "eps") {
      in.eps = ParseScalar<double>(ctx, value);
    } else if (key == "d") {
      in.dim = ParseScalar<int>(ctx, value);
    } else if (key == "n") {
      in.num_components = ParseScalar<int>(ctx, value);
    } else if (key == "moment_bound") {
      in.moment_bound = ParseScalar<double>(ctx, value);
    } else if (key == "grad_at_origin_sq") {
      in.grad_at_origin_sq = ParseScalar<double>(ctx, value);
    } else if (key.substr(0, kPrefix.size()) == kPrefix) {
      in.multipliers[std::string(key.substr(kPrefix.size()))] =
          ParseScalar<double>(ctx, value);
    } else {
      ctx.Fail("unknown key");
    }
  }
  try {
    in.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  return in;
}

ScheduleInputs LoadScheduleInputs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schedule inputs " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return ParseScheduleInputs(text.str(), path.string());
}

std::string FormatScheduleJson(const ScheduleInputs& inputs) {
  nlohmann::json j;
  j["log_argument"] = inputs.LogArgument();
  try {
    const SgldSchedule s = DeriveSgldSchedule(inputs);
    const auto& inner = std::get<SgldInnerConfig>(s.outer.inner);
    nlohmann::json o;
    o["K"] = s.outer.k_total;
    o["eta"] = s.outer.eta;
    o["b_o"] = s.outer.outer_batch;
    o["tau"] = inner.tau1;
    o["tau_prime"] = inner.tau2;
    o["S_switch"] = inner.s_switch;
    o["S"] = inner.s_total;
    o["inner_batch"] = inner.inner_batch;
    o["delta"] = s.delta;
    o["log_factor"] = s.log_factor;
    o["warnings"] = inner.Warnings();
    j["sgld"] = o;
  } catch (const std::exception& e) {
    j["sgld"] = {{"error", e.what()}};
  }
  try {
    const MalaSchedule m = DeriveMalaSchedule(inputs);
    const auto& inner = std::get<MalaInnerConfig>(m.outer.inner);
    nlohmann::json o;
    o["K"] = m.outer.k_total;
    o["eta"] = m.outer.eta;
    o["b_o"] = m.outer.outer_batch;
    o["tau"] = inner.tau;
    o["S"] = inner.s_total;
    o["uld_gamma"] = inner.warm_start.gamma;
    o["uld_tau"] = inner.warm_start.tau;
    o["uld_steps"] = inner.warm_start.s_total;
    o["delta"] = m.delta;
    o["log_factor"] = m.log_factor;
    j["mala"] = o;
  } catch (const std::exception& e) {
    j["mala"] = {{"error", e.what()}};
  }
  return j.dump(2) + "\n";
}

}  // namespace sps
