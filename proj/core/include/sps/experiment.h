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

// Config-driven benchmark harness: grid search of SPS-SGLD, SPS-MALA and
// vanilla SGLD on the mixture target under a fixed gradient budget, scored by
// marginal-histogram TV against a cached reference ensemble.
//
// Config grammar (one `key = value` per line; `#` starts a comment; lists are
// comma-separated; unknown keys are errors):
//
//   d = 10                 # list allowed: one target per dimension
//   n = 100
//   target_seed = 2024
//   bias = 3.0
//   mu_mean = 2.0
//   algorithms = sps-sgld, sgld      # any of sps-sgld, sps-mala, sgld
//   gradient_budget = 12000          # per chain
//   n_chains = 10000
//   outer_batch = 1                  # SPS outer mini-batch b_o
//   inner_batch = 1                  # SPS-SGLD inner mini-batch b_in
//   sgld_batch = 1                   # baseline mini-batch
//   sgld_window = 1                  # SPS-SGLD averaging window length
//   tau = 0.2, 0.4                   # SPS inner step grid
//   S = 20, 40, 80                   # SPS inner iteration grid
//   eta = 1.0, 4.0, 10.0             # SPS outer step grid
//   h = 0.2, 0.4                     # baseline step grid
//   uld_gamma = 2.0                  # SPS-MALA warm start
//   uld_tau = 0.1
//   uld_steps = 10
//   seeds = 1, 2, 3, 4, 5
//   bins = 100
//   padding = 0.05
//   reference_budget = 1000000
//   reference_chains = 1000
//   reference_burn_in = 500
//   reference_thin = 5
//   reference_step = 0.25
//   reference_reflect = true
//   output = results/d10             # writes results/d10.csv and .json
//   cache_dir = .sps_cache           # overridden by $SPS_CACHE_DIR
//   record_wall_time = false         # true fills the wall_s column
//   threads = 0

#ifndef SPS_EXPERIMENT_H_
#define SPS_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sps/metrics.h"
#include "sps/sps.h"
#include "sps/target.h"

namespace sps {

inline constexpr int kResultsSchemaVersion = 1;
inline constexpr std::string_view kResultsCsvHeader =
    "algorithm,d,tau,S,eta,h,seed,grads_used,tv_aggregate,tv_min,tv_median,"
    "tv_max,wall_s";
inline constexpr std::string_view kPlotCsvHeader = "algorithm,x,mean_tv,stderr";
inline constexpr std::string_view kCacheDirEnv = "SPS_CACHE_DIR";

// Raised for malformed or invalid configs; the message starts with
// "<origin>:<line>: <key>: " when a line is responsible.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { kSpsSgld, kSpsMala, kSgld };

std::string_view AlgorithmName(Algorithm algorithm);
Algorithm ParseAlgorithm(std::string_view name);

struct ExperimentConfig {
  std::vector<int> dims = {10};
  int num_components = 100;
  std::uint64_t target_seed = 2024;
  double bias = 3.0;
  double mu_mean = 2.0;

  std::vector<Algorithm> algorithms = {Algorithm::kSpsSgld, Algorithm::kSgld};
  std::uint64_t gradient_budget = 12000;
  int n_chains = 10000;
  int outer_batch = 1;
  int inner_batch = 1;
  int sgld_batch = 1;
  int sgld_window = 1;

  std::vector<double> tau_grid = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4};
  std::vector<int> s_grid = {20, 40, 80};
  std::vector<double> eta_grid = {1.0, 4.0, 10.0};
  std::vector<double> h_grid = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4};

  double uld_gamma = 2.0;
  double uld_tau = 0.1;
  int uld_steps = 10;

  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  HistogramSpec histogram;
  ReferenceConfig reference;

  std::filesystem::path output = "results";
  std::filesystem::path cache_dir = ".sps_cache";
  bool record_wall_time = false;
  int threads = 0;

  // Throws ConfigError naming the offending field.
  void Validate() const;
  MixtureTarget::Params TargetParams(int dim) const;
};

ExperimentConfig ParseExperimentConfig(std::string_view text,
                                       std::string_view origin = "<config>");
// Reads the file; applies $SPS_CACHE_DIR when set.
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

struct ResultRow {
  std::string algorithm;
  int d = 0;
  std::optional<double> tau;
  std::optional<int> s;
  std::optional<double> eta;
  std::optional<double> h;
  std::uint64_t seed = 0;
  std::uint64_t grads_used = 0;
  double tv_aggregate = 0.0;
  double tv_min = 0.0;
  double tv_median = 0.0;
  double tv_max = 0.0;
  std::optional<double> wall_s;
};

// One hyper-parameter point aggregated over seeds.
struct GridSummary {
  std::string algorithm;
  int d = 0;
  std::optional<double> tau;
  std::optional<int> s;
  std::optional<double> eta;
  std::optional<double> h;
  double mean_tv = 0.0;
  double stderr_tv = 0.0;  // sample std / sqrt(#seeds); 0 for one seed
  int seeds = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  // Best point (lowest mean TV) per (algorithm, d), in row order.
  std::vector<GridSummary> best;
};

using ProgressCallback = std::function<void(const ResultRow&)>;

// Rows come out sorted by (algorithm order in config, d, grid tuple, seed).
ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const ProgressCallback& progress = nullptr);

// Runs one (algorithm, d, grid point, seed) cell against `reference`.
ResultRow RunCell(const ExperimentConfig& config, Algorithm algorithm,
                  const MixtureTarget& target, const Ensemble& reference,
                  std::optional<double> tau, std::optional<int> s,
                  std::optional<double> eta, std::optional<double> h,
                  std::uint64_t seed);

std::vector<GridSummary> SummarizeGrid(const std::vector<ResultRow>& rows);
std::vector<GridSummary> BestPerAlgorithm(const std::vector<ResultRow>& rows);

std::string FormatResultsCsv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> ParseResultsCsv(std::string_view text);
std::string FormatSummaryJson(const ExperimentConfig& config,
                              const ExperimentResult& result);
// Writes <output>.csv and <output>.json.
void WriteExperimentOutputs(const ExperimentConfig& config,
                            const ExperimentResult& result);

enum class PlotAxis { kStepSize, kDimension };
PlotAxis ParsePlotAxis(std::string_view name);

struct PlotPoint {
  std::string algorithm;
  double x = 0.0;
  double mean_tv = 0.0;
  double stderr_tv = 0.0;
};

// Step-size axis: x is tau for SPS rows and h for SGLD rows. For each
// (algorithm, x) the remaining hyper-parameters (and d) are minimised over by
// mean TV. Dimension axis: x is d, minimised over all hyper-parameters.
std::vector<PlotPoint> EmitPlotData(const std::vector<ResultRow>& rows,
                                    PlotAxis axis);
std::string FormatPlotCsv(const std::vector<PlotPoint>& points);

// Schedule inputs use the same `key = value` grammar:
//   L = 5            # smoothness
//   alpha = 0.5      # log-Sobolev constant
//   sigma = 1.0      # gradient-noise scale
//   eps = 0.1        # target accuracy
//   d = 10
//   n = 100                    # optional clamp for b_o
//   moment_bound = 25          # optional
//   grad_at_origin_sq = 0      # used when moment_bound is absent
//   multiplier.K = 1           # any ScheduleInputs multiplier key
ScheduleInputs ParseScheduleInputs(std::string_view text,
                                   std::string_view origin = "<inputs>");
ScheduleInputs LoadScheduleInputs(const std::filesystem::path& path);
// Both derived schedules as JSON; a schedule whose preconditions fail is
// reported as {"error": "..."} instead.
std::string FormatScheduleJson(const ScheduleInputs& inputs);

}  // namespace sps

#endif  // SPS_EXPERIMENT_H_
