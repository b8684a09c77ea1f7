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

#include "sps/metrics.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "parallel.h"
#include "sps/inner.h"
#include "sps/random.h"

namespace sps {
namespace {

std::uint64_t Fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::uint64_t ToLittleEndian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0x00000000ffffffffull) << 32) | ((v & 0xffffffff00000000ull) >> 32);
    v = ((v & 0x0000ffff0000ffffull) << 16) | ((v & 0xffff0000ffff0000ull) >> 16);
    v = ((v & 0x00ff00ff00ff00ffull) << 8) | ((v & 0xff00ff00ff00ff00ull) >> 8);
  }
  return v;
}

std::string CanonicalKey(const MixtureTarget::Params& t, const ReferenceConfig& r) {
  // %.17g round-trips doubles, so equal keys mean equal parameters.
  char buffer[512];
  std::snprintf(buffer, sizeof(buffer),
                "target:d=%d;n=%d;seed=%llu;bias=%.17g;mu_mean=%.17g|"
                "reference:budget=%llu;chains=%d;burn_in=%d;thin=%d;"
                "step=%.17g;reflect=%d",
                t.dim, t.num_components,
                static_cast<unsigned long long>(t.seed), t.bias, t.mu_mean,
                static_cast<unsigned long long>(r.budget), r.chains, r.burn_in,
                r.thin, r.step, r.reflect ? 1 : 0);
  return buffer;
}

}  // namespace

void HistogramSpec::Validate() const {
  if (bins < 2) throw std::invalid_argument("histogram needs at least 2 bins");
  if (!(padding >= 0.0)) throw std::invalid_argument("padding must be >= 0");
}

double TvEstimate::min() const {
  return *std::min_element(per_coordinate.begin(), per_coordinate.end());
}

double TvEstimate::max() const {
  return *std::max_element(per_coordinate.begin(), per_coordinate.end());
}

double TvEstimate::median() const {
  std::vector<double> sorted = per_coordinate;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  return sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
}

TvEstimate TvMarginalEstimate(const Ensemble& p, const Ensemble& q,
                              const HistogramSpec& spec) {
  spec.Validate();
  if (p.rows() == 0 || q.rows() == 0) {
    throw std::invalid_argument("TV estimate needs non-empty ensembles");
  }
  if (p.cols() != q.cols()) {
    throw std::invalid_argument("TV estimate: ensemble dimensions differ");
  }
  const Eigen::Index d = p.cols();
  const int bins = spec.bins;
  // One extra slot collects non-finite values (diverged chains), so they
  // count as mass that matches nothing finite. Counts stay integral so the
  // L1 sum is exact: identical ensembles give 0 and disjoint ones give 1.
  std::vector<std::int64_t> hp(bins + 1), hq(bins + 1);

  auto fill = [bins](const Ensemble& e, Eigen::Index col, double lo,
                     double width, std::vector<std::int64_t>* hist) {
    std::fill(hist->begin(), hist->end(), 0);
    for (Eigen::Index r = 0; r < e.rows(); ++r) {
      const double v = e(r, col);
      if (!std::isfinite(v)) {
        ++(*hist)[bins];
        continue;
      }
      const double pos = std::floor((v - lo) / width);
      const auto bin = static_cast<long>(
          std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
      ++(*hist)[bin];
    }
  };

  const std::int64_t np = p.rows();
  const std::int64_t nq = q.rows();
  TvEstimate out;
  out.per_coordinate.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Ensemble* e : {&p, &q}) {
      for (Eigen::Index r = 0; r < e->rows(); ++r) {
        const double v = (*e)(r, j);
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!(lo <= hi)) lo = hi = 0.0;
    double span = hi - lo;
    double pad = spec.padding * span;
    if (!(span > 0.0) || !std::isfinite(span + 2.0 * pad)) {
      span = std::isfinite(span) ? span : 0.0;
      pad = 0.5;
    }
    const double left = lo - pad;
    const double width = (span + 2.0 * pad) / bins;
    fill(p, j, left, width, &hp);
    fill(q, j, left, width, &hq);
    // sum_b |hp/np - hq/nq| scaled by np * nq.
    std::int64_t l1 = 0;
    for (int b = 0; b <= bins; ++b) l1 += std::abs(hp[b] * nq - hq[b] * np);
    out.per_coordinate[j] =
        static_cast<double>(l1) / (2.0 * static_cast<double>(np) * static_cast<double>(nq));
  }
  out.aggregate =
      std::accumulate(out.per_coordinate.begin(), out.per_coordinate.end(), 0.0) /
      static_cast<double>(d);
  return out;
}

EnsembleStats ComputeEnsembleStats(const Ensemble& ensemble) {
  if (ensemble.rows() == 0) throw std::invalid_argument("empty ensemble");
  const auto rows = static_cast<double>(ensemble.rows());
  EnsembleStats stats;
  stats.mean = ensemble.colwise().sum().transpose() / rows;
  stats.variance = Vector::Zero(ensemble.cols());
  if (ensemble.rows() > 1) {
    for (Eigen::Index r = 0; r < ensemble.rows(); ++r) {
      stats.variance +=
          (ensemble.row(r).transpose() - stats.mean).cwiseAbs2();
    }
    stats.variance /= rows - 1.0;
  }
  stats.second_moment = ensemble.rowwise().squaredNorm().sum() / rows;
  return stats;
}

// --- Reference -------------------------------------------------------------

void ReferenceConfig::Validate() const {
  if (chains < 1) throw std::invalid_argument("reference needs >= 1 chain");
  if (burn_in < 0 || thin < 1) {
    throw std::invalid_argument("reference needs burn_in >= 0 and thin >= 1");
  }
  if (!(step > 0.0)) throw std::invalid_argument("reference step must be positive");
  if (SamplesPerChain() < 1) {
    throw std::invalid_argument(
        "reference budget too small for burn-in: budget / chains must exceed "
        "burn_in + thin");
  }
}

int ReferenceConfig::StepsPerChain() const {
  return static_cast<int>(budget / static_cast<std::uint64_t>(std::max(chains, 1)));
}

int ReferenceConfig::SamplesPerChain() const {
  const int usable = StepsPerChain() - burn_in;
  return usable > 0 ? usable / thin : 0;
}

ReferenceResult GenerateReference(const FiniteSumTarget& target,
                                  const ReferenceConfig& config,
                                  std::uint64_t seed) {
  config.Validate();
  const int d = target.dim();
  const int per_chain = config.SamplesPerChain();
  const std::optional<Vector> centre =
      config.reflect ? target.ReflectionCenter() : std::nullopt;
  const Eigen::Index kept =
      static_cast<Eigen::Index>(config.chains) * per_chain;

  InnerProblem problem;
  problem.target = &target;
  problem.center = Vector::Zero(d);
  problem.eta = std::numeric_limits<double>::infinity();
  problem.batch = MiniBatch::Full(target.num_components());

  ReferenceResult result;
  result.particles.resize(centre ? 2 * kept : kept, d);
  std::vector<int> accepted(config.chains, 0);

  internal::ParallelFor(config.chains, config.threads, [&](int c) {
    RandomStream base(seed, static_cast<std::uint64_t>(c), StreamPurpose::kReference);
    RandomStream init = base.Split(0);
    RandomStream rng = base.Split(1);
    Vector z0(d);
    for (int j = 0; j < d; ++j) z0[j] = init.Normal();
    MalaKernel kernel(problem, config.step, std::move(z0), nullptr);
    int kept_here = 0;
    for (int s = 1; s <= config.StepsPerChain() && kept_here < per_chain; ++s) {
      if (kernel.Step(rng)) ++accepted[c];
      if (s > config.burn_in && (s - config.burn_in) % config.thin == 0) {
        const Eigen::Index row = static_cast<Eigen::Index>(c) * per_chain + kept_here;
        result.particles.row(row) = kernel.state().transpose();
        if (centre) {
          result.particles.row(kept + row) =
              (2.0 * *centre - kernel.state()).transpose();
        }
        ++kept_here;
      }
    }
  });

  double total = 0.0;
  for (int a : accepted) total += a;
  result.acceptance_rate =
      total / (static_cast<double>(config.chains) * config.StepsPerChain());
  return result;
}

std::string ReferenceCacheStem(const MixtureTarget::Params& t,
                               const ReferenceConfig& r) {
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer), "ref_d%d_seed%llu_budget%llu_%016llx",
                t.dim, static_cast<unsigned long long>(t.seed),
                static_cast<unsigned long long>(r.budget),
                static_cast<unsigned long long>(Fnv1a(CanonicalKey(t, r))));
  return buffer;
}

ReferenceResult ReferenceEnsemble(const MixtureTarget::Params& params,
                                  const ReferenceConfig& config,
                                  const std::filesystem::path& cache_dir) {
  const std::string key = CanonicalKey(params, config);
  const std::filesystem::path path =
      cache_dir / (ReferenceCacheStem(params, config) + ".bin");

  std::ifstream sidecar(path.string() + ".json");
  if (sidecar && std::filesystem::exists(path)) {
    const auto meta = nlohmann::json::parse(sidecar, nullptr, false);
    if (!meta.is_discarded() && meta.contains("meta") &&
        meta["meta"].value("key", "") == key) {
      ReferenceResult cached;
      cached.particles = ReadEnsemble(path);
      cached.acceptance_rate = meta["meta"].value("acceptance_rate", 0.0);
      cached.cache_hit = true;
      cached.path = path;
      return cached;
    }
  }

  const MixtureTarget target(params);
  ReferenceResult fresh = GenerateReference(target, config, params.seed);
  std::filesystem::create_directories(cache_dir);
  nlohmann::json meta;
  meta["key"] = key;
  meta["acceptance_rate"] = fresh.acceptance_rate;
  WriteEnsemble(path, fresh.particles, meta.dump());
  fresh.path = path;
  return fresh;
}

void WriteEnsemble(const std::filesystem::path& path, const Ensemble& ensemble,
                   const std::string& meta_json) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const double* data = ensemble.data();
    const Eigen::Index count = ensemble.size();
    std::vector<std::uint64_t> words(static_cast<std::size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i) {
      words[i] = ToLittleEndian(std::bit_cast<std::uint64_t>(data[i]));
    }
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)));
    if (!out) throw std::runtime_error("short write to " + path.string());
  }
  nlohmann::json sidecar;
  sidecar["format"] = "float64-le-rowmajor";
  sidecar["rows"] = ensemble.rows();
  sidecar["dim"] = ensemble.cols();
  sidecar["meta"] = nlohmann::json::parse(meta_json);
  std::ofstream side(path.string() + ".json", std::ios::trunc);
  if (!side) throw std::runtime_error("cannot write sidecar for " + path.string());
  side << sidecar.dump(2) << "\n";
}

Ensemble ReadEnsemble(const std::filesystem::path& path) {
  std::ifstream side(path.string() + ".json");
  if (!side) throw std::runtime_error("missing sidecar for " + path.string());
  const auto sidecar = nlohmann::json::parse(side);
  if (sidecar.value("format", "") != "float64-le-rowmajor") {
    throw std::runtime_error("unsupported ensemble format in " + path.string());
  }
  const auto rows = sidecar.at("rows").get<Eigen::Index>();
  const auto dim = sidecar.at("dim").get<Eigen::Index>();
  const auto bytes = std::filesystem::file_size(path);
  if (bytes != static_cast<std::uintmax_t>(rows * dim) * sizeof(double)) {
    throw std::runtime_error("ensemble file size does not match sidecar: " +
                             path.string());
  }
  std::vector<std::uint64_t> words(static_cast<std::size_t>(rows * dim));
  std::ifstream in(path, std::ios::binary);
  in.read(reinterpret_cast<char*>(words.data()),
          static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("short read from " + path.string());
  Ensemble ensemble(rows, dim);
  double* data = ensemble.data();
  for (std::size_t i = 0; i < words.size(); ++i) {
    data[i] = std::bit_cast<double>(ToLittleEndian(words[i]));
  }
  return ensemble;
}

}  // namespace sps
