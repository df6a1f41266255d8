//
// Copyright 2026 The tpmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "tpmkit/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"

#ifndef TPMKIT_VERSION_STRING
#define TPMKIT_VERSION_STRING "0.0.0"
#endif

namespace tpmkit {
namespace {

using Clock = std::chrono::steady_clock;
using ConfigList = std::vector<std::pair<std::string, std::string>>;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

absl::string_view AsAbsl(std::string_view s) { return {s.data(), s.size()}; }

std::string JoinInts(const std::vector<int>& v) { return absl::StrJoin(v, ","); }

std::string JoinDoubles(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(FormatDouble(x));
  return absl::StrJoin(parts, ",");
}

absl::Status BadValue(const std::string& key, const std::string& value) {
  return absl::InvalidArgumentError(
      absl::StrCat("bad value for '", key, "': '", value, "'"));
}

absl::Status ParseInt(const std::string& key, const std::string& value,
                      int* out) {
  if (!absl::SimpleAtoi(value, out)) return BadValue(key, value);
  return absl::OkStatus();
}

absl::Status ParseU64(const std::string& key, const std::string& value,
                      uint64_t* out) {
  if (!absl::SimpleAtoi(value, out)) return BadValue(key, value);
  return absl::OkStatus();
}

absl::Status ParseDouble(const std::string& key, const std::string& value,
                         double* out) {
  if (!absl::SimpleAtod(value, out) || !std::isfinite(*out)) {
    return BadValue(key, value);
  }
  return absl::OkStatus();
}

absl::Status ParseBool(const std::string& key, const std::string& value,
                       bool* out) {
  if (value == "true" || value == "1") {
    *out = true;
  } else if (value == "false" || value == "0") {
    *out = false;
  } else {
    return BadValue(key, value);
  }
  return absl::OkStatus();
}

absl::Status ParseIntList(const std::string& key, const std::string& value,
                          std::vector<int>* out) {
  out->clear();
  for (absl::string_view part :
       absl::StrSplit(value, ',', absl::SkipWhitespace())) {
    int x;
    if (!absl::SimpleAtoi(part, &x)) return BadValue(key, value);
    out->push_back(x);
  }
  return absl::OkStatus();
}

absl::Status ParseDoubleList(const std::string& key, const std::string& value,
                             std::vector<double>* out) {
  out->clear();
  for (absl::string_view part :
       absl::StrSplit(value, ',', absl::SkipWhitespace())) {
    double x;
    if (!absl::SimpleAtod(part, &x) || !std::isfinite(x)) {
      return BadValue(key, value);
    }
    out->push_back(x);
  }
  return absl::OkStatus();
}

// Applies `config` to a spec through per-key parsers; unknown keys are
// rejected so that typos in config files surface.
template <typename Parsers>
absl::Status ApplyConfig(const ConfigMap& config, const Parsers& parsers) {
  for (const auto& [key, value] : config) {
    if (key == "kind" || key == "config_digest") continue;
    auto it = parsers.find(key);
    if (it == parsers.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown config key '", key, "'"));
    }
    if (absl::Status s = it->second(value); !s.ok()) return s;
  }
  return absl::OkStatus();
}

using ParserMap =
    std::map<std::string, std::function<absl::Status(const std::string&)>>;

uint64_t Fnv1a(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ConfigBody(std::string_view kind, const ConfigList& config) {
  std::string body = absl::StrCat("kind=", AsAbsl(kind), "\n");
  for (const auto& [k, v] : config) absl::StrAppend(&body, k, "=", v, "\n");
  return body;
}

absl::Status CheckDims(const std::vector<int>& dims, int min_dim) {
  if (dims.empty()) return absl::InvalidArgumentError("no dimensions given");
  for (int d : dims) {
    if (d < min_dim) {
      return absl::InvalidArgumentError(
          absl::StrCat("dimension ", d, " is below the minimum ", min_dim));
    }
  }
  return absl::OkStatus();
}

std::string_view MatchingName(Matching m) {
  return m == Matching::kOptimal ? "optimal" : "order";
}

}  // namespace

std::string_view LibraryVersion() { return TPMKIT_VERSION_STRING; }

uint64_t DimensionSeed(uint64_t master_seed, int dim) {
  return DeriveSeed(master_seed, static_cast<uint64_t>(dim));
}

uint64_t TrialSeed(uint64_t master_seed, int dim, int trial) {
  return DeriveSeed(DimensionSeed(master_seed, dim),
                    static_cast<uint64_t>(trial));
}

std::vector<double> DefaultSigmaGrid(double scale) {
  std::vector<double> grid;
  for (int i = 0; i <= 36; ++i) {
    grid.push_back(scale * std::pow(10.0, -3.0 + i / 12.0));
  }
  return grid;
}

void ParallelFor(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

double Median(std::vector<double> values) { return Quantile(values, 0.5); }

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - lo;
  if (frac == 0.0 || values[lo] == values[hi]) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

// ---------------------------------------------------------------------------
// Phase transitions.

bool TrialRecord::Succeeded() const {
  return failure.empty() && !success.empty() &&
         std::all_of(success.begin(), success.end(), [](bool b) { return b; });
}

absl::Status SweepSpec::Validate() const {
  if (absl::Status s = CheckDims(dims, 3); !s.ok()) return s;
  if (sigma_grid.empty()) return absl::InvalidArgumentError("empty sigma grid");
  for (size_t i = 0; i < sigma_grid.size(); ++i) {
    if (!(sigma_grid[i] >= 0.0)) {
      return absl::InvalidArgumentError("sigma values must be >= 0");
    }
    if (i > 0 && !(sigma_grid[i] > sigma_grid[i - 1])) {
      return absl::InvalidArgumentError("sigma grid must be strictly increasing");
    }
  }
  if (trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  if (restarts < 1 || iterations < 1) {
    return absl::InvalidArgumentError("L and R must be >= 1");
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    return absl::InvalidArgumentError("threshold must be in (0, 1]");
  }
  if (estimator.restarts < 1 || estimator.max_iterations < 1) {
    return absl::InvalidArgumentError("estimator needs restarts, iterations >= 1");
  }
  return absl::OkStatus();
}

std::vector<std::pair<std::string, std::string>> SweepSpec::ToConfig() const {
  return {{"seed", absl::StrCat(master_seed)},
          {"dims", JoinInts(dims)},
          {"sigma_grid", JoinDoubles(sigma_grid)},
          {"trials", absl::StrCat(trials)},
          {"regime", std::string(RegimeName(regime))},
          {"L", absl::StrCat(restarts)},
          {"R", absl::StrCat(iterations)},
          {"matching", std::string(MatchingName(matching))},
          {"threshold", FormatDouble(threshold)},
          {"opnorm_restarts", absl::StrCat(estimator.restarts)},
          {"opnorm_iterations", absl::StrCat(estimator.max_iterations)},
          {"opnorm_tolerance", FormatDouble(estimator.tolerance)}};
}

absl::StatusOr<SweepSpec> SweepSpec::FromConfig(const ConfigMap& config) {
  SweepSpec s;
  const ParserMap parsers = {
      {"seed", [&](const std::string& v) { return ParseU64("seed", v, &s.master_seed); }},
      {"dims", [&](const std::string& v) { return ParseIntList("dims", v, &s.dims); }},
      {"sigma_grid",
       [&](const std::string& v) {
         return ParseDoubleList("sigma_grid", v, &s.sigma_grid);
       }},
      {"trials", [&](const std::string& v) { return ParseInt("trials", v, &s.trials); }},
      {"regime",
       [&](const std::string& v) -> absl::Status {
         absl::StatusOr<NoiseRegime> r = ParseRegime(v);
         if (!r.ok()) return r.status();
         s.regime = *r;
         return absl::OkStatus();
       }},
      {"L", [&](const std::string& v) { return ParseInt("L", v, &s.restarts); }},
      {"R", [&](const std::string& v) { return ParseInt("R", v, &s.iterations); }},
      {"matching",
       [&](const std::string& v) -> absl::Status {
         if (v == "optimal") {
           s.matching = Matching::kOptimal;
         } else if (v == "order") {
           s.matching = Matching::kExtractionOrder;
         } else {
           return BadValue("matching", v);
         }
         return absl::OkStatus();
       }},
      {"threshold",
       [&](const std::string& v) { return ParseDouble("threshold", v, &s.threshold); }},
      {"opnorm_restarts",
       [&](const std::string& v) {
         return ParseInt("opnorm_restarts", v, &s.estimator.restarts);
       }},
      {"opnorm_iterations",
       [&](const std::string& v) {
         return ParseInt("opnorm_iterations", v, &s.estimator.max_iterations);
       }},
      {"opnorm_tolerance",
       [&](const std::string& v) {
         return ParseDouble("opnorm_tolerance", v, &s.estimator.tolerance);
       }},
  };
  if (absl::Status st = ApplyConfig(config, parsers); !st.ok()) return st;
  if (absl::Status st = s.Validate(); !st.ok()) return st;
  return s;
}

absl::StatusOr<PhaseTable> RunPhaseTransition(const SweepSpec& spec) {
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  const int num_dims = static_cast<int>(spec.dims.size());
  const int num_sigma = static_cast<int>(spec.sigma_grid.size());

  std::vector<Spectrum> signals;
  std::vector<SymmetricTensor3> clean;
  for (int d : spec.dims) {
    absl::StatusOr<Spectrum> signal = ReferenceSpectrum(d);
    if (!signal.ok()) return signal.status();
    absl::StatusOr<SymmetricTensor3> t = FromComponents(*signal);
    if (!t.ok()) return t.status();
    signals.push_back(*std::move(signal));
    clean.push_back(*std::move(t));
  }

  // records[(dim index * trials + trial) * num_sigma + sigma index]
  std::vector<TrialRecord> records(
      static_cast<size_t>(num_dims) * spec.trials * num_sigma);
  ParallelFor(num_dims * spec.trials, spec.workers, [&](int task) {
    const int di = task / spec.trials;
    const int trial = task % spec.trials;
    const int d = spec.dims[di];
    const uint64_t seed = TrialSeed(spec.master_seed, d, trial);
    TrialRecord* row = &records[static_cast<size_t>(task) * num_sigma];
    for (int si = 0; si < num_sigma; ++si) {
      row[si].seed = seed;
      row[si].dim = d;
      row[si].regime = spec.regime;
      row[si].sigma = spec.sigma_grid[si];
    }
    auto fail_all = [&](const absl::Status& s) {
      for (int si = 0; si < num_sigma; ++si) row[si].failure = s.ToString();
    };

    absl::StatusOr<SymmetricTensor3> raw =
        RawNoise(spec.regime, signals[di], DeriveSeed(seed, 0));
    if (!raw.ok()) return fail_all(raw.status());
    Rng estimator_rng(DeriveSeed(seed, 1));
    absl::StatusOr<OperatorNormEstimate> norm =
        EstimateOperatorNorm(*raw, spec.estimator, estimator_rng);
    if (!norm.ok()) return fail_all(norm.status());
    if (!(norm->value > 0.0)) {
      return fail_all(absl::FailedPreconditionError("noise tensor is zero"));
    }
    const SymmetricTensor3 unit = raw->Scaled(1.0 / norm->value);
    raw = absl::UnknownError("released");

    const TpmConfig cfg{3, spec.restarts, spec.iterations, DeriveSeed(seed, 2)};
    for (int si = 0; si < num_sigma; ++si) {
      TrialRecord& rec = row[si];
      const Clock::time_point start = Clock::now();
      absl::StatusOr<SymmetricTensor3> noisy =
          rec.sigma == 0.0
              ? absl::StatusOr<SymmetricTensor3>(clean[di])
              : SymmetricTensor3::LinearCombination(1.0, clean[di], rec.sigma,
                                                    unit);
      absl::StatusOr<Spectrum> est =
          noisy.ok() ? RobustTpm(*noisy, cfg)
                     : absl::StatusOr<Spectrum>(noisy.status());
      if (est.ok()) {
        absl::StatusOr<RecoveryReport> report =
            ScoreRecovery(signals[di], *est, spec.threshold, spec.matching);
        if (report.ok()) {
          rec.success = report->success;
          rec.alignments = report->alignments;
          rec.eigenvalue_errors = report->eigenvalue_errors;
          rec.eigenvector_errors = report->eigenvector_errors;
        } else {
          rec.failure = report.status().ToString();
        }
      } else {
        rec.failure = est.status().ToString();
      }
      rec.wall_seconds = SecondsSince(start);
    }
  });

  PhaseTable table;
  table.spec = spec;
  for (int di = 0; di < num_dims; ++di) {
    for (int si = 0; si < num_sigma; ++si) {
      PhaseCell cell;
      cell.dim = spec.dims[di];
      cell.sigma = spec.sigma_grid[si];
      int failed = 0;
      for (int trial = 0; trial < spec.trials; ++trial) {
        const TrialRecord& rec =
            records[(static_cast<size_t>(di) * spec.trials + trial) * num_sigma +
                    si];
        if (!rec.Succeeded()) ++failed;
        cell.wall_seconds += rec.wall_seconds;
        cell.trials.push_back(rec);
      }
      cell.fail_prob = static_cast<double>(failed) / spec.trials;
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

std::string PhaseCsv(const PhaseTable& table) {
  std::string out = CsvHeader("phase", table.spec.ToConfig());
  absl::StrAppend(&out,
                  "seed,d,regime,sigma,sigma_sqrtd,sigma_d,sigma_logd,fail_prob\n");
  const std::string regime(RegimeName(table.spec.regime));
  for (const PhaseCell& c : table.cells) {
    const double d = c.dim;
    absl::StrAppend(&out, DimensionSeed(table.spec.master_seed, c.dim), ",",
                    c.dim, ",", regime, ",", FormatDouble(c.sigma), ",",
                    FormatDouble(c.sigma * std::sqrt(d)), ",",
                    FormatDouble(c.sigma * d), ",",
                    FormatDouble(c.sigma * std::log(d)), ",",
                    FormatDouble(c.fail_prob), "\n");
  }
  return out;
}

std::string PhaseTimingsCsv(const PhaseTable& table) {
  std::string out = "seed,d,regime,sigma,fail_prob,wall_seconds\n";
  const std::string regime(RegimeName(table.spec.regime));
  for (const PhaseCell& c : table.cells) {
    absl::StrAppend(&out, DimensionSeed(table.spec.master_seed, c.dim), ",",
                    c.dim, ",", regime, ",", FormatDouble(c.sigma), ",",
                    FormatDouble(c.fail_prob), ",",
                    absl::StrFormat("%.6f", c.wall_seconds), "\n");
  }
  return out;
}

absl::StatusOr<std::vector<PhaseRow>> ParsePhaseCsv(std::string_view csv) {
  std::vector<PhaseRow> rows;
  bool seen_columns = false;
  for (absl::string_view line : absl::StrSplit(AsAbsl(csv), '\n')) {
    line = absl::StripAsciiWhitespace(line);
    if (line.empty() || line.front() == '#') continue;
    if (!seen_columns) {
      if (!absl::StartsWith(line, "seed,d,regime,sigma")) {
        return absl::InvalidArgumentError("missing phase table column line");
      }
      seen_columns = true;
      continue;
    }
    std::vector<std::string> f = absl::StrSplit(line, ',');
    PhaseRow r;
    if (f.size() != 8 || !absl::SimpleAtoi(f[0], &r.seed) ||
        !absl::SimpleAtoi(f[1], &r.dim) || !absl::SimpleAtod(f[3], &r.sigma) ||
        !absl::SimpleAtod(f[7], &r.fail_prob)) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad phase row '", line, "'"));
    }
    r.regime = f[2];
    rows.push_back(std::move(r));
  }
  if (!seen_columns) {
    return absl::InvalidArgumentError("missing phase table column line");
  }
  return rows;
}

absl::StatusOr<Transition> ExtractTransition(const std::vector<PhaseRow>& rows,
                                             int dim) {
  std::vector<std::pair<double, double>> column;
  for (const PhaseRow& r : rows) {
    if (r.dim == dim) column.emplace_back(r.sigma, r.fail_prob);
  }
  std::sort(column.begin(), column.end());
  Transition out;
  for (size_t i = 1; i < column.size(); ++i) {
    if (column[i].second < column[i - 1].second) out.monotone = false;
  }
  for (size_t i = 0; i < column.size(); ++i) {
    const auto [sigma, fail] = column[i];
    if (fail < 0.5) continue;
    if (i == 0) {
      out.sigma = sigma;
      return out;
    }
    const auto [prev_sigma, prev_fail] = column[i - 1];
    if (prev_fail == 0.0 && fail == 1.0) {
      out.sigma = sigma;
    } else {
      out.sigma =
          prev_sigma + (0.5 - prev_fail) / (fail - prev_fail) * (sigma - prev_sigma);
    }
    return out;
  }
  return absl::NotFoundError(
      absl::StrCat("failure probability never reaches 0.5 for d=", dim));
}

// ---------------------------------------------------------------------------
// Streaming.

absl::Status StreamingCurveSpec::Validate() const {
  if (dim < 3) return absl::InvalidArgumentError("d must be >= 3");
  if (components < 1 || components > 3) {
    return absl::InvalidArgumentError("k must be in [1, 3]");
  }
  if (batch_sizes.empty()) return absl::InvalidArgumentError("empty n grid");
  for (int n : batch_sizes) {
    if (n < 1) return absl::InvalidArgumentError("batch sizes must be >= 1");
  }
  if (trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  if (restarts < 1 || iterations < 1) {
    return absl::InvalidArgumentError("L and R must be >= 1");
  }
  return absl::OkStatus();
}

std::vector<std::pair<std::string, std::string>> StreamingCurveSpec::ToConfig()
    const {
  return {{"seed", absl::StrCat(master_seed)},
          {"d", absl::StrCat(dim)},
          {"k", absl::StrCat(components)},
          {"n_grid", JoinInts(batch_sizes)},
          {"trials", absl::StrCat(trials)},
          {"L", absl::StrCat(restarts)},
          {"R", absl::StrCat(iterations)},
          {"shared_batch", shared_batch ? "true" : "false"}};
}

absl::StatusOr<StreamingCurveSpec> StreamingCurveSpec::FromConfig(
    const ConfigMap& config) {
  StreamingCurveSpec s;
  const ParserMap parsers = {
      {"seed", [&](const std::string& v) { return ParseU64("seed", v, &s.master_seed); }},
      {"d", [&](const std::string& v) { return ParseInt("d", v, &s.dim); }},
      {"k", [&](const std::string& v) { return ParseInt("k", v, &s.components); }},
      {"n_grid",
       [&](const std::string& v) { return ParseIntList("n_grid", v, &s.batch_sizes); }},
      {"trials", [&](const std::string& v) { return ParseInt("trials", v, &s.trials); }},
      {"L", [&](const std::string& v) { return ParseInt("L", v, &s.restarts); }},
      {"R", [&](const std::string& v) { return ParseInt("R", v, &s.iterations); }},
      {"shared_batch",
       [&](const std::string& v) { return ParseBool("shared_batch", v, &s.shared_batch); }},
  };
  if (absl::Status st = ApplyConfig(config, parsers); !st.ok()) return st;
  if (absl::Status st = s.Validate(); !st.ok()) return st;
  return s;
}

double RecoveryError(const RecoveryReport& report) {
  return std::max(report.MaxEigenvalueError(), report.MaxEigenvectorError());
}

absl::StatusOr<std::vector<StreamingPoint>> RunStreamingCurve(
    const StreamingCurveSpec& spec) {
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  absl::StatusOr<Spectrum> reference = ReferenceSpectrum(spec.dim);
  if (!reference.ok()) return reference.status();
  Spectrum truth{spec.dim,
                 {reference->pairs.begin(),
                  reference->pairs.begin() + spec.components}};
  const std::vector<double> probabilities(spec.components,
                                          1.0 / spec.components);
  absl::StatusOr<SingleTopicGenerator> base =
      SingleTopicGenerator::Create(truth, probabilities, 0);
  if (!base.ok()) return base.status();

  const int num_n = static_cast<int>(spec.batch_sizes.size());
  std::vector<double> errors(static_cast<size_t>(num_n) * spec.trials);
  ParallelFor(num_n * spec.trials, spec.workers, [&](int task) {
    const int ni = task / spec.trials;
    const int trial = task % spec.trials;
    const uint64_t seed = TrialSeed(spec.master_seed, spec.dim, trial);
    SingleTopicGenerator stream = base->Split(DeriveSeed(seed, 0));
    StreamConfig cfg;
    cfg.components = spec.components;
    cfg.restarts = spec.restarts;
    cfg.iterations = spec.iterations;
    cfg.batch_size = spec.batch_sizes[ni];
    cfg.seed = DeriveSeed(seed, 1);
    cfg.shared_batch = spec.shared_batch;
    double err = std::numeric_limits<double>::infinity();
    absl::StatusOr<Spectrum> est = OnlineRtpm(stream, cfg);
    if (est.ok()) {
      absl::StatusOr<RecoveryReport> report = ScoreRecovery(truth, *est, 0.25);
      if (report.ok()) err = RecoveryError(*report);
    }
    errors[task] = err;
  });

  std::vector<StreamingPoint> points;
  for (int ni = 0; ni < num_n; ++ni) {
    StreamingPoint p;
    p.batch_size = spec.batch_sizes[ni];
    p.dim = spec.dim;
    p.errors.assign(errors.begin() + static_cast<size_t>(ni) * spec.trials,
                    errors.begin() + static_cast<size_t>(ni + 1) * spec.trials);
    p.median_error = Median(p.errors);
    p.q25 = Quantile(p.errors, 0.25);
    p.q75 = Quantile(p.errors, 0.75);
    points.push_back(std::move(p));
  }
  return points;
}

std::string StreamingCsv(const StreamingCurveSpec& spec,
                         const std::vector<StreamingPoint>& points) {
  std::string out = CsvHeader("stream-curve", spec.ToConfig());
  absl::StrAppend(&out, "n,d,median_err,q25,q75\n");
  for (const StreamingPoint& p : points) {
    absl::StrAppend(&out, p.batch_size, ",", p.dim, ",",
                    FormatDouble(p.median_error), ",", FormatDouble(p.q25), ",",
                    FormatDouble(p.q75), "\n");
  }
  return out;
}

absl::StatusOr<double> LogLogSlope(const std::vector<StreamingPoint>& points) {
  if (points.size() < 2) {
    return absl::InvalidArgumentError("need at least two points for a slope");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(points.size());
  for (const StreamingPoint& p : points) {
    if (!(p.median_error > 0.0) || !std::isfinite(p.median_error)) {
      return absl::FailedPreconditionError(
          "median errors must be positive and finite for a log-log fit");
    }
    const double x = std::log(static_cast<double>(p.batch_size));
    const double y = std::log(p.median_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) {
    return absl::FailedPreconditionError("batch sizes must differ");
  }
  return (m * sxy - sx * sy) / denom;
}

// ---------------------------------------------------------------------------
// Differential privacy.

std::string_view SignalShapeName(SignalShape shape) {
  return shape == SignalShape::kIncoherent ? "incoherent" : "coherent";
}

absl::StatusOr<SignalShape> ParseSignalShape(std::string_view name) {
  if (name == "incoherent") return SignalShape::kIncoherent;
  if (name == "coherent") return SignalShape::kCoherent;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown signal shape '", std::string(name), "' (incoherent, coherent)"));
}

Spectrum RankOneSignal(SignalShape shape, int dim) {
  Vector v = shape == SignalShape::kCoherent
                 ? BasisVector(dim, 0)
                 : Vector(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  return Spectrum{dim, {{1.0, std::move(v)}}};
}

absl::Status DpCurveSpec::Validate() const {
  if (absl::Status s = CheckDims(dims, 1); !s.ok()) return s;
  if (epsilons.empty()) return absl::InvalidArgumentError("empty epsilon grid");
  for (double e : epsilons) {
    if (!(e > 0.0)) return absl::InvalidArgumentError("epsilon must be > 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must be in (0, 1)");
  }
  if (trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  if (restarts < 1 || iterations < 1) {
    return absl::InvalidArgumentError("L and R must be >= 1");
  }
  if (!(success_radius > 0.0)) {
    return absl::InvalidArgumentError("success radius must be > 0");
  }
  return absl::OkStatus();
}

std::vector<std::pair<std::string, std::string>> DpCurveSpec::ToConfig() const {
  return {{"seed", absl::StrCat(master_seed)},
          {"dims", JoinInts(dims)},
          {"eps_grid", JoinDoubles(epsilons)},
          {"delta", FormatDouble(delta)},
          {"shape", std::string(SignalShapeName(shape))},
          {"trials", absl::StrCat(trials)},
          {"L", absl::StrCat(restarts)},
          {"R", absl::StrCat(iterations)},
          {"success_radius", FormatDouble(success_radius)},
          {"input_perturbation", input_perturbation ? "true" : "false"}};
}

absl::StatusOr<DpCurveSpec> DpCurveSpec::FromConfig(const ConfigMap& config) {
  DpCurveSpec s;
  const ParserMap parsers = {
      {"seed", [&](const std::string& v) { return ParseU64("seed", v, &s.master_seed); }},
      {"dims", [&](const std::string& v) { return ParseIntList("dims", v, &s.dims); }},
      {"eps_grid",
       [&](const std::string& v) { return ParseDoubleList("eps_grid", v, &s.epsilons); }},
      {"delta", [&](const std::string& v) { return ParseDouble("delta", v, &s.delta); }},
      {"shape",
       [&](const std::string& v) -> absl::Status {
         absl::StatusOr<SignalShape> shape = ParseSignalShape(v);
         if (!shape.ok()) return shape.status();
         s.shape = *shape;
         return absl::OkStatus();
       }},
      {"trials", [&](const std::string& v) { return ParseInt("trials", v, &s.trials); }},
      {"L", [&](const std::string& v) { return ParseInt("L", v, &s.restarts); }},
      {"R", [&](const std::string& v) { return ParseInt("R", v, &s.iterations); }},
      {"success_radius",
       [&](const std::string& v) {
         return ParseDouble("success_radius", v, &s.success_radius);
       }},
      {"input_perturbation",
       [&](const std::string& v) {
         return ParseBool("input_perturbation", v, &s.input_perturbation);
       }},
  };
  if (absl::Status st = ApplyConfig(config, parsers); !st.ok()) return st;
  if (absl::Status st = s.Validate(); !st.ok()) return st;
  return s;
}

absl::StatusOr<SymmetricTensor3> InputPerturbation(const SymmetricTensor3& t,
                                                   double epsilon,
                                                   double delta,
                                                   uint64_t seed) {
  if (!(epsilon > 0.0)) return absl::InvalidArgumentError("epsilon must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("delta must be in (0, 1)");
  }
  const double scale = 6.0 * std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
  Cube raw(t.dim());
  Rng rng(seed);
  rng.FillGaussian(raw.data());
  absl::StatusOr<SymmetricTensor3> noise = PermAvgSymmetrize(raw);
  if (!noise.ok()) return noise.status();
  return SymmetricTensor3::LinearCombination(1.0, t, scale, *noise);
}

absl::StatusOr<std::vector<DpPoint>> RunDpCurve(const DpCurveSpec& spec) {
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  const int num_d = static_cast<int>(spec.dims.size());
  const int num_e = static_cast<int>(spec.epsilons.size());

  struct Outcome {
    double eigenvalue_error = std::numeric_limits<double>::infinity();
    double eigenvector_error = std::numeric_limits<double>::infinity();
  };
  std::vector<Spectrum> signals;
  std::vector<SymmetricTensor3> tensors;
  for (int d : spec.dims) {
    signals.push_back(RankOneSignal(spec.shape, d));
    absl::StatusOr<SymmetricTensor3> t = FromComponents(signals.back());
    if (!t.ok()) return t.status();
    tensors.push_back(*std::move(t));
  }
  std::vector<Outcome> outcomes(static_cast<size_t>(num_d) * num_e *
                                spec.trials);
  ParallelFor(static_cast<int>(outcomes.size()), spec.workers, [&](int task) {
    const int trial = task % spec.trials;
    const int ei = (task / spec.trials) % num_e;
    const int di = task / (spec.trials * num_e);
    const uint64_t seed = TrialSeed(spec.master_seed, spec.dims[di], trial);
    const double epsilon = spec.epsilons[ei];
    absl::StatusOr<Spectrum> est;
    if (spec.input_perturbation) {
      absl::StatusOr<SymmetricTensor3> noisy =
          InputPerturbation(tensors[di], epsilon, spec.delta, DeriveSeed(seed, 3));
      est = noisy.ok() ? RobustTpm(*noisy, {1, spec.restarts, spec.iterations, seed})
                       : absl::StatusOr<Spectrum>(noisy.status());
    } else {
      PrivateTpmOptions opts;
      opts.components = 1;
      opts.restarts = spec.restarts;
      opts.iterations = spec.iterations;
      opts.epsilon = epsilon;
      opts.delta = spec.delta;
      opts.seed = seed;
      absl::StatusOr<PrivateTpmRun> run = PrivateRtpm(tensors[di], opts);
      est = run.ok() ? absl::StatusOr<Spectrum>(std::move(run->spectrum))
                     : absl::StatusOr<Spectrum>(run.status());
    }
    if (!est.ok()) return;
    absl::StatusOr<RecoveryReport> report =
        ScoreRecovery(signals[di], *est, 1.0, Matching::kExtractionOrder);
    if (!report.ok()) return;
    outcomes[task] = {report->eigenvalue_errors[0],
                      report->eigenvector_errors[0]};
  });

  std::vector<DpPoint> points;
  for (int di = 0; di < num_d; ++di) {
    const double coherence =
        Coherence(StackVectors(signals[di])).value_or(std::nan(""));
    for (int ei = 0; ei < num_e; ++ei) {
      std::vector<double> lambda_err, vector_err;
      int successes = 0;
      for (int trial = 0; trial < spec.trials; ++trial) {
        const Outcome& o =
            outcomes[(static_cast<size_t>(di) * num_e + ei) * spec.trials + trial];
        lambda_err.push_back(o.eigenvalue_error);
        vector_err.push_back(o.eigenvector_error);
        if (o.eigenvector_error <= spec.success_radius) ++successes;
      }
      DpPoint p;
      p.epsilon = spec.epsilons[ei];
      p.dim = spec.dims[di];
      p.coherence = coherence;
      p.median_eigenvalue_error = Median(lambda_err);
      p.median_eigenvector_error = Median(vector_err);
      p.success_rate = static_cast<double>(successes) / spec.trials;
      points.push_back(p);
    }
  }
  return points;
}

std::string DpCsv(const DpCurveSpec& spec, const std::vector<DpPoint>& points) {
  std::string out = CsvHeader("dp-curve", spec.ToConfig());
  absl::StrAppend(&out,
                  "epsilon,d,mu0,median_err_lambda1,median_err_v1,success_rate\n");
  for (const DpPoint& p : points) {
    absl::StrAppend(&out, FormatDouble(p.epsilon), ",", p.dim, ",",
                    FormatDouble(p.coherence), ",",
                    FormatDouble(p.median_eigenvalue_error), ",",
                    FormatDouble(p.median_eigenvector_error), ",",
                    FormatDouble(p.success_rate), "\n");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whitening comparison.

absl::Status WhiteningSpec::Validate() const {
  if (absl::Status s = CheckDims(dims, 3); !s.ok()) return s;
  if (!(noise_norm >= 0.0)) {
    return absl::InvalidArgumentError("noise norm must be >= 0");
  }
  if (draws < 1) return absl::InvalidArgumentError("draws must be >= 1");
  return absl::OkStatus();
}

std::vector<std::pair<std::string, std::string>> WhiteningSpec::ToConfig()
    const {
  return {{"seed", absl::StrCat(master_seed)},
          {"dims", JoinInts(dims)},
          {"noise_norm", FormatDouble(noise_norm)},
          {"draws", absl::StrCat(draws)}};
}

absl::StatusOr<WhiteningSpec> WhiteningSpec::FromConfig(
    const ConfigMap& config) {
  WhiteningSpec s;
  const ParserMap parsers = {
      {"seed", [&](const std::string& v) { return ParseU64("seed", v, &s.master_seed); }},
      {"dims", [&](const std::string& v) { return ParseIntList("dims", v, &s.dims); }},
      {"noise_norm",
       [&](const std::string& v) { return ParseDouble("noise_norm", v, &s.noise_norm); }},
      {"draws", [&](const std::string& v) { return ParseInt("draws", v, &s.draws); }},
  };
  if (absl::Status st = ApplyConfig(config, parsers); !st.ok()) return st;
  if (absl::Status st = s.Validate(); !st.ok()) return st;
  return s;
}

absl::StatusOr<std::vector<WhiteningRow>> RunWhitening(
    const WhiteningSpec& spec) {
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  std::vector<WhiteningRow> rows;
  for (int d : spec.dims) {
    absl::StatusOr<Spectrum> truth = ReferenceSpectrum(d);
    if (!truth.ok()) return truth.status();
    absl::StatusOr<SymmetricTensor3> clean = FromComponents(*truth);
    if (!clean.ok()) return clean.status();
    const uint64_t seed = DimensionSeed(spec.master_seed, d);
    NoiseSpec noise_spec{NoiseRegime::kGaussian, d, spec.noise_norm, seed};
    absl::StatusOr<SymmetricTensor3> noise =
        MakeNoise(noise_spec, *truth, {.restarts = 5, .max_iterations = 300});
    if (!noise.ok()) return noise.status();
    absl::StatusOr<SymmetricTensor3> noisy =
        SymmetricTensor3::LinearCombination(1.0, *clean, 1.0, *noise);
    if (!noisy.ok()) return noisy.status();
    for (int draw = 0; draw < spec.draws; ++draw) {
      Rng rng(DeriveSeed(seed, 1000 + static_cast<uint64_t>(draw)));
      const Vector theta = RandomUnitVector(d, rng);
      absl::StatusOr<double> dist = WhiteningCompare(*noisy, *truth, theta);
      if (!dist.ok()) return dist.status();
      rows.push_back({d, draw, *dist});
    }
  }
  return rows;
}

std::string WhiteningCsv(const WhiteningSpec& spec,
                         const std::vector<WhiteningRow>& rows) {
  std::string out = CsvHeader("whiten", spec.ToConfig());
  absl::StrAppend(&out, "d,noise_norm,draw,distance\n");
  for (const WhiteningRow& r : rows) {
    absl::StrAppend(&out, r.dim, ",", FormatDouble(spec.noise_norm), ",", r.draw,
                    ",", FormatDouble(r.distance), "\n");
  }
  return out;
}

double MedianDistance(const std::vector<WhiteningRow>& rows, int dim) {
  std::vector<double> v;
  for (const WhiteningRow& r : rows)
    if (r.dim == dim) v.push_back(r.distance);
  return Median(std::move(v));
}

// ---------------------------------------------------------------------------
// Headers and replay.

std::string CsvHeader(std::string_view kind, const ConfigList& config) {
  const std::string body = ConfigBody(kind, config);
  std::string out = absl::StrCat("# tpmkit ", AsAbsl(LibraryVersion()), "\n");
  for (absl::string_view line : absl::StrSplit(body, '\n', absl::SkipEmpty())) {
    absl::StrAppend(&out, "# ", line, "\n");
  }
  absl::StrAppend(&out, "# config_digest=",
                  absl::StrFormat("%016x", Fnv1a(body)), "\n");
  return out;
}

absl::StatusOr<ConfigMap> ParseCsvHeader(std::string_view csv) {
  ConfigMap config;
  std::string kind;
  ConfigList ordered;
  std::string digest;
  for (absl::string_view line : absl::StrSplit(AsAbsl(csv), '\n')) {
    if (!absl::ConsumePrefix(&line, "# ")) break;
    if (absl::StartsWith(line, "tpmkit ")) continue;
    const size_t eq = line.find('=');
    if (eq == absl::string_view::npos) continue;
    std::string key(line.substr(0, eq));
    std::string value(line.substr(eq + 1));
    if (key == "config_digest") {
      digest = value;
    } else if (key == "kind") {
      kind = value;
    } else {
      ordered.emplace_back(key, value);
    }
    config[key] = value;
  }
  if (kind.empty()) {
    return absl::InvalidArgumentError("CSV has no 'kind' header line");
  }
  const std::string expected =
      absl::StrFormat("%016x", Fnv1a(ConfigBody(kind, ordered)));
  if (digest != expected) {
    return absl::DataLossError(absl::StrCat(
        "config digest mismatch: header says ", digest, ", content hashes to ",
        expected));
  }
  return config;
}

absl::StatusOr<std::string> ReplayCsv(std::string_view csv, int workers) {
  absl::StatusOr<ConfigMap> config = ParseCsvHeader(csv);
  if (!config.ok()) return config.status();
  const std::string kind = config->at("kind");
  if (kind == "phase") {
    absl::StatusOr<SweepSpec> spec = SweepSpec::FromConfig(*config);
    if (!spec.ok()) return spec.status();
    spec->workers = workers;
    absl::StatusOr<PhaseTable> table = RunPhaseTransition(*spec);
    if (!table.ok()) return table.status();
    return PhaseCsv(*table);
  }
  if (kind == "stream-curve") {
    absl::StatusOr<StreamingCurveSpec> spec =
        StreamingCurveSpec::FromConfig(*config);
    if (!spec.ok()) return spec.status();
    spec->workers = workers;
    absl::StatusOr<std::vector<StreamingPoint>> points = RunStreamingCurve(*spec);
    if (!points.ok()) return points.status();
    return StreamingCsv(*spec, *points);
  }
  if (kind == "dp-curve") {
    absl::StatusOr<DpCurveSpec> spec = DpCurveSpec::FromConfig(*config);
    if (!spec.ok()) return spec.status();
    spec->workers = workers;
    absl::StatusOr<std::vector<DpPoint>> points = RunDpCurve(*spec);
    if (!points.ok()) return points.status();
    return DpCsv(*spec, *points);
  }
  if (kind == "whiten") {
    absl::StatusOr<WhiteningSpec> spec = WhiteningSpec::FromConfig(*config);
    if (!spec.ok()) return spec.status();
    absl::StatusOr<std::vector<WhiteningRow>> rows = RunWhitening(*spec);
    if (!rows.ok()) return rows.status();
    return WhiteningCsv(*spec, *rows);
  }
  return absl::InvalidArgumentError(
      absl::StrCat("cannot replay CSV of kind '", kind, "'"));
}

// ---------------------------------------------------------------------------
// SVG.

std::string LineChartSvg(const std::vector<PlotSeries>& series,
                         std::string_view title, std::string_view x_label,
                         std::string_view y_label, bool log_x) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                            "#9467bd", "#ff7f0e", "#8c564b"};
  auto tx = [&](double x) { return log_x ? std::log10(x) : x; };

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const PlotSeries& s : series)
    for (const auto& [x, y] : s.points) {
      if (log_x && !(x > 0.0)) continue;
      if (!std::isfinite(y)) continue;
      x0 = std::min(x0, tx(x));
      x1 = std::max(x1, tx(x));
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (!(x1 > x0)) {
    x0 = std::isfinite(x0) ? x0 - 1 : 0;
    x1 = x0 + 2;
  }
  if (!(y1 > y0)) {
    y0 = std::isfinite(y0) ? y0 - 1 : 0;
    y1 = y0 + 2;
  }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::string out = absl::StrFormat(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n"
      "<text x=\"%g\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">%s</text>\n"
      "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      kWidth, kHeight, kLeft + pw / 2, std::string(title), kLeft, kTop, pw, ph);
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double label_x = log_x ? std::pow(10.0, fx) : fx;
    absl::StrAppend(
        &out,
        absl::StrFormat("<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%.3g"
                        "</text>\n",
                        kLeft + pw * i / 4.0, kTop + ph + 18, label_x),
        absl::StrFormat("<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.3g"
                        "</text>\n",
                        kLeft - 6, kTop + ph - ph * i / 4.0 + 4, fy));
  }
  absl::StrAppend(
      &out,
      absl::StrFormat("<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s"
                      "</text>\n",
                      kLeft + pw / 2, kHeight - 16, std::string(x_label)),
      absl::StrFormat("<text x=\"18\" y=\"%g\" text-anchor=\"middle\" "
                      "transform=\"rotate(-90 18 %g)\">%s</text>\n",
                      kTop + ph / 2, kTop + ph / 2, std::string(y_label)));
  for (size_t si = 0; si < series.size(); ++si) {
    const char* color = kColors[si % std::size(kColors)];
    std::vector<std::string> pts;
    for (const auto& [x, y] : series[si].points) {
      if ((log_x && !(x > 0.0)) || !std::isfinite(y)) continue;
      pts.push_back(absl::StrFormat("%.2f,%.2f", px(x), py(y)));
    }
    absl::StrAppend(
        &out,
        absl::StrFormat("<polyline fill=\"none\" stroke=\"%s\" "
                        "stroke-width=\"2\" points=\"%s\"/>\n",
                        color, absl::StrJoin(pts, " ")),
        absl::StrFormat("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
                        "stroke=\"%s\" stroke-width=\"2\"/>\n"
                        "<text x=\"%g\" y=\"%g\">%s</text>\n",
                        kWidth - kRight + 12, kTop + 10 + 18.0 * si,
                        kWidth - kRight + 36, kTop + 10 + 18.0 * si, color,
                        kWidth - kRight + 42, kTop + 14 + 18.0 * si,
                        series[si].label));
  }
  absl::StrAppend(&out, "</svg>\n");
  return out;
}

std::string PhaseSvg(const PhaseTable& table) {
  std::vector<PlotSeries> series;
  for (int d : table.spec.dims) {
    PlotSeries s{absl::StrCat("d=", d), {}};
    for (const PhaseCell& c : table.cells)
      if (c.dim == d) s.points.emplace_back(c.sigma, c.fail_prob);
    series.push_back(std::move(s));
  }
  return LineChartSvg(
      series,
      absl::StrCat("failure probability, ", std::string(RegimeName(table.spec.regime)),
                   " noise"),
      "noise operator norm", "failure probability", /*log_x=*/true);
}

}  // namespace tpmkit
