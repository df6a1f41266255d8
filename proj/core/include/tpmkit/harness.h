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

// Monte-Carlo experiment runners. Each run is a pure function of its spec:
// trial seeds are derived from the master seed by counter-based splitting,
//   dimension seed = DeriveSeed(master, d)
//   trial seed     = DeriveSeed(dimension seed, trial),
// so every cell can be re-run on its own, and the output does not depend on
// the number of worker threads. Every CSV starts with a '#' header block
// holding the tool version, the full config and its digest; ReplayCsv
// regenerates the table from that header alone.

#ifndef TPMKIT_HARNESS_H_
#define TPMKIT_HARNESS_H_

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "tpmkit/dp.h"
#include "tpmkit/io.h"
#include "tpmkit/noise_lab.h"
#include "tpmkit/power_method.h"
#include "tpmkit/streaming.h"

namespace tpmkit {

std::string_view LibraryVersion();

uint64_t DimensionSeed(uint64_t master_seed, int dim);
uint64_t TrialSeed(uint64_t master_seed, int dim, int trial);

// 12 log-spaced points per decade over [1e-3, 1] * scale.
std::vector<double> DefaultSigmaGrid(double scale = 1.0);

// Runs fn(0), ..., fn(n - 1) on up to `workers` threads (0 means one per
// hardware thread).
void ParallelFor(int n, int workers, const std::function<void(int)>& fn);

// ---------------------------------------------------------------------------
// Phase transitions under additive noise.

struct TrialRecord {
  uint64_t seed = 0;
  int dim = 0;
  NoiseRegime regime = NoiseRegime::kGaussian;
  double sigma = 0.0;
  std::vector<bool> success;
  std::vector<double> alignments;
  std::vector<double> eigenvalue_errors;
  std::vector<double> eigenvector_errors;
  // Set when the decomposition itself failed; the trial counts as failed.
  std::string failure;
  double wall_seconds = 0.0;

  bool Succeeded() const;
};

struct SweepSpec {
  std::vector<int> dims = {25, 50, 100, 200};
  std::vector<double> sigma_grid = DefaultSigmaGrid();
  int trials = 20;
  NoiseRegime regime = NoiseRegime::kGaussian;
  int restarts = 5;     // L
  int iterations = 30;  // R
  // How recovered pairs are paired with the three reference components. In
  // extraction order, the i-th extracted pair must clear the threshold
  // against reference component i.
  Matching matching = Matching::kExtractionOrder;
  double threshold = 0.25;
  // Operator-norm estimator used to normalize each raw noise tensor.
  OperatorNormOptions estimator{.restarts = 5, .max_iterations = 300};
  uint64_t master_seed = 0;
  int workers = 0;  // not part of the config; output is independent of it

  absl::Status Validate() const;
  std::vector<std::pair<std::string, std::string>> ToConfig() const;
  static absl::StatusOr<SweepSpec> FromConfig(const ConfigMap& config);
};

struct PhaseCell {
  int dim = 0;
  double sigma = 0.0;
  double fail_prob = 0.0;
  double wall_seconds = 0.0;
  std::vector<TrialRecord> trials;
};

struct PhaseTable {
  SweepSpec spec;
  std::vector<PhaseCell> cells;  // dims outer, sigma inner
};

// For each (d, trial) one raw noise tensor is drawn and normalized to unit
// estimated operator norm; every sigma on the grid reuses it, together with
// one TPM seed, so the columns of the table share their random numbers.
absl::StatusOr<PhaseTable> RunPhaseTransition(const SweepSpec& spec);

std::string PhaseCsv(const PhaseTable& table);

// seed,d,regime,sigma,fail_prob,wall_seconds; wall times vary run to run and
// are kept out of the reproducible table.
std::string PhaseTimingsCsv(const PhaseTable& table);

struct PhaseRow {
  uint64_t seed = 0;
  int dim = 0;
  std::string regime;
  double sigma = 0.0;
  double fail_prob = 0.0;
};

absl::StatusOr<std::vector<PhaseRow>> ParsePhaseCsv(std::string_view csv);

struct Transition {
  double sigma = 0.0;
  // False if fail_prob decreases anywhere along the column.
  bool monotone = true;
};

// First up-crossing of fail_prob = 0.5 along the sigma column for d. The
// crossing is placed by linear interpolation between the bracketing grid
// points; when the column jumps straight from 0 to 1 there is nothing to
// interpolate and the upper grid point is returned. NotFound if the column
// never reaches 0.5.
absl::StatusOr<Transition> ExtractTransition(const std::vector<PhaseRow>& rows,
                                             int dim);

// ---------------------------------------------------------------------------
// Streaming error against batch size.

struct StreamingCurveSpec {
  int dim = 25;
  int components = 3;  // first k pairs of the reference signal
  std::vector<int> batch_sizes = {1000, 4000, 16000};
  int trials = 20;
  int restarts = 5;
  int iterations = 10;
  bool shared_batch = false;
  uint64_t master_seed = 0;
  int workers = 0;

  absl::Status Validate() const;
  std::vector<std::pair<std::string, std::string>> ToConfig() const;
  static absl::StatusOr<StreamingCurveSpec> FromConfig(const ConfigMap& config);
};

struct StreamingPoint {
  int batch_size = 0;
  int dim = 0;
  double median_error = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  std::vector<double> errors;  // per trial
};

// Recovery error of one run: the largest eigenvalue or eigenvector error
// over the optimally matched components.
double RecoveryError(const RecoveryReport& report);

absl::StatusOr<std::vector<StreamingPoint>> RunStreamingCurve(
    const StreamingCurveSpec& spec);
std::string StreamingCsv(const StreamingCurveSpec& spec,
                         const std::vector<StreamingPoint>& points);

// Least-squares slope of log(median_error) against log(batch_size).
absl::StatusOr<double> LogLogSlope(const std::vector<StreamingPoint>& points);

// ---------------------------------------------------------------------------
// Private decomposition error against epsilon.

enum class SignalShape {
  kIncoherent,  // v = (1, ..., 1) / sqrt(d), coherence 1
  kCoherent,    // v = e_1, coherence d
};

std::string_view SignalShapeName(SignalShape shape);
absl::StatusOr<SignalShape> ParseSignalShape(std::string_view name);

// Rank-one spectrum {(1, v)} of the given shape.
Spectrum RankOneSignal(SignalShape shape, int dim);

struct DpCurveSpec {
  std::vector<int> dims = {100};
  std::vector<double> epsilons = {1e3, 1e4, 1e5};
  double delta = 1e-5;
  SignalShape shape = SignalShape::kIncoherent;
  int trials = 20;
  int restarts = 5;
  int iterations = 10;
  // A trial succeeds when the sign-resolved ||v_hat_1 - v_1|| is at most this.
  double success_radius = 0.5;
  // Replace the private method with non-private decomposition of a tensor
  // released once through the Gaussian mechanism.
  bool input_perturbation = false;
  uint64_t master_seed = 0;
  int workers = 0;

  absl::Status Validate() const;
  std::vector<std::pair<std::string, std::string>> ToConfig() const;
  static absl::StatusOr<DpCurveSpec> FromConfig(const ConfigMap& config);
};

struct DpPoint {
  double epsilon = 0.0;
  int dim = 0;
  double coherence = 0.0;
  double median_eigenvalue_error = 0.0;
  double median_eigenvector_error = 0.0;
  double success_rate = 0.0;
};

// T + s * PermAvg(G), G iid N(0, 1), s = 6 sqrt(2 ln(1.25 / delta)) / epsilon:
// one Gaussian-mechanism release of the whole tensor (the neighbor
// perturbation changes T by at most 6 in Frobenius norm).
absl::StatusOr<SymmetricTensor3> InputPerturbation(const SymmetricTensor3& t,
                                                   double epsilon,
                                                   double delta,
                                                   uint64_t seed);

absl::StatusOr<std::vector<DpPoint>> RunDpCurve(const DpCurveSpec& spec);
std::string DpCsv(const DpCurveSpec& spec, const std::vector<DpPoint>& points);

// ---------------------------------------------------------------------------
// Subspace recovery by matrix collapse.

struct WhiteningSpec {
  std::vector<int> dims = {50, 100};
  double noise_norm = 0.02;  // operator norm of the Gaussian noise
  int draws = 20;            // theta draws per dimension
  uint64_t master_seed = 0;

  absl::Status Validate() const;
  std::vector<std::pair<std::string, std::string>> ToConfig() const;
  static absl::StatusOr<WhiteningSpec> FromConfig(const ConfigMap& config);
};

struct WhiteningRow {
  int dim = 0;
  int draw = 0;
  double distance = 0.0;
};

absl::StatusOr<std::vector<WhiteningRow>> RunWhitening(
    const WhiteningSpec& spec);
std::string WhiteningCsv(const WhiteningSpec& spec,
                         const std::vector<WhiteningRow>& rows);
double MedianDistance(const std::vector<WhiteningRow>& rows, int dim);

// ---------------------------------------------------------------------------
// Headers, replay and plots.

// "# tpmkit <version>", "# kind=<kind>", one "# key=value" line per entry,
// then "# config_digest=<16 hex digits>" (FNV-1a over the key=value lines).
std::string CsvHeader(
    std::string_view kind,
    const std::vector<std::pair<std::string, std::string>>& config);

// Reads the header block back into a key=value map (including "kind" and
// "config_digest"). DataLoss if the digest does not match.
absl::StatusOr<ConfigMap> ParseCsvHeader(std::string_view csv);

// Regenerates a table from the header block of a CSV produced by this
// library.
absl::StatusOr<std::string> ReplayCsv(std::string_view csv, int workers = 0);

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Minimal static line chart.
std::string LineChartSvg(const std::vector<PlotSeries>& series,
                         std::string_view title, std::string_view x_label,
                         std::string_view y_label, bool log_x);

std::string PhaseSvg(const PhaseTable& table);

double Median(std::vector<double> values);
double Quantile(std::vector<double> values, double q);

}  // namespace tpmkit

#endif  // TPMKIT_HARNESS_H_
