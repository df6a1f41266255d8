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

// tpmkit: command-line front end for decomposition and experiment sweeps.

#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"
#include "tpmkit/dp.h"
#include "tpmkit/harness.h"
#include "tpmkit/io.h"
#include "tpmkit/noise_lab.h"
#include "tpmkit/power_method.h"
#include "tpmkit/streaming.h"

namespace tpmkit {
namespace {

int Fail(const absl::Status& s) {
  std::cerr << "tpmkit: " << s << "\n";
  return 1;
}

absl::Status WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return absl::OkStatus();
  }
  std::ofstream out(path);
  if (!out) return absl::NotFoundError("cannot write " + path);
  out << text;
  return out ? absl::OkStatus() : absl::InternalError("write failed: " + path);
}

absl::StatusOr<std::string> ReadText(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Flag values that override a key=value config file. Only flags the user
// actually passed are applied.
class Overrides {
 public:
  explicit Overrides(CLI::App* app) : app_(app) {}

  void String(const std::string& flag, const std::string& key,
              const std::string& help) {
    auto& slot = strings_.emplace_back(key, std::string());
    options_.push_back(app_->add_option(flag, slot.second, help));
  }
  void Flag(const std::string& flag, const std::string& key,
            const std::string& help) {
    flags_.emplace_back(key, app_->add_flag(flag, help));
  }

  // Config file (if any) first, then explicit flags.
  absl::StatusOr<ConfigMap> Resolve(const std::string& config_path) const {
    ConfigMap config;
    if (!config_path.empty()) {
      absl::StatusOr<ConfigMap> file = ReadConfigFile(config_path);
      if (!file.ok()) return file.status();
      config = *std::move(file);
    }
    for (size_t i = 0; i < strings_.size(); ++i) {
      if (options_[i]->count() > 0) config[strings_[i].first] = strings_[i].second;
    }
    for (const auto& [key, opt] : flags_) {
      if (opt->count() > 0) config[key] = "true";
    }
    return config;
  }

 private:
  CLI::App* app_;
  std::deque<std::pair<std::string, std::string>> strings_;
  std::vector<CLI::Option*> options_;
  std::vector<std::pair<std::string, CLI::Option*>> flags_;
};

struct Common {
  std::string config;
  std::string out;
  std::string svg;
  int workers = 0;
};

void AddCommon(CLI::App* app, Common* c) {
  app->add_option("--config", c->config, "key=value config file (flags win)");
  app->add_option("--out", c->out, "output file (default: stdout)");
  app->add_option("--workers", c->workers,
                  "worker threads (0: one per hardware thread)");
}

std::string BudgetReport(const PrivateTpmRun& run) {
  const PrivacyBudget& b = run.budget;
  int64_t draws = 0;
  for (int64_t n : run.noise_draws) draws += n;
  std::string out;
  out += "epsilon=" + FormatDouble(b.epsilon) + "\n";
  out += "delta=" + FormatDouble(b.delta) + "\n";
  out += "epsilon_prime=" + FormatDouble(b.epsilon_prime) + "\n";
  out += "delta_prime=" + FormatDouble(b.delta_prime) + "\n";
  out += "nu=" + FormatDouble(run.noise_scale) + "\n";
  out += "K=" + std::to_string(b.releases) + "\n";
  out += "k=" + std::to_string(b.components) + "\n";
  out += "L=" + std::to_string(b.restarts) + "\n";
  out += "R=" + std::to_string(b.iterations) + "\n";
  out += "noise_draws=" + std::to_string(draws) + "\n";
  for (size_t i = 0; i < run.noise_draws.size(); ++i) {
    out += "noise_draws_component_" + std::to_string(i) + "=" +
           std::to_string(run.noise_draws[i]) + "\n";
  }
  return out;
}

std::string SpectrumText(const Spectrum& s) {
  std::ostringstream out;
  WriteSpectrum(s, out);
  return out.str();
}

}  // namespace
}  // namespace tpmkit

int main(int argc, char** argv) {
  using namespace tpmkit;
  CLI::App app{"tpmkit: tensor power methods and their experiments"};
  app.set_version_flag("--version", std::string(LibraryVersion()));
  app.require_subcommand(1);

  // decompose ---------------------------------------------------------------
  CLI::App* decompose =
      app.add_subcommand("decompose", "tensor file -> spectrum file");
  std::string tensor_path, out_path;
  int k = 1;
  std::optional<int> opt_l, opt_r;
  uint64_t seed = 0;
  decompose->add_option("tensor", tensor_path, "symtensor3 file")->required();
  decompose->add_option("--k", k, "components to extract");
  decompose->add_option("--L", opt_l, "restarts per component");
  decompose->add_option("--R", opt_r, "power steps per restart");
  decompose->add_option("--seed", seed, "seed");
  decompose->add_option("--out", out_path, "spectrum file (default: stdout)");

  // stream --------------------------------------------------------------------
  CLI::App* stream = app.add_subcommand(
      "stream", "online decomposition of a generated or recorded stream");
  int stream_d = 25, stream_n = 1000, stream_l = 10, stream_r = 30;
  int stream_k = 3, record_count = 0;
  bool shared_batch = false;
  std::string replay_path, record_path, stream_out;
  uint64_t stream_seed = 0;
  stream->add_option("--d", stream_d, "dimension of the generated stream");
  stream->add_option("--k", stream_k, "components (1 to 3)");
  stream->add_option("--n", stream_n, "batch size per power step");
  stream->add_option("--L", stream_l, "restarts per component");
  stream->add_option("--R", stream_r, "power steps per restart");
  stream->add_option("--seed", stream_seed, "seed");
  stream->add_flag("--shared-batch", shared_batch,
                   "one batch per step shared by all restarts");
  stream->add_option("--replay", replay_path, "samples file to consume");
  stream->add_option("--record", record_path,
                     "write --count generated samples to this file and exit");
  stream->add_option("--count", record_count, "samples to record");
  stream->add_option("--out", stream_out, "spectrum file (default: stdout)");

  // private -------------------------------------------------------------------
  CLI::App* priv = app.add_subcommand(
      "private", "differentially private decomposition + budget report");
  std::string priv_tensor, priv_out, budget_out;
  PrivateTpmOptions priv_opts;
  priv->add_option("tensor", priv_tensor, "symtensor3 file")->required();
  priv->add_option("--k", priv_opts.components, "components");
  priv->add_option("--L", priv_opts.restarts, "restarts per component");
  priv->add_option("--R", priv_opts.iterations, "power steps per restart");
  priv->add_option("--epsilon", priv_opts.epsilon, "privacy epsilon");
  priv->add_option("--delta", priv_opts.delta, "privacy delta");
  priv->add_option("--seed", priv_opts.seed, "seed");
  priv->add_option("--out", priv_out, "spectrum file (default: stdout)");
  priv->add_option("--budget", budget_out,
                   "budget report file (default: <out>.budget, or stderr)");

  // phase ---------------------------------------------------------------------
  CLI::App* phase = app.add_subcommand("phase", "noise phase-transition sweep");
  Common phase_c;
  std::string timings_out;
  AddCommon(phase, &phase_c);
  phase->add_option("--svg", phase_c.svg, "also write an SVG plot");
  phase->add_option("--timings", timings_out, "per-cell wall times CSV");
  Overrides phase_o(phase);
  phase_o.String("--seed", "seed", "master seed");
  phase_o.String("--dims", "dims", "comma-separated dimensions");
  phase_o.String("--sigma-grid", "sigma_grid", "comma-separated noise norms");
  phase_o.String("--trials", "trials", "trials per cell");
  phase_o.String("--regime", "regime", "gaussian, adversarial or weak");
  phase_o.String("--L", "L", "restarts per component");
  phase_o.String("--R", "R", "power steps per restart");
  phase_o.String("--matching", "matching", "optimal or order");
  phase_o.String("--threshold", "threshold", "success threshold on |v_hat.v|");

  // stream-curve --------------------------------------------------------------
  CLI::App* scurve =
      app.add_subcommand("stream-curve", "streaming error against batch size");
  Common scurve_c;
  AddCommon(scurve, &scurve_c);
  scurve->add_option("--svg", scurve_c.svg, "also write an SVG plot");
  Overrides scurve_o(scurve);
  scurve_o.String("--seed", "seed", "master seed");
  scurve_o.String("--d", "d", "dimension");
  scurve_o.String("--k", "k", "components (1 to 3)");
  scurve_o.String("--n-grid", "n_grid", "comma-separated batch sizes");
  scurve_o.String("--trials", "trials", "trials per point");
  scurve_o.String("--L", "L", "restarts per component");
  scurve_o.String("--R", "R", "power steps per restart");
  scurve_o.Flag("--shared-batch", "shared_batch",
                "one batch per step shared by all restarts");

  // dp-curve ------------------------------------------------------------------
  CLI::App* dcurve =
      app.add_subcommand("dp-curve", "private decomposition error against epsilon");
  Common dcurve_c;
  AddCommon(dcurve, &dcurve_c);
  dcurve->add_option("--svg", dcurve_c.svg, "also write an SVG plot");
  Overrides dcurve_o(dcurve);
  dcurve_o.String("--seed", "seed", "master seed");
  dcurve_o.String("--dims", "dims", "comma-separated dimensions");
  dcurve_o.String("--eps-grid", "eps_grid", "comma-separated epsilons");
  dcurve_o.String("--delta", "delta", "privacy delta");
  dcurve_o.String("--shape", "shape", "incoherent or coherent");
  dcurve_o.String("--trials", "trials", "trials per point");
  dcurve_o.String("--L", "L", "restarts");
  dcurve_o.String("--R", "R", "power steps per restart");
  dcurve_o.String("--success-radius", "success_radius",
                  "success when ||v_hat - v|| is at most this");
  dcurve_o.Flag("--input-perturbation", "input_perturbation",
                "baseline: perturb the tensor once, then decompose");

  // whiten --------------------------------------------------------------------
  CLI::App* whiten =
      app.add_subcommand("whiten", "subspace error of the matrix-collapse baseline");
  Common whiten_c;
  AddCommon(whiten, &whiten_c);
  Overrides whiten_o(whiten);
  whiten_o.String("--seed", "seed", "master seed");
  whiten_o.String("--dims", "dims", "comma-separated dimensions");
  whiten_o.String("--noise-norm", "noise_norm", "noise operator norm");
  whiten_o.String("--draws", "draws", "theta draws per dimension");

  // replay --------------------------------------------------------------------
  CLI::App* replay =
      app.add_subcommand("replay", "regenerate a CSV from its header");
  std::string replay_csv, replay_out;
  bool replay_check = false;
  int replay_workers = 0;
  replay->add_option("csv", replay_csv, "CSV written by tpmkit")->required();
  replay->add_option("--out", replay_out, "output file (default: stdout)");
  replay->add_option("--workers", replay_workers, "worker threads");
  replay->add_flag("--check", replay_check,
                   "compare with the input and exit nonzero on any difference");

  CLI11_PARSE(app, argc, argv);

  if (*decompose) {
    absl::StatusOr<SymmetricTensor3> t = ReadTensorFile(tensor_path);
    if (!t.ok()) return Fail(t.status());
    TpmConfig cfg = DefaultTpmConfig(*t, k, seed);
    if (opt_l) cfg.restarts = *opt_l;
    if (opt_r) cfg.iterations = *opt_r;
    absl::StatusOr<Spectrum> s = RobustTpm(*t, cfg);
    if (!s.ok()) return Fail(s.status());
    if (absl::Status w = WriteText(out_path, SpectrumText(*s)); !w.ok()) {
      return Fail(w);
    }
    return 0;
  }

  if (*stream) {
    StreamConfig cfg;
    cfg.components = stream_k;
    cfg.restarts = stream_l;
    cfg.iterations = stream_r;
    cfg.batch_size = stream_n;
    cfg.seed = DeriveSeed(stream_seed, 1);
    cfg.shared_batch = shared_batch;
    absl::StatusOr<Spectrum> s;
    if (!replay_path.empty()) {
      std::ifstream in(replay_path);
      if (!in) return Fail(absl::NotFoundError("cannot open " + replay_path));
      int dim = 0;
      absl::StatusOr<std::vector<Vector>> samples = ReadSamples(in, &dim);
      if (!samples.ok()) return Fail(samples.status());
      absl::StatusOr<ReplayStream> rs =
          ReplayStream::Create(dim, *std::move(samples));
      if (!rs.ok()) return Fail(rs.status());
      s = OnlineRtpm(*rs, cfg);
    } else {
      absl::StatusOr<Spectrum> reference = ReferenceSpectrum(stream_d);
      if (!reference.ok()) return Fail(reference.status());
      if (stream_k < 1 || stream_k > 3) {
        return Fail(absl::InvalidArgumentError("--k must be in [1, 3]"));
      }
      reference->pairs.resize(stream_k);
      absl::StatusOr<SingleTopicGenerator> gen = SingleTopicGenerator::Create(
          *reference, std::vector<double>(stream_k, 1.0 / stream_k),
          DeriveSeed(stream_seed, 0));
      if (!gen.ok()) return Fail(gen.status());
      if (!record_path.empty()) {
        absl::StatusOr<std::vector<Vector>> samples =
            gen->NextBatch(record_count);
        if (!samples.ok()) return Fail(samples.status());
        std::ofstream out(record_path);
        if (!out) return Fail(absl::NotFoundError("cannot write " + record_path));
        WriteSamples(stream_d, *samples, out);
        return 0;
      }
      s = OnlineRtpm(*gen, cfg);
    }
    if (!s.ok()) return Fail(s.status());
    if (absl::Status w = WriteText(stream_out, SpectrumText(*s)); !w.ok()) {
      return Fail(w);
    }
    return 0;
  }

  if (*priv) {
    absl::StatusOr<SymmetricTensor3> t = ReadTensorFile(priv_tensor);
    if (!t.ok()) return Fail(t.status());
    absl::StatusOr<PrivateTpmRun> run = PrivateRtpm(*t, priv_opts);
    if (!run.ok()) return Fail(run.status());
    if (absl::Status w = WriteText(priv_out, SpectrumText(run->spectrum));
        !w.ok()) {
      return Fail(w);
    }
    std::string budget_path = budget_out;
    if (budget_path.empty() && !priv_out.empty() && priv_out != "-") {
      budget_path = priv_out + ".budget";
    }
    const std::string report = BudgetReport(*run);
    if (budget_path.empty()) {
      std::cerr << report;
    } else if (absl::Status w = WriteText(budget_path, report); !w.ok()) {
      return Fail(w);
    }
    return 0;
  }

  if (*phase) {
    absl::StatusOr<ConfigMap> config = phase_o.Resolve(phase_c.config);
    if (!config.ok()) return Fail(config.status());
    absl::StatusOr<SweepSpec> spec = SweepSpec::FromConfig(*config);
    if (!spec.ok()) return Fail(spec.status());
    spec->workers = phase_c.workers;
    absl::StatusOr<PhaseTable> table = RunPhaseTransition(*spec);
    if (!table.ok()) return Fail(table.status());
    const std::string csv = PhaseCsv(*table);
    if (absl::Status w = WriteText(phase_c.out, csv); !w.ok()) return Fail(w);
    if (!phase_c.svg.empty()) {
      if (absl::Status w = WriteText(phase_c.svg, PhaseSvg(*table)); !w.ok()) {
        return Fail(w);
      }
    }
    if (!timings_out.empty()) {
      if (absl::Status w = WriteText(timings_out, PhaseTimingsCsv(*table));
          !w.ok()) {
        return Fail(w);
      }
    }
    absl::StatusOr<std::vector<PhaseRow>> rows = ParsePhaseCsv(csv);
    if (rows.ok()) {
      for (int d : spec->dims) {
        absl::StatusOr<Transition> tr = ExtractTransition(*rows, d);
        if (tr.ok()) {
          std::cerr << absl::StrFormat("d=%d transition sigma=%.4g%s\n", d,
                                       tr->sigma,
                                       tr->monotone ? "" : " (non-monotone)");
        } else {
          std::cerr << absl::StrFormat("d=%d no transition on this grid\n", d);
        }
      }
    }
    return 0;
  }

  if (*scurve) {
    absl::StatusOr<ConfigMap> config = scurve_o.Resolve(scurve_c.config);
    if (!config.ok()) return Fail(config.status());
    absl::StatusOr<StreamingCurveSpec> spec =
        StreamingCurveSpec::FromConfig(*config);
    if (!spec.ok()) return Fail(spec.status());
    spec->workers = scurve_c.workers;
    absl::StatusOr<std::vector<StreamingPoint>> points = RunStreamingCurve(*spec);
    if (!points.ok()) return Fail(points.status());
    if (absl::Status w = WriteText(scurve_c.out, StreamingCsv(*spec, *points));
        !w.ok()) {
      return Fail(w);
    }
    if (!scurve_c.svg.empty()) {
      PlotSeries s{"median error", {}};
      for (const StreamingPoint& p : *points) {
        s.points.emplace_back(p.batch_size, p.median_error);
      }
      if (absl::Status w = WriteText(
              scurve_c.svg, LineChartSvg({s}, "streaming recovery error",
                                         "batch size n", "median error", true));
          !w.ok()) {
        return Fail(w);
      }
    }
    if (absl::StatusOr<double> slope = LogLogSlope(*points); slope.ok()) {
      std::cerr << absl::StrFormat("log-log slope %.3f\n", *slope);
    }
    return 0;
  }

  if (*dcurve) {
    absl::StatusOr<ConfigMap> config = dcurve_o.Resolve(dcurve_c.config);
    if (!config.ok()) return Fail(config.status());
    absl::StatusOr<DpCurveSpec> spec = DpCurveSpec::FromConfig(*config);
    if (!spec.ok()) return Fail(spec.status());
    spec->workers = dcurve_c.workers;
    absl::StatusOr<std::vector<DpPoint>> points = RunDpCurve(*spec);
    if (!points.ok()) return Fail(points.status());
    if (absl::Status w = WriteText(dcurve_c.out, DpCsv(*spec, *points));
        !w.ok()) {
      return Fail(w);
    }
    if (!dcurve_c.svg.empty()) {
      std::vector<PlotSeries> series;
      for (int d : spec->dims) {
        PlotSeries s{"d=" + std::to_string(d), {}};
        for (const DpPoint& p : *points)
          if (p.dim == d) s.points.emplace_back(p.epsilon, p.median_eigenvector_error);
        series.push_back(std::move(s));
      }
      if (absl::Status w = WriteText(
              dcurve_c.svg,
              LineChartSvg(series, "private recovery error", "epsilon",
                           "median ||v_hat - v||", true));
          !w.ok()) {
        return Fail(w);
      }
    }
    return 0;
  }

  if (*whiten) {
    absl::StatusOr<ConfigMap> config = whiten_o.Resolve(whiten_c.config);
    if (!config.ok()) return Fail(config.status());
    absl::StatusOr<WhiteningSpec> spec = WhiteningSpec::FromConfig(*config);
    if (!spec.ok()) return Fail(spec.status());
    absl::StatusOr<std::vector<WhiteningRow>> rows = RunWhitening(*spec);
    if (!rows.ok()) return Fail(rows.status());
    if (absl::Status w = WriteText(whiten_c.out, WhiteningCsv(*spec, *rows));
        !w.ok()) {
      return Fail(w);
    }
    for (int d : spec->dims) {
      std::cerr << absl::StrFormat("d=%d median distance %.4g\n", d,
                                   MedianDistance(*rows, d));
    }
    return 0;
  }

  if (*replay) {
    absl::StatusOr<std::string> original = ReadText(replay_csv);
    if (!original.ok()) return Fail(original.status());
    absl::StatusOr<std::string> regenerated =
        ReplayCsv(*original, replay_workers);
    if (!regenerated.ok()) return Fail(regenerated.status());
    if (replay_check) {
      if (*regenerated != *original) {
        std::cerr << "tpmkit: regenerated table differs from " << replay_csv
                  << "\n";
        return 2;
      }
      std::cerr << "identical\n";
      return 0;
    }
    if (absl::Status w = WriteText(replay_out, *regenerated); !w.ok()) {
      return Fail(w);
    }
    return 0;
  }
  return 0;
}
