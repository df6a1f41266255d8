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

// Plain-text formats. Floats are written with 17 significant digits so that
// a write/read round trip is exact.
//
//   tensor:    "symtensor3 d=<d>", then "i j k value" per nonzero unique
//              triple i <= j <= k; unlisted triples are zero.
//   spectrum:  "spectrum d=<d> k=<k>", then per pair "lambda <value>" and a
//              line of d vector entries.
//   samples:   "samples d=<d> n=<n>", then one vector per line.
//   config:    "key=value" lines; blank lines and '#' comments ignored.

#ifndef TPMKIT_IO_H_
#define TPMKIT_IO_H_

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "tpmkit/symmetric_tensor.h"

namespace tpmkit {

std::string FormatDouble(double x);

void WriteTensor(const SymmetricTensor3& t, std::ostream& out);
absl::StatusOr<SymmetricTensor3> ReadTensor(std::istream& in);

void WriteSpectrum(const Spectrum& s, std::ostream& out);
absl::StatusOr<Spectrum> ReadSpectrum(std::istream& in);

void WriteSamples(int dim, const std::vector<Vector>& samples,
                  std::ostream& out);
absl::StatusOr<std::vector<Vector>> ReadSamples(std::istream& in, int* dim);

using ConfigMap = std::map<std::string, std::string>;
absl::StatusOr<ConfigMap> ParseConfig(std::istream& in);

// File wrappers; NotFound if the file cannot be opened.
absl::StatusOr<SymmetricTensor3> ReadTensorFile(const std::string& path);
absl::Status WriteTensorFile(const SymmetricTensor3& t,
                             const std::string& path);
absl::StatusOr<Spectrum> ReadSpectrumFile(const std::string& path);
absl::Status WriteSpectrumFile(const Spectrum& s, const std::string& path);
absl::StatusOr<ConfigMap> ReadConfigFile(const std::string& path);

}  // namespace tpmkit

#endif  // TPMKIT_IO_H_
