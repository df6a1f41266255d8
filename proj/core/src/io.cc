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

#include "tpmkit/io.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "absl/strings/string_view.h"

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace tpmkit {
namespace {

// Parses "<tag> key=value ..." and returns the integer value of each key.
absl::StatusOr<std::map<std::string, long long>> ParseHeader(
    std::istream& in, absl::string_view tag) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError(absl::StrCat("missing '", tag, "' header"));
  }
  std::vector<std::string> fields =
      absl::StrSplit(line, absl::ByAnyChar(" \t"), absl::SkipEmpty());
  if (fields.empty() || fields[0] != tag) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected '", tag, "' header, got '", line, "'"));
  }
  std::map<std::string, long long> out;
  for (size_t i = 1; i < fields.size(); ++i) {
    std::pair<std::string, std::string> kv =
        absl::StrSplit(fields[i], absl::MaxSplits('=', 1));
    long long value = 0;
    if (!absl::SimpleAtoi(kv.second, &value)) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad header field '", fields[i], "'"));
    }
    out[kv.first] = value;
  }
  return out;
}

absl::StatusOr<long long> HeaderValue(
    const std::map<std::string, long long>& header, const std::string& key) {
  auto it = header.find(key);
  if (it == header.end()) {
    return absl::InvalidArgumentError(absl::StrCat("header lacks '", key, "='"));
  }
  return it->second;
}

absl::StatusOr<Vector> ReadVectorLine(std::istream& in, int dim) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("unexpected end of input");
  }
  std::vector<absl::string_view> fields =
      absl::StrSplit(line, absl::ByAnyChar(" \t"), absl::SkipEmpty());
  if (static_cast<int>(fields.size()) != dim) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected ", dim, " values on a line, got ", fields.size()));
  }
  Vector v(dim);
  for (int i = 0; i < dim; ++i) {
    if (!absl::SimpleAtod(fields[i], &v[i]) || !std::isfinite(v[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad number '", fields[i], "'"));
    }
  }
  return v;
}

void WriteVectorLine(std::span<const double> v, std::ostream& out) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out << ' ';
    out << FormatDouble(v[i]);
  }
  out << '\n';
}

absl::Status CheckDim(long long d) {
  if (d < 1 || d > 100000) {
    return absl::InvalidArgumentError(absl::StrCat("bad dimension ", d));
  }
  return absl::OkStatus();
}

}  // namespace

std::string FormatDouble(double x) { return absl::StrFormat("%.17g", x); }

void WriteTensor(const SymmetricTensor3& t, std::ostream& out) {
  out << "symtensor3 d=" << t.dim() << '\n';
  SymmetricTensor3::ForEachUniqueTriple(t.dim(), [&](int i, int j, int k) {
    const double x = t(i, j, k);
    if (x != 0.0) out << i << ' ' << j << ' ' << k << ' ' << FormatDouble(x) << '\n';
  });
}

absl::StatusOr<SymmetricTensor3> ReadTensor(std::istream& in) {
  absl::StatusOr<std::map<std::string, long long>> header =
      ParseHeader(in, "symtensor3");
  if (!header.ok()) return header.status();
  absl::StatusOr<long long> d = HeaderValue(*header, "d");
  if (!d.ok()) return d.status();
  if (absl::Status s = CheckDim(*d); !s.ok()) return s;
  const int dim = static_cast<int>(*d);
  SymmetricTensorBuilder b(dim);
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    std::vector<absl::string_view> f =
        absl::StrSplit(line, absl::ByAnyChar(" \t"), absl::SkipEmpty());
    int i, j, k;
    double x;
    if (f.size() != 4 || !absl::SimpleAtoi(f[0], &i) ||
        !absl::SimpleAtoi(f[1], &j) || !absl::SimpleAtoi(f[2], &k) ||
        !absl::SimpleAtod(f[3], &x) || !std::isfinite(x)) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected 'i j k value'"));
    }
    if (!(0 <= i && i <= j && j <= k && k < dim)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_no, ": indices must satisfy 0 <= i <= j <= k < d"));
    }
    b.AddAtAllPermutations(i, j, k, x);
  }
  return std::move(b).Build();
}

void WriteSpectrum(const Spectrum& s, std::ostream& out) {
  out << "spectrum d=" << s.dim << " k=" << s.size() << '\n';
  for (const EigenPair& p : s.pairs) {
    out << "lambda " << FormatDouble(p.value) << '\n';
    WriteVectorLine(p.vector, out);
  }
}

absl::StatusOr<Spectrum> ReadSpectrum(std::istream& in) {
  absl::StatusOr<std::map<std::string, long long>> header =
      ParseHeader(in, "spectrum");
  if (!header.ok()) return header.status();
  absl::StatusOr<long long> d = HeaderValue(*header, "d");
  absl::StatusOr<long long> k = HeaderValue(*header, "k");
  if (!d.ok()) return d.status();
  if (!k.ok()) return k.status();
  if (absl::Status s = CheckDim(*d); !s.ok()) return s;
  if (*k < 0 || *k > *d) {
    return absl::InvalidArgumentError("k must be in [0, d]");
  }
  Spectrum s{static_cast<int>(*d), {}};
  for (long long p = 0; p < *k; ++p) {
    std::string line;
    if (!std::getline(in, line)) {
      return absl::InvalidArgumentError("unexpected end of spectrum");
    }
    std::vector<absl::string_view> f =
        absl::StrSplit(line, absl::ByAnyChar(" \t"), absl::SkipEmpty());
    double value;
    if (f.size() != 2 || f[0] != "lambda" || !absl::SimpleAtod(f[1], &value)) {
      return absl::InvalidArgumentError(
          absl::StrCat("expected 'lambda <value>', got '", line, "'"));
    }
    absl::StatusOr<Vector> v = ReadVectorLine(in, s.dim);
    if (!v.ok()) return v.status();
    s.pairs.push_back({value, *std::move(v)});
  }
  return s;
}

void WriteSamples(int dim, const std::vector<Vector>& samples,
                  std::ostream& out) {
  out << "samples d=" << dim << " n=" << samples.size() << '\n';
  for (const Vector& x : samples) WriteVectorLine(x, out);
}

absl::StatusOr<std::vector<Vector>> ReadSamples(std::istream& in, int* dim) {
  absl::StatusOr<std::map<std::string, long long>> header =
      ParseHeader(in, "samples");
  if (!header.ok()) return header.status();
  absl::StatusOr<long long> d = HeaderValue(*header, "d");
  absl::StatusOr<long long> n = HeaderValue(*header, "n");
  if (!d.ok()) return d.status();
  if (!n.ok()) return n.status();
  if (absl::Status s = CheckDim(*d); !s.ok()) return s;
  if (*n < 0) return absl::InvalidArgumentError("n must be >= 0");
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(*n));
  for (long long i = 0; i < *n; ++i) {
    absl::StatusOr<Vector> v = ReadVectorLine(in, static_cast<int>(*d));
    if (!v.ok()) return v.status();
    out.push_back(*std::move(v));
  }
  if (dim != nullptr) *dim = static_cast<int>(*d);
  return out;
}

absl::StatusOr<ConfigMap> ParseConfig(std::istream& in) {
  ConfigMap out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view body = absl::StripAsciiWhitespace(line);
    if (body.empty() || body.front() == '#') continue;
    const size_t eq = body.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": expected key=value"));
    }
    std::string key(absl::StripAsciiWhitespace(body.substr(0, eq)));
    if (key.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": empty key"));
    }
    out[key] = std::string(absl::StripAsciiWhitespace(body.substr(eq + 1)));
  }
  return out;
}

absl::StatusOr<SymmetricTensor3> ReadTensorFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return ReadTensor(in);
}

absl::Status WriteTensorFile(const SymmetricTensor3& t,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) return absl::NotFoundError(absl::StrCat("cannot write ", path));
  WriteTensor(t, out);
  return out ? absl::OkStatus()
             : absl::InternalError(absl::StrCat("write failed: ", path));
}

absl::StatusOr<Spectrum> ReadSpectrumFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return ReadSpectrum(in);
}

absl::Status WriteSpectrumFile(const Spectrum& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) return absl::NotFoundError(absl::StrCat("cannot write ", path));
  WriteSpectrum(s, out);
  return out ? absl::OkStatus()
             : absl::InternalError(absl::StrCat("write failed: ", path));
}

absl::StatusOr<ConfigMap> ReadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return ParseConfig(in);
}

}  // namespace tpmkit
