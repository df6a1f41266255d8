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

// Small dense-vector helpers shared by every module.

#ifndef TPMKIT_VECTOR_OPS_H_
#define TPMKIT_VECTOR_OPS_H_

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace tpmkit {

using Vector = std::vector<double>;

inline double Dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double Norm2(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

inline double NormInf(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

inline void Scale(std::span<double> a, double s) {
  for (double& x : a) x *= s;
}

// a += s * b
inline void Axpy(double s, std::span<const double> b, std::span<double> a) {
  assert(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

inline double Distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline Vector BasisVector(int d, int i) {
  Vector e(d, 0.0);
  e[i] = 1.0;
  return e;
}

}  // namespace tpmkit

#endif  // TPMKIT_VECTOR_OPS_H_
