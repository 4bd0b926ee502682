// Copyright 2026 The SGC Authors
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

#include "sgc/geometry.h"

#include <cmath>
#include <string>

#include "sgc/errors.h"

namespace sgc {

Homography::Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& row_major)
    : m_(row_major) {
  for (double v : m_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, "homography entry is not finite");
    }
  }
  if (Determinant() == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "homography is singular");
  }
}

double Homography::Determinant() const {
  const auto& a = m_;
  return a[0] * (a[4] * a[8] - a[5] * a[7]) -
         a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Homography Homography::Compose(const Homography& other) const {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) sum += (*this)(r, k) * other(k, c);
      out[r * 3 + c] = sum;
    }
  }
  return Homography(out);
}

void ValidateBBox(const BBox& b) {
  if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(b.w) ||
      !std::isfinite(b.h)) {
    throw Error(ErrorCode::kNonFinite, "bounding box has non-finite fields");
  }
  if (b.w <= 0.0 || b.h <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "bounding box needs positive width and height");
  }
}

ImagePoint StandingPoint(const BBox& b, LowerEdgeMode mode) {
  ValidateBBox(b);
  const double cx = b.x + b.w / 2.0;
  switch (mode) {
    case LowerEdgeMode::kPaperLiteral:
      return {cx, b.y};
    case LowerEdgeMode::kImageConvention:
      break;
  }
  return {cx, b.y + b.h};
}

GroundPoint ProjectToGround(const Homography& h, const ImagePoint& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw Error(ErrorCode::kNonFinite, "image point is not finite");
  }
  const double gx = h(0, 0) * p.x + h(0, 1) * p.y + h(0, 2);
  const double gy = h(1, 0) * p.x + h(1, 1) * p.y + h(1, 2);
  const double s = h(2, 0) * p.x + h(2, 1) * p.y + h(2, 2);
  if (std::abs(s) < kDegenerateScale) {
    throw Error(ErrorCode::kDegenerateProjection,
                "point maps to the line at infinity");
  }
  return {gx / s, gy / s};
}

}  // namespace sgc
