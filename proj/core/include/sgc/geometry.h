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

#ifndef SGC_GEOMETRY_H_
#define SGC_GEOMETRY_H_

#include <array>

namespace sgc {

// Axis-aligned detection box in image pixels, (x, y) is the upper-left corner.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

struct ImagePoint {
  double x = 0.0;
  double y = 0.0;
};

struct GroundPoint {
  double gx = 0.0;
  double gy = 0.0;

  friend bool operator==(const GroundPoint&, const GroundPoint&) = default;
};

// Which point of the box is taken as the standing point. kImageConvention
// uses the bottom edge (y + h) of an image whose rows grow downward;
// kPaperLiteral keeps the top-edge row y of the original formulation.
enum class LowerEdgeMode { kImageConvention, kPaperLiteral };

// Planar projective map from one camera's image plane to the shared ground
// plane. Entries are row-major.
class Homography {
 public:
  Homography();  // identity
  explicit Homography(const std::array<double, 9>& row_major);

  static Homography Identity() { return Homography(); }

  double operator()(int row, int col) const { return m_[row * 3 + col]; }
  const std::array<double, 9>& row_major() const { return m_; }
  double Determinant() const;

  // Returns this * other, i.e. applying `other` first.
  Homography Compose(const Homography& other) const;

 private:
  std::array<double, 9> m_;
};

// Throws kInvalidArgument unless all fields are finite and w, h > 0.
void ValidateBBox(const BBox& b);

ImagePoint StandingPoint(const BBox& b,
                         LowerEdgeMode mode = LowerEdgeMode::kImageConvention);

// Dehomogenizes H * [p, 1]. Throws kDegenerateProjection when the projective
// scale is below 1e-12 in magnitude.
GroundPoint ProjectToGround(const Homography& h, const ImagePoint& p);

inline constexpr double kDegenerateScale = 1e-12;

}  // namespace sgc

#endif  // SGC_GEOMETRY_H_
