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

#ifndef SGC_METRICS_H_
#define SGC_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgc/dataio.h"
#include "sgc/decode.h"

namespace sgc {

// Counts n_ij of samples with true class i and predicted cluster j. Classes
// and clusters are indexed by their sorted label values.
struct Contingency {
  std::vector<std::vector<std::int64_t>> table;
  std::vector<std::int64_t> row_sums;
  std::vector<std::int64_t> col_sums;
  std::int64_t n = 0;

  static Contingency FromLabels(std::span<const int> truth, std::span<const int> pred);
  static Contingency FromTable(std::vector<std::vector<std::int64_t>> table);

  int num_classes() const { return static_cast<int>(row_sums.size()); }
  int num_clusters() const { return static_cast<int>(col_sums.size()); }
};

// ARI as an exact ratio of integers (not reduced past the gcd). The
// denominator is 0 exactly when both labelings are trivial, in which case
// the index is defined as 1.
struct RatioInt {
  __int128 num = 0;
  __int128 den = 0;
};
RatioInt AdjustedRandFraction(const Contingency& t);

double AdjustedRandIndex(const Contingency& t);       // needs n >= 2
double AdjustedMutualInformation(const Contingency& t);  // needs n >= 2

// Natural-log entropies and mutual information.
double EntropyOf(std::span<const std::int64_t> counts, std::int64_t n);
double MutualInformation(const Contingency& t);
// Exact E[MI] under the hypergeometric model with fixed margins.
double ExpectedMutualInformation(const Contingency& t);

struct HcvScores {
  double homogeneity = 1.0;
  double completeness = 1.0;
  double v_measure = 1.0;
};
HcvScores HomogeneityCompletenessV(const Contingency& t);

struct MetricsReport {
  double ari = 0.0;
  double ami = 0.0;
  double homogeneity = 0.0;
  double completeness = 0.0;
  double v_measure = 0.0;
};

// Unscaled metrics of one labeling. A single sample scores 1 everywhere.
MetricsReport ScoreLabels(std::span<const int> truth, std::span<const int> pred);

// Per-scene metrics averaged without weights over scenes, scaled by 100.
// Results are matched to scenes by position and must share their scene_id.
MetricsReport Evaluate(std::span<const Scene> scenes, std::span<const ClusterResult> results);

// {"ari": 57.14, ...} with two decimals per field.
std::string FormatReportJson(const MetricsReport& report);

}  // namespace sgc

#endif  // SGC_METRICS_H_
