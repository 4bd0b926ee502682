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

#include "sgc/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "sgc/errors.h"

namespace sgc {

Contingency Contingency::FromLabels(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) {
    throw Error(ErrorCode::kLengthMismatch, "labelings differ in length");
  }
  std::map<int, int> rows, cols;
  for (int t : truth) rows.emplace(t, 0);
  for (int p : pred) cols.emplace(p, 0);
  int k = 0;
  for (auto& [label, index] : rows) index = k++;
  k = 0;
  for (auto& [label, index] : cols) index = k++;

  std::vector<std::vector<std::int64_t>> table(
      rows.size(), std::vector<std::int64_t>(cols.size(), 0));
  for (std::size_t s = 0; s < truth.size(); ++s) {
    ++table[rows[truth[s]]][cols[pred[s]]];
  }
  return FromTable(std::move(table));
}

Contingency Contingency::FromTable(std::vector<std::vector<std::int64_t>> table) {
  Contingency t;
  t.table = std::move(table);
  t.row_sums.assign(t.table.size(), 0);
  t.col_sums.assign(t.table.empty() ? 0 : t.table[0].size(), 0);
  for (std::size_t i = 0; i < t.table.size(); ++i) {
    if (t.table[i].size() != t.col_sums.size()) {
      throw Error(ErrorCode::kInvalidArgument, "ragged contingency table");
    }
    for (std::size_t j = 0; j < t.table[i].size(); ++j) {
      const std::int64_t c = t.table[i][j];
      if (c < 0) throw Error(ErrorCode::kInvalidArgument, "negative count");
      t.row_sums[i] += c;
      t.col_sums[j] += c;
      t.n += c;
    }
  }
  return t;
}

namespace {

__int128 Pairs(std::int64_t x) { return static_cast<__int128>(x) * (x - 1) / 2; }

__int128 Gcd(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

void RequirePairs(const Contingency& t) {
  if (t.n < 2) throw Error(ErrorCode::kTooFewSamples, "need at least two samples");
}

}  // namespace

RatioInt AdjustedRandFraction(const Contingency& t) {
  RequirePairs(t);
  __int128 index = 0, sum_a = 0, sum_b = 0;
  for (const auto& row : t.table) {
    for (std::int64_t c : row) index += Pairs(c);
  }
  for (std::int64_t a : t.row_sums) sum_a += Pairs(a);
  for (std::int64_t b : t.col_sums) sum_b += Pairs(b);
  const __int128 total = Pairs(t.n);
  // Multiply (Index - E) / (Max - E) through by 2 * C(n, 2).
  RatioInt r;
  r.num = 2 * total * index - 2 * sum_a * sum_b;
  r.den = total * (sum_a + sum_b) - 2 * sum_a * sum_b;
  const __int128 g = Gcd(r.num, r.den);
  if (g > 1) {
    r.num /= g;
    r.den /= g;
  }
  if (r.den < 0) {
    r.num = -r.num;
    r.den = -r.den;
  }
  return r;
}

double AdjustedRandIndex(const Contingency& t) {
  const RatioInt r = AdjustedRandFraction(t);
  if (r.den == 0) return 1.0;
  return static_cast<double>(static_cast<long double>(r.num) /
                             static_cast<long double>(r.den));
}

double EntropyOf(std::span<const std::int64_t> counts, std::int64_t n) {
  double h = 0.0;
  for (std::int64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

double MutualInformation(const Contingency& t) {
  const double n = static_cast<double>(t.n);
  double mi = 0.0;
  for (std::size_t i = 0; i < t.table.size(); ++i) {
    for (std::size_t j = 0; j < t.table[i].size(); ++j) {
      const std::int64_t c = t.table[i][j];
      if (c == 0) continue;
      const double pij = static_cast<double>(c) / n;
      mi += pij * std::log(n * static_cast<double>(c) /
                           (static_cast<double>(t.row_sums[i]) *
                            static_cast<double>(t.col_sums[j])));
    }
  }
  return std::max(mi, 0.0);
}

double ExpectedMutualInformation(const Contingency& t) {
  const std::int64_t n = t.n;
  const double lg_n = std::lgamma(static_cast<double>(n) + 1.0);
  auto lf = [](std::int64_t x) { return std::lgamma(static_cast<double>(x) + 1.0); };
  double emi = 0.0;
  for (std::int64_t a : t.row_sums) {
    for (std::int64_t b : t.col_sums) {
      const std::int64_t lo = std::max<std::int64_t>(1, a + b - n);
      const std::int64_t hi = std::min(a, b);
      const double base = lf(a) + lf(b) + lf(n - a) + lf(n - b) - lg_n;
      for (std::int64_t nij = lo; nij <= hi; ++nij) {
        const double log_p =
            base - lf(nij) - lf(a - nij) - lf(b - nij) - lf(n - a - b + nij);
        const double term = static_cast<double>(nij) / static_cast<double>(n) *
                            std::log(static_cast<double>(n) * static_cast<double>(nij) /
                                     (static_cast<double>(a) * static_cast<double>(b)));
        emi += term * std::exp(log_p);
      }
    }
  }
  return emi;
}

double AdjustedMutualInformation(const Contingency& t) {
  RequirePairs(t);
  const double mi = MutualInformation(t);
  const double emi = ExpectedMutualInformation(t);
  const double h_true = EntropyOf(t.row_sums, t.n);
  const double h_pred = EntropyOf(t.col_sums, t.n);
  const double mean_h = 0.5 * (h_true + h_pred);
  const double denom = mean_h - emi;
  // Margins that pin MI to its only attainable value (e.g. both sides all
  // singletons or both a single cluster) leave a 0/0; treat it as agreement.
  if (std::abs(denom) <= 1e-12 * std::max(1.0, mean_h)) return 1.0;
  return (mi - emi) / denom;
}

namespace {

// H(true | pred) when by_column, else H(pred | true). Every term of a
// perfect labeling is log(1) = 0, so the result is exactly 0 there.
double ConditionalEntropy(const Contingency& t, bool by_column) {
  const double n = static_cast<double>(t.n);
  double h = 0.0;
  for (std::size_t i = 0; i < t.table.size(); ++i) {
    for (std::size_t j = 0; j < t.table[i].size(); ++j) {
      const std::int64_t c = t.table[i][j];
      if (c == 0) continue;
      const double given = static_cast<double>(by_column ? t.col_sums[j] : t.row_sums[i]);
      h -= static_cast<double>(c) / n * std::log(static_cast<double>(c) / given);
    }
  }
  return std::max(h, 0.0);
}

}  // namespace

HcvScores HomogeneityCompletenessV(const Contingency& t) {
  HcvScores s;
  if (t.n == 0) return s;
  const double h_true = EntropyOf(t.row_sums, t.n);
  const double h_pred = EntropyOf(t.col_sums, t.n);
  s.homogeneity =
      h_true == 0.0 ? 1.0 : std::clamp(1.0 - ConditionalEntropy(t, true) / h_true, 0.0, 1.0);
  s.completeness =
      h_pred == 0.0 ? 1.0 : std::clamp(1.0 - ConditionalEntropy(t, false) / h_pred, 0.0, 1.0);
  const double sum = s.homogeneity + s.completeness;
  s.v_measure = sum == 0.0 ? 0.0 : 2.0 * s.homogeneity * s.completeness / sum;
  return s;
}

MetricsReport ScoreLabels(std::span<const int> truth, std::span<const int> pred) {
  const Contingency t = Contingency::FromLabels(truth, pred);
  if (t.n == 0) throw Error(ErrorCode::kTooFewSamples, "empty labeling");
  MetricsReport r;
  if (t.n < 2) {
    r = {1.0, 1.0, 1.0, 1.0, 1.0};
    return r;
  }
  r.ari = AdjustedRandIndex(t);
  r.ami = AdjustedMutualInformation(t);
  const HcvScores hcv = HomogeneityCompletenessV(t);
  r.homogeneity = hcv.homogeneity;
  r.completeness = hcv.completeness;
  r.v_measure = hcv.v_measure;
  return r;
}

MetricsReport Evaluate(std::span<const Scene> scenes, std::span<const ClusterResult> results) {
  if (scenes.empty() || scenes.size() != results.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "need one cluster result per scene and at least one scene");
  }
  MetricsReport mean;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    const Scene& scene = scenes[s];
    const ClusterResult& result = results[s];
    if (scene.scene_id != result.scene_id) {
      throw Error(ErrorCode::kLengthMismatch,
                  "result '" + result.scene_id + "' does not match scene '" +
                      scene.scene_id + "'");
    }
    if (result.labels.size() != scene.detections.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "scene '" + scene.scene_id + "' label count differs");
    }
    std::vector<int> truth;
    truth.reserve(scene.detections.size());
    for (const Detection& d : scene.detections) {
      if (!d.identity) {
        throw Error(ErrorCode::kMissingLabel,
                    "scene '" + scene.scene_id + "' has unlabeled detections");
      }
      truth.push_back(*d.identity);
    }
    const MetricsReport r = ScoreLabels(truth, result.labels);
    mean.ari += r.ari;
    mean.ami += r.ami;
    mean.homogeneity += r.homogeneity;
    mean.completeness += r.completeness;
    mean.v_measure += r.v_measure;
  }
  const double scale = 100.0 / static_cast<double>(scenes.size());
  mean.ari *= scale;
  mean.ami *= scale;
  mean.homogeneity *= scale;
  mean.completeness *= scale;
  mean.v_measure *= scale;
  return mean;
}

std::string FormatReportJson(const MetricsReport& report) {
  auto fmt = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    std::string s(buf);
    return s == "-0.00" ? std::string("0.00") : s;
  };
  return "{\"ari\": " + fmt(report.ari) + ", \"ami\": " + fmt(report.ami) +
         ", \"homogeneity\": " + fmt(report.homogeneity) +
         ", \"completeness\": " + fmt(report.completeness) +
         ", \"v_measure\": " + fmt(report.v_measure) + "}";
}

}  // namespace sgc
