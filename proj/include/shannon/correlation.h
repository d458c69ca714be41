// Copyright 2026 The shannon-eval Authors.
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

#ifndef SHANNON_CORRELATION_H_
#define SHANNON_CORRELATION_H_

#include <compare>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shannon {

struct PairedSeries {
  std::vector<double> xs;
  std::vector<double> ys;
};

// All three throw InvalidArgument on length mismatch or NaN, and
// UndefinedCorrelation when n < 2 or either side has no variation.

// (C - D) / sqrt((n0 - n1)(n0 - n2)), computed with Knight's merge-sort
// method in O(n log n).
double kendall_tau_b(const PairedSeries& series);

// Pearson correlation of mid-ranks.
double spearman_rho(const PairedSeries& series);

double pearson_r(const PairedSeries& series);

// 1-based ranks; tied values share the average of their positions.
std::vector<double> mid_ranks(std::span<const double> values);

enum class CorrelationMethod { kKendallTauB, kSpearman, kPearson };

// Accepts "kendall-tau-b" (or "kendall"), "spearman", "pearson".
CorrelationMethod parse_correlation_method(std::string_view name);
std::string_view correlation_method_name(CorrelationMethod method);
double correlate(CorrelationMethod method, const PairedSeries& series);

struct CellKey {
  std::string system_id;
  std::string doc_id;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

using CellValues = std::map<CellKey, double>;
using CellRatings = std::map<CellKey, std::vector<double>>;

struct SystemAggregate {
  std::map<std::string, double> metric;  // system -> mean metric value
  std::map<std::string, double> human;   // system -> mean rating

  // Paired by system id in sorted order.
  PairedSeries series() const;
};

// Per-system means over the system x document grid spanned by both inputs.
// Annotator lists are averaged per summary first. Throws IncompleteGrid
// naming the missing cells.
SystemAggregate system_level(const CellValues& metric, const CellRatings& ratings);

}  // namespace shannon

#endif  // SHANNON_CORRELATION_H_
