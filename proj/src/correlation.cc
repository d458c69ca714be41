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

#include "shannon/correlation.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>

#include "shannon/error.h"

namespace shannon {
namespace {

void check_series(const PairedSeries& series) {
  if (series.xs.size() != series.ys.size()) {
    throw Error(ErrorCode::kInvalidArgument, "series lengths differ");
  }
  for (size_t i = 0; i < series.xs.size(); ++i) {
    if (std::isnan(series.xs[i]) || std::isnan(series.ys[i])) {
      throw Error(ErrorCode::kInvalidArgument, "series contains NaN");
    }
  }
  if (series.xs.size() < 2) {
    throw Error(ErrorCode::kUndefinedCorrelation, "fewer than two points");
  }
}

// Pairs tied within runs of equal values of an already sorted sequence.
template <typename Equal>
int64_t tied_pairs(size_t n, Equal equal) {
  int64_t ties = 0;
  size_t run = 1;
  for (size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      ties += static_cast<int64_t>(run) * static_cast<int64_t>(run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

// Sorts `v` ascending and returns the number of inversions (strict).
int64_t merge_count(std::vector<double>& v, std::vector<double>& buf,
                    size_t lo, size_t hi) {
  if (hi - lo < 2) return 0;
  const size_t mid = lo + (hi - lo) / 2;
  int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  size_t i = lo;
  size_t j = mid;
  size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return swaps;
}

}  // namespace

double kendall_tau_b(const PairedSeries& series) {
  check_series(series);
  const size_t n = series.xs.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (series.xs[a] != series.xs[b]) return series.xs[a] < series.xs[b];
    return series.ys[a] < series.ys[b];
  });
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  for (size_t i = 0; i < n; ++i) {
    xs[i] = series.xs[order[i]];
    ys[i] = series.ys[order[i]];
  }
  const int64_t tied_x = tied_pairs(n, [&](size_t a, size_t b) { return xs[a] == xs[b]; });
  const int64_t tied_xy = tied_pairs(
      n, [&](size_t a, size_t b) { return xs[a] == xs[b] && ys[a] == ys[b]; });
  std::vector<double> buf(n);
  const int64_t swaps = merge_count(ys, buf, 0, n);
  const int64_t tied_y = tied_pairs(n, [&](size_t a, size_t b) { return ys[a] == ys[b]; });

  const int64_t pairs = static_cast<int64_t>(n) * static_cast<int64_t>(n - 1) / 2;
  if (tied_x == pairs || tied_y == pairs) {
    throw Error(ErrorCode::kUndefinedCorrelation, "one side is constant");
  }
  const int64_t s = pairs - tied_x - tied_y + tied_xy - 2 * swaps;
  return static_cast<double>(s) /
         std::sqrt(static_cast<double>(pairs - tied_x) *
                   static_cast<double>(pairs - tied_y));
}

std::vector<double> mid_ranks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i+1 .. j share their mean rank.
    const double rank = static_cast<double>(i + 1 + j) / 2.0;
    for (size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

double pearson_r(const PairedSeries& series) {
  check_series(series);
  const size_t n = series.xs.size();
  const double mx = std::accumulate(series.xs.begin(), series.xs.end(), 0.0) /
                    static_cast<double>(n);
  const double my = std::accumulate(series.ys.begin(), series.ys.end(), 0.0) /
                    static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = series.xs[i] - mx;
    const double dy = series.ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kUndefinedCorrelation, "one side has zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman_rho(const PairedSeries& series) {
  check_series(series);
  return pearson_r({mid_ranks(series.xs), mid_ranks(series.ys)});
}

CorrelationMethod parse_correlation_method(std::string_view name) {
  if (name == "kendall-tau-b" || name == "kendall" || name == "kendall_tau_b") {
    return CorrelationMethod::kKendallTauB;
  }
  if (name == "spearman") return CorrelationMethod::kSpearman;
  if (name == "pearson") return CorrelationMethod::kPearson;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown correlation method '" + std::string(name) + "'");
}

std::string_view correlation_method_name(CorrelationMethod method) {
  switch (method) {
    case CorrelationMethod::kKendallTauB: return "kendall-tau-b";
    case CorrelationMethod::kSpearman: return "spearman";
    case CorrelationMethod::kPearson: return "pearson";
  }
  return "unknown";
}

double correlate(CorrelationMethod method, const PairedSeries& series) {
  switch (method) {
    case CorrelationMethod::kKendallTauB: return kendall_tau_b(series);
    case CorrelationMethod::kSpearman: return spearman_rho(series);
    case CorrelationMethod::kPearson: return pearson_r(series);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown correlation method");
}

PairedSeries SystemAggregate::series() const {
  PairedSeries out;
  for (const auto& [system, value] : metric) {
    out.xs.push_back(value);
    out.ys.push_back(human.at(system));
  }
  return out;
}

SystemAggregate system_level(const CellValues& metric, const CellRatings& ratings) {
  std::set<std::string> systems;
  std::set<std::string> docs;
  for (const auto& [key, _] : metric) {
    systems.insert(key.system_id);
    docs.insert(key.doc_id);
  }
  for (const auto& [key, _] : ratings) {
    systems.insert(key.system_id);
    docs.insert(key.doc_id);
  }
  std::vector<std::string> missing;
  SystemAggregate out;
  for (const auto& system : systems) {
    double metric_sum = 0.0;
    double human_sum = 0.0;
    for (const auto& doc : docs) {
      const CellKey key{system, doc};
      auto m = metric.find(key);
      auto r = ratings.find(key);
      if (m == metric.end() || r == ratings.end() || r->second.empty()) {
        missing.push_back("(" + system + ", " + doc + ")");
        continue;
      }
      metric_sum += m->second;
      human_sum += std::accumulate(r->second.begin(), r->second.end(), 0.0) /
                   static_cast<double>(r->second.size());
    }
    out.metric[system] = metric_sum / static_cast<double>(docs.size());
    out.human[system] = human_sum / static_cast<double>(docs.size());
  }
  if (!missing.empty()) {
    std::string list;
    for (size_t i = 0; i < missing.size() && i < 20; ++i) {
      if (i > 0) list += ", ";
      list += missing[i];
    }
    if (missing.size() > 20) list += ", ...";
    throw Error(ErrorCode::kIncompleteGrid,
                std::to_string(missing.size()) + " missing cell(s): " + list);
  }
  return out;
}

}  // namespace shannon
