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

#ifndef SHANNON_HEATMAP_H_
#define SHANNON_HEATMAP_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shannon/info_metrics.h"
#include "shannon/text.h"

namespace shannon {

struct HeatmapScenario {
  std::string label;
  InfoProfile profile;
};

struct HeatmapSpec {
  Document document;
  std::vector<HeatmapScenario> scenarios;  // labels unique
  // Surprisal (nats) at which shading saturates; defaults to the 99th
  // percentile (nearest rank) over every token of every scenario.
  std::optional<double> anchor;
  std::string model_id;
  // Extra legend lines, e.g. {"shannon_score", 0.31}.
  std::map<std::string, double> metrics;
};

// min(surprisal / anchor, 1), 0 for a non-positive anchor.
double heat_intensity(double surprisal, double anchor);

// Nearest-rank percentile over every token surprisal in the spec.
double default_anchor(const HeatmapSpec& spec, double percentile = 0.99);

std::string html_escape(std::string_view text);

// Self-contained HTML page: one row per scenario, each document token
// shaded from white (0 nats) to dark blue (>= anchor). Deterministic.
// Throws InvalidArgument on an empty spec or duplicate labels.
std::string render_heatmap(const HeatmapSpec& spec);

}  // namespace shannon

#endif  // SHANNON_HEATMAP_H_
