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

#include "shannon/heatmap.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "shannon/error.h"

namespace shannon {
namespace {

// Shading endpoints: white to a dark blue.
constexpr int kLow[3] = {255, 255, 255};
constexpr int kHigh[3] = {8, 48, 107};

std::string background(double intensity) {
  int rgb[3];
  for (int c = 0; c < 3; ++c) {
    rgb[c] = static_cast<int>(std::lround(kLow[c] + (kHigh[c] - kLow[c]) * intensity));
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "rgb(%d,%d,%d)", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

double heat_intensity(double surprisal, double anchor) {
  if (!(anchor > 0.0) || !(surprisal > 0.0)) return 0.0;
  return std::min(surprisal / anchor, 1.0);
}

double default_anchor(const HeatmapSpec& spec, double percentile) {
  std::vector<double> all;
  for (const auto& scenario : spec.scenarios) {
    for (const auto& sentence : scenario.profile.per_sentence) {
      all.insert(all.end(), sentence.surprisals.begin(), sentence.surprisals.end());
    }
  }
  if (all.empty()) return 0.0;
  std::sort(all.begin(), all.end());
  const auto rank = static_cast<size_t>(
      std::ceil(percentile * static_cast<double>(all.size())));
  return all[std::clamp<size_t>(rank, 1, all.size()) - 1];
}

std::string html_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string render_heatmap(const HeatmapSpec& spec) {
  if (spec.scenarios.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "heatmap needs at least one scenario");
  }
  std::set<std::string> labels;
  for (const auto& s : spec.scenarios) {
    if (!labels.insert(s.label).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate scenario label '" + s.label + "'");
    }
  }
  const double anchor = spec.anchor.value_or(default_anchor(spec));
  const Document& doc = spec.document;
  const std::string_view text(doc.text);

  std::string html;
  html += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  html += "<title>Token information: " + html_escape(doc.id) + "</title>\n";
  html +=
      "<style>\n"
      "body{font-family:Georgia,serif;max-width:60em;margin:2em auto;color:#111}\n"
      ".scenario{margin:1.5em 0;padding:.5em;border:1px solid #ccc}\n"
      ".scenario h2{font-size:1em;margin:0 0 .5em 0}\n"
      ".text{white-space:pre-wrap;line-height:1.7}\n"
      ".t{border-radius:2px}\n"
      ".t.dark{color:#fff}\n"
      "table.legend{border-collapse:collapse;font-size:.9em}\n"
      "table.legend td,table.legend th{padding:.2em .8em;text-align:left}\n"
      "</style>\n</head>\n<body>\n";
  html += "<h1>" + html_escape(doc.id) + "</h1>\n";

  html += "<table class=\"legend\">\n<tr><th>scenario</th><th>total (nats)</th>"
          "<th>tokens</th></tr>\n";
  for (const auto& s : spec.scenarios) {
    html += "<tr><td>" + html_escape(s.label) + "</td><td>" +
            fixed(s.profile.total_info, 4) + "</td><td>" +
            std::to_string(s.profile.total_tokens) + "</td></tr>\n";
  }
  for (const auto& [name, value] : spec.metrics) {
    html += "<tr><td>" + html_escape(name) + "</td><td>" + fixed(value, 4) +
            "</td><td></td></tr>\n";
  }
  html += "</table>\n";
  html += "<p class=\"note\">Darker background = more information. Full shading at " +
          fixed(anchor, 4) + " nats. Tokens follow the tokenization of model " +
          html_escape(spec.model_id.empty() ? "(unspecified)" : spec.model_id) +
          ".</p>\n";

  for (const auto& s : spec.scenarios) {
    html += "<div class=\"scenario\">\n<h2>" + html_escape(s.label) + "</h2>\n";
    html += "<div class=\"text\">";
    const auto& sentences = s.profile.per_sentence;
    for (size_t i = 0; i < sentences.size(); ++i) {
      if (i > 0 && i < doc.sentences.size()) {
        const size_t gap_begin = doc.sentences[i - 1].end;
        html += html_escape(text.substr(gap_begin, doc.sentences[i].begin - gap_begin));
      } else if (i > 0) {
        html += " ";
      }
      for (size_t t = 0; t < sentences[i].tokens.size(); ++t) {
        const double surprisal = sentences[i].surprisals[t];
        const double intensity = heat_intensity(surprisal, anchor);
        html += "<span class=\"t";
        if (intensity > 0.55) html += " dark";
        html += "\" style=\"background:" + background(intensity) + "\" title=\"" +
                fixed(surprisal, 4) + " nats\">" + html_escape(sentences[i].tokens[t]) +
                "</span>";
      }
    }
    html += "</div>\n</div>\n";
  }
  html += "</body>\n</html>\n";
  return html;
}

}  // namespace shannon
