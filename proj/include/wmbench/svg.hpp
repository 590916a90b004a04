// Copyright 2026 The wmbench Authors
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
// -----------------------------------------------------------------------------

// Minimal SVG rendering of ROC curves on the unit square.

#ifndef WMBENCH_SVG_HPP_
#define WMBENCH_SVG_HPP_

#include <string>
#include <string_view>

#include "wmbench/csv.hpp"
#include "wmbench/metrics.hpp"

namespace wmbench {

inline std::string RocSvg(const RocCurve& curve, std::string_view title) {
  constexpr double kSize = 320.0, kPad = 40.0;
  auto px = [&](double v) { return FormatDouble(kPad + v * kSize); };
  auto py = [&](double v) { return FormatDouble(kPad + (1.0 - v) * kSize); };
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\">\n";
  s += "<rect x=\"40\" y=\"40\" width=\"320\" height=\"320\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + px(0) + "\" y1=\"" + py(0) + "\" x2=\"" + px(1) + "\" y2=\"" + py(1) +
       "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n";
  s += "<polyline fill=\"none\" stroke=\"blue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    if (i) s += ' ';
    s += px(curve.points[i].fpr) + "," + py(curve.points[i].tpr);
  }
  s += "\"/>\n";
  std::string label;
  for (char c : title) {
    if (c == '<') label += "&lt;";
    else if (c == '>') label += "&gt;";
    else if (c == '&') label += "&amp;";
    else label += c;
  }
  s += "<text x=\"40\" y=\"25\" font-size=\"14\">" + label + " (AUROC " +
       FormatDouble(curve.auroc) + ")</text>\n";
  s += "<text x=\"170\" y=\"390\" font-size=\"12\">FPR</text>\n";
  s += "<text x=\"5\" y=\"200\" font-size=\"12\">TPR</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace wmbench

#endif  // WMBENCH_SVG_HPP_
