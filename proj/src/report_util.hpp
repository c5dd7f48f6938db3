// Copyright 2026 The cotattr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "cotattr/errors.hpp"

namespace cotattr::report {

// Fixed-format number rendering so repeated runs emit identical bytes.
inline std::string num(double v, int precision = 10) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
  return out;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("failed writing " + path.string());
}

// Minimal SVG document builder.
class Svg {
 public:
  Svg(double width, double height) : width_(width), height_(height) {}

  void rect(double x, double y, double w, double h, std::string_view fill,
            std::string_view stroke = "none") {
    body_ += "<rect x=\"" + num(x, 6) + "\" y=\"" + num(y, 6) + "\" width=\"" + num(w, 6) +
             "\" height=\"" + num(h, 6) + "\" fill=\"" + std::string(fill) + "\" stroke=\"" +
             std::string(stroke) + "\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, std::string_view stroke,
            double width = 1.0) {
    body_ += "<line x1=\"" + num(x1, 6) + "\" y1=\"" + num(y1, 6) + "\" x2=\"" + num(x2, 6) +
             "\" y2=\"" + num(y2, 6) + "\" stroke=\"" + std::string(stroke) +
             "\" stroke-width=\"" + num(width, 4) + "\"/>\n";
  }
  void circle(double cx, double cy, double r, std::string_view fill) {
    body_ += "<circle cx=\"" + num(cx, 6) + "\" cy=\"" + num(cy, 6) + "\" r=\"" + num(r, 4) +
             "\" fill=\"" + std::string(fill) + "\"/>\n";
  }
  void text(double x, double y, std::string_view s, std::string_view anchor = "start",
            double size = 11) {
    body_ += "<text x=\"" + num(x, 6) + "\" y=\"" + num(y, 6) + "\" font-size=\"" +
             num(size, 4) + "\" font-family=\"sans-serif\" text-anchor=\"" +
             std::string(anchor) + "\">" + xml_escape(s) + "</text>\n";
  }

  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_, 6) +
           "\" height=\"" + num(height_, 6) + "\" viewBox=\"0 0 " + num(width_, 6) + " " +
           num(height_, 6) + "\">\n" + "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           body_ + "</svg>\n";
  }

 private:
  double width_;
  double height_;
  std::string body_;
};

// Blue ramp for values in [0, 1]; out-of-range values are clamped.
inline std::string heat_color(double v) {
  if (v < 0.0) v = 0.0;
  if (v > 1.0) v = 1.0;
  const int r = static_cast<int>(247 - v * (247 - 8));
  const int g = static_cast<int>(251 - v * (251 - 48));
  const int b = static_cast<int>(255 - v * (255 - 107));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

inline const char* palette(std::size_t i) {
  static const char* kColors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                  "#8172b3", "#937860", "#da8bc3", "#8c8c8c"};
  return kColors[i % 8];
}

}  // namespace cotattr::report
