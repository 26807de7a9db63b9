// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>

#include "fdris/harness.hpp"

namespace fdris {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::string x_label(SweepParameter p) {
  switch (p) {
    case SweepParameter::kRisElements:
      return "RIS elements N";
    case SweepParameter::kEta:
      return "SI suppression level eta";
    case SweepParameter::kPowerBsMax:
      return "BS power budget (dBm)";
    case SweepParameter::kDuplex:
      return "duplex (0 full, 1 half)";
  }
  return "";
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string render_svg(const std::vector<AggregateRow>& rows, SweepParameter parameter, const std::string& title) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 60;
  const double pw = W - L - R, ph = H - T - B;

  std::vector<std::string> order;
  std::map<std::string, std::vector<const AggregateRow*>> series;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  bool positive = true;
  for (const AggregateRow& a : rows) {
    if (!series.count(a.variant)) order.push_back(a.variant);
    series[a.variant].push_back(&a);
    if (a.count == 0) continue;
    xmin = std::min(xmin, a.value);
    xmax = std::max(xmax, a.value);
    ymin = std::min(ymin, a.mean_sum - a.se_sum);
    ymax = std::max(ymax, a.mean_sum + a.se_sum);
    positive = positive && a.value > 0.0;
  }
  const bool logx = parameter == SweepParameter::kEta && positive && xmax > xmin;
  const auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  double x0 = tx(xmin), x1 = tx(xmax);
  if (x1 <= x0) x0 -= 0.5, x1 += 0.5;
  if (ymax <= ymin) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * pw; };
  const auto py = [&](double v) { return T + (ymax - v) / (ymax - ymin) * ph; };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(W) + "\" height=\"" + fmt(H) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    s += "<text x=\"" + fmt(L + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
         "</text>\n";
  s += "<rect x=\"" + fmt(L) + "\" y=\"" + fmt(T) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  // ticks
  for (int k = 0; k <= 5; ++k) {
    const double yv = ymin + (ymax - ymin) * k / 5.0;
    s += "<line x1=\"" + fmt(L - 4) + "\" y1=\"" + fmt(py(yv)) + "\" x2=\"" + fmt(L) + "\" y2=\"" + fmt(py(yv)) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt(L - 7) + "\" y=\"" + fmt(py(yv) + 4) + "\" text-anchor=\"end\">" + tick_label(yv) +
         "</text>\n";
  }
  std::vector<double> xs;
  for (const AggregateRow& a : rows)
    if (std::find(xs.begin(), xs.end(), a.value) == xs.end()) xs.push_back(a.value);
  for (double xv : xs) {
    if (logx && xv <= 0.0) continue;
    s += "<line x1=\"" + fmt(px(xv)) + "\" y1=\"" + fmt(T + ph) + "\" x2=\"" + fmt(px(xv)) + "\" y2=\"" +
         fmt(T + ph + 4) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(T + ph + 18) + "\" text-anchor=\"middle\">" + tick_label(xv) +
         "</text>\n";
  }
  s += "<text x=\"" + fmt(L + pw / 2) + "\" y=\"" + fmt(H - 14) + "\" text-anchor=\"middle\">" +
       escape(x_label(parameter)) + "</text>\n";
  s += "<text transform=\"translate(18," + fmt(T + ph / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">sum rate (bit/s/Hz)</text>\n";

  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::string colour = kPalette[k % std::size(kPalette)];
    auto pts = series[order[k]];
    std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->value < b->value; });
    std::string path;
    std::string marks;
    for (const AggregateRow* a : pts) {
      if (a->count == 0 || (logx && a->value <= 0.0)) continue;
      const double x = px(a->value), y = py(a->mean_sum);
      path += (path.empty() ? "" : " ") + fmt(x) + "," + fmt(y);
      marks += "<circle cx=\"" + fmt(x) + "\" cy=\"" + fmt(y) + "\" r=\"3\" fill=\"" + colour + "\"/>\n";
      if (a->se_sum > 0.0)
        marks += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(py(a->mean_sum - a->se_sum)) + "\" x2=\"" + fmt(x) +
                 "\" y2=\"" + fmt(py(a->mean_sum + a->se_sum)) + "\" stroke=\"" + colour + "\"/>\n";
    }
    s += "<g class=\"series\" data-variant=\"" + escape(order[k]) + "\">\n";
    s += "<polyline fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\" points=\"" + path + "\"/>\n";
    s += marks + "</g>\n";
    const double ly = T + 14 + 18.0 * static_cast<double>(k);
    s += "<line x1=\"" + fmt(L + pw + 12) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(L + pw + 32) + "\" y2=\"" +
         fmt(ly) + "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt(L + pw + 38) + "\" y=\"" + fmt(ly + 4) + "\">" + escape(order[k]) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace fdris
