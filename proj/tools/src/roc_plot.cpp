#include <cmath>

#include <fmt/format.h>

#include "stresscast/cli/commands.hpp"

namespace stresscast::cli {

std::string roc_csv(const metrics::MetricsReport& report) {
  std::string out = "fpr,tpr\n";
  for (const auto& p : report.roc_points) out += fmt::format("{},{}\n", p.fpr, p.tpr);
  return out;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string roc_svg(const metrics::MetricsReport& report, const std::string& title) {
  constexpr double size = 320.0, left = 60.0, top = 50.0;
  auto x = [&](double fpr) { return left + fpr * size; };
  auto y = [&](double tpr) { return top + (1.0 - tpr) * size; };

  std::string s = fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)"
      "\n",
      left + size + 30.0, top + size + 60.0);
  s += fmt::format(R"(<text x="{}" y="20" text-anchor="middle">{}</text>)"
                   "\n",
                   left + size / 2, escape(title));
  const std::string auc = std::isnan(report.auc) ? "n/a" : fmt::format("{:.4f}", report.auc);
  s += fmt::format(R"(<text x="{}" y="38" text-anchor="middle">AUC {}</text>)"
                   "\n",
                   left + size / 2, auc);
  s += fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)"
                   "\n",
                   left, top, size, size);
  s += fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999" stroke-dasharray="4 4"/>)"
                   "\n",
                   x(0), y(0), x(1), y(1));
  for (int i = 0; i <= 4; ++i) {
    const double v = i / 4.0;
    s += fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{}</text>)"
                     "\n",
                     x(v), top + size + 16, v);
    s += fmt::format(R"(<text x="{}" y="{}" text-anchor="end">{}</text>)"
                     "\n",
                     left - 6, y(v) + 4, v);
  }
  s += fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">false positive rate</text>)"
                   "\n",
                   left + size / 2, top + size + 40);
  s += fmt::format(R"svg(<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">true positive rate</text>)svg"
                   "\n",
                   top + size / 2, top + size / 2);
  std::string points;
  for (const auto& p : report.roc_points) points += fmt::format("{:.3f},{:.3f} ", x(p.fpr), y(p.tpr));
  if (!points.empty()) points.pop_back();
  s += fmt::format(R"(<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="2"/>)"
                   "\n",
                   points);
  s += "</svg>\n";
  return s;
}

}  // namespace stresscast::cli
