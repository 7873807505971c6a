#include "tcda/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <set>
#include <tuple>

#include "tcda/error.hpp"
#include "tcda/store.hpp"

namespace tcda {
namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::map<std::string, std::vector<ReportRow>> report_tables(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw Error(ErrorCode::invalid_argument, "no result rows to report");
  using Key = std::tuple<std::string, int, GraphKind, Metric, std::string, std::string>;
  struct Acc {
    double sum = 0.0;
    int cells = 0;
    int count = 0;
    int failures = 0;
  };
  std::map<Key, Acc> acc;
  for (const auto& r : rows) {
    Acc& a = acc[{r.violation, r.level, r.graph, r.metric, r.method, r.hp}];
    a.count += r.count;
    a.failures += r.failures;
    if (!std::isnan(r.value)) {
      a.sum += r.value;
      a.cells += 1;
    }
  }
  std::map<std::string, std::vector<ReportRow>> out;
  for (const auto& [k, a] : acc) {
    ReportRow rr;
    auto& r = rr.row;
    std::tie(r.violation, r.level, r.graph, r.metric, r.method, r.hp) = k;
    r.regime_id = "all";
    r.value = a.cells > 0 ? a.sum / a.cells : std::numeric_limits<double>::quiet_NaN();
    r.count = a.count;
    r.failures = a.failures;
    out[r.violation].push_back(rr);
  }
  // Competition ranking inside each (level, graph, metric) group; rows of a
  // group are contiguous because of the key order above.
  for (auto& [violation, table] : out) {
    std::size_t b = 0;
    while (b < table.size()) {
      std::size_t e = b;
      auto same = [&](const ResultRow& x, const ResultRow& y) {
        return x.level == y.level && x.graph == y.graph && x.metric == y.metric;
      };
      while (e < table.size() && same(table[e].row, table[b].row)) ++e;
      for (std::size_t i = b; i < e; ++i) {
        const auto& ri = table[i].row;
        if (std::isnan(ri.value)) continue;
        int better = 0;
        for (std::size_t j = b; j < e; ++j) {
          const auto& rj = table[j].row;
          if (std::isnan(rj.value)) continue;
          const bool lower = lower_is_better(ri.metric);
          if (lower ? rj.value < ri.value : rj.value > ri.value) ++better;
        }
        table[i].rank = better + 1;
      }
      b = e;
    }
  }
  return out;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::vector<ResultRow> plain;
  for (const auto& r : rows) plain.push_back(r.row);
  const std::string body = results_csv(plain);
  // Append the rank column line by line.
  std::string out;
  std::size_t pos = 0, line = 0;
  while (pos < body.size()) {
    const auto nl = body.find('\n', pos);
    out += body.substr(pos, nl - pos);
    out += line == 0 ? ",rank" : "," + (rows[line - 1].rank > 0 ? std::to_string(rows[line - 1].rank) : "");
    out += "\n";
    pos = nl + 1;
    ++line;
  }
  return out;
}

std::vector<Curve> report_curves(const std::vector<ReportRow>& rows, GraphKind graph, Metric metric) {
  std::map<std::string, Curve> curves;
  for (const auto& rr : rows) {
    const auto& r = rr.row;
    if (r.graph != graph || r.metric != metric || std::isnan(r.value)) continue;
    Curve& c = curves[r.method + "/" + r.hp];
    c.label = r.method + "/" + r.hp;
    c.points.emplace_back(r.level, r.value);
  }
  std::vector<Curve> out;
  for (auto& [label, c] : curves) {
    std::sort(c.points.begin(), c.points.end());
    out.push_back(std::move(c));
  }
  return out;
}

std::string render_svg(const std::string& title, const std::string& y_label, const std::vector<Curve>& curves) {
  const double w = 720, h = 420, left = 70, right = 220, top = 40, bottom = 60;
  const double pw = w - left - right, ph = h - top - bottom;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const auto& c : curves) {
    for (const auto& [x, y] : c.points) {
      if (!any) {
        xmin = xmax = x;
        ymin = ymax = y;
        any = true;
      }
      xmin = std::min<double>(xmin, x);
      xmax = std::max<double>(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"420\" viewBox=\"0 0 720 420\">\n";
  s += "<rect width=\"720\" height=\"420\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" font-family=\"sans-serif\">" +
       escape_xml(title) + "</text>\n";
  s += "<g stroke=\"#444\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + fmt("%.1f", left) + "\" y1=\"" + fmt("%.1f", top + ph) + "\" x2=\"" + fmt("%.1f", left + pw) +
       "\" y2=\"" + fmt("%.1f", top + ph) + "\"/>\n";
  s += "<line x1=\"" + fmt("%.1f", left) + "\" y1=\"" + fmt("%.1f", top) + "\" x2=\"" + fmt("%.1f", left) + "\" y2=\"" +
       fmt("%.1f", top + ph) + "\"/>\n</g>\n";
  s += "<g font-size=\"11\" font-family=\"sans-serif\">\n";
  for (int lv = static_cast<int>(std::ceil(xmin)); lv <= static_cast<int>(std::floor(xmax)); ++lv) {
    s += "<text x=\"" + fmt("%.1f", sx(lv)) + "\" y=\"" + fmt("%.1f", top + ph + 18) + "\" text-anchor=\"middle\">" +
         std::to_string(lv) + "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double y = ymin + (ymax - ymin) * k / 4.0;
    s += "<text x=\"" + fmt("%.1f", left - 8) + "\" y=\"" + fmt("%.1f", sy(y) + 4) + "\" text-anchor=\"end\">" +
         fmt("%.3f", y) + "</text>\n";
  }
  s += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"" + fmt("%.1f", h - 18) +
       "\" text-anchor=\"middle\">level</text>\n";
  s += "<text x=\"18\" y=\"" + fmt("%.1f", top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       fmt("%.1f", top + ph / 2) + ")\">" + escape_xml(y_label) + "</text>\n</g>\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kPalette[c % (sizeof kPalette / sizeof kPalette[0])];
    std::string pts;
    for (const auto& [x, y] : curves[c].points) {
      if (!pts.empty()) pts += " ";
      pts += fmt("%.2f", sx(x)) + "," + fmt("%.2f", sy(y));
    }
    s += "<polyline class=\"curve\" fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" +
         pts + "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(c);
    s += "<line x1=\"" + fmt("%.1f", left + pw + 16) + "\" y1=\"" + fmt("%.1f", ly) + "\" x2=\"" +
         fmt("%.1f", left + pw + 36) + "\" y2=\"" + fmt("%.1f", ly) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt("%.1f", left + pw + 42) + "\" y=\"" + fmt("%.1f", ly + 4) +
         "\" font-size=\"11\" font-family=\"sans-serif\">" + escape_xml(curves[c].label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::vector<std::string> write_report(const std::string& dir, const std::vector<ResultRow>& rows) {
  const auto tables = report_tables(rows);
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  for (const auto& [violation, table] : tables) {
    const std::string csv = violation + ".csv";
    write_text((std::filesystem::path(dir) / csv).string(), report_csv(table));
    written.push_back(csv);
    std::set<std::pair<GraphKind, Metric>> kinds;
    for (const auto& r : table) kinds.insert({r.row.graph, r.row.metric});
    for (const auto& [g, m] : kinds) {
      const auto curves = report_curves(table, g, m);
      if (curves.empty()) continue;
      const std::string svg = violation + "__" + graph_name(g) + "__" + metric_name(m) + ".svg";
      write_text((std::filesystem::path(dir) / svg).string(),
                 render_svg(violation + " (" + graph_name(g) + ")", metric_name(m), curves));
      written.push_back(svg);
    }
  }
  return written;
}

}  // namespace tcda
