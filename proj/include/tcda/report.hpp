#pragma once

#include <map>
#include <string>
#include <vector>

#include "tcda/harness.hpp"

namespace tcda {

// Level-wise means over regimes for one violation, ranked per
// (level, graph, metric); rank 1 is best. regime_id is "all".
struct ReportRow {
  ResultRow row;
  int rank = 0;  // 0 when the value is missing
};

std::map<std::string, std::vector<ReportRow>> report_tables(const std::vector<ResultRow>& rows);
std::string report_csv(const std::vector<ReportRow>& rows);

struct Curve {
  std::string label;  // "method/hp"
  std::vector<std::pair<int, double>> points;  // (level, value)
};
// Curves of one (violation, graph, metric), one per method/hp.
std::vector<Curve> report_curves(const std::vector<ReportRow>& rows, GraphKind graph, Metric metric);
std::string render_svg(const std::string& title, const std::string& y_label, const std::vector<Curve>& curves);

// Writes <violation>.csv and <violation>__<graph>__<metric>.svg files under
// dir. Returns the written file names.
std::vector<std::string> write_report(const std::string& dir, const std::vector<ResultRow>& rows);

}  // namespace tcda
