#include "tcda/store.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tcda/error.hpp"
#include "tcda/io.hpp"

namespace tcda {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& where) {
  if (s == "nan") return std::nan("");
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::format, "bad number '" + s + "' in " + where);
  }
}

int parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::format, "bad integer '" + s + "' in " + where);
  }
}

void check_field(const std::string& s) {
  if (s.find_first_of(",\n\r\"") != std::string::npos) {
    throw Error(ErrorCode::format, "field '" + s + "' cannot be written to CSV");
  }
}

json regime_json(const Regime& r) {
  return {{"num_vars", r.num_vars}, {"max_lag", r.max_lag}, {"length", r.length},
          {"p_lag", r.p_lag}, {"p_inst", r.p_inst}};
}

Regime regime_from(const json& j) {
  Regime r;
  r.num_vars = j.at("num_vars").get<int>();
  r.max_lag = j.at("max_lag").get<int>();
  r.length = j.at("length").get<int>();
  r.p_lag = j.at("p_lag").get<double>();
  r.p_inst = j.at("p_inst").get<double>();
  return r;
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format, path + ": " + e.what());
  }
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::io, "short write to " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string batch_dir(const std::string& violation, int level, const Regime& regime) {
  return violation + "_L" + std::to_string(level) + "/" + regime.id();
}

std::string write_batch(const std::string& root, const std::vector<SampleRecord>& records,
                        std::uint64_t master_seed, ScheduleVariant variant) {
  if (records.empty()) throw Error(ErrorCode::invalid_argument, "empty batch");
  const SampleRecord& first = records.front();
  const std::string violation = first.violation.id();
  const int level = first.violation.level();
  const std::string rel = batch_dir(violation, level, first.regime);
  const fs::path dir = fs::path(root) / rel;
  fs::create_directories(dir / "series");
  fs::create_directories(dir / "truth");

  json samples = json::array();
  for (const auto& r : records) {
    if (r.violation.id() != violation || r.violation.level() != level || !(r.regime == first.regime)) {
      throw Error(ErrorCode::invalid_argument, "records of one batch must share violation and regime");
    }
    const std::string idx = std::to_string(r.index);
    const std::string series = "series/" + idx + ".tcda";
    const std::string lwcg = "truth/" + idx + ".lwcg.tcda";
    const std::string inst = "truth/" + idx + ".inst.tcda";
    write_tensor((dir / series).string(), to_tensor(r.x));
    write_tensor((dir / lwcg).string(), to_tensor(r.truth.lwcg));
    write_tensor((dir / inst).string(), to_tensor(r.truth.inst));
    samples.push_back({{"index", r.index},
                       {"id", sample_id(violation, level, r.regime.id(), r.index)},
                       {"seed", r.seed},
                       {"attempts", r.attempts},
                       {"num_vars", r.x.rows()},
                       {"series", series},
                       {"lwcg", lwcg},
                       {"inst", inst}});
  }
  json m = {{"schema", kManifestSchema},
            {"violation", violation},
            {"level", level},
            {"regime", regime_json(first.regime)},
            {"regime_id", first.regime.id()},
            {"master_seed", master_seed},
            {"schedule_variant", schedule_variant_name(variant)},
            {"count", records.size()},
            {"samples", samples}};
  write_text((dir / "manifest.json").string(), m.dump(2) + "\n");
  return rel + "/manifest.json";
}

BatchManifest read_manifest(const std::string& path) {
  const json j = parse_json_file(path);
  BatchManifest m;
  try {
    m.schema = j.at("schema").get<int>();
    if (m.schema != kManifestSchema) throw Error(ErrorCode::format, "unsupported manifest schema in " + path);
    m.violation = j.at("violation").get<std::string>();
    m.level = j.at("level").get<int>();
    m.regime = regime_from(j.at("regime"));
    if (j.at("regime_id").get<std::string>() != m.regime.id()) {
      throw Error(ErrorCode::format, "regime id does not match regime fields in " + path);
    }
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.schedule_variant = j.at("schedule_variant").get<std::string>();
    const auto count = j.at("count").get<std::size_t>();
    for (const auto& s : j.at("samples")) {
      BatchEntry e;
      e.index = s.at("index").get<int>();
      e.id = s.at("id").get<std::string>();
      e.seed = s.at("seed").get<std::uint64_t>();
      e.attempts = s.at("attempts").get<int>();
      e.num_vars = s.at("num_vars").get<int>();
      e.series = s.at("series").get<std::string>();
      e.lwcg = s.at("lwcg").get<std::string>();
      e.inst = s.at("inst").get<std::string>();
      m.samples.push_back(std::move(e));
    }
    if (m.samples.size() != count) throw Error(ErrorCode::format, "sample count mismatch in " + path);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format, path + ": " + e.what());
  }
  for (std::size_t k = 0; k < m.samples.size(); ++k) {
    const auto& e = m.samples[k];
    if (e.index != static_cast<int>(k)) throw Error(ErrorCode::format, "sample indices are not dense in " + path);
    if (e.id != sample_id(m.violation, m.level, m.regime.id(), e.index)) {
      throw Error(ErrorCode::format, "sample id mismatch in " + path);
    }
  }
  return m;
}

std::vector<EvalSample> load_batch(const std::string& manifest_path) {
  const BatchManifest m = read_manifest(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<EvalSample> out;
  for (const auto& e : m.samples) {
    EvalSample s;
    s.violation = m.violation;
    s.level = m.level;
    s.regime = m.regime;
    s.index = e.index;
    s.id = e.id;
    s.x = to_matrix(read_tensor((dir / e.series).string()));
    s.truth.lwcg = to_tensor3(read_tensor((dir / e.lwcg).string()));
    s.truth.inst = to_matrix(read_tensor((dir / e.inst).string()));
    s.truth.lsg = project_lsg(s.truth.lwcg);
    const auto d = static_cast<std::size_t>(e.num_vars);
    const bool ok = s.x.rows() == e.num_vars && s.truth.lwcg.dim(0) == d && s.truth.lwcg.dim(1) == d &&
                    s.truth.lwcg.dim(2) == static_cast<std::size_t>(m.regime.max_lag) &&
                    s.truth.inst.rows() == e.num_vars && s.truth.inst.cols() == e.num_vars &&
                    e.num_vars <= m.regime.num_vars && e.num_vars >= 1;
    if (!ok) throw Error(ErrorCode::shape, "tensor dimensions disagree with the manifest for " + e.id);
    out.push_back(std::move(s));
  }
  return out;
}

void write_plan(const std::string& root, const std::vector<std::string>& manifests,
                std::uint64_t master_seed, ScheduleVariant variant) {
  json j = {{"schema", kManifestSchema},
            {"master_seed", master_seed},
            {"schedule_variant", schedule_variant_name(variant)},
            {"batches", manifests}};
  write_text((fs::path(root) / "plan.json").string(), j.dump(2) + "\n");
}

std::vector<std::string> read_plan(const std::string& root) {
  const std::string path = (fs::path(root) / "plan.json").string();
  const json j = parse_json_file(path);
  try {
    return j.at("batches").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format, path + ": " + e.what());
  }
}

std::vector<EvalSample> load_batches(const std::string& root) {
  std::vector<EvalSample> out;
  for (const auto& rel : read_plan(root)) {
    auto part = load_batch((fs::path(root) / rel).string());
    for (auto& s : part) out.push_back(std::move(s));
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  // Shortest text that parses back to the same double.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) {
    for (const auto* f : {&r.method, &r.hp, &r.violation, &r.regime_id}) check_field(*f);
    out += r.method + "," + r.hp + "," + r.violation + "," + std::to_string(r.level) + "," + r.regime_id + "," +
           graph_name(r.graph) + "," + metric_name(r.metric) + "," + format_double(r.value) + "," +
           std::to_string(r.count) + "," + std::to_string(r.failures) + "\n";
  }
  return out;
}

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  write_text(path, results_csv(rows));
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != kResultsHeader) {
    throw Error(ErrorCode::format, "unexpected results header in " + path);
  }
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != 10) throw Error(ErrorCode::format, "expected 10 fields at " + where);
    ResultRow r;
    r.method = f[0];
    r.hp = f[1];
    r.violation = f[2];
    r.level = parse_int(f[3], where);
    r.regime_id = f[4];
    r.graph = parse_graph(f[5]);
    r.metric = parse_metric(f[6]);
    r.value = parse_double(f[7], where);
    r.count = parse_int(f[8], where);
    r.failures = parse_int(f[9], where);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string profiles_csv(const std::vector<ProfileEntry>& profiles) {
  std::string out = "method,hp_id,violation,graph,metric,mean,std,cells,partial\n";
  for (const auto& p : profiles) {
    out += p.method + "," + p.hp + "," + p.violation + "," + graph_name(p.graph) + "," + metric_name(p.metric) +
           "," + format_double(p.mean) + "," + format_double(p.stddev) + "," + std::to_string(p.cells) + "," +
           (p.partial ? "1" : "0") + "\n";
  }
  return out;
}

std::vector<ProfileEntry> read_profiles_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != "method,hp_id,violation,graph,metric,mean,std,cells,partial") {
    throw Error(ErrorCode::format, "unexpected profile header in " + path);
  }
  std::vector<ProfileEntry> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != 9) throw Error(ErrorCode::format, "expected 9 fields at " + where);
    ProfileEntry p;
    p.method = f[0];
    p.hp = f[1];
    p.violation = f[2];
    p.graph = parse_graph(f[3]);
    p.metric = parse_metric(f[4]);
    p.mean = parse_double(f[5], where);
    p.stddev = parse_double(f[6], where);
    p.cells = parse_int(f[7], where);
    p.partial = f[8] == "1";
    out.push_back(std::move(p));
  }
  return out;
}

void write_model(const std::string& path, const LinearEnsembleModel& model) {
  std::string out = "format = tcda-linear-ensemble\nversion = 1\n";
  std::string methods, weights;
  for (std::size_t k = 0; k < model.methods.size(); ++k) {
    if (model.methods[k].find(';') != std::string::npos) throw Error(ErrorCode::format, "';' in method label");
    methods += (k ? ";" : "") + model.methods[k];
  }
  for (std::size_t k = 0; k < model.weights.size(); ++k) weights += (k ? " " : "") + format_double(model.weights[k]);
  out += "methods = " + methods + "\n";
  out += "weights = " + weights + "\n";
  out += "bias = " + format_double(model.bias) + "\n";
  out += "normalization = " + std::string(normalization_name(model.normalization)) + "\n";
  out += "lambda = " + format_double(model.lambda) + "\n";
  out += "seed = " + std::to_string(model.seed) + "\n";
  out += "solver = " + model.solver + "\n";
  write_text(path, out);
}

LinearEnsembleModel read_model(const std::string& path) {
  std::istringstream in(read_text(path));
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::format, "expected key = value in " + path);
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  auto get = [&](const std::string& k) {
    const auto it = kv.find(k);
    if (it == kv.end()) throw Error(ErrorCode::format, "missing key '" + k + "' in " + path);
    return it->second;
  };
  if (get("format") != "tcda-linear-ensemble" || get("version") != "1") {
    throw Error(ErrorCode::format, "not a version 1 ensemble model: " + path);
  }
  LinearEnsembleModel m;
  const std::string methods = get("methods");
  if (!methods.empty()) m.methods = split(methods, ';');
  std::istringstream ws(get("weights"));
  std::string w;
  while (ws >> w) m.weights.push_back(parse_double(w, path));
  m.bias = parse_double(get("bias"), path);
  m.normalization = parse_normalization(get("normalization"));
  m.lambda = parse_double(get("lambda"), path);
  m.seed = std::stoull(get("seed"));
  m.solver = get("solver");
  if (m.weights.empty() || (!m.methods.empty() && m.methods.size() != m.weights.size())) {
    throw Error(ErrorCode::format, "methods and weights disagree in " + path);
  }
  for (double x : m.weights) {
    if (!std::isfinite(x)) throw Error(ErrorCode::format, "non-finite weight in " + path);
  }
  return m;
}

}  // namespace tcda
