#include "fairdef/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fairdef/error.hpp"
#include "json.hpp"

namespace fairdef {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

ordered_json real(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

double real_of(const ordered_json& j) {
  return j.is_null() ? std::nan("") : j.get<double>();
}

ordered_json vec_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(real(v(i)));
  return arr;
}

void write_file(const fs::path& path, const std::string& text, ReportFiles& files) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
  files.written.push_back(path);
}

int pct(double frac) { return static_cast<int>(std::lround(frac * 100.0)); }

int method_rank(const std::string& name) {
  try {
    return static_cast<int>(parse_method(name));
  } catch (const Error&) {
    return 100;
  }
}

void write_tables(const std::vector<RunRecord>& runs, const fs::path& out_dir, ReportFiles& files,
                  bool with_timing) {
  const auto rows = aggregate_runs(runs);

  std::ostringstream summary;
  summary << "dataset,metric,mode,unreliable_pct,method,runs,failures,accuracy_pct,spd_abs,"
             "eod_abs,fair_abs\n";
  for (const auto& r : rows) {
    summary << r.dataset << ',' << to_string(r.metric) << ',' << to_string(r.mode) << ','
            << pct(r.unreliable_frac) << ',' << r.method << ',' << r.runs << ',' << r.failures
            << ',' << num(r.accuracy_pct) << ',' << num(r.spd_abs) << ',' << num(r.eod_abs) << ','
            << num(r.fair_abs) << '\n';
  }
  write_file(out_dir / "tables" / "summary.csv", summary.str(), files);

  // Wide layout: one row per scenario cell, accuracy/fairness pairs per method.
  std::vector<std::string> methods;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
  }
  std::stable_sort(methods.begin(), methods.end(), [](const std::string& a, const std::string& b) {
    return method_rank(a) < method_rank(b);
  });
  std::ostringstream comparison;
  comparison << "dataset,metric,mode,unreliable_pct";
  for (const auto& m : methods) comparison << ',' << m << "_acc," << m << "_fair";
  comparison << '\n';
  std::vector<std::string> cells;
  for (const auto& r : rows) {
    if (std::find(cells.begin(), cells.end(), r.cell_key) == cells.end()) cells.push_back(r.cell_key);
  }
  for (const auto& cell : cells) {
    const AggregateRow* any = nullptr;
    for (const auto& r : rows) {
      if (r.cell_key == cell) {
        any = &r;
        break;
      }
    }
    comparison << any->dataset << ',' << to_string(any->metric) << ',' << to_string(any->mode)
               << ',' << pct(any->unreliable_frac);
    for (const auto& m : methods) {
      const AggregateRow* hit = nullptr;
      for (const auto& r : rows) {
        if (r.cell_key == cell && r.method == m) hit = &r;
      }
      if (hit) comparison << ',' << num(hit->accuracy_pct) << ',' << num(hit->fair_abs);
      else comparison << ",,";
    }
    comparison << '\n';
  }
  write_file(out_dir / "tables" / "comparison.csv", comparison.str(), files);

  std::ostringstream weights;
  weights << "dataset,metric,mode,unreliable_pct,method,client,weight\n";
  for (const auto& r : rows) {
    for (Eigen::Index c = 0; c < r.weights.size(); ++c) {
      weights << r.dataset << ',' << to_string(r.metric) << ',' << to_string(r.mode) << ','
              << pct(r.unreliable_frac) << ',' << r.method << ',' << c + 1 << ','
              << num(r.weights(c)) << '\n';
    }
  }
  write_file(out_dir / "tables" / "weights.csv", weights.str(), files);

  std::ostringstream bicriteria;
  bicriteria << "dataset,metric,mode,unreliable_pct,method,accuracy_pct,fair_abs\n";
  for (const auto& r : rows) {
    bicriteria << r.dataset << ',' << to_string(r.metric) << ',' << to_string(r.mode) << ','
               << pct(r.unreliable_frac) << ',' << r.method << ',' << num(r.accuracy_pct) << ','
               << num(r.fair_abs) << '\n';
  }
  write_file(out_dir / "bicriteria.csv", bicriteria.str(), files);

  // Client x scenario proxy fairness, one block per (cell, seed).
  std::ostringstream heatmap;
  heatmap << "dataset,metric,mode,unreliable_pct,seed,client,unreliable,proxy_fairness\n";
  std::set<std::pair<std::string, std::uint64_t>> seen;
  std::vector<const RunRecord*> ordered;
  for (const auto& r : runs) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](const RunRecord* a, const RunRecord* b) {
    return std::tie(a->cell_key, a->seed) < std::tie(b->cell_key, b->seed);
  });
  for (const RunRecord* r : ordered) {
    if (r->report.per_client_proxy_fairness.empty()) continue;
    if (!seen.insert({r->cell_key, r->seed}).second) continue;
    for (std::size_t c = 0; c < r->report.per_client_proxy_fairness.size(); ++c) {
      const bool unreliable = std::find(r->unreliable_clients.begin(), r->unreliable_clients.end(),
                                        static_cast<int>(c)) != r->unreliable_clients.end();
      heatmap << r->dataset << ',' << to_string(r->metric) << ',' << to_string(r->mode) << ','
              << pct(r->unreliable_frac) << ',' << r->seed << ',' << c + 1 << ','
              << (unreliable ? 1 : 0) << ',' << num(r->report.per_client_proxy_fairness[c])
              << '\n';
    }
  }
  write_file(out_dir / "heatmap.csv", heatmap.str(), files);

  if (with_timing) {
    std::ostringstream timing;
    timing << "cell,seed,method,runtime_sec\n";
    for (const auto& r : runs) {
      timing << r.cell_key << ',' << r.seed << ',' << r.method << ','
             << num(r.report.runtime_sec) << '\n';
    }
    write_file(out_dir / "tables" / "timing.csv", timing.str(), files);
  }
}

}  // namespace

std::string run_record_to_json(const RunRecord& r) {
  ordered_json j;
  j["cell"] = r.cell_key;
  j["dataset"] = r.dataset;
  j["metric"] = std::string(to_string(r.metric));
  j["mode"] = std::string(to_string(r.mode));
  j["unreliable_frac"] = r.unreliable_frac;
  j["num_clients"] = r.num_clients;
  j["seed"] = r.seed;
  j["method"] = r.method;
  j["scenario_hash"] = hex64(r.scenario_hash);
  j["unreliable_clients"] = r.unreliable_clients;
  j["ok"] = r.ok;
  j["error"] = r.error;
  j["accuracy_pct"] = real(r.report.accuracy_pct);
  j["spd_abs"] = real(r.report.spd_abs);
  j["eod_abs"] = real(r.report.eod_abs);
  j["fair_abs"] = real(r.report.fair_abs(r.metric));
  j["weights"] = vec_json(r.report.weights);
  ordered_json pf = ordered_json::array();
  for (double v : r.report.per_client_proxy_fairness) pf.push_back(real(v));
  j["proxy_fairness"] = pf;
  j["final_root_dbc"] = real(r.final_root_dbc);
  return j.dump(2) + "\n";
}

RunRecord run_record_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kIo, std::string("malformed run record: ") + e.what());
  }
  RunRecord r;
  try {
    r.cell_key = j.at("cell").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.metric = parse_metric(j.at("metric").get<std::string>());
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.unreliable_frac = j.at("unreliable_frac").get<double>();
    r.num_clients = j.at("num_clients").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.method = j.at("method").get<std::string>();
    r.scenario_hash = parse_hex64(j.at("scenario_hash").get<std::string>());
    r.unreliable_clients = j.at("unreliable_clients").get<std::vector<int>>();
    r.ok = j.at("ok").get<bool>();
    r.error = j.at("error").get<std::string>();
    r.report.method = r.method;
    r.report.seed = r.seed;
    r.report.accuracy_pct = real_of(j.at("accuracy_pct"));
    r.report.spd_abs = real_of(j.at("spd_abs"));
    r.report.eod_abs = real_of(j.at("eod_abs"));
    const auto& w = j.at("weights");
    r.report.weights.resize(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) {
      r.report.weights(static_cast<Eigen::Index>(i)) = real_of(w[i]);
    }
    for (const auto& v : j.at("proxy_fairness")) {
      r.report.per_client_proxy_fairness.push_back(real_of(v));
    }
    r.final_root_dbc = real_of(j.at("final_root_dbc"));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kIo, std::string("run record is missing fields: ") + e.what());
  }
  return r;
}

std::string trace_to_jsonl(const DefenseTrace& trace) {
  std::string out;
  for (const auto& rec : trace.records) {
    ordered_json j;
    j["iter"] = rec.iter;
    j["w"] = vec_json(rec.w);
    j["objective"] = real(rec.objective);
    j["rho"] = rec.rho;
    j["dbc_sp"] = real(rec.dbc_sp);
    j["dbc_eo"] = real(rec.dbc_eo);
    j["root_loss"] = real(rec.root_loss);
    j["inner_iterations"] = rec.inner_iterations;
    j["inner_converged"] = rec.inner_converged;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string run_file_stem(const RunRecord& record) {
  return record.cell_key + "-s" + std::to_string(record.seed) + "-" + record.method;
}

ReportFiles emit_report(const std::vector<RunRecord>& runs, const fs::path& out_dir) {
  ReportFiles files;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create '" + out_dir.string() + "': " + ec.message());
  for (const auto& r : runs) {
    write_file(out_dir / "runs" / (run_file_stem(r) + ".json"), run_record_to_json(r), files);
    if (r.trace) {
      write_file(out_dir / "trace" / (run_file_stem(r) + ".jsonl"), trace_to_jsonl(*r.trace), files);
    }
  }
  write_tables(runs, out_dir, files, true);
  return files;
}

std::vector<RunRecord> read_run_records(const fs::path& out_dir) {
  const fs::path dir = out_dir / "runs";
  std::vector<fs::path> paths;
  std::error_code ec;
  if (fs::is_directory(dir, ec)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".json") paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RunRecord> out;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot read '" + p.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      out.push_back(run_record_from_json(buf.str()));
    } catch (const Error& e) {
      throw Error(ErrorKind::kIo, p.string() + ": " + e.what());
    }
  }
  return out;
}

ReportFiles reaggregate_report(const fs::path& out_dir) {
  ReportFiles files;
  write_tables(read_run_records(out_dir), out_dir, files, false);
  return files;
}

}  // namespace fairdef
