#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fairdef/defense.hpp"
#include "fairdef/experiment.hpp"

namespace fairdef {

// Run records serialize without wall-clock fields so that identical inputs
// give byte-identical files.
std::string run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const std::string& text);

// One JSON object per outer iteration.
std::string trace_to_jsonl(const DefenseTrace& trace);

std::string run_file_stem(const RunRecord& record);

struct ReportFiles {
  std::vector<std::filesystem::path> written;
};

// Writes tables/{summary,comparison,weights,timing}.csv, runs/*.json,
// heatmap.csv, bicriteria.csv and, for runs carrying one, trace/*.jsonl.
ReportFiles emit_report(const std::vector<RunRecord>& runs, const std::filesystem::path& out_dir);

// Reads every runs/*.json below out_dir (sorted by file name).
std::vector<RunRecord> read_run_records(const std::filesystem::path& out_dir);

// Rewrites the aggregate tables, heatmap and bi-criteria files from the
// JSON run records already present in out_dir.
ReportFiles reaggregate_report(const std::filesystem::path& out_dir);

}  // namespace fairdef
