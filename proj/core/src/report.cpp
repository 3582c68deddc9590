#include "pinncal/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pinncal/errors.hpp"
#include "pinncal/io.hpp"

namespace pinncal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) { return std::isnan(v) ? std::string() : format_double(v); }

std::string cell_label(const CalibrationResult& r) {
  if (r.cell.contains("label")) return r.cell.at("label").get<std::string>();
  return r.config_name;
}

std::string strip_header(const std::string& csv, std::string* header) {
  const auto nl = csv.find('\n');
  if (nl == std::string::npos) {
    if (header) *header = csv;
    return {};
  }
  if (header) *header = csv.substr(0, nl);
  return csv.substr(nl + 1);
}

}  // namespace

ResultScan scan_results(const fs::path& dir) {
  ResultScan scan;
  if (!fs::is_directory(dir)) throw DataError("no results: '" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    const auto name = p.filename().string();
    if (name == "summary.json" || name.ends_with("_checkpoint.json")) continue;
    json j;
    try {
      j = json::parse(read_text(p));
    } catch (const std::exception& e) {
      scan.problems.push_back(p.string() + ": " + e.what());
      continue;
    }
    if (!j.is_object() || !j.contains("schema_version") || !j.contains("config_hash")) continue;
    try {
      scan.runs.push_back({p, calibration_result_from_json(j)});
    } catch (const std::exception& e) {
      scan.problems.push_back(p.string() + ": " + e.what());
    }
  }
  return scan;
}

ReportSummary write_report(const fs::path& results_dir, const fs::path& out_dir, bool force) {
  ResultScan scan = scan_results(results_dir);
  if (scan.runs.empty()) {
    std::string msg = "no results found under '" + results_dir.string() + "'";
    if (!scan.problems.empty()) msg += " (" + std::to_string(scan.problems.size()) + " unreadable files)";
    throw DataError(msg);
  }
  std::set<std::string> hashes;
  for (const auto& r : scan.runs) hashes.insert(r.result.config_hash);
  if (hashes.size() > 1 && !force) {
    std::string list;
    for (const auto& h : hashes) list += (list.empty() ? "" : ", ") + h;
    throw DataError("results come from " + std::to_string(hashes.size()) + " different configs (" + list +
                    "); pass --force to merge them");
  }

  // runs.csv
  std::ostringstream runs;
  runs << "run,config_hash,cell,seed,mode,E,nu,K,G,RE_E,RE_nu,rL2_x,rL2_y,iterations,status,wall_time_s\n";
  std::map<std::string, std::vector<CalibrationResult>> by_cell;
  std::map<std::string, json> coords;
  std::vector<std::string> order;
  for (const auto& lr : scan.runs) {
    const auto& r = lr.result;
    const auto rel = fs::relative(lr.path, results_dir).replace_extension().generic_string();
    runs << rel << ',' << r.config_hash << ',' << cell_label(r) << ',' << r.seed << ',' << r.mode << ',' << num(r.E)
         << ',' << num(r.nu) << ',' << num(r.K) << ',' << num(r.G) << ',' << num(r.re_E) << ',' << num(r.re_nu) << ','
         << (r.rl2.size() > 0 ? num(r.rl2[0]) : "") << ',' << (r.rl2.size() > 1 ? num(r.rl2[1]) : "") << ','
         << r.iterations << ',' << r.status << ',' << num(r.wall_time_s) << '\n';
    std::string key = cell_label(r);
    if (hashes.size() > 1) key = r.config_hash + ":" + key;
    if (!by_cell.count(key)) {
      order.push_back(key);
      json c = r.cell;
      c.erase("label");
      coords[key] = c;
    }
    by_cell[key].push_back(r);
  }

  std::vector<CellSummary> cells;
  for (const auto& key : order) cells.push_back(summarize_cell(key, coords[key], by_cell[key], 0));

  // loss_history.csv: histories share one header per parameter set.
  std::ostringstream hist;
  std::string common_header;
  for (const auto& lr : scan.runs) {
    const auto& r = lr.result;
    if (r.history_path.empty()) continue;
    const fs::path hp = lr.path.parent_path() / r.history_path;
    std::string text;
    try {
      text = read_text(hp);
    } catch (const std::exception& e) {
      scan.problems.push_back(hp.string() + ": " + e.what());
      continue;
    }
    std::string header;
    const std::string body = strip_header(text, &header);
    if (common_header.empty()) {
      common_header = header;
      hist << "run," << header << '\n';
    } else if (header != common_header) {
      scan.problems.push_back(hp.string() + ": history columns differ from the first history; skipped");
      continue;
    }
    const auto rel = fs::relative(lr.path, results_dir).replace_extension().generic_string();
    std::istringstream lines(body);
    for (std::string line; std::getline(lines, line);) {
      if (!line.empty()) hist << rel << ',' << line << '\n';
    }
  }

  write_text_atomic(out_dir / "runs.csv", runs.str());
  write_text_atomic(out_dir / "cells.csv", study_csv(cells));
  if (!common_header.empty()) write_text_atomic(out_dir / "loss_history.csv", hist.str());
  ReportSummary summary;
  summary.runs = static_cast<int>(scan.runs.size());
  summary.cells = static_cast<int>(cells.size());
  summary.files = {out_dir / "runs.csv", out_dir / "cells.csv"};
  if (!common_header.empty()) summary.files.push_back(out_dir / "loss_history.csv");
  if (!scan.problems.empty()) {
    std::string text;
    for (const auto& p : scan.problems) text += p + "\n";
    write_text_atomic(out_dir / "problems.txt", text);
    summary.files.push_back(out_dir / "problems.txt");
  }
  summary.problems = std::move(scan.problems);
  return summary;
}

}  // namespace pinncal
