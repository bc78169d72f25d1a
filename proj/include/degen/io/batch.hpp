#pragma once

// Batch mode: every *.job.json in a directory, reports written next to it as
// <name>.report.json.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <thread>

#include "degen/io/run.hpp"

namespace degen::io {

inline constexpr const char* kJobSuffix = ".job.json";
inline constexpr const char* kReportSuffix = ".report.json";

struct BatchEntry {
  std::string name;
  std::string report_path;
  int exit_code = 0;
  std::string status;
};

inline std::vector<std::filesystem::path> job_files(const std::string& dir) {
  namespace fs = std::filesystem;
  require(fs::is_directory(dir), "corpus directory " + dir + " does not exist");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.ends_with(kJobSuffix)) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// A job file that fails to parse still gets a report, with exit code 2.
inline Report run_job_file(const std::filesystem::path& file, const Options& defaults) {
  JobSpec job;
  try {
    job = parse_job(parse_text(read_file(file.string()), file.filename().string()), file.parent_path().string(), defaults);
  } catch (const Error& e) {
    Report r;
    r.job = {{"job_file", file.filename().string()}};
    r.exit_code = exit_code_of(e.kind());
    r.status = status_of(e.kind());
    const auto* se = dynamic_cast<const SchemaError*>(&e);
    r.error = ReportError{to_string(e.kind()), e.what(), se ? se->pointer() : ""};
    return r;
  }
  return run(job);
}

inline std::vector<BatchEntry> run_batch(const std::string& dir, const Options& defaults, unsigned workers) {
  const auto files = job_files(dir);
  std::vector<BatchEntry> out(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < files.size();) {
      const auto& f = files[k];
      auto name = f.filename().string();
      name.resize(name.size() - std::string(kJobSuffix).size());
      auto rep = run_job_file(f, defaults);
      const auto path = (f.parent_path() / (name + kReportSuffix)).string();
      write_atomic(path, emit_json(rep));
      out[k] = {name, path, rep.exit_code, rep.status};
    }
  };
  std::vector<std::thread> pool;
  const auto n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(files.size())));
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

/// The most severe code wins: 4 over 3 over 2 over 0.
inline int batch_exit_code(const std::vector<BatchEntry>& entries) {
  int code = 0;
  for (const auto& e : entries) code = std::max(code, e.exit_code);
  return code;
}

}  // namespace degen::io
