// Command-line front end: one job, a job file, or a corpus directory.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "degen/io/batch.hpp"

using namespace degen;
using namespace degen::io;

namespace {

struct Config {
  Options opt;
  unsigned workers = 1;
  std::string format = "json";
};

/// Defaults from the file named by DEGEN_CONFIG, if set.
Config load_config() {
  Config c;
  const char* path = std::getenv("DEGEN_CONFIG");
  if (!path || !*path) return c;
  auto j = parse_text(read_file(path), path);
  auto n = root(j);
  n.object({"precision_N", "precision_M", "prime_bound", "oracle", "timing", "workers", "format"});
  Json opts = Json::object();
  for (const char* k : {"precision_N", "precision_M", "prime_bound", "oracle", "timing"})
    if (n.has(k)) opts[k] = j[k];
  c.opt = parse_options(root(opts));
  if (n.has("workers")) c.workers = static_cast<unsigned>(n["workers"].small(1, 256));
  if (n.has("format")) c.format = n["format"].string();
  return c;
}

void emit(const Report& r, const std::string& format, const std::string& output) {
  const auto text = format == "text" ? emit_text(r) : emit_json(r);
  if (output.empty() || output == "-") std::cout << text;
  else write_atomic(output, text);
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  try {
    cfg = load_config();
  } catch (const Error& e) {
    std::cerr << "DEGEN_CONFIG: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"Degeneration and splitting checks over truncated coefficient rings"};
  app.set_version_flag("--version", kVersion);
  std::string command, input, output, corpus;
  std::optional<int> N, M;
  std::optional<std::int64_t> bound;
  bool oracle = false, timing = false;

  std::vector<std::string> names = commands();
  app.add_option("command", command, "Command to run")->check(CLI::IsMember(names));
  app.add_option("--input", input, "Payload file for COMMAND, or a job file when no command is given");
  app.add_option("--output", output, "Report path (default: stdout)");
  app.add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"json", "text"}));
  app.add_flag("--oracle", oracle, "Run the brute-force oracle where the instance is within bounds");
  app.add_option("--prime-bound", bound, "Largest prime probed by support searches");
  app.add_option("--precision-N", N, "Override the p-adic precision N of the ring")->check(CLI::Range(1, 64));
  app.add_option("--precision-M", M, "Override the z-adic precision M of the ring")->check(CLI::Range(1, 64));
  app.add_option("--workers", cfg.workers, "Concurrent jobs in batch mode")->check(CLI::Range(1, 256));
  app.add_option("--corpus-dir", corpus, "Run every *.job.json in this directory");
  app.add_flag("--timing", timing, "Include wall time in the report");
  app.footer("Exit codes: 0 completed, 2 hypothesis or input rejected, 3 precision-limited, 4 inconsistency.\n"
             "DEGEN_CONFIG may name a JSON file of option defaults.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  auto& opt = cfg.opt;
  if (N) opt.precision_N = N;
  if (M) opt.precision_M = M;
  if (bound) opt.prime_bound = *bound;
  opt.oracle = opt.oracle || oracle;
  opt.timing = opt.timing || timing;

  try {
    if (!corpus.empty()) {
      if (!command.empty() || !input.empty()) fail(ErrorKind::InvalidInput, "--corpus-dir runs job files; drop COMMAND and --input");
      auto entries = run_batch(corpus, opt, cfg.workers);
      for (const auto& e : entries) std::cout << e.exit_code << "  " << e.status << "  " << e.name << "\n";
      return batch_exit_code(entries);
    }
    if (input.empty()) fail(ErrorKind::InvalidInput, "--input is required");
    Report rep;
    if (command.empty()) {
      rep = run_job_file(input, opt);
    } else {
      JobSpec job{command, input, std::nullopt, opt};
      try {
        job.input = parse_text(read_file(input), input);
        rep = run(job);
      } catch (const Error& e) {
        rep.job = job_echo(job);
        rep.exit_code = exit_code_of(e.kind());
        rep.status = status_of(e.kind());
        rep.error = ReportError{to_string(e.kind()), e.what(), ""};
      }
    }
    emit(rep, cfg.format, output);
    if (rep.error) std::cerr << rep.status << ": " << rep.error->message << "\n";
    return rep.exit_code;
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_of(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
