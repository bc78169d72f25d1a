#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "degen/io/batch.hpp"

using namespace degen;
using namespace degen::io;
namespace fs = std::filesystem;

namespace {

const std::string corpus_dir = DEGEN_CORPUS_DIR;
const std::string cli = DEGEN_CLI;

std::string pointer_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const SchemaError& e) {
    return e.pointer();
  }
  return "<no error>";
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "<no error>";
}

Json load(const std::string& name) { return parse_text(read_file(corpus_dir + "/" + name)); }

int shell(const std::string& cmd) {
  int st = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path scratch(const std::string& tag) {
  auto d = fs::temp_directory_path() / ("degen_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Parse, RingSpecs) {
  auto r = parse_ring(root(Json::parse(R"({"family":"TruncatedPadic","p":3,"N":4})")));
  ASSERT_TRUE(std::holds_alternative<TruncatedPadic>(r));
  EXPECT_EQ(std::get<TruncatedPadic>(r).p, 3);
  EXPECT_EQ(std::get<TruncatedPadic>(r).precision_N, 4);

  auto b = parse_ring(root(Json::parse(R"({"family":"TruncatedBK","p":5,"N":2,"M":6,"eisenstein":{"coefficients":[5,10,1]}})")));
  EXPECT_EQ(std::get<TruncatedBK>(b).eisenstein.ramification_e, 2);

  EXPECT_EQ(pointer_of([] { parse_ring(root(Json::parse(R"({"family":"TruncatedPadic","p":4,"N":4})"))); }), "/p");
  EXPECT_EQ(pointer_of([] { parse_ring(root(Json::parse(R"({"family":"TruncatedPadic","p":3})"))); }), "/N");
  EXPECT_EQ(pointer_of([] { parse_ring(root(Json::parse(R"({"family":"TruncatedPadic","p":3,"N":2,"M":1})"))); }), "/M");
  EXPECT_EQ(pointer_of([] { parse_ring(root(Json::parse(R"({"family":"Q"})"))); }), "/family");
  EXPECT_EQ(pointer_of([] { parse_ring(root(Json::parse(R"({"family":"TruncatedLambda","S":[3,2],"M":2})"))); }), "/S/1");
}

TEST(Parse, DenominatorOutsideSIsRejectedByEntry) {
  auto A = make_localized({2});
  auto j = Json::parse(R"([[[1], ["1/2"]], [[0], ["1/3"]]])");
  EXPECT_EQ(pointer_of([&] { parse_matrix(A, Node{j, "/matrix"}, std::nullopt, 2); }), "/matrix/1/1/0");
  EXPECT_NE(message_of([&] { parse_matrix(A, Node{j, "/matrix"}, std::nullopt, 2); }).find("denominator 3"),
            std::string::npos);
  auto ok = Json::parse(R"([[[1], ["1/2"]], [["-3/4"], [6]]])");
  auto X = parse_matrix(A, Node{ok, ""}, 2, 2);
  EXPECT_EQ(X(1, 0)[0], BigRat(-3, 4));
  EXPECT_EQ(matrix_json(A, X), ok);
}

TEST(Parse, NonCanonicalElementsCarryAHint) {
  auto P = make_padic(3, 2);
  auto ten = Json::parse("[10]");
  EXPECT_NE(message_of([&] { parse_elem(P, Node{ten, ""}); }).find("write 1"), std::string::npos);
  auto neg = Json::parse("[-1]");
  EXPECT_NE(message_of([&] { parse_elem(P, Node{neg, ""}); }).find("write 8"), std::string::npos);
  auto L = make_localized({2});
  auto unreduced = Json::parse(R"(["4/2"])");
  EXPECT_NE(message_of([&] { parse_elem(L, Node{unreduced, ""}); }).find("write 2"), std::string::npos);
  auto quoted = Json::parse(R"(["7"])");
  EXPECT_NE(message_of([&] { parse_elem(L, Node{quoted, ""}); }).find("write 7"), std::string::npos);
  // truncation length is part of the schema
  auto B = make_bk(3, 2, 2);
  auto longer = Json::parse("[1, 0, 1]");
  EXPECT_EQ(pointer_of([&] { parse_elem(B, Node{longer, "/x"}); }), "/x");
  // canonical strings for big integers
  auto big = Json::parse(R"(["123456789012345678901234567890"])");
  EXPECT_EQ(parse_elem(L, Node{big, ""})[0], BigRat(BigInt("123456789012345678901234567890")));
}

TEST(Parse, ModulesMapsAndSequences) {
  auto A = make_padic(3, 3);
  auto bad_map = Json::parse(R"({"source":{"gens":1,"relations":[[[3]]]},"target":{"gens":1},"matrix":[[[1]]]})");
  EXPECT_EQ(pointer_of([&] { parse_map(A, root(bad_map)); }), "/matrix");
  auto typo = Json::parse(R"({"gens":1,"relation":[]})");
  EXPECT_EQ(pointer_of([&] { parse_module(A, root(typo)); }), "/relation");
  auto s = load("padic_split_nonsplit.json");
  auto seq = parse_ses(A, root(s)["ses"]);
  EXPECT_EQ(ses_json(seq), s["ses"]);
}

TEST(Parse, CorpusRoundTrips) {
  int complexes = 0, cws = 0, bks = 0;
  for (const auto& e : fs::directory_iterator(corpus_dir)) {
    const auto name = e.path().filename().string();
    if (name.ends_with(".job.json") || name.ends_with(".report.json") || !name.ends_with(".json")) continue;
    auto j = parse_text(read_file(e.path().string()));
    auto n = root(j);
    if (j.contains("complex") && j["ring"]["family"] == "TruncatedPadic") {
      auto X = parse_complex(algebra_of(std::get<TruncatedPadic>(parse_ring(n["ring"]))), n["complex"]);
      EXPECT_EQ(complex_json(X), j["complex"]) << name;
      ++complexes;
    }
    if (j.contains("cw")) {
      EXPECT_EQ(cw_json(parse_cw(n["cw"])), j["cw"]) << name;
      ++cws;
    }
    if (j.contains("bk") && name != "bk_height_crossing.json") {
      const auto r = std::get<TruncatedBK>(parse_ring(n["ring"]));
      EXPECT_EQ(bk_json(parse_bk(algebra_of(r), r.eisenstein, n["bk"])), j["bk"]) << name;
      ++bks;
    }
  }
  EXPECT_GE(complexes, 2);
  EXPECT_GE(cws, 4);
  EXPECT_GE(bks, 3);
}

TEST(Run, GoldenVerdicts) {
  auto zp2 = run(parse_job(load("padic_zp2_p3.job.json"), corpus_dir));
  EXPECT_EQ(zp2.exit_code, 0);
  EXPECT_TRUE(zp2.verdicts["degenerate"].get<bool>());
  EXPECT_TRUE(zp2.verdicts["saturated"].get<bool>());
  EXPECT_FALSE(zp2.verdicts["split"].get<bool>());
  EXPECT_TRUE(zp2.verdicts["oracle"]["agree"].get<bool>());
  ASSERT_EQ(zp2.ledger.size(), 1u);
  EXPECT_EQ(zp2.ledger[0]["homology_divisors"], Json({"9"}));
  EXPECT_EQ(zp2.ledger[0]["graded_divisors"], Json({"3", "3"}));

  auto rp2 = run(parse_job(load("cw_rp2.job.json"), corpus_dir));
  EXPECT_EQ(rp2.verdicts["K0"]["text"], "Z/2");
  EXPECT_EQ(rp2.verdicts["K1"]["text"], "0");

  auto explore = run(parse_job(load("bk_structure_p2_exploration.job.json"), corpus_dir));
  EXPECT_EQ(explore.exit_code, 0);
  EXPECT_FALSE(explore.verdicts["hypothesis_met"].get<bool>());
  EXPECT_EQ(explore.verdicts["mode"], "exploration");

  auto lam = run(parse_job(load("lambda_power_3.job.json"), corpus_dir));
  EXPECT_EQ(lam.verdicts["nonsplit_at"], Json({3}));
}

TEST(Run, ExitCodesAndErrors) {
  Json inline_job{{"command", "snf"}, {"input", {{"ring", {{"family", "LocalizedIntegers"}, {"S", {2}}}},
                                                  {"matrix", {{{1}, {"1/3"}}}}}}};
  auto r = run(parse_job(inline_job));
  EXPECT_EQ(r.exit_code, 2);
  ASSERT_TRUE(r.error.has_value());
  EXPECT_EQ(r.error->pointer, "/matrix/0/1/0");

  Json wrong_ring{{"command", "cw-ktheory"}, {"input", {{"ring", {{"family", "TruncatedPadic"}, {"p", 2}, {"N", 1}}}}}};
  EXPECT_EQ(run(parse_job(wrong_ring)).exit_code, 2);
  Json lambda_snf{{"command", "bk-height"}, {"input", {{"ring", {{"family", "TruncatedPadic"}, {"p", 2}, {"N", 1}}}}}};
  auto u = run(parse_job(lambda_snf));
  EXPECT_EQ(u.exit_code, 2);
  EXPECT_EQ(u.status, "unsupported-ring");

  // a base change whose hypothesis fails: 5-torsion does not survive completion at 3
  Json basechange{{"command", "ss-basechange"},
                  {"input", {{"ring", {{"family", "LocalizedIntegers"}, {"S", Json::array()}}},
                             {"ell", 3}, {"N", 3},
                             {"complex", {{"lo", 0}, {"hi", 0}, {"wmin", 0}, {"wmax", 0},
                                          {"modules", {{{"gens", 1}, {"relations", {{{5}}}}}}},
                                          {"filtration", {{Json::array({{{1}}})}}}}}}}};
  auto h = run(parse_job(basechange));
  EXPECT_EQ(h.exit_code, 2);
  EXPECT_EQ(h.status, "hypothesis-unmet");

  EXPECT_EQ(pointer_of([] { parse_job(Json::parse(R"({"command":"snf"})")); }), "");
  EXPECT_EQ(pointer_of([] { parse_job(Json::parse(R"({"command":"nope","input":{}})")); }), "/command");
}

TEST(Report, JsonRoundTripPreservesEverything) {
  for (const auto& f : job_files(corpus_dir)) {
    auto rep = run_job_file(f, {});
    auto j = report_json(rep);
    auto back = report_from_json(parse_text(j.dump()));
    EXPECT_EQ(report_json(back), j) << f;
    EXPECT_EQ(back.verdicts, rep.verdicts);
    EXPECT_EQ(back.witnesses, rep.witnesses);
    EXPECT_EQ(emit_json(back), emit_json(rep));
  }
  Options timed;
  timed.timing = true;
  auto rep = run_job_file(corpus_dir + "/cw_s2.job.json", timed);
  ASSERT_TRUE(rep.timing_ms.has_value());
  EXPECT_EQ(report_from_json(report_json(rep)).timing_ms, rep.timing_ms);
}

TEST(Report, DeterministicAndMatchesGoldenFiles) {
  int checked = 0;
  for (const auto& f : job_files(corpus_dir)) {
    auto a = emit_json(run_job_file(f, {})), b = emit_json(run_job_file(f, {}));
    EXPECT_EQ(a, b) << f;
    auto golden = f.string();
    golden.replace(golden.size() - std::string(kJobSuffix).size(), std::string::npos, kReportSuffix);
    EXPECT_EQ(a, read_file(golden)) << f;
    ++checked;
  }
  EXPECT_GE(checked, 30);
}

TEST(Report, ExitCodeTaxonomyOnTheCorpus) {
  std::map<int, int> seen;
  for (const auto& f : job_files(corpus_dir)) {
    auto r = run_job_file(f, {});
    EXPECT_TRUE(r.exit_code == 0 || r.exit_code == 2 || r.exit_code == 3 || r.exit_code == 4);
    EXPECT_NE(r.exit_code, 4) << f;
    EXPECT_EQ(r.exit_code == 0, !r.error.has_value());
    ++seen[r.exit_code];
  }
  EXPECT_GT(seen[0], 0);
  EXPECT_GT(seen[2], 0);
  EXPECT_GT(seen[3], 0);
}

TEST(Report, LedgerTableHasOneRowPerDegree) {
  auto r = run(parse_job(load("padic_dpf_p3.job.json"), corpus_dir));
  auto table = ledger_table(r.ledger);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 2 + static_cast<long>(r.ledger.size()));
  auto text = emit_text(r);
  EXPECT_NE(text.find("length ledger"), std::string::npos);
  EXPECT_NE(text.find("degree"), std::string::npos);
}

TEST(Cli, ExitCodesThroughTheBinary) {
  EXPECT_EQ(shell(cli + " --input " + corpus_dir + "/padic_zp2_p3.job.json"), 0);
  EXPECT_EQ(shell(cli + " ss-report --oracle --input " + corpus_dir + "/padic_zp2_p3.json"), 0);
  EXPECT_EQ(shell(cli + " --input " + corpus_dir + "/bk_height_crossing.job.json"), 3);
  EXPECT_EQ(shell(cli + " bk-height --precision-M 12 --input " + corpus_dir + "/bk_height_crossing.json"), 0);
  EXPECT_EQ(shell(cli + " snf --input " + corpus_dir + "/local_bad_denominator.json"), 2);
  EXPECT_EQ(shell(cli + " snf --input /nonexistent.json"), 2);
  EXPECT_EQ(shell(cli + " no-such-command --input x"), 2);
  EXPECT_EQ(shell(cli + " --help"), 0);
}

TEST(Cli, OutputFilesAndConfig) {
  auto dir = scratch("out");
  auto out = (dir / "r.json").string();
  ASSERT_EQ(shell(cli + " cw-ktheory --input " + corpus_dir + "/cw_rp2.json --output " + out), 0);
  auto rep = report_from_json(parse_text(read_file(out)));
  EXPECT_EQ(rep.verdicts["K0"]["text"], "Z/2");
  EXPECT_EQ(shell(cli + " cw-ktheory --input " + corpus_dir + "/cw_rp2.json --output /nonexistent/dir/r.json"), 2);

  auto cfg = (dir / "config.json").string();
  write_atomic(cfg, R"({"format":"text","oracle":true})");
  auto txt = (dir / "r.txt").string();
  ASSERT_EQ(shell("DEGEN_CONFIG=" + cfg + " " + cli + " ss-report --input " + corpus_dir + "/padic_zp2_p3.json --output " + txt), 0);
  auto text = read_file(txt);
  EXPECT_NE(text.find("length ledger"), std::string::npos);
  EXPECT_NE(text.find("\"agree\":true"), std::string::npos);
  write_atomic(cfg, R"({"formt":"text"})");
  EXPECT_EQ(shell("DEGEN_CONFIG=" + cfg + " " + cli + " cw-ktheory --input " + corpus_dir + "/cw_rp2.json"), 2);
  fs::remove_all(dir);
}

TEST(Cli, BatchReproducesTheCorpusReports) {
  auto dir = scratch("batch");
  for (const auto& e : fs::directory_iterator(corpus_dir)) {
    const auto name = e.path().filename().string();
    if (!name.ends_with(kReportSuffix)) fs::copy_file(e.path(), dir / name);
  }
  EXPECT_EQ(shell(cli + " --workers 4 --corpus-dir " + dir.string()), 3);
  int reports = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    EXPECT_EQ(name.find(".tmp"), std::string::npos) << name;
    if (!name.ends_with(kReportSuffix)) continue;
    EXPECT_EQ(read_file(e.path().string()), read_file(corpus_dir + "/" + name)) << name;
    ++reports;
  }
  EXPECT_EQ(reports, static_cast<int>(job_files(corpus_dir).size()));
  fs::remove_all(dir);
}
