#pragma once

// Job dispatch and reports. A job names a command and a payload document
// {"ring": ..., <command fields>}; the report is deterministic JSON.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "degen/io/parse.hpp"
#include "degen/module/ext_oracle.hpp"
#include "degen/version.hpp"

namespace degen::io {

struct Options {
  std::optional<int> precision_N, precision_M;
  std::int64_t prime_bound = 50;
  bool oracle = false;
  bool timing = false;  // timing breaks byte stability, so it is opt-in for JSON
};

struct JobSpec {
  std::string command;
  std::string input_path;     // as written, for the echo
  std::optional<Json> input;  // payload, inline or loaded from input_path
  Options options;
};

struct ReportError {
  std::string kind, message, pointer;
};

struct Report {
  std::string version = kVersion;
  Json job;
  int exit_code = 0;
  std::string status = "completed";
  std::optional<ReportError> error;
  Json verdicts = Json::object();
  Json witnesses = Json::object();
  Json ledger = Json::array();
  Json precision_trail = Json::array();
  std::optional<double> timing_ms;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"snf", "decompose", "ext1", "split", "ss-report", "ss-basechange",
                                          "bk-height", "bk-structure", "cw-ktheory", "cw-verify", "lambda-survey",
                                          "lambda-zero", "oracle"};
  return c;
}

inline int exit_code_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput:
    case ErrorKind::UnsupportedRing:
    case ErrorKind::HypothesisUnmet: return 2;
    case ErrorKind::PrecisionLimited: return 3;
    case ErrorKind::Inconsistency: return 4;
  }
  return 4;
}

inline std::string status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::UnsupportedRing: return "unsupported-ring";
    case ErrorKind::HypothesisUnmet: return "hypothesis-unmet";
    case ErrorKind::PrecisionLimited: return "precision-limited";
    case ErrorKind::Inconsistency: return "inconsistency";
  }
  return "inconsistency";
}

/// FNV-1a over the canonical dump of the payload.
inline std::string digest(const Json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// job specs

inline Options parse_options(const Node& n, Options base = {}) {
  n.object({"precision_N", "precision_M", "prime_bound", "oracle", "timing"});
  if (n.has("precision_N")) base.precision_N = n["precision_N"].small(1, 64);
  if (n.has("precision_M")) base.precision_M = n["precision_M"].small(1, 64);
  if (n.has("prime_bound")) base.prime_bound = n["prime_bound"].small(2, 100000);
  if (n.has("oracle")) base.oracle = n["oracle"].boolean();
  if (n.has("timing")) base.timing = n["timing"].boolean();
  return base;
}

inline Json options_json(const Options& o) {
  Json j{{"prime_bound", o.prime_bound}, {"oracle", o.oracle}};
  if (o.precision_N) j["precision_N"] = *o.precision_N;
  if (o.precision_M) j["precision_M"] = *o.precision_M;
  return j;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::InvalidInput, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void check_command(const Node& n, const std::string& c) {
  for (const auto& k : commands())
    if (k == c) return;
  n.fail_here("unknown command '" + c + "'");
}

/// {"schema_version": 1, "command": ..., "input_path" | "input": ..., "options": {...}}.
/// Relative input paths resolve against `dir`.
inline JobSpec parse_job(const Json& j, const std::string& dir = ".", Options defaults = {}) {
  auto n = root(j);
  n.object({"schema_version", "command", "input_path", "input", "options"});
  if (n.has("schema_version") && n["schema_version"].integer() != kSchemaVersion)
    n["schema_version"].fail_here("unsupported schema version");
  JobSpec job;
  job.command = n["command"].string();
  check_command(n["command"], job.command);
  job.options = n.has("options") ? parse_options(n["options"], defaults) : defaults;
  if (n.has("input") == n.has("input_path")) n.fail_here("exactly one of input and input_path is required");
  if (n.has("input")) {
    job.input = n["input"].j;
  } else {
    job.input_path = n["input_path"].string();
    auto path = job.input_path.starts_with("/") ? job.input_path : dir + "/" + job.input_path;
    job.input = parse_text(read_file(path), job.input_path);
  }
  return job;
}

// ---------------------------------------------------------------------------
// running

struct Context {
  const Options& opt;
  Report& rep;

  void trail(const std::string& stage, Json detail) {
    detail["stage"] = stage;
    rep.precision_trail.push_back(std::move(detail));
  }
};

inline Json base_json(const ZpN&, std::int64_t x) { return x; }
inline Json base_json(const LocZ&, const BigRat& x) { return coeff_json(x); }
inline Json base_json(const FpSeries&, const FpSeries::elem& x) { return trimmed(x); }

/// Ring from the payload with command-line precision overrides applied.
inline RingSpec job_ring(const Node& payload, Context& ctx) {
  auto spec = parse_ring(payload["ring"]);
  auto override = [&](const char* what, int& field, const std::optional<int>& v) {
    if (!v || *v == field) return;
    ctx.trail("override", {{"parameter", what}, {"from", field}, {"to", *v}});
    field = *v;
  };
  std::visit(
      [&](auto& r) {
        if constexpr (requires { r.precision_N; }) override("N", r.precision_N, ctx.opt.precision_N);
        if constexpr (requires { r.precision_M; }) override("M", r.precision_M, ctx.opt.precision_M);
      },
      spec);
  try {
    validate(spec);
  } catch (const Error& e) {
    payload["ring"].fail_here(e.what());
  }
  return spec;
}

template <class F>
void with_algebra(const RingSpec& spec, F&& f) {
  std::visit([&](const auto& r) { f(algebra_of(r)); }, spec);
}

inline void require_family(const Node& payload, const RingSpec& spec, std::initializer_list<const char*> families) {
  for (const char* f : families)
    if (family_name(spec) == f) return;
  std::string names;
  for (const char* f : families) names += (names.empty() ? "" : " or ") + std::string(f);
  throw Error(ErrorKind::UnsupportedRing, "at " + payload.ptr + "/ring: this command needs " + names + ", got " +
                                              family_name(spec));
}

inline Json obstruction_json(const Obstruction& o) {
  return {{"index", o.index}, {"divisor", o.divisor}, {"residue", o.residue}};
}

inline Json shape_json(const ElementaryShape& s) { return {{"free_rank", s.free_rank}, {"torsion_exponents", s.exponents}}; }

template <class Base>
Json decomposition_json(const ElementaryDecomposition<Base>& d) {
  Json divs = Json::array();
  for (const auto& x : d.divisors) divs.push_back(base_json(d.model.ring.base(), x));
  return {{"free_rank", d.free_rank}, {"torsion_exponents", d.torsion_exponents}, {"divisors", divs},
          {"to_model", matrix_json(d.model.ring, d.to_model.F)}, {"from_model", matrix_json(d.model.ring, d.from_model.F)}};
}

inline Json not_elementary_json(const NotElementary& ne, std::int64_t p) {
  Json w = Json::array();
  for (const auto& x : ne.witness) w.push_back(trimmed(x));
  return {{"failing_j", ne.failing_j}, {"z_exponent", ne.z_exponent}, {"witness", w}, {"p", p}};
}

inline Json group_json(const LocalizedAbelianGroup& g) {
  Json t = Json::array();
  for (const auto& d : g.torsion) t.push_back(coeff_json(d));
  return {{"rank", g.rank}, {"torsion", t}, {"text", to_string(g)}};
}

// --- snf, decompose, ext1, split -------------------------------------------

inline void cmd_snf(const Node& in, Context& ctx) {
  in.object({"ring", "matrix"});
  auto spec = job_ring(in, ctx);
  with_algebra(spec, [&](const auto& A) {
    auto m = in["matrix"].array();
    if (m.size() == 0 || !m[std::size_t{0}].j.is_array()) in["matrix"].fail_here("expected a non-empty matrix");
    auto X = parse_matrix(A, m, std::nullopt, m[std::size_t{0}].size());
    auto s = smith_normal_form(A, X);
    Json divs = Json::array();
    std::size_t rank = 0;
    for (const auto& d : s.divisors) {
      if (A.base().is_zero(d)) continue;
      ++rank;
      divs.push_back(base_json(A.base(), d));
    }
    ctx.rep.verdicts["rank"] = rank;
    ctx.rep.witnesses["divisors"] = divs;
  });
}

template <class Base>
void report_decomposition(const Module<Base>& M, Context& ctx) {
  const auto& A = M.ring;
  if constexpr (std::is_same_v<Base, ZpN>) {
    if (A.trunc() > 1) {
      auto r = decompose_over_S(M);
      if (auto* d = std::get_if<ElementaryDecomposition<ZpN>>(&r)) {
        if (!verify_decomposition(M, *d)) fail(ErrorKind::Inconsistency, "decomposition fails verification");
        ctx.rep.verdicts["elementary"] = true;
        ctx.rep.witnesses["decomposition"] = decomposition_json(*d);
      } else {
        ctx.rep.verdicts["elementary"] = false;
        ctx.rep.witnesses["not_elementary"] = not_elementary_json(std::get<NotElementary>(r), A.base().p());
      }
      return;
    }
  }
  require_snf_capable(A);
  auto d = decompose_elementary(M);
  if (!verify_decomposition(M, d)) fail(ErrorKind::Inconsistency, "decomposition fails verification");
  ctx.rep.verdicts["elementary"] = true;
  ctx.rep.witnesses["decomposition"] = decomposition_json(d);
}

template <class Base>
void apply_base_change(const Module<Base>& M, const Node& n, Context& ctx) {
  n.object({"kind", "u", "ell", "N"});
  const auto kind = n["kind"].string();
  BaseChanged<ZpN> out;
  if constexpr (std::is_same_v<Base, ZpN>) {
    if (kind == "FrobeniusTwist") out = base_change(M, FrobeniusTwist{});
    else if (kind == "ZToZero") out = base_change(M, ZToZero{});
    else if (kind == "ZToUnit") out = base_change(M, ZToUnit{n["u"].integer()});
    else n["kind"].fail_here("base change '" + kind + "' does not start from Z/p^N coefficients");
  } else if constexpr (std::is_same_v<Base, LocZ>) {
    const auto ell = n["ell"].integer();
    const int N = n["N"].small(1, 30);
    if (kind == "LocalizedToPadic") out = base_change(M, LocalizedToPadic{ell, N});
    else if (kind == "LambdaCompletion") out = base_change(M, LambdaCompletion{ell, N});
    else n["kind"].fail_here("base change '" + kind + "' does not start from localized coefficients");
  } else {
    n.fail_here("no base change is defined from power-series coefficients");
  }
  ctx.trail(kind, {{"exact", out.exact}, {"trusted_z_precision", out.trusted_z_precision}, {"note", out.note}});
  if (!out.exact) fail(ErrorKind::PrecisionLimited, kind + " is not exact: " + out.note);
  ctx.rep.witnesses["base_changed"] = module_json(out.mod);
  report_decomposition(out.mod, ctx);
}

inline void cmd_decompose(const Node& in, Context& ctx) {
  in.object({"ring", "module", "base_change"});
  auto spec = job_ring(in, ctx);
  with_algebra(spec, [&](const auto& A) {
    auto M = parse_module(A, in["module"]);
    if (in.has("base_change")) apply_base_change(M, in["base_change"], ctx);
    else report_decomposition(M, ctx);
  });
}

/// Oracle bounds for the cocycle count: cyclic target Z/q[z]/z^M and at
/// most 2^20 cochains.
inline std::optional<std::int64_t> oracle_modulus(const Module<ZpN>& X) {
  const auto& A = X.ring;
  if (X.gens != 1 || X.rel.rows() != 1) return std::nullopt;
  const auto c = X.rel(0, 0);
  for (std::size_t k = 1; k < c.size(); ++k)
    if (c[k] != 0) return std::nullopt;
  if (c[0] == 0 || ipow(A.base().p(), A.base().val(c[0])) != c[0]) return std::nullopt;
  return c[0];
}

inline void cmd_ext1(const Node& in, Context& ctx) {
  in.object({"ring", "source", "target"});
  auto spec = job_ring(in, ctx);
  with_algebra(spec, [&](const auto& A) {
    using Base = std::decay_t<decltype(A.base())>;
    auto C = parse_module(A, in["source"]), X = parse_module(A, in["target"]);
    auto e = ext1(C, X);
    ctx.rep.witnesses["ext"] = module_json(e.ext);
    ctx.rep.witnesses["cocycles"] = matrix_json(A, e.reps);
    if constexpr (std::is_same_v<Base, ZpN>) {
      auto shape = elementary_shape(e.ext);
      ctx.rep.verdicts["elementary"] = shape.has_value();
      if (shape) ctx.rep.verdicts["shape"] = shape_json(*shape);
      if (!ctx.opt.oracle) return;
      Json o{{"ran", false}};
      const auto q = oracle_modulus(X);
      const double cells = static_cast<double>(A.width()) * static_cast<double>(std::max(C.gens, C.rel.rows()));
      if (!q) {
        o["reason"] = "target is not cyclic of the form A/p^b";
      } else if (cells * std::log2(static_cast<double>(*q)) > 20) {
        o["reason"] = "instance exceeds the enumeration bound";
      } else if (!shape || shape->free_rank) {
        o["reason"] = "computed Ext is not finite elementary";
      } else {
        std::int64_t order = 1;
        for (int a : shape->exponents) order *= ipow(A.base().p(), a * A.trunc());
        const auto brute = ext_oracle::ext_order_by_cocycles(C, *q);
        o = {{"ran", true}, {"order", order}, {"oracle_order", brute}, {"agree", order == brute}};
        if (order != brute) {
          ctx.rep.verdicts["oracle"] = o;
          fail(ErrorKind::Inconsistency, "Ext order disagrees with the cocycle count");
        }
      }
      ctx.rep.verdicts["oracle"] = o;
    } else {
      if (A.trunc() == 1) {
        auto t = torsion_shape(e.ext);
        ctx.rep.verdicts["shape"] = {{"free_rank", t.free_rank}, {"torsion_divisors", t.divisors}};
      }
    }
  });
}

inline void cmd_split(const Node& in, Context& ctx) {
  in.object({"ring", "ses"});
  auto spec = job_ring(in, ctx);
  with_algebra(spec, [&](const auto& A) {
    auto s = parse_ses(A, in["ses"]);
    auto r = split_test(s);
    ctx.rep.verdicts["split"] = r.split;
    if (r.section) {
      if (!maps_equal(compose(*r.section, s.surject), identity_map(s.C)))
        fail(ErrorKind::Inconsistency, "section fails verification");
      ctx.rep.witnesses["section"] = matrix_json(A, r.section->F);
    } else {
      ctx.rep.witnesses["obstruction"] = obstruction_json(r.obstruction);
    }
  });
}

// --- spectral sequences --------------------------------------------------

template <class Base>
void report_degeneration(const DegenerationReport<Base>& r, const Algebra<Base>& A, Json& verdicts, Json& witnesses,
                         Json& ledger) {
  verdicts["rationally_degenerate"] = r.rationally_degenerate;
  verdicts["degenerate"] = r.degenerate;
  verdicts["saturated"] = r.saturated;
  verdicts["split"] = r.split;
  verdicts["criterion_applied"] = r.criterion_applied;
  verdicts["direct_saturated"] = r.direct_saturated;
  verdicts["direct_split"] = r.direct_split;
  for (const auto& l : r.ledger)
    ledger.push_back({{"degree", l.degree},
                      {"homology_length", l.homology_length},
                      {"graded_length", l.graded_length},
                      {"homology_rank", l.homology_rank},
                      {"graded_rank", l.graded_rank},
                      {"homology_divisors", l.homology_divisors},
                      {"graded_divisors", l.graded_divisors},
                      {"balanced", l.balanced()},
                      {"divisors_match", l.divisors_match()}});
  Json inj = Json::array(), sat = Json::array(), spl = Json::array();
  for (const auto& w : r.injectivity) inj.push_back({{"degree", w.degree}, {"weight", w.weight}, {"injective", w.injective}});
  for (const auto& w : r.saturation)
    sat.push_back({{"degree", w.degree}, {"weight", w.weight}, {"saturated", w.saturated},
                   {"quotient_torsion", w.quotient_torsion}});
  for (const auto& w : r.splitting) {
    Json s{{"degree", w.degree}, {"weight", w.weight}, {"split", w.split}};
    if (w.retraction) s["retraction"] = matrix_json(A, *w.retraction);
    else s["obstruction"] = obstruction_json(w.obstruction);
    spl.push_back(std::move(s));
  }
  witnesses["injectivity"] = inj;
  witnesses["saturation"] = sat;
  witnesses["splitting"] = spl;
}

inline Json oracle_json(const OracleReport& o) {
  return {{"degenerate", o.degenerate}, {"saturated", o.saturated}, {"split", o.split},
          {"homology_length", o.homology_length}, {"graded_length", o.graded_length}};
}

/// Runs the exhaustive oracle when the instance is in bounds.
inline std::optional<OracleReport> try_oracle(const FilteredComplex<ZpN>& X, Json& out) {
  try {
    auto o = oracle(X);
    out = oracle_json(o);
    out["ran"] = true;
    return o;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Inconsistency) throw;
    out = {{"ran", false}, {"reason", e.what()}};
    return std::nullopt;
  }
}

inline void cmd_ss_report(const Node& in, Context& ctx) {
  in.object({"ring", "complex"});
  auto spec = job_ring(in, ctx);
  with_algebra(spec, [&](const auto& A) {
    using Base = std::decay_t<decltype(A.base())>;
    require_snf_capable(A);
    auto X = parse_complex(A, in["complex"]);
    auto r = degeneration_report(X);
    report_degeneration(r, A, ctx.rep.verdicts, ctx.rep.witnesses, ctx.rep.ledger);
    if constexpr (std::is_same_v<Base, ZpN>) {
      if (!ctx.opt.oracle) return;
      Json o;
      if (auto rep = try_oracle(X, o)) {
        const bool agree = rep->degenerate == r.degenerate && rep->saturated == r.saturated && rep->split == r.split;
        o["agree"] = agree;
        ctx.rep.verdicts["oracle"] = o;
        if (!agree) fail(ErrorKind::Inconsistency, "degeneration verdicts disagree with the exhaustive oracle");
        return;
      }
      ctx.rep.verdicts["oracle"] = o;
    }
  });
}

inline void cmd_ss_basechange(const Node& in, Context& ctx) {
  in.object({"ring", "complex", "ell", "N"});
  auto spec = job_ring(in, ctx);
  require_family(in, spec, {"LocalizedIntegers"});
  auto A = algebra_of(std::get<LocalizedIntegers>(spec));
  auto X = parse_complex(A, in["complex"]);
  const auto ell = in["ell"].integer();
  if (!is_prime(ell) || A.base().is_inverted(ell)) in["ell"].fail_here("expected a prime outside S");
  const int N = ctx.opt.precision_N.value_or(in["N"].small(1, 30));
  LocalizedToPadic bc{ell, N};
  ctx.trail("LocalizedToPadic", {{"ell", ell}, {"precision_N", N}});
  auto r = base_change_report(X, bc);
  report_degeneration(r.after, make_padic(ell, N), ctx.rep.verdicts, ctx.rep.witnesses, ctx.rep.ledger);
  ctx.rep.verdicts["hypothesis_met"] = r.hypothesis_met;
  ctx.rep.verdicts["descended_degenerate"] = r.descended_degenerate;
  Json entries = Json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"weight", e.weight}, {"degree", e.degree}, {"injective", e.injective},
                       {"lost_divisors", e.lost_divisors}});
  ctx.rep.witnesses["descent"] = entries;
}

inline void cmd_oracle(const Node& in, Context& ctx) {
  in.object({"ring", "complex"});
  auto spec = job_ring(in, ctx);
  require_family(in, spec, {"TruncatedPadic"});
  auto X = parse_complex(algebra_of(std::get<TruncatedPadic>(spec)), in["complex"]);
  auto o = oracle(X);
  ctx.rep.verdicts = oracle_json(o);
}

// --- Breuil-Kisin ------------------------------------------------------

inline BKModule job_bk(const Node& in, Context& ctx) {
  auto spec = job_ring(in, ctx);
  require_family(in, spec, {"TruncatedBK"});
  const auto& r = std::get<TruncatedBK>(spec);
  ctx.trail("frobenius-gate", {{"M", r.precision_M}, {"p", r.p},
                               {"trusted_z_precision", frobenius_trusted_precision(r.precision_M, r.p)}});
  return parse_bk(algebra_of(r), r.eisenstein, in["bk"]);
}

inline void cmd_bk_height(const Node& in, Context& ctx) {
  in.object({"ring", "bk"});
  auto B = job_bk(in, ctx);
  auto h = check_height(B, B.s, B.r);
  ctx.rep.verdicts["s"] = B.s;
  ctx.rep.verdicts["r"] = B.r;
  if (auto* c = std::get_if<HeightCertificate>(&h)) {
    ctx.rep.verdicts["has_height"] = true;
    ctx.rep.witnesses["upper"] = matrix_json(B.ring(), c->upper);
    ctx.rep.witnesses["lower"] = matrix_json(B.ring(), c->lower);
  } else {
    const auto& f = std::get<HeightFailure>(h);
    ctx.rep.verdicts["has_height"] = false;
    ctx.rep.witnesses["failure"] = {{"inclusion", f.upper ? "upper" : "lower"}, {"index", f.index}, {"message", f.message}};
  }
}

inline void cmd_bk_structure(const Node& in, Context& ctx) {
  in.object({"ring", "bk", "tower", "canonical"});
  auto B = job_bk(in, ctx);
  std::optional<Tower> T;
  if (in.has("tower")) T = parse_tower(B, in["tower"]);
  const int e = B.eisenstein.ramification_e;
  auto rep = structure_check(B, e, B.r, T);
  auto& v = ctx.rep.verdicts;
  v["e"] = e;
  v["r"] = B.r;
  v["hypothesis_met"] = rep.hypothesis_met;
  v["mode"] = rep.hypothesis_met ? "theorem" : "exploration";
  v["gr_ranks"] = rep.gr_ranks;
  v["elementary"] = rep.decomposition.has_value();
  if (rep.membership) {
    Json layers = Json::array();
    for (auto l : rep.membership->layers) layers.push_back(l == LayerKind::ModS1 ? "Mod_S1" : "free");
    v["category"] = to_string(rep.membership->tag);
    ctx.rep.witnesses["layers"] = layers;
    ctx.rep.witnesses["graded_certificates"] = rep.gr_certificates.size();
  }
  if (rep.decomposition) {
    v["free_rank"] = rep.decomposition->free_rank;
    auto ex = rep.decomposition->torsion_exponents;
    std::sort(ex.begin(), ex.end());
    v["torsion_exponents"] = ex;
    v["predicted_exponents"] = rep.predicted_exponents;
    v["predicted_free_rank"] = rep.predicted_free_rank;
    ctx.rep.witnesses["decomposition"] = decomposition_json(*rep.decomposition);
  }
  if (rep.counterexample) ctx.rep.witnesses["not_elementary"] = not_elementary_json(*rep.counterexample, B.ring().base().p());
  if (!rep.note.empty()) ctx.rep.witnesses["note"] = rep.note;
  if (in.has("canonical") && in["canonical"].boolean() && rep.decomposition) {
    auto c = std::get<CanonicalSequence>(canonical_decomposition(B));
    ctx.rep.witnesses["canonical"] = {{"torsion", bk_json(c.tors)}, {"free", bk_json(c.free)},
                                      {"torsion_inclusion", matrix_json(B.ring(), c.tors_incl)}};
  }
}

// --- CW complexes --------------------------------------------------------

inline Json trace_json(const std::vector<SkeletalStep>& trace) {
  Json out = Json::array();
  for (const auto& st : trace) {
    Json nodes = Json::array();
    for (const auto& n : st.nodes) nodes.push_back({{"name", n.name}, {"exact", n.exact}});
    out.push_back({{"k", st.k}, {"cells", st.cells},
                   {"cofiber_K0", to_string(st.cofiber_K0)}, {"cofiber_K1", to_string(st.cofiber_K1)},
                   {"skeleton_K0", to_string(st.skeleton_K0)}, {"skeleton_K1", to_string(st.skeleton_K1)},
                   {"sub_K0", to_string(st.sub_K0)}, {"sub_K1", to_string(st.sub_K1)},
                   {"nodes", nodes}, {"wedge_matches_spheres", st.wedge_matches_spheres}});
  }
  return out;
}

inline bool trace_exact(const std::vector<SkeletalStep>& trace) {
  for (const auto& st : trace)
    for (const auto& n : st.nodes)
      if (!n.exact) return false;
  return true;
}

inline void cmd_cw_ktheory(const Node& in, Context& ctx) {
  in.object({"cw"});
  auto X = parse_cw(in["cw"]);
  auto k = ktheory(X);
  auto& v = ctx.rep.verdicts;
  v["d"] = k.d;
  v["M"] = k.M;
  v["inverted"] = k.inverted;
  v["K0"] = group_json(k.K0);
  v["K1"] = group_json(k.K1);
  v["trace_exact"] = trace_exact(k.skeletal_trace);
  Json graded = Json::array();
  for (const auto& g : k.even_odd.graded) graded.push_back(group_json(g));
  ctx.rep.witnesses["reduced_cohomology"] = graded;
  ctx.rep.witnesses["skeletal_trace"] = trace_json(k.skeletal_trace);
  if (!k.inverted.empty()) ctx.trail("invert", {{"M", k.M}, {"inverted_primes", k.inverted}});
}

inline void cmd_cw_verify(const Node& in, Context& ctx) {
  in.object({"cw"});
  auto X = parse_cw(in["cw"]);
  auto trace = skeletal_verification(X);
  ctx.rep.verdicts["steps"] = trace.size();
  ctx.rep.verdicts["all_exact"] = trace_exact(trace);
  ctx.rep.witnesses["skeletal_trace"] = trace_json(trace);
}

// --- Λ -------------------------------------------------------------------

inline LocAlg job_lambda(const Node& in, Context& ctx) {
  auto spec = job_ring(in, ctx);
  require_family(in, spec, {"TruncatedLambda"});
  return algebra_of(std::get<TruncatedLambda>(spec));
}

inline Json certificate_json(const SupportCertificate& c) {
  return {{"primes", c.primes}, {"complete", c.complete}, {"content", coeff_json(c.content)}, {"source", c.source}};
}

inline void cmd_lambda_survey(const Node& in, Context& ctx) {
  in.object({"ring", "ses", "primes"});
  auto A = job_lambda(in, ctx);
  LambdaSES s{parse_ses(A, in["ses"]), {}};
  std::optional<std::vector<std::int64_t>> primes;
  if (in.has("primes")) primes = parse_primes(in["primes"]);
  SplitSurvey survey;
  try {
    survey = local_split_survey(s, primes, ctx.opt.prime_bound);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidInput) throw;
    in.has("primes") ? in["primes"].fail_here(e.what()) : in.fail_here(e.what());
  }
  Json table = Json::array();
  for (const auto& v : survey.table) {
    ctx.trail("completion", {{"ell", v.ell}, {"precision_N", v.precision_N}});
    Json row{{"ell", v.ell}, {"precision_N", v.precision_N}, {"split", v.split}, {"in_support", v.in_support}};
    if (!v.split) row["obstruction"] = v.obstruction;
    table.push_back(std::move(row));
  }
  Json nonsplit = Json::array();
  for (const auto& v : survey.table)
    if (!v.split) nonsplit.push_back(v.ell);
  auto& out = ctx.rep.verdicts;
  out["certificate"] = certificate_json(survey.certificate);
  out["covers_certificate"] = survey.covers_certificate;
  out["nonsplit_at"] = nonsplit;
  ctx.rep.witnesses["local"] = table;
  if (!survey.all_split()) {
    out["global_split"] = false;
  } else if (survey.covers_certificate) {
    auto g = global_split_conclude(s, survey);
    out["global_split"] = true;
    ctx.rep.witnesses["section"] = matrix_json(A, g.section.F);
  } else {
    out["global_split"] = nullptr;  // undetermined: the survey misses certified primes
  }
}

inline void cmd_lambda_zero(const Node& in, Context& ctx) {
  in.object({"ring", "map"});
  auto A = job_lambda(in, ctx);
  auto f = parse_map(A, in["map"]);
  auto z = zero_local_global(f, ctx.opt.prime_bound);
  auto& v = ctx.rep.verdicts;
  v["direct_zero"] = z.direct_zero;
  v["all_local_zero"] = z.all_local_zero;
  v["agree"] = z.agree;
  v["certificate"] = certificate_json(z.certificate);
  if (z.witness) {
    ctx.rep.witnesses["nonzero_at"] = {{"ell", z.witness->ell}, {"precision_N", z.witness->precision_N},
                                       {"generator", z.witness->row}};
    ctx.trail("completion", {{"ell", z.witness->ell}, {"precision_N", z.witness->precision_N}});
  }
  Json local = Json::array();
  for (const auto& l : z.local) local.push_back({{"ell", l.ell}, {"precision_N", l.precision_N}, {"zero", l.zero}});
  ctx.rep.witnesses["local"] = local;
}

// ---------------------------------------------------------------------------

inline Json job_echo(const JobSpec& job) {
  Json j{{"command", job.command}, {"options", options_json(job.options)}};
  if (!job.input_path.empty()) j["input_path"] = job.input_path;
  if (job.input) j["input_digest"] = digest(*job.input);
  return j;
}

inline Report run(const JobSpec& job) {
  using Handler = void (*)(const Node&, Context&);
  static const std::map<std::string, Handler> table{
      {"snf", cmd_snf},           {"decompose", cmd_decompose},         {"ext1", cmd_ext1},
      {"split", cmd_split},       {"ss-report", cmd_ss_report},         {"ss-basechange", cmd_ss_basechange},
      {"bk-height", cmd_bk_height}, {"bk-structure", cmd_bk_structure}, {"cw-ktheory", cmd_cw_ktheory},
      {"cw-verify", cmd_cw_verify}, {"lambda-survey", cmd_lambda_survey}, {"lambda-zero", cmd_lambda_zero},
      {"oracle", cmd_oracle}};
  Report rep;
  rep.job = job_echo(job);
  const auto start = std::chrono::steady_clock::now();
  try {
    auto it = table.find(job.command);
    require(it != table.end(), "unknown command '" + job.command + "'");
    require(job.input.has_value(), "job has no input");
    Context ctx{job.options, rep};
    it->second(root(*job.input), ctx);
  } catch (const SchemaError& e) {
    rep.exit_code = 2;
    rep.status = status_of(e.kind());
    rep.error = ReportError{to_string(e.kind()), e.what(), e.pointer()};
  } catch (const Error& e) {
    rep.exit_code = exit_code_of(e.kind());
    rep.status = status_of(e.kind());
    rep.error = ReportError{to_string(e.kind()), e.what(), ""};
  } catch (const std::exception& e) {
    // anything outside the taxonomy is a bug, so it takes the loud channel
    rep.exit_code = 4;
    rep.status = "inconsistency";
    rep.error = ReportError{"Internal", e.what(), ""};
  }
  if (job.options.timing)
    rep.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// ---------------------------------------------------------------------------
// emission

inline Json report_json(const Report& r) {
  Json j{{"version", r.version},         {"schema_version", kSchemaVersion}, {"job", r.job},
         {"exit_code", r.exit_code},     {"status", r.status},               {"verdicts", r.verdicts},
         {"witnesses", r.witnesses},     {"ledger", r.ledger},               {"precision_trail", r.precision_trail}};
  j["error"] = r.error ? Json{{"kind", r.error->kind}, {"message", r.error->message}, {"pointer", r.error->pointer}}
                       : Json(nullptr);
  if (r.timing_ms) j["timing"] = {{"wall_ms", *r.timing_ms}};
  return j;
}

inline Report report_from_json(const Json& j) {
  Report r;
  r.version = j.at("version").get<std::string>();
  r.job = j.at("job");
  r.exit_code = j.at("exit_code").get<int>();
  r.status = j.at("status").get<std::string>();
  if (!j.at("error").is_null())
    r.error = ReportError{j["error"].at("kind"), j["error"].at("message"), j["error"].at("pointer")};
  r.verdicts = j.at("verdicts");
  r.witnesses = j.at("witnesses");
  r.ledger = j.at("ledger");
  r.precision_trail = j.at("precision_trail");
  if (j.contains("timing")) r.timing_ms = j["timing"].at("wall_ms").get<double>();
  return r;
}

inline std::string emit_json(const Report& r) { return report_json(r).dump(2) + "\n"; }

inline std::string cell(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + cell(x);
    return "{" + s + "}";
  }
  return v.dump();
}

/// One row per homological degree.
inline std::string ledger_table(const Json& ledger) {
  std::vector<std::vector<std::string>> rows{
      {"degree", "len H", "sum len E1", "rank H", "rank E1", "H divisors", "E1 divisors", "balanced"}};
  for (const auto& l : ledger)
    rows.push_back({cell(l["degree"]), cell(l["homology_length"]), cell(l["graded_length"]), cell(l["homology_rank"]),
                    cell(l["graded_rank"]), cell(l["homology_divisors"]), cell(l["graded_divisors"]),
                    l["balanced"].get<bool>() ? "yes" : "no"});
  std::vector<std::size_t> w(rows[0].size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) w[c] = std::max(w[c], r[c].size());
  std::ostringstream os;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      const bool last = c + 1 == rows[i].size();
      os << (c ? "  " : "") << std::left << std::setw(last ? 0 : static_cast<int>(w[c])) << rows[i][c];
    }
    os << "\n";
    if (i == 0) {
      for (std::size_t c = 0; c < w.size(); ++c) os << (c ? "  " : "") << std::string(w[c], '-');
      os << "\n";
    }
  }
  return os.str();
}

inline std::string emit_text(const Report& r) {
  std::ostringstream os;
  os << "degen " << r.version << "  " << r.job.value("command", "?") << "\n";
  if (r.job.contains("input_path")) os << "input: " << r.job["input_path"].get<std::string>() << "\n";
  os << "status: " << r.status << " (exit " << r.exit_code << ")\n";
  if (r.error) os << "error: " << r.error->message << "\n";
  if (!r.verdicts.empty()) {
    os << "\nverdicts\n";
    for (auto it = r.verdicts.begin(); it != r.verdicts.end(); ++it) os << "  " << it.key() << ": " << it.value().dump() << "\n";
  }
  if (!r.ledger.empty()) os << "\nlength ledger\n" << ledger_table(r.ledger);
  if (!r.precision_trail.empty()) {
    os << "\nprecision trail\n";
    for (const auto& t : r.precision_trail) os << "  " << t.dump() << "\n";
  }
  if (r.timing_ms) os << "\ntime: " << std::fixed << std::setprecision(1) << *r.timing_ms << " ms\n";
  return os.str();
}

/// Write to a temporary sibling, then rename over the target.
inline void write_atomic(const std::string& path, const std::string& text) {
  const auto tmp = path + ".tmp." + std::to_string(std::hash<std::string>{}(path + text) % 1000003);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::InvalidInput, "unwritable output path " + path);
    out << text;
    out.flush();
    if (!out) fail(ErrorKind::InvalidInput, "unwritable output path " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    fail(ErrorKind::InvalidInput, "unwritable output path " + path);
  }
}

}  // namespace degen::io
