// Writes the shipped job corpus: payload files <name>.json and job files
// <name>.job.json. Reports are produced separately by `degen_cli --corpus-dir`.

#include <filesystem>
#include <iostream>
#include <random>

#include "degen/io/run.hpp"
#include "support/lambda_corpus.hpp"
#include "support/random_towers.hpp"

using namespace degen;
using namespace degen::io;

namespace {

std::string out_dir;

void write(const std::string& file, const Json& j) { write_atomic(out_dir + "/" + file, j.dump(2) + "\n"); }

void job(const std::string& name, const std::string& command, const std::string& input, Json options = Json::object()) {
  Json j{{"schema_version", kSchemaVersion}, {"command", command}, {"input_path", input + ".json"}};
  if (!options.empty()) j["options"] = options;
  write(name + ".job.json", j);
}

void payload(const std::string& name, const Json& j) { write(name + ".json", j); }

Json padic(std::int64_t p, int N) { return {{"family", "TruncatedPadic"}, {"p", p}, {"N", N}}; }
Json bk(std::int64_t p, int N, int M) { return {{"family", "TruncatedBK"}, {"p", p}, {"N", N}, {"M", M}}; }
Json lambda() { return {{"family", "TruncatedLambda"}, {"S", {2}}, {"M", 2}}; }

AMat<ZpN> scalar1(const PadicAlg& A, const AElem<ZpN>& c) { return scalar_matrix(A, 1, c); }

AElem<ZpN> poly(const PadicAlg& A, std::initializer_list<std::int64_t> c) {
  auto e = A.zero();
  std::size_t k = 0;
  for (auto x : c) e[k++] = A.base().from_int(x);
  return e;
}

void spectral_cases() {
  // Z/9 in degree 0 with fil^1 = 3 Z/9
  auto A = make_padic(3, 3);
  FilteredComplex<ZpN> X;
  X.ring = A;
  X.wmax = 1;
  X.C = {cyclic_module(A, A.from_int(9))};
  X.fil = {{aidentity(A, 1), scalar1(A, A.from_int(3))}};
  X = validate(X);
  payload("padic_zp2_p3", {{"ring", padic(3, 3)}, {"complex", complex_json(X)}});
  job("padic_zp2_p3", "ss-report", "padic_zp2_p3", {{"oracle", true}});
  job("padic_zp2_p3_oracle", "oracle", "padic_zp2_p3");

  // C_1 = Z/9 e (weight 0) -> C_0 = Z/9 f (weight 1), e |-> 3f
  FilteredComplex<ZpN> Y;
  Y.ring = A;
  Y.hi = 1;
  Y.wmax = 1;
  auto C = cyclic_module(A, A.from_int(9));
  Y.C = {C, C};
  Y.fil = {{aidentity(A, 1), aidentity(A, 1)}, {aidentity(A, 1), amat(A, 0, 1)}};
  Y.d = {amat(A, 1, 0), scalar1(A, A.from_int(3))};
  Y = validate(Y);
  payload("padic_dpf_p3", {{"ring", padic(3, 3)}, {"complex", complex_json(Y)}});
  job("padic_dpf_p3", "ss-report", "padic_dpf_p3", {{"oracle", true}});

  // the same Z/9 complex over Z[1/2], completed at 3
  auto L = make_localized({2});
  FilteredComplex<LocZ> Z;
  Z.ring = L;
  Z.wmax = 1;
  Z.C = {cyclic_module(L, L.from_int(9))};
  Z.fil = {{aidentity(L, 1), scalar_matrix(L, 1, L.from_int(3))}};
  Z = validate(Z);
  payload("local_zp2_basechange",
          {{"ring", {{"family", "LocalizedIntegers"}, {"S", {2}}}}, {"complex", complex_json(Z)}, {"ell", 3}, {"N", 4}});
  job("local_zp2_basechange", "ss-basechange", "local_zp2_basechange");
}

void module_cases() {
  payload("padic_snf", {{"ring", padic(3, 3)}, {"matrix", {{{6}, {3}}, {{9}, {0}}, {{0}, {18}}}}});
  job("padic_snf", "snf", "padic_snf");

  payload("local_decompose", {{"ring", {{"family", "LocalizedIntegers"}, {"S", {2}}}},
                              {"module", {{"gens", 2}, {"relations", {{{6}, {4}}, {{2}, {"1/2"}}}}}}});
  job("local_decompose", "decompose", "local_decompose");

  // rejected: 1/3 is not in Z[1/2]
  payload("local_bad_denominator", {{"ring", {{"family", "LocalizedIntegers"}, {"S", {2}}}},
                                    {"matrix", {{{1}, {"1/3"}}}}});
  job("local_bad_denominator", "snf", "local_bad_denominator");

  // 0 -> Z/3 -> Z/9 -> Z/3 -> 0 and the split sum
  auto A = make_padic(3, 3);
  auto Z3 = cyclic_module(A, A.from_int(3)), Z9 = cyclic_module(A, A.from_int(9));
  auto s = make_ses(make_map(Z3, Z9, scalar1(A, A.from_int(3))), make_map(Z9, Z3, scalar1(A, A.one())));
  payload("padic_split_nonsplit", {{"ring", padic(3, 3)}, {"ses", ses_json(s)}});
  job("padic_split_nonsplit", "split", "padic_split_nonsplit");
  payload("padic_split_sum", {{"ring", padic(3, 3)}, {"ses", ses_json(direct_sum_sequence(Z3, Z9))}});
  job("padic_split_sum", "split", "padic_split_sum");

  for (std::int64_t p : {2, 3}) {
    auto B = make_bk(p, 4, 3);
    auto C = cyclic_module(B, B.from_int(p * p)), X = cyclic_module(B, B.from_int(p));
    const auto name = "bk_ext1_p" + std::to_string(p);
    payload(name, {{"ring", bk(p, 4, 3)}, {"source", module_json(C)}, {"target", module_json(X)}});
    job(name, "ext1", name, {{"oracle", true}});
  }

  // S/3 + S/9 + S, scrambled
  auto B = make_bk(3, 3, 3);
  std::mt19937 rng(5);
  auto M = direct_sum(direct_sum(cyclic_module(B, B.from_int(3)), cyclic_module(B, B.from_int(9))), free_module(B, 1));
  auto P = testing::random_unimodular(B, 3, rng);
  Module<ZpN> Ms{B, 3, amul(B, M.rel, P)};
  payload("bk_decompose_scrambled", {{"ring", bk(3, 3, 3)}, {"module", module_json(Ms)}});
  job("bk_decompose_scrambled", "decompose", "bk_decompose_scrambled");

  auto K = free_module(B, 1);
  K.rel.push_row({B.from_int(3)});
  K.rel.push_row({B.var()});
  payload("bk_decompose_p_z", {{"ring", bk(3, 3, 3)}, {"module", module_json(K)}});
  job("bk_decompose_p_z", "decompose", "bk_decompose_p_z");

  // Frobenius pullback of S/(3 + z) stays exact at M = 4, that of S/(3 + z^2) does not
  auto B4 = make_bk(3, 3, 4);
  payload("bk_twist_exact", {{"ring", bk(3, 3, 4)},
                             {"module", module_json(cyclic_module(B4, poly(B4, {3, 1})))},
                             {"base_change", {{"kind", "FrobeniusTwist"}}}});
  job("bk_twist_exact", "decompose", "bk_twist_exact");
  payload("bk_twist_crossing", {{"ring", bk(3, 3, 4)},
                                {"module", module_json(cyclic_module(B4, poly(B4, {3, 0, 1})))},
                                {"base_change", {{"kind", "FrobeniusTwist"}}}});
  job("bk_twist_crossing", "decompose", "bk_twist_crossing");
  job("bk_twist_crossing_lifted", "decompose", "bk_twist_crossing", {{"precision_M", 12}});
}

void bk_cases() {
  auto B4 = make_bk(3, 3, 4);
  const auto E3 = EisensteinSpec::linear(3);
  auto F = make_bk_module(free_module(B4, 1), scalar1(B4, eisenstein_eval(B4, E3, 1)), 0, 1, E3);
  payload("bk_height_free", {{"ring", bk(3, 3, 4)}, {"bk", bk_json(F)}});
  job("bk_height_free", "bk-height", "bk_height_free");

  // phi = 1 + z^3 crosses the trusted precision 2 at M = 4 but not at M = 12
  Json crossing{{"module", {{"gens", 1}, {"relations", Json::array()}}}, {"phi", {{{1, 0, 0, 1}}}}, {"s", 0}, {"r", 0}};
  payload("bk_height_crossing", {{"ring", bk(3, 3, 4)}, {"bk", crossing}});
  job("bk_height_crossing", "bk-height", "bk_height_crossing");
  job("bk_height_crossing_lifted", "bk-height", "bk_height_crossing", {{"precision_M", 12}});

  auto A = make_bk(5, 3, 10);
  const auto E5 = EisensteinSpec::linear(5);
  auto S2 = make_bk_module(cyclic_module(A, A.from_int(25)), scalar1(A, eisenstein_eval(A, E5, 1)), 0, 1, E5);
  Json tower = Json::array({matrix_json(A, scalar1(A, A.from_int(5))), matrix_json(A, scalar1(A, A.one()))});
  payload("bk_structure_p5", {{"ring", bk(5, 3, 10)}, {"bk", bk_json(S2)}, {"tower", tower}, {"canonical", true}});
  job("bk_structure_p5", "bk-structure", "bk_structure_p5");

  std::mt19937 rng(2024);
  auto rt = testing::random_tower(3, rng);
  Json steps = Json::array();
  for (const auto& S : rt.tower.steps) steps.push_back(matrix_json(rt.B.ring(), S));
  payload("bk_structure_random_p3", {{"ring", bk(3, 3, rt.B.ring().trunc())}, {"bk", bk_json(rt.B)}, {"tower", steps}});
  job("bk_structure_random_p3", "bk-structure", "bk_structure_random_p3");

  // e r = 1 = p - 1 at p = 2: outside the theorem, explored only
  auto A2 = make_bk(2, 3, 4);
  const auto E2 = EisensteinSpec::linear(2);
  auto G = make_bk_module(cyclic_module(A2, A2.from_int(4)), scalar1(A2, eisenstein_eval(A2, E2, 1)), 0, 1, E2);
  payload("bk_structure_p2_exploration", {{"ring", bk(2, 3, 4)}, {"bk", bk_json(G)}});
  job("bk_structure_p2_exploration", "bk-structure", "bk_structure_p2_exploration");
}

void cw_cases() {
  payload("cw_s2", {{"cw", cw_json(sphere(2))}});
  job("cw_s2", "cw-ktheory", "cw_s2");
  payload("cw_s3", {{"cw", cw_json(sphere(3))}});
  job("cw_s3", "cw-ktheory", "cw_s3");
  payload("cw_rp2", {{"cw", cw_json(real_projective_space(2))}});
  job("cw_rp2", "cw-ktheory", "cw_rp2");
  job("cw_rp2_verify", "cw-verify", "cw_rp2");
  payload("cw_cp2", {{"cw", cw_json(complex_projective_space(2))}});
  job("cw_cp2", "cw-ktheory", "cw_cp2");
  payload("cw_rp3_wedge_s2", {{"cw", cw_json(wedge(real_projective_space(3), sphere(2)))}});
  job("cw_rp3_wedge_s2", "cw-ktheory", "cw_rp3_wedge_s2");
}

void lambda_cases() {
  std::mt19937 rng(77);
  auto split = testing::scrambled_split(rng);
  payload("lambda_scrambled_split", {{"ring", lambda()}, {"ses", ses_json(split.seq)}});
  job("lambda_scrambled_split", "lambda-survey", "lambda_scrambled_split");

  auto nine = testing::power_extension(3, 1, 1);
  payload("lambda_power_3", {{"ring", lambda()}, {"ses", ses_json(nine.seq)}, {"primes", {3, 5, 7}}});
  job("lambda_power_3", "lambda-survey", "lambda_power_3");
  payload("lambda_power_3_certified", {{"ring", lambda()}, {"ses", ses_json(nine.seq)}});
  job("lambda_power_3_certified", "lambda-survey", "lambda_power_3_certified");

  auto A = testing::corpus_ring();
  auto M9 = testing::cyclic_lambda(A, A.from_int(9));
  auto three = make_map(M9, M9, scalar_matrix(A, 1, A.from_int(3)));
  payload("lambda_zero_three", {{"ring", lambda()}, {"map", map_json(three)}});
  job("lambda_zero_three", "lambda-zero", "lambda_zero_three");
  auto L = free_module(A, 1);
  auto q = make_map(L, L, scalar_matrix(A, 1, testing::lam(A, 0, 1)));
  payload("lambda_zero_q_minus_1", {{"ring", lambda()}, {"map", map_json(q)}});
  job("lambda_zero_q_minus_1", "lambda-zero", "lambda_zero_q_minus_1");
  auto z = zero_map(M9, testing::cyclic_lambda(A, A.from_int(5)));
  payload("lambda_zero_zero", {{"ring", lambda()}, {"map", map_json(z)}});
  job("lambda_zero_zero", "lambda-zero", "lambda_zero_zero");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_corpus <directory>\n";
    return 2;
  }
  out_dir = argv[1];
  std::filesystem::create_directories(out_dir);
  try {
    spectral_cases();
    module_cases();
    bk_cases();
    cw_cases();
    lambda_cases();
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << ": " << e.what() << "\n";
    return 4;
  }
  return 0;
}
