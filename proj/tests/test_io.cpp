#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "thermoshift/io.hpp"
#include "thermoshift/thermoshift.hpp"

using namespace thermoshift;
using io::json;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const SpecError& e) {
    return e.what();
  }
  return "";
}

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  static int counter = 0;
  auto path = std::filesystem::temp_directory_path() / ("thermoshift_io_" + std::to_string(counter++) + ".out");
  std::string cmd = std::string(THERMOSHIFT_CLI_PATH) + " " + args + " > " + path.string() + " 2>&1";
  int st = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  r.out = buf.str();
  std::filesystem::remove(path);
  return r;
}

std::string data(const char* f) { return std::string(THERMOSHIFT_DATA_DIR) + "/" + f; }

}  // namespace

TEST(ParseShift, Variants) {
  auto g = io::parse_shift(json::parse(R"({"builtin":"golden-mean"})"));
  EXPECT_EQ(count_words(g, 5), 13u);
  auto f = io::parse_shift(json::parse(R"({"alphabet_size":3,"full":true})"));
  EXPECT_EQ(count_words(f, 3), 27u);
  auto e = io::parse_shift(json::parse(R"({"alphabet_size":2,"edges":[[1,1],[1,2],[2,1]],"ladder":[2]})"));
  EXPECT_EQ(count_words(e, 5), 13u);
  auto s = io::parse_shift(json::parse(R"({"alphabet_size":3,"full":true,"factor_map":[1,1,2]})"));
  EXPECT_TRUE(s.is_sofic());
  EXPECT_EQ(count_words(s, 3), 8u);
  auto b = io::parse_shift(json::parse(R"({"builtin":"example-e1","alphabet_size":15,"factor_map":"builtin"})"));
  EXPECT_TRUE(b.is_sofic());
  EXPECT_EQ(b.cover_size(), 15u);
}

TEST(ParseShift, Diagnostics) {
  auto msg = error_of([] { io::parse_shift(json::parse(R"({"alphabet_size":2,"edges":[[1,1],[1]]})"), "s.json"); });
  EXPECT_NE(msg.find("s.json"), std::string::npos) << msg;
  EXPECT_NE(msg.find("edges[1]"), std::string::npos) << msg;
  msg = error_of([] { io::parse_shift(json::parse(R"({"alphabet_size":2,"edges":[[1,-1]]})")); });
  EXPECT_NE(msg.find("edges[0][1]"), std::string::npos) << msg;
  msg = error_of([] { io::parse_shift(json::parse(R"({"alphabet_size":2,"full":true,"colour":1})")); });
  EXPECT_NE(msg.find("colour"), std::string::npos) << msg;
  msg = error_of([] { io::parse_shift(json::parse(R"({"edges":[[1,1]]})")); });
  EXPECT_NE(msg.find("alphabet_size"), std::string::npos) << msg;
  msg = error_of([] { io::parse_shift(json::parse(R"({"alphabet_size":2,"edges":[[1,3]]})")); });
  EXPECT_FALSE(msg.empty());
  msg = error_of([] { io::parse_shift(json::parse(R"({"alphabet_size":2,"full":true,"factor_map":"builtin"})")); });
  EXPECT_NE(msg.find("factor_map"), std::string::npos) << msg;
  msg = error_of([] { io::parse_shift(json::parse(R"({"alphabet_size":2,"full":true,"factor_map":[1,0]})")); });
  EXPECT_NE(msg.find("factor_map[1]"), std::string::npos) << msg;
}

TEST(ParseJson, LineAndColumn) {
  auto msg = error_of([] { io::parse_json("{\n  \"a\": 1,\n  \"b\" 2\n}", "bad.json"); });
  EXPECT_EQ(msg.rfind("bad.json:3:", 0), 0u) << msg;
  EXPECT_THROW(io::read_json_file("/nonexistent/x.json"), SpecError);
}

TEST(ParsePotential, Variants) {
  auto s = builtin::full(3);
  auto z = io::parse_potential(json::parse(R"({"type":"zero"})"), s);
  EXPECT_EQ(z.eval(parse_word("123")), 0.0);
  auto a = io::parse_potential(
      json::parse(R"({"type":"additive-cylinder","depth":1,"values":{"1":-1.0,"2":-2.0},"default":-3.0})"), s);
  EXPECT_DOUBLE_EQ(a.eval(parse_word("123")), -6.0);
  auto t = io::parse_potential(json::parse(R"({"type":"tabulated-aa","lambda":[0.2,0.3,0.5],"c":"alternating"})"), s);
  EXPECT_EQ(t.meta().declared_C, 3.0);
  auto m = io::parse_potential(
      json::parse(R"({"type":"matrix-cocycle","matrices":[[[2,0],[0,1]],[[3,0],[0,1]],[[1,0],[0,1]]]})"), s);
  EXPECT_NEAR(m.eval(parse_word("12")), std::log(6.0), 1e-14);
  auto sc = io::parse_potential(json::parse(R"({"type":"scaled","inner":{"type":"zero"},"per-step":-0.5})"), s);
  EXPECT_DOUBLE_EQ(sc.eval(parse_word("12")), -1.0);

  auto y = io::parse_shift(json::parse(R"({"alphabet_size":3,"full":true,"factor_map":[1,1,2]})"));
  auto p = io::parse_potential(json::parse(R"({"type":"preimage-count"})"), y);
  EXPECT_NEAR(p.eval(parse_word("112")), std::log(4.0), 1e-14);
  auto pf = io::parse_potential(
      json::parse(R"({"type":"pushforward","inner":{"type":"additive-cylinder","depth":1,"values":{"1":-1.6094379124341003,"2":-1.2039728043259361,"3":-0.6931471805599453}}})"),
      y);
  EXPECT_NEAR(pf.eval(parse_word("12")), 2.0 * std::log(0.5), 1e-12);
}

TEST(ParsePotential, Diagnostics) {
  auto s = builtin::full(2);
  auto msg = error_of([&] { io::parse_potential(json::parse(R"({"type":"wavelet"})"), s, "p.json"); });
  EXPECT_NE(msg.find("p.json"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'type'"), std::string::npos) << msg;
  msg = error_of([&] { io::parse_potential(json::parse(R"({"type":"additive-cylinder","depth":1,"values":{"1":"x"}})"), s); });
  EXPECT_NE(msg.find("values.1"), std::string::npos) << msg;
  msg = error_of([&] { io::parse_potential(json::parse(R"({"type":"additive-cylinder","depth":1})"), s); });
  EXPECT_NE(msg.find("values"), std::string::npos) << msg;
  msg = error_of([&] { io::parse_potential(json::parse(R"({"type":"tabulated-aa","lambda":[0.5,"a"]})"), s); });
  EXPECT_NE(msg.find("lambda[1]"), std::string::npos) << msg;
  msg = error_of([&] { io::parse_matrices(json::parse(R"([[[1,2],[3]]])")); });
  EXPECT_NE(msg.find("[0][1]"), std::string::npos) << msg;
  msg = error_of([&] { io::parse_matrices(json::parse(R"({"matrices":[[[1]]],"norm":"frobenius"})")); });
  EXPECT_NE(msg.find("norm"), std::string::npos) << msg;
}

TEST(ParseSamples, Basic) {
  auto v = io::parse_samples(json::parse(R"([{"u":"12","v":"1"},{"u":"1","v":"21","t":3}])"));
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[1].t, 3u);
  EXPECT_EQ(v[0].u, parse_word("12"));
  EXPECT_THROW(io::parse_samples(json::parse(R"([{"u":"1x","v":"1"}])")), SpecError);
}

TEST(Serialization, NonFiniteNumbers) {
  EXPECT_EQ(io::num(kPosInf), "inf");
  EXPECT_EQ(io::num(kNegInf), "-inf");
  EXPECT_EQ(io::num(std::optional<double>{}), nullptr);
  EXPECT_EQ(io::num(0.5), 0.5);
}

TEST(Cli, PressureGoldenMean) {
  auto r = cli("pressure --shift " + data("golden-mean.json") + " --n 20");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["config"]["command"], "pressure");
  const double log_phi = std::log((1.0 + std::sqrt(5.0)) / 2.0);
  EXPECT_LE(j["report"]["P_best"]["lower"].get<double>(), log_phi);
  EXPECT_GE(j["report"]["P_best"]["upper"].get<double>(), log_phi);
}

TEST(Cli, CheckFullShift) {
  auto r = cli("check --shift " + data("full2.json") + " --p-max 0");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["finite_irreducibility"]["certificate"]["p"], 0);
  EXPECT_EQ(j["finite_irreducibility"]["certificate"]["W"], json::array({""}));
}

TEST(Cli, GibbsBernoulli) {
  auto r = cli("gibbs --shift " + data("full3.json") + " --potential " + data("bern-0.2-0.3-0.5.json") +
               " --depth 10 --n-max 6");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("\"C0\""), std::string::npos);
}

TEST(Cli, ExitCodes) {
  auto dir = std::filesystem::temp_directory_path() / "thermoshift_io_bad.json";
  {
    std::ofstream o(dir);
    o << "{\"alphabet_size\": 2, \"edges\": [[1, 1],}";
  }
  auto bad = cli("pressure --shift " + dir.string());
  std::filesystem::remove(dir);
  EXPECT_EQ(bad.code, 1) << bad.out;
  EXPECT_NE(bad.out.find(":1:"), std::string::npos) << bad.out;
  EXPECT_EQ(cli("check --shift " + data("two-blocks.json")).code, 2);
  EXPECT_EQ(cli("words --shift " + data("golden-mean.json") + " --n 4").code, 0);
  EXPECT_NE(cli("frobnicate").code, 0);
}

TEST(Cli, WordsCsvAndOutFile) {
  auto out = std::filesystem::temp_directory_path() / "thermoshift_io_words.json";
  auto r = cli("words --shift " + data("golden-mean.json") + " --n 3 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = io::read_json_file(out.string());
  std::filesystem::remove(out);
  EXPECT_NE(j.dump().find("\"121\""), std::string::npos);
  EXPECT_EQ(j.dump().find("\"22"), std::string::npos);
}
