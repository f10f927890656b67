#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "orsep/cli.hpp"
#include "orsep/conjugacy.hpp"
#include "orsep/words.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args, const std::string& input = {}) {
  std::vector<const char*> argv{"orsep"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream captured_out;
  std::ostringstream captured_err;
  std::istringstream captured_in(input);
  auto* old_out = std::cout.rdbuf(captured_out.rdbuf());
  auto* old_err = std::cerr.rdbuf(captured_err.rdbuf());
  auto* old_in = std::cin.rdbuf(captured_in.rdbuf());
  CliResult r;
  r.code = orsep::run_cli(int(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  std::cin.rdbuf(old_in);
  r.out = captured_out.str();
  r.err = captured_err.str();
  return r;
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("orsep_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("parse prints the normalized presentation") {
  auto human = run({"parse", "< a, b | (abaB)^2 >", "--human"});
  CHECK(human.code == 0);
  CHECK(human.out.find("rc: 2") != std::string::npos);

  auto js = run({"parse", "< a, b | (abaB)^2 >", "--json"});
  CHECK(js.code == 0);
  auto j = ordered_json::parse(js.out);
  CHECK(j["generators"] == ordered_json({"a", "b"}));
  CHECK(j["relator_root"] == "abaB");
  CHECK(j["exponent"] == 2);
  CHECK(j["rc"] == 2);
  CHECK(j["free_factors"] == ordered_json::array());

  auto ff = run({"parse", "< a, b, c | (ab)^3 >", "--json"});
  CHECK(ordered_json::parse(ff.out)["free_factors"] == ordered_json({"c"}));
}

TEST_CASE("wp decides the word problem") {
  auto t = run({"wp", "< a, b | (ab)^2 >", "abab", "--json"});
  CHECK(t.code == 0);
  CHECK(ordered_json::parse(t.out)["trivial"] == true);
  auto n = run({"wp", "< a, b | (ab)^2 >", "ab", "--human"});
  CHECK(n.code == 0);
  CHECK(n.out == "nontrivial\n");
  auto e = run({"wp", "< a, b | (ab)^2 >", "1"});
  CHECK(e.code == 0);
  CHECK(e.out == "trivial\n");
}

TEST_CASE("rc prints the repetition complexity") {
  auto r = run({"rc", "< a, b, c | (abbACCC)^2 >"});
  CHECK(r.code == 0);
  CHECK(r.out == "4\n");
}

TEST_CASE("decompose reports the free-product data at rc zero") {
  auto r = run({"decompose", "< a, b | (ab)^2 >", "--json"});
  CHECK(r.code == 0);
  auto j = ordered_json::parse(r.out);
  CHECK(j["free_rank"] == 1);
  CHECK(j["torsion_order"] == 2);

  auto bad = run({"decompose", "< a, b | (abaB)^2 >"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("error") != std::string::npos);
}

TEST_CASE("hierarchy emits one descent step") {
  auto human = run({"hierarchy", "< a, b | (abaB)^2 >"});
  CHECK(human.code == 0);
  CHECK(human.out.find("stable letter: t") != std::string::npos);
  CHECK(human.out.find("rc: 2 -> 1") != std::string::npos);
  CHECK(human.out.find("magnus condition: true") != std::string::npos);

  auto js = run({"hierarchy", "< a, b | (abaB)^2 >", "--json"});
  CHECK(js.code == 0);
  auto j = ordered_json::parse(js.out);
  CHECK(j["stable"] == "t");
  CHECK(j["twists"] == ordered_json({{"b", -1}}));
  CHECK(j["original"]["exponent"] == 2);
}

TEST_CASE("quotients stream deterministically and honor the cache") {
  std::vector<std::string> base{"quotients", "< a, b | (ab)^2 >", "--max-index", "3", "--json",
                                "--no-cache"};
  auto first = run(base);
  auto second = run(base);
  CHECK(first.code == 0);
  CHECK(first.out == second.out);
  auto arr = ordered_json::parse(first.out);
  REQUIRE(arr.is_array());
  CHECK(arr.size() > 1);
  for (const auto& q : arr) CHECK(q["degree"].get<int>() <= 3);
  // Degree-major order.
  for (std::size_t i = 1; i < arr.size(); ++i)
    CHECK(arr[i - 1]["degree"].get<int>() <= arr[i]["degree"].get<int>());

  auto hnn = run({"quotients", "< a, b | (abaB)^2 >", "--hnn", "--max-index", "2", "--no-cache"});
  CHECK(hnn.code == 0);
  CHECK(hnn.out.find("quotients up to index 2") != std::string::npos);

  fs::path dir = fresh_dir("cache");
  auto cached = run({"quotients", "< a, b | (ab)^2 >", "--max-index", "3", "--cache-dir",
                     dir.string()});
  CHECK(cached.code == 0);
  CHECK(fs::exists(dir / "quotients.jsonl"));
  auto size_once = fs::file_size(dir / "quotients.jsonl");
  CHECK(size_once > 0);
  // A conj run over the same presentation consumes the cache without error.
  auto conj = run({"conj", "< a, b | (ab)^2 >", "aa", "aabaab", "--cache-dir", dir.string(),
                   "--max-index", "6", "--max-len", "6"});
  CHECK(conj.code == 0);
  CHECK(ordered_json::parse(conj.out)["kind"] == "NonConjugacy");
  fs::remove_all(dir);
}

TEST_CASE("the cache directory falls back to the environment") {
  fs::path dir = fresh_dir("env_cache");
  setenv("ORSEP_CACHE_DIR", dir.string().c_str(), 1);
  auto r = run({"quotients", "< a, b | (ab)^2 >", "--max-index", "2"});
  unsetenv("ORSEP_CACHE_DIR");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "quotients.jsonl"));

  fs::path dir2 = fresh_dir("env_cache_off");
  setenv("ORSEP_CACHE_DIR", dir2.string().c_str(), 1);
  auto off = run({"quotients", "< a, b | (ab)^2 >", "--max-index", "2", "--no-cache"});
  unsetenv("ORSEP_CACHE_DIR");
  CHECK(off.code == 0);
  CHECK_FALSE(fs::exists(dir2 / "quotients.jsonl"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("conj decides and the output certificate verifies") {
  auto r = run({"conj", "< a, b | (abaB)^2 >", "a", "b", "--no-cache"});
  CHECK(r.code == 0);
  auto j = ordered_json::parse(r.out);
  CHECK(j["kind"] == "NonConjugacy");
  CHECK(j["witness"]["method"] == "abelianization");
  CHECK(orsep::verify_certificate(orsep::Certificate{j}));

  auto human = run({"conj", "< a, b | (abaB)^2 >", "b", "abA", "--human", "--no-cache"});
  CHECK(human.code == 0);
  CHECK(human.out.find("conjugate: u = a") != std::string::npos);
  CHECK(human.out.find("verified: true") != std::string::npos);

  auto hnn = run({"conj", "< a, b | (abaB)^2 >", "abaB", "aa", "--no-cache"});
  CHECK(hnn.code == 0);
  CHECK(ordered_json::parse(hnn.out)["kind"] == "HnnNonConjugacy");
}

TEST_CASE("conj reports undecided with exit code 2 when budgets cap out") {
  auto r = run({"conj", "< a, b | (abaB)^2 >", "ab", "ba", "--max-len", "0", "--max-index", "1",
                "--no-cache"});
  CHECK(r.code == 2);
  auto j = ordered_json::parse(r.out);
  CHECK(j["verdict"] == "undecided");

  auto human = run({"conj", "< a, b | (abaB)^2 >", "ab", "ba", "--max-len", "0", "--max-index",
                    "1", "--no-cache", "--human"});
  CHECK(human.code == 2);
  CHECK(human.out.find("undecided") != std::string::npos);
}

TEST_CASE("conj-sub scopes the decision to the subgroup") {
  std::vector<std::string> common{"conj-sub", "< a, b | (abaB)^2 >"};
  auto pos = run({"conj-sub", "< a, b | (abaB)^2 >", "b", "aabAA", "--action", "a=1,0;b=0,1",
                  "--no-cache"});
  CHECK(pos.code == 0);
  auto j = ordered_json::parse(pos.out);
  CHECK(j["kind"] == "Conjugacy");
  CHECK(j["scope"]["type"] == "subgroup");
  CHECK(orsep::verify_certificate(orsep::Certificate{j}));

  auto neg = run({"conj-sub", "< a, b | (abaB)^2 >", "b", "abA", "--action", "a=1,0;b=0,1",
                  "--max-index", "6", "--no-cache"});
  CHECK(neg.code == 0);
  CHECK(ordered_json::parse(neg.out)["kind"] == "NonConjugacy");

  // Against the whole group (q0 = whole image), a is a valid member again.
  auto whole = run({"conj-sub", "< a, b | (abaB)^2 >", "a", "b", "--action", "a=1,0;b=0,1",
                    "--q0", "a", "--no-cache"});
  CHECK(whole.code == 0);
  CHECK(ordered_json::parse(whole.out)["kind"] == "NonConjugacy");

  auto outside = run({"conj-sub", "< a, b | (abaB)^2 >", "a", "b", "--action", "a=1,0;b=0,1",
                      "--no-cache"});
  CHECK(outside.code == 1);
  CHECK(outside.err.find("NotInSubgroup") != std::string::npos);

  auto bad = run({"conj-sub", "< a, b | (abaB)^2 >", "b", "b", "--action", "a=1,0", "--no-cache"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("error") != std::string::npos);
}

TEST_CASE("certify writes a file that verify accepts") {
  fs::path dir = fresh_dir("certify");
  fs::path cert = dir / "cert.json";
  auto r = run({"certify", "< a, b | (abaB)^2 >", "b", "abA", "--out", cert.string(),
                "--no-cache"});
  CHECK(r.code == 0);
  CHECK(r.out == cert.string() + "\n");
  REQUIRE(fs::exists(cert));

  auto ok = run({"verify", cert.string()});
  CHECK(ok.code == 0);
  CHECK(ok.out == "true\n");
  auto ok_json = run({"verify", cert.string(), "--json"});
  CHECK(ok_json.code == 0);
  CHECK(ordered_json::parse(ok_json.out)["valid"] == true);

  // Tampered file: flips to false with exit code 1.
  std::ifstream in(cert);
  std::stringstream buf;
  buf << in.rdbuf();
  auto doc = ordered_json::parse(buf.str());
  doc["y"] = "b";
  std::ofstream out(cert);
  out << doc.dump(2);
  out.close();
  auto bad = run({"verify", cert.string()});
  CHECK(bad.code == 1);
  CHECK(bad.out == "false\n");

  auto missing = run({"verify", (dir / "nope.json").string()});
  CHECK(missing.code == 1);
  fs::remove_all(dir);
}

TEST_CASE("verify reads a certificate from stdin") {
  auto r = run({"conj", "< a, b | (abaB)^2 >", "a", "b", "--no-cache"});
  REQUIRE(r.code == 0);
  auto ok = run({"verify", "-"}, r.out);
  CHECK(ok.code == 0);
  CHECK(ok.out == "true\n");
  auto garbage = run({"verify", "-"}, "{\"kind\": 7}");
  CHECK(garbage.code == 1);
  CHECK(garbage.out == "false\n");
}

TEST_CASE("errors surface as exit code 1 and usage problems do not crash") {
  auto syntax = run({"conj", "< a, b | ab >", "a", "b", "--no-cache"});
  CHECK(syntax.code == 1);
  CHECK(syntax.err.find("error") != std::string::npos);

  auto unknown = run({"frobnicate"});
  CHECK(unknown.code != 0);

  auto missing_arg = run({"wp", "< a, b | (ab)^2 >"});
  CHECK(missing_arg.code != 0);

  auto bad_word = run({"wp", "< a, b | (ab)^2 >", "xyz"});
  CHECK(bad_word.code == 1);
}
