#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "nwtk/machine_io.hpp"
#include "nwtk/two_vpt.hpp"

using namespace nwtk;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code;
  std::string out;  // stdout + stderr
};

CliResult run_cli(const std::string& args) {
  const char* bin = std::getenv("NWTK_CLI");
  REQUIRE(bin != nullptr);
  std::string cmd = std::string(bin) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  int status = pclose(p);
  int code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  return {code, out};
}

std::string first_line(const std::string& s) {
  auto nl = s.find('\n');
  return nl == std::string::npos ? s : s.substr(0, nl);
}

fs::path tmp_dir() {
  static fs::path d = [] {
    fs::path p = fs::temp_directory_path() / "nwtk-cli-test";
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string put(const std::string& name, const MachineFile& mf) {
  fs::path p = tmp_dir() / name;
  save_machine(mf, p.string());
  return p.string();
}

}  // namespace

TEST_CASE("validate and parse round trip") {
  std::vector<MachineFile> files;
  files.push_back({"vpt", fixtures::relabel_det()});
  files.push_back({"vpt", fixtures::relabel_unamb()});
  files.push_back({"2vpa", fixtures::morphism_machines()[0]});
  files.push_back({"d2vpt", fixtures::sorting_transducer(2)});
  files.push_back({"d2vpt", fixtures::lookaround_depth_tagger()});
  files.push_back({"stst", fixtures::exponential_stst()});
  int i = 0;
  for (const auto& mf : files) {
    std::string text = serialize_machine(mf);
    MachineFile back = parse_machine(text);
    CHECK(back.kind == mf.kind);
    CHECK(serialize_machine(back) == text);  // serialization is a fixed point

    auto r = run_cli("validate " + put("rt" + std::to_string(i++) + ".txt", mf));
    CHECK(r.exit_code == 0);
    CHECK(first_line(r.out) == "ok kind=" + mf.kind);
  }
}

TEST_CASE("eval runs the sorting transducer end to end") {
  std::string m = put("sort3.txt", {"d2vpt", fixtures::sorting_transducer(3)});
  auto r = run_cli("eval " + m + " --input '<L> 2 2 r 1 r r 1 r 3 r <R>'");
  CHECK(r.exit_code == 0);
  CHECK(first_line(r.out) == "<L> 1 r 2 1 r 2 r r 3 r <R>");
  r = run_cli("eval " + m + " --input '2 r 1 r' --mode checked");
  CHECK(r.exit_code == 0);
  CHECK(first_line(r.out) == "<L> 1 r 2 r <R>");
}

TEST_CASE("accepts, convert and emptiness agree with the library") {
  TwoVpa a = fixtures::morphism_machines()[0];
  std::string m = put("two.txt", {"2vpa", a});
  std::string d = (tmp_dir() / "det.txt").string();
  auto r = run_cli("convert-2vpa-dvpa " + m + " -o " + d);
  CHECK(r.exit_code == 0);
  CHECK(first_line(r.out).rfind("states=", 0) == 0);

  for (const char* w : {"", "c r", "c c r r", "c r c r"}) {
    bool expect = accepts_2vpa(a, parse_nested_word(w, a.alph));
    CHECK(run_cli("accepts " + m + " --input '" + w + "'").exit_code == (expect ? 0 : 1));
    CHECK(run_cli("accepts " + d + " --input '" + w + "'").exit_code == (expect ? 0 : 1));
  }

  r = run_cli("emptiness " + m);
  CHECK(r.exit_code == 1);
  CHECK(first_line(r.out).rfind("nonempty: ", 0) == 0);

  TwoVpa dead = a;
  std::fill(dead.finals.begin(), dead.finals.end(), 0);
  r = run_cli("emptiness " + put("dead.txt", {"2vpa", dead}));
  CHECK(r.exit_code == 0);
  CHECK(first_line(r.out) == "empty");
}

TEST_CASE("compose picks the right construction and evaluates") {
  std::string b = put("copyxy.txt", {"d2vpt", fixtures::copy_2vpt(fixtures::abxy())});
  int i = 0;
  for (const Vpt& first :
       {fixtures::relabel_det(), fixtures::relabel_codet(), fixtures::relabel_unamb()}) {
    std::string f = put("first" + std::to_string(i) + ".txt", {"vpt", first});
    std::string out = (tmp_dir() / ("comp" + std::to_string(i++) + ".txt")).string();
    auto r = run_cli("compose " + f + " " + b + " -o " + out);
    CHECK(r.exit_code == 0);
    CHECK(run_cli("validate " + out).exit_code == 0);
    // Semantic spot check through the library.
    MachineFile mf = load_machine(out);
    const TwoVpt& c = std::get<TwoVpt>(mf.m);
    NestedWord w = parse_nested_word("a b r s", fixtures::ab2());
    auto got = evaluate_2vpt_all(c, w);
    auto mids = evaluate_vpt(first, w);
    REQUIRE(mids.size() == 1);
    auto want = evaluate_2vpt_all(fixtures::copy_2vpt(fixtures::abxy()),
                                  parse_nested_word(*mids.begin(), fixtures::abxy()));
    CHECK(got == want);
  }
}

TEST_CASE("remove-la and to-stst produce loadable machines") {
  std::string la = put("tagger.txt", {"d2vpt", fixtures::lookaround_depth_tagger()});
  std::string out = (tmp_dir() / "tagger-plain.txt").string();
  auto r = run_cli("remove-la " + la + " -o " + out);
  CHECK(r.exit_code == 0);
  CHECK(run_cli("validate " + out).exit_code == 0);

  std::string d2 = put("dcopy.txt", {"d2vpt", fixtures::double_copy_2vpt(fixtures::ab1())});
  std::string st = (tmp_dir() / "dcopy-stst.txt").string();
  r = run_cli("to-stst " + d2 + " -o " + st);
  CHECK(r.exit_code == 0);
  r = run_cli("eval " + st + " --input 'c r'");
  CHECK(r.exit_code == 0);
  CHECK(first_line(r.out) == "c r c r");
}

TEST_CASE("single-use reports violations with a witness") {
  for (const auto& sc : fixtures::single_use_cases()) {
    if (!sc.tracked.empty()) continue;  // the CLI default tracks all states
    std::string m = put("su.txt", {"2vpa", sc.machine});
    SingleUseResult expect = is_single_use(sc.machine);
    auto r = run_cli("single-use " + m);
    CHECK(r.exit_code == (expect.single_use ? 0 : 1));
    if (!expect.single_use) CHECK(first_line(r.out).rfind("violation: ", 0) == 0);
  }
  // Tracked subset by state name.
  auto cases = fixtures::single_use_cases();
  const auto& sc = cases[0];
  std::string m = put("su0.txt", {"2vpa", sc.machine});
  CHECK(run_cli("single-use " + m + " --states " + sc.machine.states[0]).exit_code <= 1);
  CHECK(run_cli("single-use " + m + " --states nosuch").exit_code == 2);
}

TEST_CASE("typecheck matches the fixture expectations") {
  int i = 0;
  for (const auto& tc : fixtures::typecheck_triples()) {
    CAPTURE(tc.name);
    std::string t = put("tc-t" + std::to_string(i) + ".txt", {"d2vpt", tc.t});
    std::string d = put("tc-d" + std::to_string(i) + ".txt", {"vpa", tc.domain});
    std::string f = put("tc-r" + std::to_string(i++) + ".txt", {"fsa", tc.range});
    auto r = run_cli("typecheck " + t + " --domain " + d + " --range " + f);
    CHECK(r.exit_code == (tc.expect_ok ? 0 : 1));
    if (!tc.expect_ok) CHECK(first_line(r.out).rfind("counterexample: ", 0) == 0);
  }
}

TEST_CASE("oracle-check passes on a plain machine") {
  std::string m = put("oc.txt", {"d2vpt", fixtures::double_copy_2vpt(fixtures::ab1())});
  auto r = run_cli("oracle-check " + m + " --max-len 4 --random-words 10");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("morphism: pass") != std::string::npos);
  CHECK(r.out.find("membership: pass") != std::string::npos);
  CHECK(r.out.find("translation: pass") != std::string::npos);

  std::string la = put("oc-la.txt", {"d2vpt", fixtures::lookaround_depth_limiter()});
  r = run_cli("oracle-check " + la + " --max-len 4 --random-words 5 --property composition");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("composition: pass") != std::string::npos);
}

TEST_CASE("errors exit with code 2") {
  CHECK(run_cli("validate /nonexistent/machine.txt").exit_code == 2);
  std::string m = put("err.txt", {"2vpa", fixtures::morphism_machines()[0]});
  auto r = run_cli("accepts " + m + " --input 'c q r'");
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("error [") != std::string::npos);
}
