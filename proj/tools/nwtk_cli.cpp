// Command-line front end: parse machine files, run the library's
// constructions and decision procedures, and cross-check against the
// brute-force oracles. Exit codes: 0 = success/true, 1 = false/rejected,
// 2 = error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nwtk/compose.hpp"
#include "nwtk/machine_io.hpp"
#include "nwtk/stst.hpp"
#include "nwtk/two_vpt.hpp"

using namespace nwtk;

namespace {

std::string read_input_arg(const std::string& arg) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) {
    std::ifstream in(arg);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }
  return arg;
}

// Accepts the word with or without the surrounding markers.
NestedWord word_arg(const std::string& arg, const AlphabetRef& alph) {
  auto toks = split_tokens(read_input_arg(arg));
  if (!toks.empty() && toks.front() == kMarkLName && toks.back() == kMarkRName) {
    toks.erase(toks.begin());
    toks.pop_back();
  }
  return parse_nested_word(toks, alph);
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += v[i];
  }
  return s;
}

template <class T>
T& as(MachineFile& mf, const std::string& want) {
  if (auto* p = std::get_if<T>(&mf.m)) return *p;
  throw Error("BadMachine", "this command needs a " + want + " machine, got kind " + mf.kind);
}

int cmd_validate(const std::string& path) {
  MachineFile mf = load_machine(path);
  std::visit(
      [](const auto& m) {
        if constexpr (!std::is_same_v<std::decay_t<decltype(m)>, Fsa>) m.validate();
      },
      mf.m);
  std::cout << "ok kind=" << mf.kind << "\n";
  return 0;
}

int cmd_eval(const std::string& path, const std::string& input, const std::string& mode) {
  MachineFile mf = load_machine(path);
  std::optional<std::vector<std::string>> out;
  if (auto* t = std::get_if<TwoVpt>(&mf.m)) {
    NestedWord w = word_arg(input, t->a.alph);
    out = evaluate_d2vpt(*t, w, mode == "checked" ? EvalMode::Checked : EvalMode::Streaming);
  } else if (auto* s = std::get_if<Stst>(&mf.m)) {
    out = evaluate_stst(*s, word_arg(input, s->alph));
  } else if (auto* t1 = std::get_if<Vpt>(&mf.m)) {
    auto all = evaluate_vpt(*t1, word_arg(input, t1->a.alph));
    if (all.size() > 1) throw Error("NotDeterministic", "several outputs; eval needs one");
    if (!all.empty()) out = *all.begin();
  } else {
    throw Error("BadMachine", "eval needs a transducer, got kind " + mf.kind);
  }
  if (!out) {
    std::cout << "reject\n";
    return 1;
  }
  std::cout << join(*out) << "\n";
  return 0;
}

int cmd_accepts(const std::string& path, const std::string& input) {
  MachineFile mf = load_machine(path);
  bool acc;
  if (auto* a = std::get_if<Vpa>(&mf.m))
    acc = accepts_vpa(*a, word_arg(input, a->alph));
  else if (auto* a2 = std::get_if<TwoVpa>(&mf.m))
    acc = accepts_2vpa(*a2, word_arg(input, a2->alph));
  else if (auto* f = std::get_if<Fsa>(&mf.m))
    acc = f->accepts(split_tokens(read_input_arg(input)));
  else
    throw Error("BadMachine", "accepts needs an acceptor, got kind " + mf.kind);
  std::cout << (acc ? "accept" : "reject") << "\n";
  return acc ? 0 : 1;
}

int cmd_convert(const std::string& path, const std::string& out_path, size_t max_algebra) {
  MachineFile mf = load_machine(path);
  TwoVpa& a = as<TwoVpa>(mf, "2vpa");
  Vpa d = two_vpa_to_dvpa(a, max_algebra);
  save_machine({"dvpa", d}, out_path);
  std::cout << "states=" << d.num_states() << "\n";
  return 0;
}

int cmd_emptiness(const std::string& path) {
  MachineFile mf = load_machine(path);
  std::optional<NestedWord> w;
  if (auto* a = std::get_if<Vpa>(&mf.m))
    w = vpa_witness(*a);
  else if (auto* a2 = std::get_if<TwoVpa>(&mf.m))
    w = two_vpa_witness(*a2);
  else
    throw Error("BadMachine", "emptiness needs a vpa or 2vpa, got kind " + mf.kind);
  if (!w) {
    std::cout << "empty\n";
    return 0;
  }
  std::cout << "nonempty: " << serialize(*w) << "\n";
  return 1;
}

int cmd_compose(const std::string& first, const std::string& second, const std::string& out_path) {
  MachineFile mf1 = load_machine(first);
  MachineFile mf2 = load_machine(second);
  Vpt& a = as<Vpt>(mf1, "vpt");
  TwoVpt& b = as<TwoVpt>(mf2, "d2vpt");
  TwoVpt c;
  if (a.a.deterministic())
    c = compose_hu(a, b);
  else if (a.a.codeterministic())
    c = compose_hu_codet(a, b);
  else
    c = compose_relabeling(b, a);
  save_machine({"d2vpt", c}, out_path);
  std::cout << "states=" << c.a.num_states() << "\n";
  return 0;
}

int cmd_remove_la(const std::string& path, const std::string& out_path) {
  MachineFile mf = load_machine(path);
  TwoVpt& t = as<TwoVpt>(mf, "d2vpt");
  TwoVpt r = remove_lookaround(t);
  save_machine({"d2vpt", r}, out_path);
  std::cout << "states=" << r.a.num_states() << "\n";
  return 0;
}

int cmd_single_use(const std::string& path, const std::string& states_arg) {
  MachineFile mf = load_machine(path);
  TwoVpa a;
  if (auto* p = std::get_if<TwoVpa>(&mf.m))
    a = *p;
  else if (auto* t = std::get_if<TwoVpt>(&mf.m))
    a = t->a;
  else
    throw Error("BadMachine", "single-use needs a 2vpa or d2vpt, got kind " + mf.kind);
  SingleUseResult r;
  if (states_arg.empty()) {
    r = is_single_use(a);
  } else {
    std::vector<int> tracked;
    std::stringstream ss(states_arg);
    std::string name;
    while (std::getline(ss, name, ',')) {
      int q = -1;
      for (int i = 0; i < a.num_states(); ++i)
        if (a.states[i] == name) q = i;
      if (q < 0) throw Error("BadState", "unknown state: " + name);
      tracked.push_back(q);
    }
    r = is_single_use(a, tracked);
  }
  if (r.single_use) {
    std::cout << "single-use\n";
    return 0;
  }
  std::cout << "violation: " << serialize(*r.witness) << "\n";
  return 1;
}

int cmd_to_stst(const std::string& path, const std::string& out_path) {
  MachineFile mf = load_machine(path);
  TwoVpt& t = as<TwoVpt>(mf, "d2vpt");
  Stst s = d2vpt_to_stst(t);
  save_machine({"stst", s}, out_path);
  std::cout << "states=" << (int)s.states.size() << " registers=" << (int)s.registers.size()
            << "\n";
  return 0;
}

int cmd_typecheck(const std::string& path, const std::string& dom_path,
                  const std::string& rng_path) {
  MachineFile mf = load_machine(path);
  TwoVpt& t = as<TwoVpt>(mf, "d2vpt");
  MachineFile dm = load_machine(dom_path);
  MachineFile rm = load_machine(rng_path);
  TypeCheckResult r = type_check(t, as<Vpa>(dm, "vpa"), as<Fsa>(rm, "fsa"));
  if (r.ok) {
    std::cout << "ok\n";
    return 0;
  }
  std::cout << "counterexample: " << serialize(*r.counterexample) << "\n";
  return 1;
}

int cmd_oracle_check(const std::string& path, int max_len, int max_depth,
                     const std::string& property, unsigned long long seed, int random_words) {
  MachineFile mf = load_machine(path);
  TwoVpa a;
  const TwoVpt* t = nullptr;
  if (auto* p = std::get_if<TwoVpa>(&mf.m))
    a = *p;
  else if (auto* tp = std::get_if<TwoVpt>(&mf.m))
    a = (t = tp)->a;
  else
    throw Error("BadMachine", "oracle-check needs a 2vpa or d2vpt, got kind " + mf.kind);

  std::vector<NestedWord> words = enumerate_nested_words(a.alph, max_len);
  for (int i = 0; i < random_words; ++i)
    words.push_back(random_nested_word(a.alph, max_len + 4, max_depth, seed + i));

  bool all_ok = true;
  auto report = [&](const std::string& name, size_t checked, size_t bad) {
    std::cout << name << ": " << (bad == 0 ? "pass" : "FAIL") << " (" << checked << " words, "
              << bad << " mismatches)\n";
    if (bad) all_ok = false;
  };
  bool want_all = property.empty();

  if (want_all || property == "morphism") {
    size_t bad = 0;
    for (const auto& w : words)
      if (!(fold_traversal(a, w) == traversal_oracle(a, w))) ++bad;
    report("morphism", words.size(), bad);
  }
  if (want_all || property == "membership") {
    Vpa d = two_vpa_to_dvpa(a);
    size_t bad = 0;
    for (const auto& w : words)
      if (accepts_vpa(d, w) != accepts_2vpa_oracle(a, w)) ++bad;
    report("membership", words.size(), bad);
  }
  if ((want_all || property == "composition") && t && t->has_lookaround) {
    TwoVpt r = remove_lookaround(*t);
    size_t bad = 0;
    for (const auto& w : words)
      if (evaluate_2vpt_all(*t, w) != evaluate_2vpt_all(r, w)) ++bad;
    report("composition", words.size(), bad);
  }
  if ((want_all || property == "translation") && t && !t->has_lookaround &&
      t->deterministic()) {
    Stst s = d2vpt_to_stst(*t);
    size_t bad = 0;
    for (const auto& w : words)
      if (evaluate_d2vpt(*t, w, EvalMode::Checked) != evaluate_stst(s, w)) ++bad;
    report("translation", words.size(), bad);
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nested-word machine toolkit"};
  app.require_subcommand(1);

  std::string machine, input, out_path, mode = "streaming", states_arg, property;
  std::string dom_path, rng_path, second;
  size_t max_algebra = (size_t)1 << 20;
  int max_len = 6, max_depth = 4, random_words = 50;
  unsigned long long seed = 0;

  auto* v = app.add_subcommand("validate", "parse and validate a machine file");
  v->add_option("machine", machine)->required();

  auto* e = app.add_subcommand("eval", "run a transducer on one input word");
  e->add_option("machine", machine)->required();
  e->add_option("--input", input, "word text or file")->required();
  e->add_option("--mode", mode)->check(CLI::IsMember({"streaming", "checked"}));

  auto* ac = app.add_subcommand("accepts", "membership test");
  ac->add_option("machine", machine)->required();
  ac->add_option("--input", input)->required();

  auto* cv = app.add_subcommand("convert-2vpa-dvpa", "determinize a two-way machine");
  cv->add_option("machine", machine)->required();
  cv->add_option("-o", out_path)->required();
  cv->add_option("--max-algebra", max_algebra);

  auto* em = app.add_subcommand("emptiness", "emptiness test with witness");
  em->add_option("machine", machine)->required();

  auto* co = app.add_subcommand("compose", "compose a one-way vpt with a 2-way transducer");
  co->add_option("first", machine)->required();
  co->add_option("second", second)->required();
  co->add_option("-o", out_path)->required();

  auto* rl = app.add_subcommand("remove-la", "eliminate look-around");
  rl->add_option("machine", machine)->required();
  rl->add_option("-o", out_path)->required();

  auto* su = app.add_subcommand("single-use", "single-use decision");
  su->add_option("machine", machine)->required();
  su->add_option("--states", states_arg, "comma-separated tracked states (default: all)");

  auto* ts = app.add_subcommand("to-stst", "translate a d2vpt to a streaming transducer");
  ts->add_option("machine", machine)->required();
  ts->add_option("-o", out_path)->required();

  auto* tc = app.add_subcommand("typecheck", "domain/range type checking");
  tc->add_option("machine", machine)->required();
  tc->add_option("--domain", dom_path)->required();
  tc->add_option("--range", rng_path)->required();

  auto* oc = app.add_subcommand("oracle-check", "differential suites against the oracles");
  oc->add_option("machine", machine)->required();
  oc->add_option("--max-len", max_len);
  oc->add_option("--max-depth", max_depth);
  oc->add_option("--random-words", random_words);
  oc->add_option("--property", property)
      ->check(CLI::IsMember({"morphism", "membership", "composition", "translation"}));
  oc->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    int rc = app.exit(ex);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*v) return cmd_validate(machine);
    if (*e) return cmd_eval(machine, input, mode);
    if (*ac) return cmd_accepts(machine, input);
    if (*cv) return cmd_convert(machine, out_path, max_algebra);
    if (*em) return cmd_emptiness(machine);
    if (*co) return cmd_compose(machine, second, out_path);
    if (*rl) return cmd_remove_la(machine, out_path);
    if (*su) return cmd_single_use(machine, states_arg);
    if (*ts) return cmd_to_stst(machine, out_path);
    if (*tc) return cmd_typecheck(machine, dom_path, rng_path);
    if (*oc) return cmd_oracle_check(machine, max_len, max_depth, property, seed, random_words);
  } catch (const Error& ex) {
    std::cerr << "error [" << ex.code << "]: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 2;
}
