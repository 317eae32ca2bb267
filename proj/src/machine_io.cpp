#include "nwtk/machine_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace nwtk {

namespace {

struct Tok {
  std::string s;
  bool quoted = false;
};

struct PLine {
  int no;
  std::vector<Tok> t;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error("ParseError", "line " + std::to_string(line) + ": " + msg);
}

std::vector<PLine> tokenize(const std::string& text) {
  std::vector<PLine> out;
  std::istringstream in(text);
  std::string raw;
  int no = 0;
  while (std::getline(in, raw)) {
    ++no;
    PLine pl{no, {}};
    size_t i = 0;
    while (i < raw.size()) {
      char ch = raw[i];
      if (ch == ' ' || ch == '\t' || ch == '\r') {
        ++i;
        continue;
      }
      if (ch == '#') break;
      if (ch == '"') {
        size_t j = raw.find('"', i + 1);
        if (j == std::string::npos) fail(no, "unterminated quote");
        pl.t.push_back({raw.substr(i + 1, j - i - 1), true});
        i = j + 1;
        continue;
      }
      if (ch == '{' || ch == '}' || ch == ';' || ch == '/') {
        pl.t.push_back({std::string(1, ch), false});
        ++i;
        continue;
      }
      size_t j = i;
      while (j < raw.size() && raw[j] != ' ' && raw[j] != '\t' && raw[j] != '\r' &&
             raw[j] != '#' && raw[j] != '"' && raw[j] != '{' && raw[j] != '}' &&
             raw[j] != ';' && raw[j] != '/')
        ++j;
      pl.t.push_back({raw.substr(i, j - i), false});
      i = j;
    }
    if (!pl.t.empty()) out.push_back(std::move(pl));
  }
  return out;
}

std::map<std::string, int> index_names(const std::vector<std::string>& names, int line,
                                       const std::string& what) {
  std::map<std::string, int> m;
  for (size_t i = 0; i < names.size(); ++i)
    if (!m.emplace(names[i], (int)i).second) fail(line, "duplicate " + what + ": " + names[i]);
  return m;
}

int resolve(const std::map<std::string, int>& m, const std::string& name, int line,
            const std::string& what) {
  auto it = m.find(name);
  if (it == m.end()) fail(line, "unknown " + what + ": " + name);
  return it->second;
}

Dir parse_dir(const Tok& t, int line) {
  if (t.s == "fw") return Dir::Fwd;
  if (t.s == "bw") return Dir::Bwd;
  fail(line, "expected direction fw or bw, got: " + t.s);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

// Everything collected from one machine block.
struct Block {
  std::map<std::string, std::pair<int, std::vector<std::string>>> heads;
  std::vector<PLine> rule_lines;
  std::vector<std::pair<int, std::vector<std::string>>> guard_lines;
  std::vector<PLine> checker_lines;
  bool has_checker = false;
  int first_line = 0;
};

Block split_block(const std::vector<PLine>& lines) {
  Block b;
  b.first_line = lines.empty() ? 1 : lines[0].no;
  size_t i = 0;
  while (i < lines.size()) {
    const PLine& pl = lines[i];
    const std::string& head = pl.t[0].s;
    if (!pl.t[0].quoted && head.size() > 1 && head.back() == ':') {
      std::string key = head.substr(0, head.size() - 1);
      if (key == "la-checker") {
        if (b.has_checker) fail(pl.no, "duplicate la-checker block");
        b.has_checker = true;
        ++i;
        while (i < lines.size() && lines[i].t[0].s != "end-la-checker")
          b.checker_lines.push_back(lines[i++]);
        if (i == lines.size()) fail(pl.no, "la-checker block not closed by end-la-checker");
        ++i;
        continue;
      }
      std::vector<std::string> vals;
      for (size_t k = 1; k < pl.t.size(); ++k) vals.push_back(pl.t[k].s);
      if (key == "la-guard") {
        b.guard_lines.push_back({pl.no, vals});
      } else if (!b.heads.emplace(key, std::make_pair(pl.no, vals)).second) {
        fail(pl.no, "duplicate header: " + key);
      }
      ++i;
      continue;
    }
    b.rule_lines.push_back(pl);
    ++i;
  }
  return b;
}

const std::vector<std::string>& need(const Block& b, const std::string& key) {
  auto it = b.heads.find(key);
  if (it == b.heads.end()) fail(b.first_line, "missing header: " + key + ":");
  return it->second.second;
}

std::vector<std::string> opt(const Block& b, const std::string& key) {
  auto it = b.heads.find(key);
  return it == b.heads.end() ? std::vector<std::string>{} : it->second.second;
}

int sym_of(const AlphabetRef& alph, const std::string& tok, int line, bool allow_markers) {
  auto s = alph->lookup(tok);
  if (!s) fail(line, "unknown symbol: " + tok);
  if (!allow_markers && StructuredAlphabet::is_marker(*s))
    fail(line, "marker symbol in a one-way rule: " + tok);
  return *s;
}

std::vector<int> parse_out(const PLine& pl, size_t at, const std::map<std::string, int>& outm) {
  // Optional trailing: / "tok tok ..."
  if (at >= pl.t.size()) return {};
  if (pl.t[at].s != "/" || pl.t[at].quoted) fail(pl.no, "expected / before the output word");
  if (at + 1 >= pl.t.size() || !pl.t[at + 1].quoted)
    fail(pl.no, "expected a quoted output word after /");
  if (at + 2 != pl.t.size()) fail(pl.no, "trailing tokens after the output word");
  std::vector<int> ids;
  for (const auto& tok : split_ws(pl.t[at + 1].s)) {
    auto it = outm.find(tok);
    if (it == outm.end()) fail(pl.no, "unknown output token: " + tok);
    ids.push_back(it->second);
  }
  return ids;
}

void expect_arrow(const PLine& pl, size_t at) {
  if (at >= pl.t.size() || pl.t[at].s != "->") fail(pl.no, "expected ->");
}

void expect_len(const PLine& pl, size_t n) {
  if (pl.t.size() != n) fail(pl.no, "malformed rule");
}

// ---------------------------------------------------------------------------

Fsa parse_fsa(const Block& b) {
  Fsa f;
  f.alphabet = need(b, "alphabet");
  f.states = need(b, "states");
  auto sm = index_names(f.states, b.first_line, "state");
  auto am = index_names(f.alphabet, b.first_line, "alphabet token");
  for (const auto& n : need(b, "initial")) f.initial.push_back(resolve(sm, n, b.first_line, "state"));
  f.finals.assign(f.states.size(), 0);
  for (const auto& n : opt(b, "final")) f.finals[resolve(sm, n, b.first_line, "state")] = 1;
  for (const auto& pl : b.rule_lines) {
    if (pl.t[0].s != "trans") fail(pl.no, "unexpected rule in an fsa: " + pl.t[0].s);
    expect_len(pl, 5);
    expect_arrow(pl, 3);
    f.trans.push_back({resolve(sm, pl.t[1].s, pl.no, "state"),
                       resolve(am, pl.t[2].s, pl.no, "alphabet token"),
                       resolve(sm, pl.t[4].s, pl.no, "state")});
  }
  return f;
}

struct Common {
  AlphabetRef alph;
  std::vector<std::string> states, stack;
  std::map<std::string, int> sm, gm;
  std::vector<int> initial;
  std::vector<char> finals;
};

Common parse_common(const Block& b) {
  Common c;
  c.alph = make_alphabet(need(b, "calls"), need(b, "returns"));
  c.states = need(b, "states");
  c.stack = opt(b, "stack");
  c.sm = index_names(c.states, b.first_line, "state");
  c.gm = index_names(c.stack, b.first_line, "stack symbol");
  for (const auto& n : need(b, "initial")) c.initial.push_back(resolve(c.sm, n, b.first_line, "state"));
  c.finals.assign(c.states.size(), 0);
  for (const auto& n : opt(b, "final")) c.finals[resolve(c.sm, n, b.first_line, "state")] = 1;
  return c;
}

// One-way machine; outputs parsed when outm is non-null.
Vpt parse_one_way(const Block& b, const std::map<std::string, int>* outm) {
  Common c = parse_common(b);
  Vpt t;
  t.a.alph = c.alph;
  t.a.states = c.states;
  t.a.stack_names = c.stack;
  t.a.initial = c.initial;
  t.a.finals = c.finals;
  for (const auto& pl : b.rule_lines) {
    if (pl.t[0].s == "push") {
      // push q c -> q' g [/ "..."]
      if (pl.t.size() < 6) fail(pl.no, "malformed push rule");
      expect_arrow(pl, 3);
      t.a.push_rules.push_back({resolve(c.sm, pl.t[1].s, pl.no, "state"),
                                sym_of(c.alph, pl.t[2].s, pl.no, false),
                                resolve(c.sm, pl.t[4].s, pl.no, "state"),
                                resolve(c.gm, pl.t[5].s, pl.no, "stack symbol")});
      if (!c.alph->is_call(t.a.push_rules.back().sym)) fail(pl.no, "push needs a call symbol");
      if (outm)
        t.push_out.push_back(parse_out(pl, 6, *outm));
      else if (pl.t.size() != 6)
        fail(pl.no, "trailing tokens (outputs belong to transducers)");
    } else if (pl.t[0].s == "pop") {
      // pop q r g -> q' [/ "..."]
      if (pl.t.size() < 6) fail(pl.no, "malformed pop rule");
      expect_arrow(pl, 4);
      t.a.pop_rules.push_back({resolve(c.sm, pl.t[1].s, pl.no, "state"),
                               sym_of(c.alph, pl.t[2].s, pl.no, false),
                               resolve(c.gm, pl.t[3].s, pl.no, "stack symbol"),
                               resolve(c.sm, pl.t[5].s, pl.no, "state")});
      if (!c.alph->is_return(t.a.pop_rules.back().sym)) fail(pl.no, "pop needs a return symbol");
      if (outm)
        t.pop_out.push_back(parse_out(pl, 6, *outm));
      else if (pl.t.size() != 6)
        fail(pl.no, "trailing tokens (outputs belong to transducers)");
    } else {
      fail(pl.no, "unexpected rule in a one-way machine: " + pl.t[0].s);
    }
  }
  return t;
}

// Two-way machine; outputs parsed when outm is non-null. Fills rule_order
// with ('P', idx) / ('O', idx) in file order for guard resolution.
TwoVpt parse_two_way(const Block& b, const std::map<std::string, int>* outm,
                     std::vector<std::pair<char, int>>* rule_order) {
  Common c = parse_common(b);
  if (c.initial.size() != 1) fail(b.first_line, "a two-way machine needs exactly one initial state");
  TwoVpt t;
  t.a.alph = c.alph;
  t.a.states = c.states;
  t.a.stack_names = c.stack;
  t.a.initial = c.initial[0];
  t.a.finals = c.finals;
  for (const auto& pl : b.rule_lines) {
    if (pl.t[0].s == "push") {
      // push q d c -> q' d' g [/ "..."]
      if (pl.t.size() < 8) fail(pl.no, "malformed push rule");
      expect_arrow(pl, 4);
      t.a.push_rules.push_back({resolve(c.sm, pl.t[1].s, pl.no, "state"), parse_dir(pl.t[2], pl.no),
                                sym_of(c.alph, pl.t[3].s, pl.no, true),
                                resolve(c.sm, pl.t[5].s, pl.no, "state"), parse_dir(pl.t[6], pl.no),
                                resolve(c.gm, pl.t[7].s, pl.no, "stack symbol")});
      if (rule_order) rule_order->push_back({'P', (int)t.a.push_rules.size() - 1});
      if (outm)
        t.push_out.push_back(parse_out(pl, 8, *outm));
      else if (pl.t.size() != 8)
        fail(pl.no, "trailing tokens (outputs belong to transducers)");
    } else if (pl.t[0].s == "pop") {
      // pop q d c g -> q' d' [/ "..."]
      if (pl.t.size() < 8) fail(pl.no, "malformed pop rule");
      expect_arrow(pl, 5);
      t.a.pop_rules.push_back({resolve(c.sm, pl.t[1].s, pl.no, "state"), parse_dir(pl.t[2], pl.no),
                               sym_of(c.alph, pl.t[3].s, pl.no, true),
                               resolve(c.gm, pl.t[4].s, pl.no, "stack symbol"),
                               resolve(c.sm, pl.t[6].s, pl.no, "state"),
                               parse_dir(pl.t[7], pl.no)});
      if (rule_order) rule_order->push_back({'O', (int)t.a.pop_rules.size() - 1});
      if (outm)
        t.pop_out.push_back(parse_out(pl, 8, *outm));
      else if (pl.t.size() != 8)
        fail(pl.no, "trailing tokens (outputs belong to transducers)");
    } else {
      fail(pl.no, "unexpected rule in a two-way machine: " + pl.t[0].s);
    }
  }
  return t;
}

Stst parse_stst(const Block& b) {
  Common c = parse_common(b);
  if (c.initial.size() != 1) fail(b.first_line, "an stst needs exactly one initial state");
  Stst s;
  s.alph = c.alph;
  s.states = c.states;
  s.stack_names = c.stack;
  s.initial = c.initial[0];
  s.registers = need(b, "registers");
  s.out_alph = need(b, "output-alphabet");
  auto rm = index_names(s.registers, b.first_line, "register");
  auto om = index_names(s.out_alph, b.first_line, "output token");
  s.final_out.assign(s.states.size(), std::nullopt);

  auto parse_items = [&](const PLine& pl, size_t from, size_t to, bool allow_stack) {
    Term term;
    for (size_t k = from; k < to; ++k) {
      const std::string& tok = pl.t[k].s;
      if (tok.size() > 1 && tok.back() == '\'' && rm.count(tok.substr(0, tok.size() - 1))) {
        if (!allow_stack) fail(pl.no, "stacked register outside a pop update: " + tok);
        term.push_back({RegItem::StackReg, rm.at(tok.substr(0, tok.size() - 1))});
      } else if (rm.count(tok)) {
        term.push_back({RegItem::Reg, rm.at(tok)});
      } else if (om.count(tok)) {
        term.push_back({RegItem::Tok, om.at(tok)});
      } else {
        fail(pl.no, "unknown term item: " + tok);
      }
    }
    return term;
  };
  // { X <- items ; Y <- items } starting at pl.t[at] == "{".
  auto parse_block = [&](const PLine& pl, size_t at, bool allow_stack) {
    if (at >= pl.t.size() || pl.t[at].s != "{") fail(pl.no, "expected { updates }");
    std::vector<Term> upd(s.registers.size());
    std::vector<char> seen(s.registers.size(), 0);
    size_t k = at + 1;
    while (k < pl.t.size() && pl.t[k].s != "}") {
      int reg = resolve(rm, pl.t[k].s, pl.no, "register");
      if (seen[reg]) fail(pl.no, "register assigned twice: " + pl.t[k].s);
      seen[reg] = 1;
      if (k + 1 >= pl.t.size() || pl.t[k + 1].s != "<-") fail(pl.no, "expected <-");
      size_t e = k + 2;
      while (e < pl.t.size() && pl.t[e].s != ";" && pl.t[e].s != "}") ++e;
      upd[reg] = parse_items(pl, k + 2, e, allow_stack);
      k = (e < pl.t.size() && pl.t[e].s == ";") ? e + 1 : e;
    }
    if (k >= pl.t.size()) fail(pl.no, "update block not closed by }");
    if (k + 1 != pl.t.size()) fail(pl.no, "trailing tokens after the update block");
    return upd;
  };

  for (const auto& pl : b.rule_lines) {
    if (pl.t[0].s == "upd-push") {
      // upd-push q c -> q' g { ... }
      if (pl.t.size() < 7) fail(pl.no, "malformed upd-push rule");
      expect_arrow(pl, 3);
      s.push_rules.push_back({resolve(c.sm, pl.t[1].s, pl.no, "state"),
                              sym_of(c.alph, pl.t[2].s, pl.no, false),
                              resolve(c.sm, pl.t[4].s, pl.no, "state"),
                              resolve(c.gm, pl.t[5].s, pl.no, "stack symbol"),
                              parse_block(pl, 6, false)});
    } else if (pl.t[0].s == "upd-pop") {
      // upd-pop q r g -> q' { ... }
      if (pl.t.size() < 7) fail(pl.no, "malformed upd-pop rule");
      expect_arrow(pl, 4);
      s.pop_rules.push_back({resolve(c.sm, pl.t[1].s, pl.no, "state"),
                             sym_of(c.alph, pl.t[2].s, pl.no, false),
                             resolve(c.gm, pl.t[3].s, pl.no, "stack symbol"),
                             resolve(c.sm, pl.t[5].s, pl.no, "state"),
                             parse_block(pl, 6, true)});
    } else if (pl.t[0].s == "final-out") {
      // final-out q -> items...
      if (pl.t.size() < 3) fail(pl.no, "malformed final-out rule");
      expect_arrow(pl, 2);
      int q = resolve(c.sm, pl.t[1].s, pl.no, "state");
      if (s.final_out[q]) fail(pl.no, "duplicate final-out for state " + pl.t[1].s);
      s.final_out[q] = parse_items(pl, 3, pl.t.size(), false);
    } else {
      fail(pl.no, "unexpected rule in an stst: " + pl.t[0].s);
    }
  }
  return s;
}

MachineFile parse_lines(const std::vector<PLine>& lines) {
  Block b = split_block(lines);
  const auto& kv = need(b, "kind");
  if (kv.size() != 1) fail(b.heads.at("kind").first, "kind: takes one value");
  std::string kind = kv[0];
  MachineFile mf;
  mf.kind = kind == "2vpt" ? "d2vpt" : kind;

  auto no_guards = [&]() {
    if (b.has_checker || !b.guard_lines.empty())
      fail(b.first_line, "look-around only applies to two-way transducers");
  };

  if (kind == "fsa") {
    no_guards();
    mf.m = parse_fsa(b);
  } else if (kind == "vpa" || kind == "dvpa") {
    no_guards();
    mf.m = parse_one_way(b, nullptr).a;
  } else if (kind == "vpt") {
    no_guards();
    auto om = index_names(need(b, "output-alphabet"), b.first_line, "output token");
    Vpt t = parse_one_way(b, &om);
    t.out_alph = need(b, "output-alphabet");
    mf.m = std::move(t);
  } else if (kind == "2vpa") {
    no_guards();
    TwoVpt t = parse_two_way(b, nullptr, nullptr);
    mf.m = std::move(t.a);
  } else if (kind == "d2vpt" || kind == "2vpt") {
    auto om = index_names(need(b, "output-alphabet"), b.first_line, "output token");
    std::vector<std::pair<char, int>> order;
    TwoVpt t = parse_two_way(b, &om, &order);
    t.out_alph = need(b, "output-alphabet");
    if (b.has_checker) {
      MachineFile chk = parse_lines(b.checker_lines);
      if (!std::holds_alternative<Vpa>(chk.m))
        fail(b.first_line, "la-checker must hold a vpa or dvpa");
      t.checker = std::get<Vpa>(chk.m);
      t.has_lookaround = true;
      t.push_guard.assign(t.a.push_rules.size(), -1);
      t.pop_guard.assign(t.a.pop_rules.size(), -1);
      auto csm = index_names(t.checker.states, b.first_line, "checker state");
      for (const auto& [no, vals] : b.guard_lines) {
        if (vals.size() != 2) fail(no, "la-guard: takes a rule id and a checker state");
        int id;
        try {
          id = std::stoi(vals[0]);
        } catch (...) {
          fail(no, "bad rule id: " + vals[0]);
        }
        if (id < 1 || id > (int)order.size()) fail(no, "rule id out of range: " + vals[0]);
        int g = resolve(csm, vals[1], no, "checker state");
        auto [which, idx] = order[id - 1];
        int& slot = which == 'P' ? t.push_guard[idx] : t.pop_guard[idx];
        if (slot != -1) fail(no, "rule guarded twice: " + vals[0]);
        slot = g;
      }
    } else if (!b.guard_lines.empty()) {
      fail(b.guard_lines[0].first, "la-guard without an la-checker block");
    }
    mf.m = std::move(t);
  } else if (kind == "stst") {
    no_guards();
    mf.m = parse_stst(b);
  } else {
    fail(b.heads.at("kind").first, "unknown kind: " + kind);
  }
  return mf;
}

// ---------------------------------------------------------------------------
// Serialization.

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += v[i];
  }
  return s;
}

void emit_common(std::ostream& os, const std::string& kind, const AlphabetRef& alph,
                 const std::vector<std::string>& states, const std::vector<int>& initial,
                 const std::vector<char>& finals, const std::vector<std::string>& stack) {
  os << "kind: " << kind << "\n";
  os << "calls: " << join(alph->call_names()) << "\n";
  os << "returns: " << join(alph->return_names()) << "\n";
  os << "states: " << join(states) << "\n";
  os << "initial:";
  for (int i : initial) os << ' ' << states[i];
  os << "\nfinal:";
  for (size_t i = 0; i < finals.size(); ++i)
    if (finals[i]) os << ' ' << states[i];
  os << "\nstack: " << join(stack) << "\n";
}

void emit_out(std::ostream& os, const std::vector<int>& ids,
              const std::vector<std::string>& out_alph) {
  os << " / \"";
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) os << ' ';
    os << out_alph[ids[i]];
  }
  os << '"';
}

}  // namespace

std::string serialize_fsa(const Fsa& f) {
  std::ostringstream os;
  os << "kind: fsa\n";
  os << "alphabet: " << join(f.alphabet) << "\n";
  os << "states: " << join(f.states) << "\n";
  os << "initial:";
  for (int i : f.initial) os << ' ' << f.states[i];
  os << "\nfinal:";
  for (size_t i = 0; i < f.finals.size(); ++i)
    if (f.finals[i]) os << ' ' << f.states[i];
  os << "\n";
  for (const auto& [q, a, q2] : f.trans)
    os << "trans " << f.states[q] << ' ' << f.alphabet[a] << " -> " << f.states[q2] << "\n";
  return os.str();
}

std::string serialize_vpa(const Vpa& a, const std::string& kind) {
  std::ostringstream os;
  emit_common(os, kind, a.alph, a.states, a.initial, a.finals, a.stack_names);
  for (const auto& r : a.push_rules)
    os << "push " << a.states[r.q] << ' ' << a.alph->name(r.sym) << " -> " << a.states[r.q2] << ' '
       << a.stack_names[r.gamma] << "\n";
  for (const auto& r : a.pop_rules)
    os << "pop " << a.states[r.q] << ' ' << a.alph->name(r.sym) << ' ' << a.stack_names[r.gamma]
       << " -> " << a.states[r.q2] << "\n";
  return os.str();
}

std::string serialize_vpt(const Vpt& t, const std::string& kind) {
  std::ostringstream os;
  emit_common(os, kind, t.a.alph, t.a.states, t.a.initial, t.a.finals, t.a.stack_names);
  os << "output-alphabet: " << join(t.out_alph) << "\n";
  for (size_t i = 0; i < t.a.push_rules.size(); ++i) {
    const auto& r = t.a.push_rules[i];
    os << "push " << t.a.states[r.q] << ' ' << t.a.alph->name(r.sym) << " -> " << t.a.states[r.q2]
       << ' ' << t.a.stack_names[r.gamma];
    emit_out(os, t.push_out[i], t.out_alph);
    os << "\n";
  }
  for (size_t i = 0; i < t.a.pop_rules.size(); ++i) {
    const auto& r = t.a.pop_rules[i];
    os << "pop " << t.a.states[r.q] << ' ' << t.a.alph->name(r.sym) << ' '
       << t.a.stack_names[r.gamma] << " -> " << t.a.states[r.q2];
    emit_out(os, t.pop_out[i], t.out_alph);
    os << "\n";
  }
  return os.str();
}

std::string serialize_2vpa(const TwoVpa& a) {
  std::ostringstream os;
  emit_common(os, "2vpa", a.alph, a.states, {a.initial}, a.finals, a.stack_names);
  for (const auto& r : a.push_rules)
    os << "push " << a.states[r.q] << ' ' << dir_token(r.d) << ' ' << a.alph->name(r.sym) << " -> "
       << a.states[r.q2] << ' ' << dir_token(r.d2) << ' ' << a.stack_names[r.gamma] << "\n";
  for (const auto& r : a.pop_rules)
    os << "pop " << a.states[r.q] << ' ' << dir_token(r.d) << ' ' << a.alph->name(r.sym) << ' '
       << a.stack_names[r.gamma] << " -> " << a.states[r.q2] << ' ' << dir_token(r.d2) << "\n";
  return os.str();
}

std::string serialize_d2vpt(const TwoVpt& t, const std::string& kind) {
  std::ostringstream os;
  emit_common(os, kind, t.a.alph, t.a.states, {t.a.initial}, t.a.finals, t.a.stack_names);
  os << "output-alphabet: " << join(t.out_alph) << "\n";
  for (size_t i = 0; i < t.a.push_rules.size(); ++i) {
    const auto& r = t.a.push_rules[i];
    os << "push " << t.a.states[r.q] << ' ' << dir_token(r.d) << ' ' << t.a.alph->name(r.sym)
       << " -> " << t.a.states[r.q2] << ' ' << dir_token(r.d2) << ' ' << t.a.stack_names[r.gamma];
    emit_out(os, t.push_out[i], t.out_alph);
    os << "\n";
  }
  for (size_t i = 0; i < t.a.pop_rules.size(); ++i) {
    const auto& r = t.a.pop_rules[i];
    os << "pop " << t.a.states[r.q] << ' ' << dir_token(r.d) << ' ' << t.a.alph->name(r.sym) << ' '
       << t.a.stack_names[r.gamma] << " -> " << t.a.states[r.q2] << ' ' << dir_token(r.d2);
    emit_out(os, t.pop_out[i], t.out_alph);
    os << "\n";
  }
  if (t.has_lookaround) {
    os << "la-checker:\n" << serialize_vpa(t.checker) << "end-la-checker\n";
    for (size_t i = 0; i < t.push_guard.size(); ++i)
      if (t.push_guard[i] >= 0)
        os << "la-guard: " << (i + 1) << ' ' << t.checker.states[t.push_guard[i]] << "\n";
    for (size_t i = 0; i < t.pop_guard.size(); ++i)
      if (t.pop_guard[i] >= 0)
        os << "la-guard: " << (t.push_guard.size() + i + 1) << ' '
           << t.checker.states[t.pop_guard[i]] << "\n";
  }
  return os.str();
}

std::string serialize_stst(const Stst& s) {
  std::ostringstream os;
  emit_common(os, "stst", s.alph, s.states, {s.initial},
              std::vector<char>(s.states.size(), 0), s.stack_names);
  os << "registers: " << join(s.registers) << "\n";
  os << "output-alphabet: " << join(s.out_alph) << "\n";
  auto item = [&](const RegItem& it) -> std::string {
    switch (it.kind) {
      case RegItem::Tok:
        return s.out_alph[it.id];
      case RegItem::Reg:
        return s.registers[it.id];
      default:
        return s.registers[it.id] + "'";
    }
  };
  auto block = [&](const std::vector<Term>& upd) {
    std::string b = "{";
    for (size_t r = 0; r < upd.size(); ++r) {
      b += " " + s.registers[r] + " <-";
      for (const auto& it : upd[r]) b += " " + item(it);
      b += (r + 1 < upd.size()) ? " ;" : " ";
    }
    return b + "}";
  };
  for (const auto& r : s.push_rules)
    os << "upd-push " << s.states[r.q] << ' ' << s.alph->name(r.sym) << " -> " << s.states[r.q2]
       << ' ' << s.stack_names[r.gamma] << ' ' << block(r.store) << "\n";
  for (const auto& r : s.pop_rules)
    os << "upd-pop " << s.states[r.q] << ' ' << s.alph->name(r.sym) << ' '
       << s.stack_names[r.gamma] << " -> " << s.states[r.q2] << ' ' << block(r.update) << "\n";
  for (size_t q = 0; q < s.final_out.size(); ++q) {
    if (!s.final_out[q]) continue;
    os << "final-out " << s.states[q] << " ->";
    for (const auto& it : *s.final_out[q]) os << ' ' << item(it);
    os << "\n";
  }
  return os.str();
}

std::string serialize_machine(const MachineFile& mf) {
  return std::visit(
      [&](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Vpa>) return serialize_vpa(m, mf.kind);
        if constexpr (std::is_same_v<T, Vpt>) return serialize_vpt(m, mf.kind);
        if constexpr (std::is_same_v<T, TwoVpa>) return serialize_2vpa(m);
        if constexpr (std::is_same_v<T, TwoVpt>) return serialize_d2vpt(m, mf.kind);
        if constexpr (std::is_same_v<T, Stst>) return serialize_stst(m);
        if constexpr (std::is_same_v<T, Fsa>) return serialize_fsa(m);
      },
      mf.m);
}

MachineFile parse_machine(const std::string& text) { return parse_lines(tokenize(text)); }

MachineFile load_machine(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_machine(os.str());
}

void save_machine(const MachineFile& mf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("IoError", "cannot open " + path + " for writing");
  out << serialize_machine(mf);
}

}  // namespace nwtk
