#include "fixtures.hpp"

#include <random>
#include <string>

namespace fixtures {

AlphabetRef ab1() {
  static AlphabetRef a = make_alphabet({"c"}, {"r"});
  return a;
}
AlphabetRef ab2() {
  static AlphabetRef a = make_alphabet({"a", "b"}, {"r", "s"});
  return a;
}
AlphabetRef abxy() {
  static AlphabetRef a = make_alphabet({"x", "y"}, {"u", "v"});
  return a;
}

// ---------------------------------------------------------------------------
// The block-sorting transducer. It emits the hedge sorted by block label: a
// scan in state q_i copies the blocks labeled i of the current hedge (opening
// label now, closing return when the recursion comes back in q_n) and skips
// the others; at the hedge's right end it rewinds to the left end and rescans
// for the next label. The stack remembers the enclosing call's label so the
// rescan knows where the current hedge starts.
TwoVpt sorting_transducer(int n) {
  std::vector<std::string> calls;
  for (int i = 1; i <= n; ++i) calls.push_back(std::to_string(i));
  AlphabetRef alph = make_alphabet(calls, {"r"});
  const int rsym = alph->return_id(0);

  TwoVpt t;
  t.a.alph = alph;
  // States: q_1..q_n, q_f, sk_1..sk_n, then (out, in, back, up) per scan
  // index i in 1..n-1 and enclosing label j in 0..n (0 = the left marker).
  auto q = [&](int i) { return i - 1; };
  const int qf = n;
  auto sk = [&](int i) { return n + 1 + (i - 1); };
  const int base = 2 * n + 1;
  auto grp = [&](int i, int j) { return base + ((i - 1) * (n + 1) + j) * 4; };
  auto qout = [&](int i, int j) { return grp(i, j) + 0; };
  auto qin = [&](int i, int j) { return grp(i, j) + 1; };
  auto bk = [&](int i, int j) { return grp(i, j) + 2; };
  auto up = [&](int i, int j) { return grp(i, j) + 3; };
  for (int i = 1; i <= n; ++i) t.a.states.push_back("q" + std::to_string(i));
  t.a.states.push_back("qf");
  for (int i = 1; i <= n; ++i) t.a.states.push_back("sk" + std::to_string(i));
  for (int i = 1; i < n; ++i)
    for (int j = 0; j <= n; ++j) {
      std::string sfx = std::to_string(i) + "_" + std::to_string(j);
      t.a.states.push_back("out" + sfx);
      t.a.states.push_back("in" + sfx);
      t.a.states.push_back("bk" + sfx);
      t.a.states.push_back("up" + sfx);
    }
  t.a.initial = q(1);
  t.a.finals.assign(t.a.states.size(), 0);
  t.a.finals[qf] = 1;

  // Stack: bot (left marker), skA/skB (skipping), R (rewind anchor),
  // N1/N2 (rewind block counting), s_1..s_n (enclosing label).
  const int bot = 0, skA = 1, skB = 2, RW = 3, N1 = 4, N2 = 5;
  auto sg = [&](int j) { return 5 + j; };
  t.a.stack_names = {"bot", "skA", "skB", "R", "N1", "N2"};
  for (int j = 1; j <= n; ++j) t.a.stack_names.push_back("s" + std::to_string(j));

  t.out_alph = {"<L>", "<R>"};
  for (int j = 1; j <= n; ++j) t.out_alph.push_back(std::to_string(j));
  t.out_alph.push_back("r");
  const int oL = 0, oR = 1, oret = n + 2;
  auto ocall = [&](int j) { return 1 + j; };

  auto push = [&](int q0, Dir d, int sym, int q2, Dir d2, int g, std::vector<int> out) {
    t.a.push_rules.push_back({q0, d, sym, q2, d2, g});
    t.push_out.push_back(std::move(out));
  };
  auto pop = [&](int q0, Dir d, int sym, int g, int q2, Dir d2, std::vector<int> out) {
    t.a.pop_rules.push_back({q0, d, sym, g, q2, d2});
    t.pop_out.push_back(std::move(out));
  };

  push(q(1), Dir::Fwd, kMarkL, q(1), Dir::Fwd, bot, {oL});
  for (int i = 1; i <= n; ++i) {
    // A block labeled i: emit the label and sort its subhedge from scratch.
    push(q(i), Dir::Fwd, i - 1, q(1), Dir::Fwd, sg(i), {ocall(i)});
    // Other labels: skip the whole block.
    for (int a = 1; a <= n; ++a)
      if (a != i) push(q(i), Dir::Fwd, a - 1, sk(i), Dir::Fwd, skA, {});
    for (int a = 1; a <= n; ++a) push(sk(i), Dir::Fwd, a - 1, sk(i), Dir::Fwd, skB, {});
    pop(sk(i), Dir::Fwd, rsym, skB, sk(i), Dir::Fwd, {});
    pop(sk(i), Dir::Fwd, rsym, skA, q(i), Dir::Fwd, {});
  }
  for (int i = 1; i < n; ++i) {
    // End of the current hedge while scanning for label i: rewind.
    for (int j = 1; j <= n; ++j) pop(q(i), Dir::Fwd, rsym, sg(j), qout(i, j), Dir::Bwd, {});
    pop(q(i), Dir::Fwd, kMarkR, bot, qout(i, 0), Dir::Bwd, {});
    for (int j = 0; j <= n; ++j) {
      int close = j == 0 ? kMarkR : rsym;
      push(qout(i, j), Dir::Bwd, close, qin(i, j), Dir::Bwd, RW, {});
      // Walk left over the hedge, skipping sibling blocks backward.
      push(qin(i, j), Dir::Bwd, rsym, bk(i, j), Dir::Bwd, N1, {});
      push(bk(i, j), Dir::Bwd, rsym, bk(i, j), Dir::Bwd, N2, {});
      for (int a = 1; a <= n; ++a) {
        pop(bk(i, j), Dir::Bwd, a - 1, N2, bk(i, j), Dir::Bwd, {});
        pop(bk(i, j), Dir::Bwd, a - 1, N1, qin(i, j), Dir::Bwd, {});
      }
      // The opening call (or the left marker): turn and rescan for i+1.
      int open = j == 0 ? kMarkL : j - 1;
      int g = j == 0 ? bot : sg(j);
      pop(qin(i, j), Dir::Bwd, open, RW, up(i, j), Dir::Fwd, {});
      push(up(i, j), Dir::Fwd, open, q(i + 1), Dir::Fwd, g, {});
    }
  }
  // Last scan done: close the enclosing block and resume its scan, or finish.
  for (int j = 1; j <= n; ++j) pop(q(n), Dir::Fwd, rsym, sg(j), q(j), Dir::Fwd, {oret});
  pop(q(n), Dir::Fwd, kMarkR, bot, qf, Dir::Fwd, {oR});
  return t;
}

// ---------------------------------------------------------------------------

TwoVpa lift_vpa(const Vpa& a) {
  TwoVpa t;
  t.alph = a.alph;
  t.states = a.states;
  t.states.push_back("start");
  int start = a.num_states();
  t.initial = start;
  t.finals.assign(a.finals.begin(), a.finals.end());
  t.finals.push_back(0);
  t.stack_names = a.stack_names;
  t.stack_names.push_back("m");
  int gm = (int)t.stack_names.size() - 1;
  for (int i : a.initial) t.push_rules.push_back({start, Dir::Fwd, kMarkL, i, Dir::Fwd, gm});
  for (const auto& r : a.push_rules)
    t.push_rules.push_back({r.q, Dir::Fwd, r.sym, r.q2, Dir::Fwd, r.gamma});
  for (const auto& r : a.pop_rules)
    t.pop_rules.push_back({r.q, Dir::Fwd, r.sym, r.gamma, r.q2, Dir::Fwd});
  for (int f = 0; f < a.num_states(); ++f)
    if (a.finals[f]) t.pop_rules.push_back({f, Dir::Fwd, kMarkR, gm, f, Dir::Fwd});
  return t;
}

TwoVpt lift_vpt(const Vpt& v) {
  TwoVpt t;
  t.a = lift_vpa(v.a);
  t.out_alph = v.out_alph;
  t.push_out.assign(v.a.initial.size(), {});  // the start-marker rules
  for (const auto& o : v.push_out) t.push_out.push_back(o);
  t.pop_out = v.pop_out;
  for (int f = 0; f < v.a.num_states(); ++f)
    if (v.a.finals[f]) t.pop_out.push_back({});
  return t;
}

TwoVpa random_2vpa(const AlphabetRef& alph, int n_states, int n_stack,
                   unsigned long long seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int n) { return (int)(rng() % (unsigned)n); };
  TwoVpa t;
  t.alph = alph;
  for (int i = 0; i < n_states; ++i) t.states.push_back("q" + std::to_string(i));
  for (int i = 0; i < n_stack; ++i) t.stack_names.push_back("g" + std::to_string(i));
  t.initial = 0;
  t.finals.assign(n_states, 0);
  for (int i = 0; i < n_states; ++i) t.finals[i] = rng() % 2;
  t.finals[pick(n_states)] = 1;

  std::vector<int> calls, rets;
  for (int s = 0; s < alph->num_symbols(); ++s)
    (alph->is_call(s) ? calls : rets).push_back(s);
  auto rdir = [&] { return rng() % 2 ? Dir::Fwd : Dir::Bwd; };

  t.push_rules.push_back({0, Dir::Fwd, kMarkL, pick(n_states), Dir::Fwd, pick(n_stack)});
  for (int k = 0; k < 2; ++k) {
    t.pop_rules.push_back(
        {pick(n_states), Dir::Fwd, kMarkR, pick(n_stack), pick(n_states), rdir()});
    t.pop_rules.push_back(
        {pick(n_states), Dir::Bwd, kMarkL, pick(n_stack), pick(n_states), Dir::Fwd});
    t.push_rules.push_back(
        {pick(n_states), Dir::Bwd, kMarkR, pick(n_states), rdir(), pick(n_stack)});
  }
  int budget = 4 * n_states * n_stack;
  for (int k = 0; k < budget; ++k) {
    if (rng() % 2) {
      Dir d = rdir();
      int sym = d == Dir::Fwd ? calls[pick((int)calls.size())] : rets[pick((int)rets.size())];
      t.push_rules.push_back({pick(n_states), d, sym, pick(n_states), rdir(), pick(n_stack)});
    } else {
      Dir d = rdir();
      int sym = d == Dir::Fwd ? rets[pick((int)rets.size())] : calls[pick((int)calls.size())];
      t.pop_rules.push_back(
          {pick(n_states), d, sym, pick(n_stack), pick(n_states), rdir()});
    }
  }
  return t;
}

// ---------------------------------------------------------------------------

namespace {

// One-way acceptor over ab1: even number of calls.
Vpa parity_vpa() {
  Vpa a;
  a.alph = ab1();
  a.states = {"even", "odd"};
  a.initial = {0};
  a.finals = {1, 0};
  a.stack_names = {"g"};
  a.push_rules = {{0, 0, 1, 0}, {1, 0, 0, 0}};
  a.pop_rules = {{0, 1, 0, 0}, {1, 1, 0, 1}};
  return a;
}

// One-way acceptor over ab1: accepts everything.
Vpa total_vpa() {
  Vpa a;
  a.alph = ab1();
  a.states = {"z"};
  a.initial = {0};
  a.finals = {1};
  a.stack_names = {"g"};
  a.push_rules = {{0, 0, 0, 0}};
  a.pop_rules = {{0, 1, 0, 0}};
  return a;
}

// Three full sweeps: forward, backward, forward again.
TwoVpa bouncer_2vpa() {
  TwoVpa t;
  t.alph = ab1();
  t.states = {"b0", "b1", "b2"};
  t.initial = 0;
  t.finals = {0, 0, 1};
  t.stack_names = {"g"};
  const int c = 0, r = 1;
  t.push_rules = {
      {0, Dir::Fwd, kMarkL, 0, Dir::Fwd, 0}, {0, Dir::Fwd, c, 0, Dir::Fwd, 0},
      {1, Dir::Bwd, kMarkR, 1, Dir::Bwd, 0}, {1, Dir::Bwd, r, 1, Dir::Bwd, 0},
      {2, Dir::Fwd, kMarkL, 2, Dir::Fwd, 0}, {2, Dir::Fwd, c, 2, Dir::Fwd, 0},
  };
  t.pop_rules = {
      {0, Dir::Fwd, r, 0, 0, Dir::Fwd},      {0, Dir::Fwd, kMarkR, 0, 1, Dir::Bwd},
      {1, Dir::Bwd, c, 0, 1, Dir::Bwd},      {1, Dir::Bwd, kMarkL, 0, 2, Dir::Fwd},
      {2, Dir::Fwd, r, 0, 2, Dir::Fwd},      {2, Dir::Fwd, kMarkR, 0, 2, Dir::Fwd},
  };
  return t;
}

// A dense nondeterministic machine mixing directions.
TwoVpa zigzag_2vpa() {
  TwoVpa t;
  t.alph = ab1();
  t.states = {"m0", "m1"};
  t.initial = 0;
  t.finals = {1, 0};
  t.stack_names = {"g", "h"};
  const int c = 0, r = 1;
  t.push_rules = {
      {0, Dir::Fwd, kMarkL, 0, Dir::Fwd, 0}, {0, Dir::Fwd, c, 0, Dir::Fwd, 0},
      {0, Dir::Fwd, c, 1, Dir::Bwd, 1},      {1, Dir::Fwd, c, 0, Dir::Fwd, 0},
      {1, Dir::Bwd, r, 0, Dir::Bwd, 0},      {0, Dir::Bwd, kMarkR, 0, Dir::Bwd, 0},
  };
  t.pop_rules = {
      {1, Dir::Bwd, c, 1, 0, Dir::Fwd},      {0, Dir::Fwd, r, 0, 0, Dir::Fwd},
      {0, Dir::Fwd, r, 0, 1, Dir::Bwd},      {0, Dir::Bwd, c, 0, 1, Dir::Fwd},
      {1, Dir::Fwd, r, 1, 1, Dir::Fwd},      {0, Dir::Fwd, kMarkR, 0, 0, Dir::Fwd},
      {0, Dir::Bwd, kMarkL, 0, 1, Dir::Fwd},
  };
  return t;
}

// Accepts words containing a call directly below another call (depth >= 2).
Vpa depth2_vpa() {
  Vpa a;
  a.alph = ab1();
  a.states = {"w", "s1", "done"};
  a.initial = {0};
  a.finals = {0, 0, 1};
  a.stack_names = {"g"};
  a.push_rules = {{0, 0, 0, 0}, {0, 0, 1, 0}, {1, 0, 2, 0}, {2, 0, 2, 0}};
  a.pop_rules = {{0, 1, 0, 0}, {2, 1, 0, 2}};
  return a;
}

// Nondeterministic: may consume a call forward, bounce back over it, and
// consume it forward again from the same state (single-use violation).
TwoVpa double_read_2vpa() {
  TwoVpa t;
  t.alph = ab1();
  t.states = {"q0", "q1", "q3"};
  t.initial = 0;
  t.finals = {0, 0, 1};
  t.stack_names = {"g"};
  const int c = 0, r = 1;
  t.push_rules = {
      {0, Dir::Fwd, kMarkL, 0, Dir::Fwd, 0},
      {0, Dir::Fwd, c, 1, Dir::Bwd, 0},  // first read, turn back
      {0, Dir::Fwd, c, 2, Dir::Fwd, 0},  // or proceed for good
      {2, Dir::Fwd, c, 2, Dir::Fwd, 0},
  };
  t.pop_rules = {
      {1, Dir::Bwd, c, 0, 0, Dir::Fwd},  // rewind: read it again from q0
      {2, Dir::Fwd, r, 0, 2, Dir::Fwd},
      {2, Dir::Fwd, kMarkR, 0, 2, Dir::Fwd},
  };
  return t;
}

Fsa universal_fsa(std::vector<std::string> tokens) {
  Fsa f;
  f.alphabet = std::move(tokens);
  f.states = {"u"};
  f.initial = {0};
  f.finals = {1};
  for (int s = 0; s < (int)f.alphabet.size(); ++s) f.trans.push_back({0, s, 0});
  return f;
}

}  // namespace

std::vector<TwoVpa> morphism_machines() {
  return {lift_vpa(parity_vpa()), bouncer_2vpa(), zigzag_2vpa()};
}

std::vector<TwoVpa> emptiness_machines() {
  std::vector<TwoVpa> out;
  out.push_back(lift_vpa(total_vpa()));  // nonempty (epsilon)
  TwoVpa no_finals = out.back();
  no_finals.finals.assign(no_finals.finals.size(), 0);
  out.push_back(no_finals);  // empty by finals
  TwoVpa stuck = lift_vpa(total_vpa());
  stuck.push_rules.erase(stuck.push_rules.begin());  // drop the left-marker rule
  out.push_back(stuck);                              // empty by stuck
  {
    Vpa ge1 = total_vpa();  // at least one block
    ge1.states = {"z0", "z1"};
    ge1.finals = {0, 1};
    ge1.push_rules = {{0, 0, 1, 0}, {1, 0, 1, 0}};
    ge1.pop_rules = {{1, 1, 0, 1}};
    out.push_back(lift_vpa(ge1));
  }
  out.push_back(lift_vpa(depth2_vpa()));
  out.push_back(bouncer_2vpa());
  {
    // Bounces between the markers forever; its one final state is unreachable.
    TwoVpa loop;
    loop.alph = ab1();
    loop.states = {"l0", "l1"};
    loop.initial = 0;
    loop.finals = {0, 1};
    loop.stack_names = {"g"};
    loop.push_rules = {{0, Dir::Fwd, kMarkL, 0, Dir::Fwd, 0},
                       {0, Dir::Bwd, kMarkR, 0, Dir::Bwd, 0}};
    loop.pop_rules = {{0, Dir::Fwd, kMarkR, 0, 0, Dir::Bwd},
                      {0, Dir::Bwd, kMarkL, 0, 0, Dir::Fwd}};
    out.push_back(loop);
  }
  out.push_back(random_2vpa(ab1(), 4, 2, 11));
  out.push_back(random_2vpa(ab1(), 4, 2, 12));
  out.push_back(random_2vpa(ab2(), 3, 2, 13));
  return out;
}

std::vector<SingleUseCase> single_use_cases() {
  std::vector<SingleUseCase> out;
  Vpt copy1;
  copy1.a = total_vpa();
  copy1.out_alph = {"c", "r"};
  copy1.push_out = {{0}};
  copy1.pop_out = {{1}};
  out.push_back({lift_vpt(copy1).a, {}, "one-way copy"});
  out.push_back({double_copy_2vpt(ab1()).a, {}, "double copy"});
  TwoVpa dr = double_read_2vpa();
  out.push_back({dr, {}, "double read, all tracked"});
  out.push_back({dr, {2}, "double read, sweep state tracked"});
  out.push_back({dr, {0}, "double read, bouncing state tracked"});
  out.push_back({bouncer_2vpa(), {}, "bouncer"});
  out.push_back({sorting_transducer(1).a, {}, "sorting n=1"});
  return out;
}

// ---------------------------------------------------------------------------
// Relabelers ab2 -> abxy.

Vpt relabel_det() {
  Vpt t;
  t.a.alph = ab2();
  t.a.states = {"e", "o"};
  t.a.initial = {0};
  t.a.finals = {1, 1};
  t.a.stack_names = {"ge", "go"};
  t.out_alph = {"x", "y", "u", "v"};
  const int a = 0, b = 1, r = 2, s = 3;
  for (int q = 0; q < 2; ++q)
    for (int c : {a, b}) {
      t.a.push_rules.push_back({q, c, 1 - q, q});
      t.push_out.push_back({q == 0 ? 0 : 1});  // e -> x, o -> y
    }
  for (int q = 0; q < 2; ++q)
    for (int sym : {r, s})
      for (int g = 0; g < 2; ++g) {
        t.a.pop_rules.push_back({q, sym, g, q});
        t.pop_out.push_back({sym == r ? 2 : 3});  // r -> u, s -> v
      }
  return t;
}

Vpt relabel_codet() {
  // State = parity of the suffix still to be read. Every symbol flips it, the
  // run must end in the even state, and the initial parity is guessed: total,
  // unambiguous and co-deterministic, but not deterministic. A call stores
  // the parity it was read in; its matching return always sees the opposite
  // parity (the enclosed factor has even length), so pops never get stuck.
  Vpt t;
  t.a.alph = ab2();
  t.a.states = {"e", "o"};
  t.a.initial = {0, 1};
  t.a.finals = {1, 0};  // single final: e
  t.a.stack_names = {"ge", "go"};
  t.out_alph = {"x", "y", "u", "v"};
  const int a = 0, b = 1, r = 2, s = 3;
  for (int c : {a, b}) {
    t.a.push_rules.push_back({0, c, 1, 0});
    t.push_out.push_back({0});  // x
    t.a.push_rules.push_back({1, c, 0, 1});
    t.push_out.push_back({1});  // y
  }
  for (int sym : {r, s}) {
    t.a.pop_rules.push_back({1, sym, 0, 0});
    t.pop_out.push_back({sym == r ? 2 : 3});
    t.a.pop_rules.push_back({0, sym, 1, 1});
    t.pop_out.push_back({sym == r ? 2 : 3});
  }
  return t;
}

Vpt relabel_unamb() {
  Vpt t;
  t.a.alph = ab2();
  t.a.states = {"n", "j"};  // j = a call was just opened
  t.a.initial = {0};
  t.a.finals = {1, 0};
  t.a.stack_names = {"gE", "gN"};
  t.out_alph = {"x", "y", "u", "v"};
  const int a = 0, b = 1, r = 2, s = 3;
  for (int q = 0; q < 2; ++q)
    for (int c : {a, b}) {
      t.a.push_rules.push_back({q, c, 1, 0});  // guess: subhedge empty
      t.push_out.push_back({0});               // x
      t.a.push_rules.push_back({q, c, 1, 1});  // guess: subhedge nonempty
      t.push_out.push_back({1});               // y
    }
  for (int sym : {r, s}) {
    t.a.pop_rules.push_back({1, sym, 0, 0});  // just opened + claimed empty
    t.pop_out.push_back({sym == r ? 2 : 3});
    t.a.pop_rules.push_back({0, sym, 1, 0});  // not just opened + claimed nonempty
    t.pop_out.push_back({sym == r ? 2 : 3});
  }
  return t;
}

// ---------------------------------------------------------------------------

TwoVpt copy_2vpt(const AlphabetRef& alph) {
  TwoVpt t;
  t.a.alph = alph;
  t.a.states = {"p"};
  t.a.initial = 0;
  t.a.finals = {1};
  t.a.stack_names = {"g"};
  for (int s = 0; s < alph->num_symbols(); ++s) t.out_alph.push_back(alph->name(s));
  t.a.push_rules.push_back({0, Dir::Fwd, kMarkL, 0, Dir::Fwd, 0});
  t.push_out.push_back({});
  t.a.pop_rules.push_back({0, Dir::Fwd, kMarkR, 0, 0, Dir::Fwd});
  t.pop_out.push_back({});
  for (int s = 0; s < alph->num_symbols(); ++s) {
    if (alph->is_call(s)) {
      t.a.push_rules.push_back({0, Dir::Fwd, s, 0, Dir::Fwd, 0});
      t.push_out.push_back({s});
    } else {
      t.a.pop_rules.push_back({0, Dir::Fwd, s, 0, 0, Dir::Fwd});
      t.pop_out.push_back({s});
    }
  }
  return t;
}

TwoVpt double_copy_2vpt(const AlphabetRef& alph) {
  TwoVpt t;
  t.a.alph = alph;
  t.a.states = {"p0", "p1", "p2"};
  t.a.initial = 0;
  t.a.finals = {0, 0, 1};
  t.a.stack_names = {"g"};
  for (int s = 0; s < alph->num_symbols(); ++s) t.out_alph.push_back(alph->name(s));
  auto push = [&](int q, Dir d, int sym, int q2, Dir d2, std::vector<int> o) {
    t.a.push_rules.push_back({q, d, sym, q2, d2, 0});
    t.push_out.push_back(std::move(o));
  };
  auto pop = [&](int q, Dir d, int sym, int q2, Dir d2, std::vector<int> o) {
    t.a.pop_rules.push_back({q, d, sym, 0, q2, d2});
    t.pop_out.push_back(std::move(o));
  };
  push(0, Dir::Fwd, kMarkL, 0, Dir::Fwd, {});
  pop(0, Dir::Fwd, kMarkR, 1, Dir::Bwd, {});
  push(1, Dir::Bwd, kMarkR, 1, Dir::Bwd, {});
  pop(1, Dir::Bwd, kMarkL, 2, Dir::Fwd, {});
  push(2, Dir::Fwd, kMarkL, 2, Dir::Fwd, {});
  pop(2, Dir::Fwd, kMarkR, 2, Dir::Fwd, {});
  for (int s = 0; s < alph->num_symbols(); ++s) {
    if (alph->is_call(s)) {
      push(0, Dir::Fwd, s, 0, Dir::Fwd, {s});
      pop(1, Dir::Bwd, s, 1, Dir::Bwd, {});
      push(2, Dir::Fwd, s, 2, Dir::Fwd, {s});
    } else {
      pop(0, Dir::Fwd, s, 0, Dir::Fwd, {s});
      push(1, Dir::Bwd, s, 1, Dir::Bwd, {});
      pop(2, Dir::Fwd, s, 2, Dir::Fwd, {s});
    }
  }
  return t;
}

// ---------------------------------------------------------------------------

TwoVpt lookaround_depth_tagger() {
  TwoVpt t = copy_2vpt(ab1());
  // Checker: tracks whether the position sits at the top level; accepts all.
  Vpa chk;
  chk.alph = ab1();
  chk.states = {"z0", "z1"};
  chk.initial = {0};
  chk.finals = {1, 0};
  chk.stack_names = {"h0", "h1"};
  chk.push_rules = {{0, 0, 1, 0}, {1, 0, 1, 1}};
  chk.pop_rules = {{1, 1, 0, 0}, {1, 1, 1, 1}};

  // Re-emit calls as T (top level) or D (deeper); returns as r.
  t.out_alph = {"T", "D", "r"};
  t.push_guard.assign(t.a.push_rules.size(), -1);
  t.pop_guard.assign(t.a.pop_rules.size(), -1);
  // copy_2vpt rule order: markers first, then the call push and return pop.
  t.push_out = {{}, {0}};
  t.pop_out = {{}, {2}};
  t.push_guard[1] = 0;  // call read in checker state z0: top level
  // Duplicate the call rule with the other guard and output.
  t.a.push_rules.push_back(t.a.push_rules[1]);
  t.push_out.push_back({1});
  t.push_guard.push_back(1);
  t.has_lookaround = true;
  t.checker = chk;
  return t;
}

TwoVpt lookaround_depth_limiter() {
  TwoVpt t = copy_2vpt(ab1());
  // Checker accepts exactly the words of depth <= 1.
  Vpa chk;
  chk.alph = ab1();
  chk.states = {"z0", "z1"};
  chk.initial = {0};
  chk.finals = {1, 0};
  chk.stack_names = {"h"};
  chk.push_rules = {{0, 0, 1, 0}};
  chk.pop_rules = {{1, 1, 0, 0}};
  t.push_guard.assign(t.a.push_rules.size(), -1);
  t.pop_guard.assign(t.a.pop_rules.size(), -1);
  t.push_guard[1] = 0;  // calls only fire at the top level anyway
  t.has_lookaround = true;
  t.checker = chk;
  return t;
}

std::vector<TwoVpt> translation_machines() {
  Vpt det = relabel_det();
  return {copy_2vpt(ab1()), double_copy_2vpt(ab1()), sorting_transducer(2), lift_vpt(det)};
}

// ---------------------------------------------------------------------------

std::vector<TypeTriple> typecheck_triples() {
  std::vector<TypeTriple> out;
  TwoVpt copy = copy_2vpt(ab1());
  Vpa all = total_vpa();
  Vpa none = total_vpa();
  none.finals = {0};

  Fsa univ = universal_fsa({"c", "r"});
  Fsa no_c;  // rejects any output containing c
  no_c.alphabet = {"c", "r"};
  no_c.states = {"u"};
  no_c.initial = {0};
  no_c.finals = {1};
  no_c.trans = {{0, 1, 0}};
  Fsa even_c;  // even number of c tokens
  even_c.alphabet = {"c", "r"};
  even_c.states = {"e", "o"};
  even_c.initial = {0};
  even_c.finals = {1, 0};
  even_c.trans = {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}, {1, 1, 1}};

  // A copy machine that gets stuck below depth 1.
  TwoVpt shallow;
  shallow.a.alph = ab1();
  shallow.a.states = {"d0", "d1"};
  shallow.a.initial = 0;
  shallow.a.finals = {1, 0};
  shallow.a.stack_names = {"gm", "g"};
  shallow.out_alph = {"c", "r"};
  shallow.a.push_rules = {{0, Dir::Fwd, kMarkL, 0, Dir::Fwd, 0},
                          {0, Dir::Fwd, 0, 1, Dir::Fwd, 1}};
  shallow.push_out = {{}, {0}};
  shallow.a.pop_rules = {{1, Dir::Fwd, 1, 1, 0, Dir::Fwd},
                         {0, Dir::Fwd, kMarkR, 0, 0, Dir::Fwd}};
  shallow.pop_out = {{1}, {}};

  out.push_back({copy, all, univ, true, "copy into the universal range"});
  out.push_back({copy, all, no_c, false, "copy must emit c somewhere"});
  out.push_back({double_copy_2vpt(ab1()), all, even_c, true, "doubled copy has even c count"});
  out.push_back({copy, none, no_c, true, "empty domain is fine vacuously"});
  out.push_back({shallow, all, univ, false, "depth-limited machine misses domain words"});
  return out;
}

Stst exponential_stst() {
  Stst s;
  s.alph = ab1();
  s.states = {"q"};
  s.initial = 0;
  s.stack_names = {"g"};
  s.registers = {"X"};
  s.out_alph = {"a"};
  s.push_rules = {{0, 0, 0, 0, {Term{{RegItem::Tok, 0}, {RegItem::Reg, 0}, {RegItem::Reg, 0}}}}};
  s.pop_rules = {{0, 1, 0, 0, {Term{{RegItem::StackReg, 0}}}}};
  s.final_out.assign(1, Term{{RegItem::Reg, 0}});
  return s;
}

}  // namespace fixtures
