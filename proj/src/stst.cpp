#include "nwtk/stst.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace nwtk {

void Stst::validate() const {
  if (!alph) throw Error("BadMachine", "missing alphabet");
  if (states.empty()) throw Error("BadMachine", "no states");
  if (initial < 0 || initial >= num_states()) throw Error("BadMachine", "initial out of range");
  if ((int)final_out.size() != num_states()) throw Error("BadMachine", "final-out size mismatch");
  if (stack_names.empty()) throw Error("BadMachine", "no stack symbols");
  auto chk_term = [&](const Term& t, bool allow_stack) {
    for (const auto& it : t) {
      switch (it.kind) {
        case RegItem::Tok:
          if (it.id < 0 || it.id >= (int)out_alph.size())
            throw Error("BadMachine", "output token out of range");
          break;
        case RegItem::StackReg:
          if (!allow_stack) throw Error("BadMachine", "stacked register outside a pop update");
          [[fallthrough]];
        case RegItem::Reg:
          if (it.id < 0 || it.id >= (int)registers.size())
            throw Error("BadMachine", "register out of range");
          break;
      }
    }
  };
  auto chk_q = [&](int q) {
    if (q < 0 || q >= num_states()) throw Error("BadMachine", "rule state out of range");
  };
  for (const auto& r : push_rules) {
    chk_q(r.q);
    chk_q(r.q2);
    if (r.sym < 0 || !alph->is_call(r.sym)) throw Error("BadMachine", "push rule needs a call");
    if (r.gamma < 0 || r.gamma >= (int)stack_names.size())
      throw Error("BadMachine", "stack symbol out of range");
    if (r.store.size() != registers.size()) throw Error("BadMachine", "store term count mismatch");
    for (const auto& t : r.store) chk_term(t, false);
  }
  for (const auto& r : pop_rules) {
    chk_q(r.q);
    chk_q(r.q2);
    if (r.sym < 0 || !alph->is_return(r.sym)) throw Error("BadMachine", "pop rule needs a return");
    if (r.gamma < 0 || r.gamma >= (int)stack_names.size())
      throw Error("BadMachine", "stack symbol out of range");
    if (r.update.size() != registers.size())
      throw Error("BadMachine", "update term count mismatch");
    for (const auto& t : r.update) chk_term(t, true);
  }
  for (const auto& f : final_out)
    if (f) chk_term(*f, false);
}

bool Stst::deterministic() const {
  std::set<std::pair<int, int>> pk;
  for (const auto& r : push_rules)
    if (!pk.emplace(r.q, r.sym).second) return false;
  std::set<std::tuple<int, int, int>> ok;
  for (const auto& r : pop_rules)
    if (!ok.emplace(r.q, r.sym, r.gamma).second) return false;
  return true;
}

bool copyless(const Stst& s) {
  auto once = [&](const std::vector<const Term*>& terms) {
    std::set<std::pair<int, int>> used;  // (kind, id)
    for (const Term* t : terms)
      for (const auto& it : *t)
        if (it.kind != RegItem::Tok && !used.emplace((int)it.kind, it.id).second) return false;
    return true;
  };
  for (const auto& r : s.push_rules) {
    std::vector<const Term*> ts;
    for (const auto& t : r.store) ts.push_back(&t);
    if (!once(ts)) return false;
  }
  for (const auto& r : s.pop_rules) {
    std::vector<const Term*> ts;
    for (const auto& t : r.update) ts.push_back(&t);
    if (!once(ts)) return false;
  }
  for (const auto& f : s.final_out)
    if (f && !once({&*f})) return false;
  return true;
}

std::optional<std::vector<std::string>> evaluate_stst(const Stst& s, const NestedWord& w) {
  s.validate();
  if (!s.deterministic()) throw Error("NotDeterministic", "evaluation needs a deterministic machine");
  using Val = std::vector<int>;
  std::vector<Val> regs(s.registers.size());
  std::vector<std::pair<int, std::vector<Val>>> stack;
  auto eval = [&](const Term& t, const std::vector<Val>& cur, const std::vector<Val>* saved) {
    Val out;
    for (const auto& it : t) {
      if (it.kind == RegItem::Tok)
        out.push_back(it.id);
      else if (it.kind == RegItem::Reg)
        out.insert(out.end(), cur[it.id].begin(), cur[it.id].end());
      else
        out.insert(out.end(), (*saved)[it.id].begin(), (*saved)[it.id].end());
    }
    return out;
  };
  int q = s.initial;
  for (int pos = 0; pos < w.size(); ++pos) {
    int sym = w.syms[pos];
    if (s.alph->is_call(sym)) {
      const Stst::PushRule* rule = nullptr;
      for (const auto& r : s.push_rules)
        if (r.q == q && r.sym == sym) rule = &r;
      if (!rule) return std::nullopt;
      std::vector<Val> saved(s.registers.size());
      for (size_t i = 0; i < saved.size(); ++i) saved[i] = eval(rule->store[i], regs, nullptr);
      stack.emplace_back(rule->gamma, std::move(saved));
      for (auto& v : regs) v.clear();
      q = rule->q2;
    } else {
      if (stack.empty()) return std::nullopt;
      const Stst::PopRule* rule = nullptr;
      for (const auto& r : s.pop_rules)
        if (r.q == q && r.sym == sym && r.gamma == stack.back().first) rule = &r;
      if (!rule) return std::nullopt;
      std::vector<Val> next(s.registers.size());
      for (size_t i = 0; i < next.size(); ++i)
        next[i] = eval(rule->update[i], regs, &stack.back().second);
      stack.pop_back();
      regs = std::move(next);
      q = rule->q2;
    }
  }
  if (!s.final_out[q]) return std::nullopt;
  Val out = eval(*s.final_out[q], regs, nullptr);
  std::vector<std::string> toks;
  toks.reserve(out.size());
  for (int id : out) toks.push_back(s.out_alph[id]);
  return toks;
}

// ---------------------------------------------------------------------------
// Translation from deterministic two-way transducers. The traversal
// combinators are instantiated with matrices whose entries carry the output
// word produced along that entry, over output tokens and placeholders that
// stand for the registers of the enclosing context (StackReg) or of the
// inner subtree (Reg).

namespace {

struct OEntry {
  int8_t st = 0;  // 0 absent, 1 word, 2 conflicting words
  std::vector<int> w;
};

struct OutMat {
  int n = 0;
  std::vector<OEntry> e;
  OutMat() = default;
  explicit OutMat(int n) : n(n), e((size_t)n * n) {}
  OEntry& at(int a, int b) { return e[(size_t)a * n + b]; }
  const OEntry& at(int a, int b) const { return e[(size_t)a * n + b]; }
  bool operator==(const OutMat& o) const {
    if (n != o.n) return false;
    for (size_t i = 0; i < e.size(); ++i) {
      if (e[i].st != o.e[i].st) return false;
      if (e[i].st == 1 && e[i].w != o.e[i].w) return false;
    }
    return true;
  }
};

// Merge a candidate value into an entry: distinct words conflict.
void merge(OEntry& dst, int8_t st, const std::vector<int>& w) {
  if (st == 0) return;
  if (dst.st == 0) {
    dst.st = st;
    dst.w = w;
  } else if (dst.st == 1 && (st == 2 || dst.w != w)) {
    dst.st = 2;
    dst.w.clear();
  }
}

struct OutAlg {
  using Elem = OutMat;
  const TwoVpt* t;
  int n;

  OutMat zero() const { return OutMat(n); }
  OutMat id() const {
    OutMat m(n);
    for (int i = 0; i < n; ++i) m.at(i, i).st = 1;
    return m;
  }
  OutMat unite(const OutMat& a, const OutMat& b) const {
    OutMat m = a;
    for (size_t i = 0; i < m.e.size(); ++i) merge(m.e[i], b.e[i].st, b.e[i].w);
    return m;
  }
  OutMat compose(const OutMat& a, const OutMat& b) const {
    OutMat m(n);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        const OEntry& ab = a.at(x, y);
        if (!ab.st) continue;
        for (int z = 0; z < n; ++z) {
          const OEntry& bc = b.at(y, z);
          if (!bc.st) continue;
          if (ab.st == 2 || bc.st == 2) {
            merge(m.at(x, z), 2, {});
          } else {
            std::vector<int> w = ab.w;
            w.insert(w.end(), bc.w.begin(), bc.w.end());
            merge(m.at(x, z), 1, w);
          }
        }
      }
    return m;
  }
  OutMat star(const OutMat& a) const {
    OutMat s = unite(id(), a);
    for (;;) {
      OutMat next = unite(s, compose(s, s));
      if (next == s) return s;
      s = std::move(next);
    }
  }
  OutMat single(int q, int q2, const std::vector<int>& out) const {
    OutMat m(n);
    m.at(q, q2).st = 1;
    m.at(q, q2).w = out;
    return m;
  }
  OutMat push_single(int i) const {
    return single(t->a.push_rules[i].q, t->a.push_rules[i].q2, t->push_out[i]);
  }
  OutMat pop_single(int i) const {
    return single(t->a.pop_rules[i].q, t->a.pop_rules[i].q2, t->pop_out[i]);
  }
};

}  // namespace

Stst d2vpt_to_stst(const TwoVpt& t, size_t max_elements) {
  t.validate();
  if (t.has_lookaround)
    throw Error("HasLookAround", "eliminate the look-around before translating");
  if (!t.deterministic()) throw Error("NotDeterministic", "translation needs a deterministic machine");
  TraversalAlgebra alg = compute_algebra(t.a, max_elements);
  const int n = t.a.num_states();
  const int nn = n * n;
  const auto& al = *t.a.alph;
  const int NE = alg.size();

  Stst s;
  s.alph = t.a.alph;
  s.initial = alg.unit;
  s.out_alph = t.out_alph;
  for (int i = 0; i < NE; ++i) s.states.push_back("m" + std::to_string(i));
  static const char* quad_name[4] = {"ll", "lr", "rl", "rr"};
  for (int quad = 0; quad < 4; ++quad)
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        s.registers.push_back(std::string("x") + quad_name[quad] + "_" + t.a.states[p] + "_" +
                              t.a.states[q]);
  const int nreg = 4 * nn;
  auto ridx = [&](int quad, int p, int q) { return (quad * n + p) * n + q; };

  // Placeholder items: negative codes distinguishing the two register banks.
  auto ph = [&](int xi, int quad, int p, int q) {
    return -(1 + (xi - 1) * nreg + ridx(quad, p, q));
  };
  auto decode = [&](const OEntry& ent, const char* where) -> Term {
    if (ent.st == 0) return {};
    if (ent.st == 2)
      throw Error("ProducingCycle",
                  std::string("a loop of the machine produces output (") + where + ")");
    Term term;
    for (int code : ent.w) {
      if (code >= 0) {
        term.push_back({RegItem::Tok, code});
      } else {
        int v = -code - 1;
        int xi = v / nreg + 1;
        int r = v % nreg;
        term.push_back({xi == 1 ? RegItem::StackReg : RegItem::Reg, r});
      }
    }
    return term;
  };
  OutAlg oalg{&t, n};
  auto sym_quad = [&](const Traversal& tr, int xi) {
    Quad<OutMat> q{OutMat(n), OutMat(n), OutMat(n), OutMat(n)};
    const Rel* rels[4] = {&tr.ll, &tr.lr, &tr.rl, &tr.rr};
    OutMat* mats[4] = {&q.ll, &q.lr, &q.rl, &q.rr};
    for (int quad = 0; quad < 4; ++quad)
      for (int p = 0; p < n; ++p)
        for (int qq = 0; qq < n; ++qq)
          if (rels[quad]->get(p, qq)) {
            mats[quad]->at(p, qq).st = 1;
            mats[quad]->at(p, qq).w = {ph(xi, quad, p, qq)};
          }
    return q;
  };

  // Reachable states and stack symbols (over-approximation: any reachable
  // element may sit under any created stack symbol).
  auto gidx = [&](int c, int m) { return c * NE + m; };
  std::set<int> reach{alg.unit};
  std::set<std::pair<int, int>> gammas;  // (c, m)
  bool grew = true;
  while (grew) {
    grew = false;
    std::set<int> snapshot = reach;
    for (int m : snapshot)
      for (int c = 0; c < al.num_calls(); ++c) {
        if (gammas.insert({c, m}).second) grew = true;
        if (reach.insert(alg.unit).second) grew = true;
      }
    for (int mp : snapshot)
      for (const auto& [c, m] : gammas)
        for (int ri = 0; ri < al.num_returns(); ++ri) {
          int r = al.return_id(ri);
          int tgt = alg.concat_idx(m, alg.wrap_idx(c, mp, r));
          if (reach.insert(tgt).second) grew = true;
        }
  }

  for (int c = 0; c < al.num_calls(); ++c)
    for (int m = 0; m < NE; ++m)
      s.stack_names.push_back(al.name(c) + "|m" + std::to_string(m));

  // Pushes: save every register, reset to the empty hedge.
  std::vector<Term> ident(nreg);
  for (int r = 0; r < nreg; ++r) ident[r] = {RegItem{RegItem::Reg, r}};
  for (int m : reach)
    for (int c = 0; c < al.num_calls(); ++c)
      s.push_rules.push_back({m, c, alg.unit, gidx(c, m), ident});

  // Pops: the new prefix traversal is concat(outer prefix, wrap(c, inner, r));
  // its entry outputs are assembled from the saved registers (outer) and the
  // current ones (inner).
  for (int mp : reach)
    for (const auto& [c, m] : gammas)
      for (int ri = 0; ri < al.num_returns(); ++ri) {
        int r = al.return_id(ri);
        int tgt = alg.concat_idx(m, alg.wrap_idx(c, mp, r));
        Quad<OutMat> N = concat_quad(
            oalg, sym_quad(alg.elems[m], 1),
            wrap_quad(oalg, t.a, c, sym_quad(alg.elems[mp], 2), r));
        std::vector<Term> upd(nreg);
        const OutMat* mats[4] = {&N.ll, &N.lr, &N.rl, &N.rr};
        for (int quad = 0; quad < 4; ++quad)
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
              upd[ridx(quad, p, q)] = decode(mats[quad]->at(p, q), "pop update");
        s.pop_rules.push_back({mp, r, gidx(c, m), tgt, std::move(upd)});
      }

  // Final output: the initial-to-final crossing of the marker-wrapped prefix.
  s.final_out.assign(NE, std::nullopt);
  for (int m = 0; m < NE; ++m) {
    if (!alg.accepting[m] || !reach.count(m)) continue;
    Quad<OutMat> F = wrap_quad(oalg, t.a, kMarkL, sym_quad(alg.elems[m], 2), kMarkR);
    std::optional<Term> term;
    for (int f = 0; f < n; ++f) {
      if (!t.a.finals[f]) continue;
      const OEntry& ent = F.lr.at(t.a.initial, f);
      if (!ent.st) continue;
      if (term) throw Error("Internal", "two accepting crossings for one element");
      term = decode(ent, "final output");
    }
    if (!term) throw Error("Internal", "accepting element without a crossing");
    s.final_out[m] = std::move(term);
  }
  return s;
}

}  // namespace nwtk
