#include "nwtk/vpa.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <tuple>

#include "nwtk/rel.hpp"

namespace nwtk {

void Vpa::validate() const {
  if (!alph) throw Error("BadMachine", "missing alphabet");
  if (states.empty()) throw Error("BadMachine", "no states");
  if ((int)finals.size() != num_states()) throw Error("BadMachine", "finals size mismatch");
  for (int i : initial)
    if (i < 0 || i >= num_states()) throw Error("BadMachine", "initial out of range");
  auto chk_q = [&](int q) {
    if (q < 0 || q >= num_states()) throw Error("BadMachine", "rule state out of range");
  };
  auto chk_g = [&](int g) {
    if (g < 0 || g >= (int)stack_names.size())
      throw Error("BadMachine", "rule stack symbol out of range");
  };
  for (const auto& p : push_rules) {
    chk_q(p.q);
    chk_q(p.q2);
    chk_g(p.gamma);
    if (p.sym < 0 || !alph->is_call(p.sym)) throw Error("BadMachine", "push rule needs a call");
  }
  for (const auto& p : pop_rules) {
    chk_q(p.q);
    chk_q(p.q2);
    chk_g(p.gamma);
    if (p.sym < 0 || !alph->is_return(p.sym)) throw Error("BadMachine", "pop rule needs a return");
  }
}

bool Vpa::deterministic() const {
  if (initial.size() != 1) return false;
  std::set<std::pair<int, int>> pk;
  for (const auto& p : push_rules)
    if (!pk.emplace(p.q, p.sym).second) return false;
  std::set<std::tuple<int, int, int>> ok;
  for (const auto& p : pop_rules)
    if (!ok.emplace(p.q, p.sym, p.gamma).second) return false;
  return true;
}

bool Vpa::codeterministic() const {
  int nf = 0;
  for (char f : finals) nf += f ? 1 : 0;
  if (nf != 1) return false;
  // Reading backward: a return is consumed before its stack symbol is chosen
  // (it decides the pop rule), a call must undo a known stack symbol.
  std::set<std::pair<int, int>> rk;
  for (const auto& p : pop_rules)
    if (!rk.emplace(p.sym, p.q2).second) return false;
  std::set<std::tuple<int, int, int>> ck;
  for (const auto& p : push_rules)
    if (!ck.emplace(p.sym, p.q2, p.gamma).second) return false;
  return true;
}

void Vpt::validate() const {
  a.validate();
  if (push_out.size() != a.push_rules.size() || pop_out.size() != a.pop_rules.size())
    throw Error("BadMachine", "output list size mismatch");
  auto chk = [&](const std::vector<int>& ids) {
    for (int id : ids)
      if (id < 0 || id >= (int)out_alph.size())
        throw Error("BadMachine", "output token out of range");
  };
  for (const auto& o : push_out) chk(o);
  for (const auto& o : pop_out) chk(o);
}

bool Vpt::letter_to_letter() const {
  for (const auto& o : push_out)
    if (o.size() != 1) return false;
  for (const auto& o : pop_out)
    if (o.size() != 1) return false;
  return true;
}

std::vector<std::string> Vpt::out_tokens(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(out_alph[id]);
  return out;
}

std::optional<int> Fsa::lookup_sym(const std::string& tok) const {
  for (int i = 0; i < (int)alphabet.size(); ++i)
    if (alphabet[i] == tok) return i;
  return std::nullopt;
}

bool Fsa::accepts(const std::vector<std::string>& word) const {
  std::set<int> cur(initial.begin(), initial.end());
  for (const auto& tok : word) {
    auto s = lookup_sym(tok);
    if (!s) return false;
    std::set<int> next;
    for (auto [q, a, q2] : trans)
      if (a == *s && cur.count(q)) next.insert(q2);
    cur = std::move(next);
    if (cur.empty()) return false;
  }
  for (int q : cur)
    if (finals[q]) return true;
  return false;
}

Fsa determinize_fsa(const Fsa& m) {
  std::map<std::set<int>, int> idx;
  std::vector<std::set<int>> sets;
  Fsa d;
  d.alphabet = m.alphabet;
  auto intern = [&](const std::set<int>& s) {
    auto it = idx.find(s);
    if (it != idx.end()) return it->second;
    int id = (int)sets.size();
    sets.push_back(s);
    idx.emplace(s, id);
    std::string name = "{";
    for (int q : s) name += m.states[q] + ",";
    name += "}";
    d.states.push_back(name);
    return id;
  };
  std::set<int> s0(m.initial.begin(), m.initial.end());
  d.initial = {intern(s0)};
  for (int cur = 0; cur < (int)sets.size(); ++cur) {
    for (int a = 0; a < (int)m.alphabet.size(); ++a) {
      std::set<int> next;
      for (auto [q, s, q2] : m.trans)
        if (s == a && sets[cur].count(q)) next.insert(q2);
      d.trans.emplace_back(cur, a, intern(next));
    }
  }
  d.finals.assign(d.states.size(), 0);
  for (int i = 0; i < (int)sets.size(); ++i)
    for (int q : sets[i])
      if (m.finals[q]) d.finals[i] = 1;
  return d;
}

std::vector<int> run_vpa(const Vpa& a, const NestedWord& w) {
  std::set<std::pair<int, std::vector<int>>> cur;
  for (int i : a.initial) cur.insert({i, {}});
  for (int pos = 0; pos < w.size(); ++pos) {
    int sym = w.syms[pos];
    std::set<std::pair<int, std::vector<int>>> next;
    if (a.alph->is_call(sym)) {
      for (const auto& [q, st] : cur)
        for (const auto& p : a.push_rules)
          if (p.q == q && p.sym == sym) {
            auto st2 = st;
            st2.push_back(p.gamma);
            next.insert({p.q2, std::move(st2)});
          }
    } else {
      for (const auto& [q, st] : cur) {
        if (st.empty()) continue;
        for (const auto& p : a.pop_rules)
          if (p.q == q && p.sym == sym && p.gamma == st.back()) {
            auto st2 = st;
            st2.pop_back();
            next.insert({p.q2, std::move(st2)});
          }
      }
    }
    cur = std::move(next);
  }
  std::vector<int> out;
  for (const auto& [q, st] : cur)
    if (st.empty()) out.push_back(q);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool accepts_vpa(const Vpa& a, const NestedWord& w) {
  for (int q : run_vpa(a, w))
    if (a.finals[q]) return true;
  return false;
}

std::optional<NestedWord> vpa_witness(const Vpa& a) {
  a.validate();
  const int n = a.num_states();
  // best[p][q]: shortest well-nested word read from p with balanced stack
  // effect ending in q; empty optional = none known yet.
  std::vector<std::vector<std::optional<std::vector<int>>>> best(
      n, std::vector<std::optional<std::vector<int>>>(n));
  for (int p = 0; p < n; ++p) best[p][p] = std::vector<int>{};
  auto improve = [&](int p, int q, std::vector<int> w) {
    if (!best[p][q] || best[p][q]->size() > w.size()) {
      best[p][q] = std::move(w);
      return true;
    }
    return false;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& pu : a.push_rules)
      for (const auto& po : a.pop_rules) {
        if (pu.gamma != po.gamma) continue;
        if (!best[pu.q2][po.q]) continue;
        std::vector<int> w;
        w.reserve(best[pu.q2][po.q]->size() + 2);
        w.push_back(pu.sym);
        w.insert(w.end(), best[pu.q2][po.q]->begin(), best[pu.q2][po.q]->end());
        w.push_back(po.sym);
        changed |= improve(pu.q, po.q2, std::move(w));
      }
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        if (!best[p][q] || best[p][q]->empty()) continue;
        for (int s = 0; s < n; ++s) {
          if (!best[q][s]) continue;
          if (best[p][s] && best[p][s]->size() <= best[p][q]->size() + best[q][s]->size())
            continue;
          std::vector<int> w = *best[p][q];
          w.insert(w.end(), best[q][s]->begin(), best[q][s]->end());
          changed |= improve(p, s, std::move(w));
        }
      }
  }
  std::optional<std::vector<int>> found;
  for (int i : a.initial)
    for (int f = 0; f < n; ++f)
      if (a.finals[f] && best[i][f] && (!found || found->size() > best[i][f]->size()))
        found = best[i][f];
  if (!found) return std::nullopt;
  return make_nested_word(*found, a.alph);
}

Vpa determinize_vpa(const Vpa& a) {
  a.validate();
  const int n = a.num_states();
  std::map<Rel, int> idx;
  std::vector<Rel> sets;
  auto intern = [&](const Rel& s) {
    auto it = idx.find(s);
    if (it != idx.end()) return it->second;
    int id = (int)sets.size();
    sets.push_back(s);
    idx.emplace(s, id);
    return id;
  };
  Rel s0(n);
  for (int i : a.initial) s0.set(i, i);
  intern(s0);

  Vpa d;
  d.alph = a.alph;
  d.initial = {0};
  // Stack symbols: (set index, call) pairs, created on demand.
  std::map<std::pair<int, int>, int> gidx;
  bool changed = true;
  while (changed) {
    changed = false;
    size_t before_states = sets.size(), before_gamma = gidx.size();
    for (int si = 0; si < (int)sets.size(); ++si) {
      for (int c = 0; c < a.alph->num_calls(); ++c) {
        Rel seeds(n);
        bool any = false;
        for (const auto& pu : a.push_rules) {
          if (pu.sym != c) continue;
          for (int p = 0; p < n; ++p)
            if (sets[si].get(p, pu.q)) {
              seeds.set(pu.q2, pu.q2);
              any = true;
              break;
            }
        }
        (void)any;
        intern(seeds);
        gidx.emplace(std::make_pair(si, c), (int)gidx.size());
      }
    }
    size_t nsets = sets.size();
    for (int si = 0; si < (int)nsets; ++si)
      for (const auto& [key, g] : gidx) {
        auto [prev, c] = key;
        (void)g;
        for (int ri = 0; ri < a.alph->num_returns(); ++ri) {
          int r = a.alph->return_id(ri);
          Rel out(n);
          for (const auto& pu : a.push_rules) {
            if (pu.sym != c) continue;
            for (const auto& po : a.pop_rules) {
              if (po.sym != r || po.gamma != pu.gamma) continue;
              if (!sets[si].get(pu.q2, po.q)) continue;
              for (int p = 0; p < n; ++p)
                if (sets[prev].get(p, pu.q)) out.set(p, po.q2);
            }
          }
          intern(out);
        }
      }
    changed = sets.size() != before_states || gidx.size() != before_gamma;
  }

  for (int i = 0; i < (int)sets.size(); ++i) d.states.push_back("S" + std::to_string(i));
  d.stack_names.resize(gidx.size());
  for (const auto& [key, g] : gidx)
    d.stack_names[g] = "S" + std::to_string(key.first) + "|" + a.alph->name(key.second);
  for (const auto& [key, g] : gidx) {
    auto [si, c] = key;
    Rel seeds(n);
    for (const auto& pu : a.push_rules) {
      if (pu.sym != c) continue;
      for (int p = 0; p < n; ++p)
        if (sets[si].get(p, pu.q)) {
          seeds.set(pu.q2, pu.q2);
          break;
        }
    }
    d.push_rules.push_back({si, c, idx.at(seeds), g});
  }
  for (int si = 0; si < (int)sets.size(); ++si)
    for (const auto& [key, g] : gidx) {
      auto [prev, c] = key;
      for (int ri = 0; ri < a.alph->num_returns(); ++ri) {
        int r = a.alph->return_id(ri);
        Rel out(n);
        for (const auto& pu : a.push_rules) {
          if (pu.sym != c) continue;
          for (const auto& po : a.pop_rules) {
            if (po.sym != r || po.gamma != pu.gamma) continue;
            if (!sets[si].get(pu.q2, po.q)) continue;
            for (int p = 0; p < n; ++p)
              if (sets[prev].get(p, pu.q)) out.set(p, po.q2);
          }
        }
        d.pop_rules.push_back({si, r, g, idx.at(out)});
      }
    }
  d.finals.assign(sets.size(), 0);
  for (int i = 0; i < (int)sets.size(); ++i)
    for (int f = 0; f < n; ++f)
      if (a.finals[f]) {
        for (int p = 0; p < n; ++p)
          if (sets[i].get(p, f)) {
            d.finals[i] = 1;
            break;
          }
        if (d.finals[i]) break;
      }
  return d;
}

Vpa complete_vpa(const Vpa& a) {
  Vpa d = a;
  int sink = d.num_states();
  d.states.push_back("sink");
  d.finals.push_back(0);
  if (d.stack_names.empty()) d.stack_names.push_back("g0");
  std::set<std::pair<int, int>> pk;
  for (const auto& p : d.push_rules) pk.emplace(p.q, p.sym);
  std::set<std::tuple<int, int, int>> ok;
  for (const auto& p : d.pop_rules) ok.emplace(p.q, p.sym, p.gamma);
  int ng = (int)d.stack_names.size();
  for (int q = 0; q <= sink; ++q) {
    for (int c = 0; c < d.alph->num_calls(); ++c)
      if (!pk.count({q, c})) d.push_rules.push_back({q, c, sink, 0});
    for (int ri = 0; ri < d.alph->num_returns(); ++ri) {
      int r = d.alph->return_id(ri);
      for (int g = 0; g < ng; ++g)
        if (!ok.count({q, r, g})) d.pop_rules.push_back({q, r, g, sink});
    }
  }
  return d;
}

Vpa complement_dvpa(const Vpa& a) {
  if (!a.deterministic()) throw Error("NotDeterministic", "complement needs a deterministic VPA");
  Vpa d = complete_vpa(a);
  for (auto& f : d.finals) f = f ? 0 : 1;
  return d;
}

bool is_unambiguous(const Vpa& a) {
  a.validate();
  const int n = a.num_states();
  // Self product tracking whether the two runs have used different rules
  // (or started differently). Ambiguous iff it accepts with the flag set.
  auto sid = [&](int p, int q, int fl) { return (p * n + q) * 2 + fl; };
  Vpa prod;
  prod.alph = a.alph;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int fl = 0; fl < 2; ++fl)
        prod.states.push_back(a.states[p] + "#" + a.states[q] + "#" + std::to_string(fl));
  for (int i : a.initial)
    for (int j : a.initial) prod.initial.push_back(sid(i, j, i == j ? 0 : 1));
  prod.finals.assign(prod.states.size(), 0);
  for (int p = 0; p < n; ++p)
    if (a.finals[p])
      for (int q = 0; q < n; ++q)
        if (a.finals[q]) prod.finals[sid(p, q, 1)] = 1;
  int ng = (int)a.stack_names.size();
  auto gid = [&](int g1, int g2) { return g1 * ng + g2; };
  for (int g1 = 0; g1 < ng; ++g1)
    for (int g2 = 0; g2 < ng; ++g2)
      prod.stack_names.push_back(a.stack_names[g1] + "#" + a.stack_names[g2]);
  if (prod.stack_names.empty()) prod.stack_names.push_back("g");
  for (size_t i = 0; i < a.push_rules.size(); ++i)
    for (size_t j = 0; j < a.push_rules.size(); ++j) {
      const auto &r1 = a.push_rules[i], &r2 = a.push_rules[j];
      if (r1.sym != r2.sym) continue;
      for (int fl = 0; fl < 2; ++fl) {
        int nfl = (fl || i != j) ? 1 : 0;
        prod.push_rules.push_back(
            {sid(r1.q, r2.q, fl), r1.sym, sid(r1.q2, r2.q2, nfl), gid(r1.gamma, r2.gamma)});
      }
    }
  for (size_t i = 0; i < a.pop_rules.size(); ++i)
    for (size_t j = 0; j < a.pop_rules.size(); ++j) {
      const auto &r1 = a.pop_rules[i], &r2 = a.pop_rules[j];
      if (r1.sym != r2.sym) continue;
      for (int fl = 0; fl < 2; ++fl) {
        int nfl = (fl || i != j) ? 1 : 0;
        prod.pop_rules.push_back(
            {sid(r1.q, r2.q, fl), r1.sym, gid(r1.gamma, r2.gamma), sid(r1.q2, r2.q2, nfl)});
      }
    }
  return is_empty_vpa(prod);
}

Vpa product_vpa_fsa(const Vpa& a, const Fsa& m) {
  a.validate();
  const int np = m.num_states();
  Vpa prod;
  prod.alph = a.alph;
  auto sid = [&](int q, int p) { return q * np + p; };
  for (int q = 0; q < a.num_states(); ++q)
    for (int p = 0; p < np; ++p) prod.states.push_back(a.states[q] + "#" + m.states[p]);
  for (int i : a.initial)
    for (int j : m.initial) prod.initial.push_back(sid(i, j));
  prod.finals.assign(prod.states.size(), 0);
  for (int q = 0; q < a.num_states(); ++q)
    if (a.finals[q])
      for (int p = 0; p < np; ++p)
        if (m.finals[p]) prod.finals[sid(q, p)] = 1;
  prod.stack_names = a.stack_names;
  for (const auto& pu : a.push_rules) {
    auto s = m.lookup_sym(a.alph->name(pu.sym));
    if (!s) continue;
    for (auto [p, sym, p2] : m.trans)
      if (sym == *s) prod.push_rules.push_back({sid(pu.q, p), pu.sym, sid(pu.q2, p2), pu.gamma});
  }
  for (const auto& po : a.pop_rules) {
    auto s = m.lookup_sym(a.alph->name(po.sym));
    if (!s) continue;
    for (auto [p, sym, p2] : m.trans)
      if (sym == *s) prod.pop_rules.push_back({sid(po.q, p), po.sym, po.gamma, sid(po.q2, p2)});
  }
  return prod;
}

Vpa intersect_vpa(const Vpa& a, const Vpa& b) {
  a.validate();
  b.validate();
  if (!(*a.alph == *b.alph)) throw Error("AlphabetMismatch", "product over different alphabets");
  Vpa prod;
  prod.alph = a.alph;
  const int nb = b.num_states();
  auto sid = [&](int p, int q) { return p * nb + q; };
  for (int p = 0; p < a.num_states(); ++p)
    for (int q = 0; q < nb; ++q) prod.states.push_back(a.states[p] + "&" + b.states[q]);
  for (int i : a.initial)
    for (int j : b.initial) prod.initial.push_back(sid(i, j));
  prod.finals.assign(prod.states.size(), 0);
  for (int p = 0; p < a.num_states(); ++p)
    if (a.finals[p])
      for (int q = 0; q < nb; ++q)
        if (b.finals[q]) prod.finals[sid(p, q)] = 1;
  const int ngb = (int)b.stack_names.size();
  auto gid = [&](int g1, int g2) { return g1 * ngb + g2; };
  for (const auto& g1 : a.stack_names)
    for (const auto& g2 : b.stack_names) prod.stack_names.push_back(g1 + "&" + g2);
  if (prod.stack_names.empty()) prod.stack_names.push_back("g");
  for (const auto& r1 : a.push_rules)
    for (const auto& r2 : b.push_rules)
      if (r1.sym == r2.sym)
        prod.push_rules.push_back(
            {sid(r1.q, r2.q), r1.sym, sid(r1.q2, r2.q2), gid(r1.gamma, r2.gamma)});
  for (const auto& r1 : a.pop_rules)
    for (const auto& r2 : b.pop_rules)
      if (r1.sym == r2.sym)
        prod.pop_rules.push_back(
            {sid(r1.q, r2.q), r1.sym, gid(r1.gamma, r2.gamma), sid(r1.q2, r2.q2)});
  return prod;
}

namespace {

void vpt_dfs(const Vpt& t, const NestedWord& w, int pos, int q, std::vector<int>& stack,
             std::vector<int>& out, std::set<std::vector<std::string>>& results) {
  if (pos == w.size()) {
    if (stack.empty() && t.a.finals[q]) results.insert(t.out_tokens(out));
    return;
  }
  int sym = w.syms[pos];
  if (t.a.alph->is_call(sym)) {
    for (size_t i = 0; i < t.a.push_rules.size(); ++i) {
      const auto& r = t.a.push_rules[i];
      if (r.q != q || r.sym != sym) continue;
      stack.push_back(r.gamma);
      size_t mark = out.size();
      out.insert(out.end(), t.push_out[i].begin(), t.push_out[i].end());
      vpt_dfs(t, w, pos + 1, r.q2, stack, out, results);
      out.resize(mark);
      stack.pop_back();
    }
  } else {
    if (stack.empty()) return;
    int g = stack.back();
    for (size_t i = 0; i < t.a.pop_rules.size(); ++i) {
      const auto& r = t.a.pop_rules[i];
      if (r.q != q || r.sym != sym || r.gamma != g) continue;
      stack.pop_back();
      size_t mark = out.size();
      out.insert(out.end(), t.pop_out[i].begin(), t.pop_out[i].end());
      vpt_dfs(t, w, pos + 1, r.q2, stack, out, results);
      out.resize(mark);
      stack.push_back(g);
    }
  }
}

}  // namespace

std::set<std::vector<std::string>> evaluate_vpt(const Vpt& t, const NestedWord& w) {
  t.validate();
  std::set<std::vector<std::string>> results;
  std::vector<int> stack, out;
  for (int i : t.a.initial) vpt_dfs(t, w, 0, i, stack, out, results);
  return results;
}

namespace {

bool la_dfs(const Vpa& a, const NestedWord& w, int pos, int q, std::vector<int>& stack,
            std::set<std::tuple<int, int, std::vector<int>>>& failed, std::vector<int>& states) {
  auto key = std::make_tuple(pos, q, stack);
  if (failed.count(key)) return false;
  if (pos == w.size()) {
    if (stack.empty() && a.finals[q]) return true;
    failed.insert(key);
    return false;
  }
  states[pos] = q;
  int sym = w.syms[pos];
  if (a.alph->is_call(sym)) {
    for (const auto& r : a.push_rules) {
      if (r.q != q || r.sym != sym) continue;
      stack.push_back(r.gamma);
      if (la_dfs(a, w, pos + 1, r.q2, stack, failed, states)) return true;
      stack.pop_back();
    }
  } else if (!stack.empty()) {
    int g = stack.back();
    for (const auto& r : a.pop_rules) {
      if (r.q != q || r.sym != sym || r.gamma != g) continue;
      stack.pop_back();
      if (la_dfs(a, w, pos + 1, r.q2, stack, failed, states)) return true;
      stack.push_back(g);
    }
  }
  failed.insert(key);
  return false;
}

}  // namespace

std::vector<int> lookaround_labeling(const Vpa& checker, const NestedWord& w) {
  std::vector<int> states(w.size(), -1);
  std::vector<int> stack;
  std::set<std::tuple<int, int, std::vector<int>>> failed;
  for (int i : checker.initial) {
    if (la_dfs(checker, w, 0, i, stack, failed, states)) return states;
  }
  throw Error("NoAcceptingRun", "checker rejects: " + serialize(w));
}

// ---------------------------------------------------------------------------
// Decomposition of an unambiguous letter-to-letter VPT into a deterministic
// stage after a co-deterministic letter-to-letter relabeling.
//
// Stage two (runs first) annotates each symbol with a summary of the rest of
// the machine's behavior: at every top-level-of-its-hedge position it tracks
// the relation S = { (p,q) : from p here the machine can reach q at the end
// of the enclosing hedge }, where "end" is filtered by final states at the
// top level and unrestricted inside. These relations satisfy a backward
// recurrence which makes the annotator co-deterministic; stage one then
// resolves the original machine's nondeterminism deterministically by
// following the annotations.

namespace {

struct CodetBuilder {
  const Vpt& t;
  int n;
  std::vector<Rel> elems;
  std::map<Rel, int> idx;

  int intern(const Rel& s) {
    auto it = idx.find(s);
    if (it != idx.end()) return it->second;
    int id = (int)elems.size();
    elems.push_back(s);
    idx.emplace(s, id);
    if (elems.size() > ((size_t)1 << 18)) throw Error("ResourceLimit", "summary family too large");
    return id;
  }

  // { (p,q) : p pushes on c, crosses the inner summary, pops on r into q }.
  Rel update(int c, const Rel& inner, int r) const {
    Rel u(n);
    for (const auto& pu : t.a.push_rules) {
      if (pu.sym != c) continue;
      for (const auto& po : t.a.pop_rules) {
        if (po.sym != r || po.gamma != pu.gamma) continue;
        if (inner.get(pu.q2, po.q)) u.set(pu.q, po.q2);
      }
    }
    return u;
  }
};

}  // namespace

std::pair<Vpt, Vpt> codeterminize_l2l(const Vpt& t) {
  t.validate();
  if (!t.letter_to_letter())
    throw Error("NotLetterToLetter", "decomposition needs a letter-to-letter transducer");
  if (!is_unambiguous(t.a)) throw Error("NotUnambiguous", "decomposition needs unambiguity");
  const Vpa& A = t.a;
  const int n = A.num_states();
  const auto& al = *A.alph;

  CodetBuilder b{t, n, {}, {}};
  Rel idQ = Rel::identity(n);
  Rel idF(n);
  for (int f = 0; f < n; ++f)
    if (A.finals[f]) idF.set(f, f);
  int e_idQ = b.intern(idQ);
  int e_idF = b.intern(idF);
  (void)e_idQ;

  // Close the summary family under the backward recurrence.
  std::deque<int> work;
  for (int i = 0; i < (int)b.elems.size(); ++i) work.push_back(i);
  while (!work.empty()) {
    int e = work.front();
    work.pop_front();
    int known = (int)b.elems.size();
    for (int c = 0; c < al.num_calls(); ++c)
      for (int ri = 0; ri < al.num_returns(); ++ri) {
        int r = al.return_id(ri);
        for (int x = 0; x < known; ++x) {
          int before = (int)b.elems.size();
          int a1 = b.intern(b.update(c, b.elems[e], r).compose(b.elems[x]));
          if (a1 >= before) work.push_back(a1);
          before = (int)b.elems.size();
          int a2 = b.intern(b.update(c, b.elems[x], r).compose(b.elems[e]));
          if (a2 >= before) work.push_back(a2);
        }
      }
  }
  const int ne = (int)b.elems.size();

  // ---- stage two: the co-deterministic annotator --------------------------
  // Stack symbols and return annotations: (return symbol, outer summary).
  // Call annotations: (call, inner summary, return symbol, outer summary).
  std::map<std::pair<int, int>, int> ret_ann;           // (r, S') -> id
  std::map<std::tuple<int, int, int, int>, int> call_ann;  // (c, S'', r, S') -> id

  Vpt t2;
  t2.a.alph = A.alph;
  for (int i = 0; i < ne; ++i) t2.a.states.push_back("E" + std::to_string(i));
  t2.a.finals.assign(ne, 0);
  t2.a.finals[e_idF] = 1;
  for (int s = 0; s < ne; ++s) {
    bool init = false;
    for (int i : A.initial) {
      for (int f = 0; f < n && !init; ++f)
        if (A.finals[f] && b.elems[s].get(i, f)) init = true;
      if (init) break;
    }
    if (init) t2.a.initial.push_back(s);
  }
  std::vector<std::string> ann_calls, ann_rets;
  auto ret_token = [&](int r, int sp) {
    auto key = std::make_pair(r, sp);
    auto it = ret_ann.find(key);
    if (it != ret_ann.end()) return it->second;
    int id = (int)ret_ann.size();
    ret_ann.emplace(key, id);
    ann_rets.push_back(al.name(r) + "@" + std::to_string(id));
    t2.a.stack_names.push_back(ann_rets.back());
    return id;
  };
  auto call_token = [&](int c, int sin, int r, int sp) {
    auto key = std::make_tuple(c, sin, r, sp);
    auto it = call_ann.find(key);
    if (it != call_ann.end()) return it->second;
    int id = (int)call_ann.size();
    call_ann.emplace(key, id);
    ann_calls.push_back(al.name(c) + "@" + std::to_string(id));
    return id;
  };
  struct PendingPush {
    int src, c, tgt, gamma, call_id;
  };
  std::vector<PendingPush> pushes;
  for (int c = 0; c < al.num_calls(); ++c)
    for (int ri = 0; ri < al.num_returns(); ++ri) {
      int r = al.return_id(ri);
      for (int sin = 0; sin < ne; ++sin)
        for (int sp = 0; sp < ne; ++sp) {
          Rel s = b.update(c, b.elems[sin], r).compose(b.elems[sp]);
          if (s.empty()) continue;  // cannot lie on an accepting annotation run
          int src = b.idx.at(s);
          int g = ret_token(r, sp);
          int ci = call_token(c, sin, r, sp);
          pushes.push_back({src, c, sin, g, ci});
        }
    }
  // Output alphabet of the annotator: first all call annotations, then all
  // return annotations.
  t2.out_alph = ann_calls;
  t2.out_alph.insert(t2.out_alph.end(), ann_rets.begin(), ann_rets.end());
  int nann_calls = (int)ann_calls.size();
  for (const auto& p : pushes) {
    t2.a.push_rules.push_back({p.src, p.c, p.tgt, p.gamma});
    t2.push_out.push_back({p.call_id});
  }
  for (const auto& [key, g] : ret_ann) {
    auto [r, sp] = key;
    t2.a.pop_rules.push_back({e_idQ, r, g, sp});
    t2.pop_out.push_back({nann_calls + g});
  }
  if (t2.a.stack_names.empty()) t2.a.stack_names.push_back("g0");

  // ---- stage one: deterministic resolution over the annotated alphabet ----
  AlphabetRef ann_alph = make_alphabet(
      ann_calls.empty() ? std::vector<std::string>{"c@none"} : ann_calls,
      ann_rets.empty() ? std::vector<std::string>{"r@none"} : ann_rets);
  std::vector<std::tuple<int, int, int, int>> call_info(call_ann.size());  // (c, S'', r, S')
  for (const auto& [key, id] : call_ann) call_info[id] = key;
  std::vector<std::pair<int, int>> ret_info(ret_ann.size());  // (r, S')
  for (const auto& [key, id] : ret_ann) ret_info[id] = key;

  Vpt t1;
  t1.a.alph = ann_alph;
  t1.out_alph = t.out_alph;
  const int TOP = n;  // obligation "reach any final state at the hedge end"
  // State encoding: 0 = start; otherwise 1 + p*(n+1) + obligation.
  auto st = [&](int p, int ob) { return 1 + p * (n + 1) + ob; };
  t1.a.states.push_back("start");
  for (int p = 0; p < n; ++p)
    for (int ob = 0; ob <= n; ++ob)
      t1.a.states.push_back(A.states[p] + "!" + (ob == TOP ? "top" : A.states[ob]));
  t1.a.initial = {0};
  t1.a.finals.assign(t1.a.states.size(), 0);
  for (int p = 0; p < n; ++p)
    if (A.finals[p]) t1.a.finals[st(p, TOP)] = 1;
  for (int i : A.initial)
    if (A.finals[i]) t1.a.finals[0] = 1;
  // Stack symbols: (pop rule of t committed at the call, outer obligation).
  std::map<std::pair<int, int>, int> genc;
  auto gget = [&](int pop_rule, int ob_outer) {
    auto key = std::make_pair(pop_rule, ob_outer);
    auto it = genc.find(key);
    if (it != genc.end()) return it->second;
    int id = (int)genc.size();
    genc.emplace(key, id);
    t1.a.stack_names.push_back("j" + std::to_string(pop_rule) + "!" +
                               (ob_outer == TOP ? "top" : A.states[ob_outer]));
    return id;
  };

  // The unique continuation from (p, obligation) on an annotated call: the
  // smallest locally consistent choice of push rule, crossing pair and pop
  // rule; on true annotations unambiguity makes it the only consistent one.
  auto resolve = [&](int p, int ob, int ann) -> std::optional<std::tuple<int, int, int>> {
    auto [c, sin, r, sp] = call_info[ann];
    for (size_t i = 0; i < A.push_rules.size(); ++i) {
      const auto& pu = A.push_rules[i];
      if (pu.q != p || pu.sym != c) continue;
      for (int q2 = 0; q2 < n; ++q2) {
        if (!b.elems[sin].get(pu.q2, q2)) continue;
        for (size_t j = 0; j < A.pop_rules.size(); ++j) {
          const auto& po = A.pop_rules[j];
          if (po.q != q2 || po.sym != r || po.gamma != pu.gamma) continue;
          bool ok;
          if (ob == TOP)
            ok = !b.elems[sp].image_of(po.q2).empty();
          else
            ok = b.elems[sp].get(po.q2, ob);
          if (ok) return std::make_tuple((int)i, q2, (int)j);
        }
      }
    }
    return std::nullopt;
  };

  std::set<int> seen_states{0};
  std::deque<int> squeue{0};
  std::set<int> seen_gamma;
  while (!squeue.empty()) {
    int s = squeue.front();
    squeue.pop_front();
    // Calls.
    for (int ann = 0; ann < (int)call_info.size(); ++ann) {
      std::optional<std::tuple<int, int, int>> tup;
      int ob;
      if (s == 0) {
        ob = TOP;
        for (int i : A.initial) {
          tup = resolve(i, TOP, ann);
          if (tup) break;
        }
      } else {
        int p = (s - 1) / (n + 1);
        ob = (s - 1) % (n + 1);
        tup = resolve(p, ob, ann);
      }
      if (!tup) continue;
      auto [i, q2, j] = *tup;
      int tgt = st(A.push_rules[i].q2, q2);
      int g = gget(j, ob);
      t1.a.push_rules.push_back({s, ann, tgt, g});
      t1.push_out.push_back(t.push_out[i]);
      if (seen_states.insert(tgt).second) squeue.push_back(tgt);
      if (seen_gamma.insert(g).second) {
        // Pop rules for this stack symbol: the source state and rule are
        // forced by the committed choice.
        const auto& po = A.pop_rules[j];
        int src = st(po.q, po.q);
        for (int rt = 0; rt < (int)ret_info.size(); ++rt) {
          if (ret_info[rt].first != po.sym) continue;
          int ptgt = st(po.q2, ob);
          t1.a.pop_rules.push_back({src, ann_alph->return_id(rt), g, ptgt});
          t1.pop_out.push_back(t.pop_out[j]);
          if (seen_states.insert(ptgt).second) squeue.push_back(ptgt);
          if (seen_states.insert(src).second) squeue.push_back(src);
        }
      }
    }
  }
  if (t1.a.stack_names.empty()) t1.a.stack_names.push_back("g0");

  return {t1, t2};
}

}  // namespace nwtk
