#include "nwtk/compose.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>

#include "nwtk/rel.hpp"

namespace nwtk {

namespace {

// Simulation modes of the composed machine. Main carries the one-way
// machine's state at the current position; the others implement the rewind:
// Sum/Multi summarize blocks while walking away from the engaged position,
// UTurn1/Single resolve a unique candidate, UTurnPair/Read/PairBase/PairDeep
// race two candidate runs until they merge back at the engaged position,
// Resolved replays the engaged step, UTurnAnchor restarts a race from an
// outer anchor. Init1/Init2 validate the co-deterministic machine's run end
// to end before the simulation starts.
enum class MTag : int {
  Main,
  Sum,
  Multi,
  UTurn1,
  Single,
  UTurnPair,
  Read,
  PairBase,
  PairDeep,
  Resolved,
  UTurnAnchor,
  Init1,
  Init2
};

enum class ETag : int {
  EMain,
  EMark,
  EMarkR,
  ESum,
  EBase1,
  EDeep1,
  ESkip,
  EDeepRead,
  EBasePair,
  EDeepPair,
  ESweepR,
  ESweep
};

struct CState {
  MTag tag;
  int a = -1, b = -1, c = -1, d = -1, rel = -1;
  auto key() const { return std::make_tuple((int)tag, a, b, c, d, rel); }
  bool operator<(const CState& o) const { return key() < o.key(); }
};

struct CEntry {
  ETag tag;
  int a = -1, b = -1, c = -1, d = -1, e = -1, rel = -1, sym = 0;
  auto key() const { return std::make_tuple((int)tag, a, b, c, d, e, rel, sym); }
  bool operator<(const CEntry& o) const { return key() < o.key(); }
};

struct APush {
  int q2, gamma, tok;  // gamma -1 = the marker pseudo stack symbol
};
struct APop {
  int q2, tok;
};
struct ARev {
  int q_prev, gamma, tok;
};

struct BPush {
  int p2;
  Dir d2;
  int theta;
  const std::vector<int>* out;
};
struct BPop {
  int p2;
  Dir d2;
  const std::vector<int>* out;
};

const std::vector<int> kNoOut;

struct Composer {
  const Vpt& A;
  const TwoVpt& B;
  bool rev;
  size_t cap;
  int nA;
  int fA = -1;

  std::vector<Rel> rels;
  std::map<Rel, int> relidx;
  std::vector<CState> states;
  std::map<CState, int> sidx;
  std::vector<CEntry> entries;
  std::map<CEntry, int> eidx;

  // A-rule lookups.
  std::map<std::pair<int, int>, int> a_push_by;            // (q, sym)
  std::map<std::tuple<int, int, int>, int> a_pop_by;        // (q, sym, gamma)
  std::map<std::pair<int, int>, int> a_pop_rev;             // (sym, q2)
  std::map<std::tuple<int, int, int>, int> a_push_rev;      // (sym, q2, gamma)
  std::vector<int> a_push_tok, a_pop_tok;                   // B symbol id per rule
  std::map<std::tuple<int, int, int>, int> b_push_by;       // (p, d, sym)
  std::map<std::tuple<int, int, int, int>, int> b_pop_by;   // (p, d, sym, theta)

  TwoVpt out;

  Composer(const Vpt& a, const TwoVpt& b, bool rv, size_t cp) : A(a), B(b), rev(rv), cap(cp) {
    nA = A.a.num_states();
    A.validate();
    B.validate();
    if (!A.letter_to_letter())
      throw Error("NotLetterToLetter", "composition needs a letter-to-letter first stage");
    if (!B.deterministic()) throw Error("NotDeterministic", "composition needs a deterministic b");
    if (B.has_lookaround) throw Error("HasLookAround", "eliminate b's look-around first");
    if (!rev && !A.a.deterministic())
      throw Error("NotDeterministic", "forward composition needs a deterministic first stage");
    if (rev) {
      if (!A.a.codeterministic())
        throw Error("NotCoDeterministic",
                    "backward composition needs a co-deterministic first stage");
      for (int q = 0; q < nA; ++q)
        if (A.a.finals[q]) fA = q;
    }
    for (size_t i = 0; i < A.a.push_rules.size(); ++i) {
      const auto& r = A.a.push_rules[i];
      a_push_by[{r.q, r.sym}] = (int)i;
      a_push_rev[{r.sym, r.q2, r.gamma}] = (int)i;
      auto tok = B.a.alph->lookup(A.out_alph[A.push_out[i][0]]);
      if (tok && !B.a.alph->is_call(*tok))
        throw Error("BadMachine", "first stage must map calls to calls");
      a_push_tok.push_back(tok ? *tok : INT32_MIN);
    }
    for (size_t i = 0; i < A.a.pop_rules.size(); ++i) {
      const auto& r = A.a.pop_rules[i];
      a_pop_by[{r.q, r.sym, r.gamma}] = (int)i;
      a_pop_rev[{r.sym, r.q2}] = (int)i;
      auto tok = B.a.alph->lookup(A.out_alph[A.pop_out[i][0]]);
      if (tok && !B.a.alph->is_return(*tok))
        throw Error("BadMachine", "first stage must map returns to returns");
      a_pop_tok.push_back(tok ? *tok : INT32_MIN);
    }
    for (size_t i = 0; i < B.a.push_rules.size(); ++i) {
      const auto& r = B.a.push_rules[i];
      b_push_by[{r.q, (int)r.d, r.sym}] = (int)i;
    }
    for (size_t i = 0; i < B.a.pop_rules.size(); ++i) {
      const auto& r = B.a.pop_rules[i];
      b_pop_by[{r.q, (int)r.d, r.sym, r.gamma}] = (int)i;
    }
    out.a.alph = A.a.alph;
    out.out_alph = B.out_alph;
  }

  // --- A steps (markers handled via the implicit identity rules) -----------
  std::optional<APush> a_push(int q, int sym) const {
    if (sym == kMarkL) return APush{q, -1, kMarkL};
    auto it = a_push_by.find({q, sym});
    if (it == a_push_by.end() || a_push_tok[it->second] == INT32_MIN) return std::nullopt;
    const auto& r = A.a.push_rules[it->second];
    return APush{r.q2, r.gamma, a_push_tok[it->second]};
  }
  std::optional<APop> a_pop(int q, int sym, int gamma) const {
    if (sym == kMarkR) {
      if (gamma != -1) return std::nullopt;
      return APop{q, kMarkR};
    }
    auto it = a_pop_by.find({q, sym, gamma});
    if (it == a_pop_by.end() || a_pop_tok[it->second] == INT32_MIN) return std::nullopt;
    return APop{A.a.pop_rules[it->second].q2, a_pop_tok[it->second]};
  }
  std::optional<ARev> rev_pop(int sym, int q_after) const {
    if (sym == kMarkR) return ARev{q_after, -1, kMarkR};
    auto it = a_pop_rev.find({sym, q_after});
    if (it == a_pop_rev.end() || a_pop_tok[it->second] == INT32_MIN) return std::nullopt;
    const auto& r = A.a.pop_rules[it->second];
    return ARev{r.q, r.gamma, a_pop_tok[it->second]};
  }
  std::optional<ARev> rev_push(int sym, int q_after, int gamma) const {
    if (sym == kMarkL) {
      if (gamma != -1) return std::nullopt;
      return ARev{q_after, -1, kMarkL};
    }
    auto it = a_push_rev.find({sym, q_after, gamma});
    if (it == a_push_rev.end() || a_push_tok[it->second] == INT32_MIN) return std::nullopt;
    return ARev{A.a.push_rules[it->second].q, gamma, a_push_tok[it->second]};
  }

  // --- B steps --------------------------------------------------------------
  std::optional<BPush> b_push(int p, Dir d, int sym) const {
    auto it = b_push_by.find({p, (int)d, sym});
    if (it == b_push_by.end()) return std::nullopt;
    const auto& r = B.a.push_rules[it->second];
    return BPush{r.q2, r.d2, r.gamma, &B.push_out[it->second]};
  }
  std::optional<BPop> b_pop(int p, Dir d, int sym, int theta) const {
    auto it = b_pop_by.find({p, (int)d, sym, theta});
    if (it == b_pop_by.end()) return std::nullopt;
    const auto& r = B.a.pop_rules[it->second];
    return BPop{r.q2, r.d2, &B.pop_out[it->second]};
  }

  // Forward effect of a block c inner r on the first stage.
  Rel upd(int c, const Rel& inner, int r) const {
    Rel u(nA);
    if (c < 0 || r < 0) return u;
    for (const auto& pu : A.a.push_rules) {
      if (pu.sym != c) continue;
      for (const auto& po : A.a.pop_rules) {
        if (po.sym != r || po.gamma != pu.gamma) continue;
        if (inner.get(pu.q2, po.q)) u.set(pu.q, po.q2);
      }
    }
    return u;
  }

  int intern_rel(const Rel& r) {
    auto it = relidx.find(r);
    if (it != relidx.end()) return it->second;
    int id = (int)rels.size();
    rels.push_back(r);
    relidx.emplace(r, id);
    return id;
  }
  int intern_state(const CState& s) {
    auto it = sidx.find(s);
    if (it != sidx.end()) return it->second;
    int id = (int)states.size();
    if (states.size() + entries.size() >= cap)
      throw Error("ResourceLimit", "composed machine too large");
    states.push_back(s);
    sidx.emplace(s, id);
    return id;
  }
  int intern_entry(const CEntry& e) {
    auto it = eidx.find(e);
    if (it != eidx.end()) return it->second;
    int id = (int)entries.size();
    if (states.size() + entries.size() >= cap)
      throw Error("ResourceLimit", "composed machine too large");
    entries.push_back(e);
    eidx.emplace(e, id);
    return id;
  }

  int rel_id_identity() { return intern_rel(Rel::identity(nA)); }

  // Smallest y whose image under r is nonempty and differs from v (-1: any).
  int decoy(const Rel& r, int v) const {
    for (int y = 0; y < nA; ++y)
      for (int z = 0; z < nA; ++z)
        if (r.get(y, z) && z != v) return y;
    return -1;
  }

  struct Step {
    CState tgt;
    Dir d2;
    std::optional<CEntry> push;  // set for push rules
    const std::vector<int>* out = &kNoOut;
  };

  // Push-role consumption (call forward / return backward).
  std::optional<Step> step_push(const CState& s, Dir d, int sym) {
    bool call = A.a.alph->is_call(sym);
    if (!rev) {
      switch (s.tag) {
        case MTag::Main:
          if (d == Dir::Fwd) {  // a call, possibly the left marker
            auto ap = a_push(s.b, sym);
            if (!ap) return std::nullopt;
            auto bp = b_push(s.a, Dir::Fwd, ap->tok);
            if (!bp) return std::nullopt;
            return Step{{MTag::Main, bp->p2, ap->q2}, bp->d2,
                        CEntry{ETag::EMain, s.b, -1, bp->theta, ap->gamma}, bp->out};
          }
          // Backward over a return.
          if (sym == kMarkR) {  // no rewind needed: the image is the marker
            auto bp = b_push(s.a, Dir::Bwd, kMarkR);
            if (!bp) return std::nullopt;
            return Step{{MTag::Main, bp->p2, s.b}, bp->d2,
                        CEntry{ETag::EMain, A.a.initial[0], -1, bp->theta, -1}, bp->out};
          }
          return Step{{MTag::Sum, -1, -1, -1, -1, rel_id_identity()}, Dir::Bwd,
                      CEntry{ETag::EMark, s.a, s.b, -1, -1, -1, -1, sym}};
        case MTag::Sum:
          if (d != Dir::Bwd || call) return std::nullopt;
          return Step{{MTag::Sum, -1, -1, -1, -1, rel_id_identity()}, Dir::Bwd,
                      CEntry{ETag::ESum, -1, -1, -1, -1, -1, s.rel, sym}};
        case MTag::Multi:
          if (d != Dir::Bwd || call) return std::nullopt;
          return Step{{MTag::Sum, -1, -1, -1, -1, rel_id_identity()}, Dir::Bwd,
                      CEntry{ETag::EMarkR, s.a, -1, -1, -1, -1, s.rel, sym}};
        case MTag::UTurn1: {
          if (d != Dir::Fwd || !call || sym < 0) return std::nullopt;
          auto ap = a_push(s.b, sym);
          if (!ap) return std::nullopt;
          return Step{{MTag::Single, -1, ap->q2}, Dir::Fwd,
                      CEntry{ETag::EBase1, s.a, s.b, -1, ap->gamma}};
        }
        case MTag::Single: {
          if (d != Dir::Fwd || !call || sym < 0) return std::nullopt;
          auto ap = a_push(s.b, sym);
          if (!ap) return std::nullopt;
          return Step{{MTag::Single, -1, ap->q2}, Dir::Fwd,
                      CEntry{ETag::EDeep1, -1, -1, -1, ap->gamma}};
        }
        case MTag::UTurnPair:
          if (d != Dir::Fwd || !call || sym < 0) return std::nullopt;
          return Step{{MTag::Read}, Dir::Fwd, CEntry{ETag::ESkip, s.a, s.b, s.c}};
        case MTag::Read:
          if (d != Dir::Fwd || !call || sym < 0) return std::nullopt;
          return Step{{MTag::Read}, Dir::Fwd, CEntry{ETag::EDeepRead}};
        case MTag::PairBase: {
          if (d != Dir::Fwd || !call || sym < 0) return std::nullopt;
          auto a1 = a_push(s.b, sym), a2 = a_push(s.c, sym);
          if (!a1 || !a2) return std::nullopt;
          return Step{{MTag::PairDeep, -1, a1->q2, a2->q2}, Dir::Fwd,
                      CEntry{ETag::EBasePair, s.a, s.b, s.c, a1->gamma, a2->gamma}};
        }
        case MTag::PairDeep: {
          if (d != Dir::Fwd || !call || sym < 0) return std::nullopt;
          auto a1 = a_push(s.b, sym), a2 = a_push(s.c, sym);
          if (!a1 || !a2) return std::nullopt;
          return Step{{MTag::PairDeep, -1, a1->q2, a2->q2}, Dir::Fwd,
                      CEntry{ETag::EDeepPair, -1, -1, -1, a1->gamma, a2->gamma}};
        }
        case MTag::Resolved: {
          if (d != Dir::Bwd || call || sym < 0) return std::nullopt;
          auto ap = a_pop(s.c, sym, s.d);
          if (!ap) return std::nullopt;
          auto bp = b_push(s.a, Dir::Bwd, ap->tok);
          if (!bp) return std::nullopt;
          return Step{{MTag::Main, bp->p2, s.c}, bp->d2,
                      CEntry{ETag::EMain, s.b, -1, bp->theta, s.d}, bp->out};
        }
        case MTag::UTurnAnchor: {
          if (d != Dir::Fwd || !call) return std::nullopt;
          auto ap = a_push(s.b, sym);
          if (!ap) return std::nullopt;
          return Step{{MTag::PairBase, s.a, ap->q2, s.c}, Dir::Fwd,
                      CEntry{ETag::EMain, s.b, -1, s.d, ap->gamma}};
        }
        default:
          return std::nullopt;
      }
    }
    // Reverse orientation.
    switch (s.tag) {
      case MTag::Main:
        if (d == Dir::Bwd) {  // a return, possibly the right marker
          auto rp = rev_pop(sym, s.b);
          if (!rp) return std::nullopt;
          auto bp = b_push(s.a, Dir::Bwd, rp->tok);
          if (!bp) return std::nullopt;
          return Step{{MTag::Main, bp->p2, rp->q_prev}, bp->d2,
                      CEntry{ETag::EMain, s.b, -1, bp->theta, rp->gamma}, bp->out};
        }
        if (sym == kMarkL) {  // no rewind needed: the image is the marker
          auto bp = b_push(s.a, Dir::Fwd, kMarkL);
          if (!bp) return std::nullopt;
          return Step{{MTag::Main, bp->p2, s.b}, bp->d2,
                      CEntry{ETag::EMain, fA, -1, bp->theta, -1}, bp->out};
        }
        return Step{{MTag::Sum, -1, -1, -1, -1, rel_id_identity()}, Dir::Fwd,
                    CEntry{ETag::EMark, s.a, s.b, -1, -1, -1, -1, sym}};
      case MTag::Sum:
        if (d != Dir::Fwd || !call || sym < 0) return std::nullopt;
        return Step{{MTag::Sum, -1, -1, -1, -1, rel_id_identity()}, Dir::Fwd,
                    CEntry{ETag::ESum, -1, -1, -1, -1, -1, s.rel, sym}};
      case MTag::Multi:
        if (d != Dir::Fwd || !call || sym < 0) return std::nullopt;
        return Step{{MTag::Sum, -1, -1, -1, -1, rel_id_identity()}, Dir::Fwd,
                    CEntry{ETag::EMarkR, s.a, -1, -1, -1, -1, s.rel, sym}};
      case MTag::UTurn1: {
        if (d != Dir::Bwd || call || sym < 0) return std::nullopt;
        auto rp = rev_pop(sym, s.b);
        if (!rp) return std::nullopt;
        return Step{{MTag::Single, -1, rp->q_prev}, Dir::Bwd,
                    CEntry{ETag::EBase1, s.a, s.b, -1, rp->gamma}};
      }
      case MTag::Single: {
        if (d != Dir::Bwd || call || sym < 0) return std::nullopt;
        auto rp = rev_pop(sym, s.b);
        if (!rp) return std::nullopt;
        return Step{{MTag::Single, -1, rp->q_prev}, Dir::Bwd,
                    CEntry{ETag::EDeep1, -1, -1, -1, rp->gamma}};
      }
      case MTag::UTurnPair:
        if (d != Dir::Bwd || call || sym < 0) return std::nullopt;
        return Step{{MTag::Read}, Dir::Bwd, CEntry{ETag::ESkip, s.a, s.b, s.c}};
      case MTag::Read:
        if (d != Dir::Bwd || call || sym < 0) return std::nullopt;
        return Step{{MTag::Read}, Dir::Bwd, CEntry{ETag::EDeepRead}};
      case MTag::PairBase: {
        if (d != Dir::Bwd || call || sym < 0) return std::nullopt;
        auto r1 = rev_pop(sym, s.b), r2 = rev_pop(sym, s.c);
        if (!r1 || !r2) return std::nullopt;
        return Step{{MTag::PairDeep, -1, r1->q_prev, r2->q_prev}, Dir::Bwd,
                    CEntry{ETag::EBasePair, s.a, s.b, s.c, r1->gamma, r2->gamma}};
      }
      case MTag::PairDeep: {
        if (d != Dir::Bwd || call || sym < 0) return std::nullopt;
        auto r1 = rev_pop(sym, s.b), r2 = rev_pop(sym, s.c);
        if (!r1 || !r2) return std::nullopt;
        return Step{{MTag::PairDeep, -1, r1->q_prev, r2->q_prev}, Dir::Bwd,
                    CEntry{ETag::EDeepPair, -1, -1, -1, r1->gamma, r2->gamma}};
      }
      case MTag::Resolved: {
        if (d != Dir::Fwd || !call || sym < 0) return std::nullopt;
        auto rv = rev_push(sym, s.c, s.d);
        if (!rv) return std::nullopt;
        auto bp = b_push(s.a, Dir::Fwd, rv->tok);
        if (!bp) return std::nullopt;
        return Step{{MTag::Main, bp->p2, s.c}, bp->d2,
                    CEntry{ETag::EMain, s.b, -1, bp->theta, s.d}, bp->out};
      }
      case MTag::UTurnAnchor: {
        if (d != Dir::Bwd || call) return std::nullopt;
        auto rp = rev_pop(sym, s.b);
        if (!rp) return std::nullopt;
        return Step{{MTag::PairBase, s.a, rp->q_prev, s.c}, Dir::Bwd,
                    CEntry{ETag::EMain, s.b, -1, s.d, rp->gamma}};
      }
      case MTag::Init1:
        if (d != Dir::Fwd || !call) return std::nullopt;
        return Step{{MTag::Init1}, Dir::Fwd, CEntry{ETag::ESweepR}};
      case MTag::Init2: {
        if (d != Dir::Bwd || call) return std::nullopt;
        auto rp = rev_pop(sym, s.b);
        if (!rp) return std::nullopt;
        return Step{{MTag::Init2, -1, rp->q_prev}, Dir::Bwd,
                    CEntry{ETag::ESweep, -1, -1, -1, rp->gamma}};
      }
      default:
        return std::nullopt;
    }
  }

  // Pop-role consumption (return forward / call backward).
  std::optional<Step> step_pop(const CState& s, Dir d, int sym, const CEntry& en) {
    bool call = A.a.alph->is_call(sym);
    if (!rev) {
      switch (s.tag) {
        case MTag::Main:
          if (d == Dir::Fwd) {  // a return, possibly the right marker
            if (en.tag != ETag::EMain) return std::nullopt;
            auto ap = a_pop(s.b, sym, en.d);
            if (!ap) return std::nullopt;
            auto bp = b_pop(s.a, Dir::Fwd, ap->tok, en.c);
            if (!bp) return std::nullopt;
            return Step{{MTag::Main, bp->p2, ap->q2}, bp->d2, std::nullopt, bp->out};
          }
          {  // backward over a call, possibly the left marker
            if (en.tag != ETag::EMain) return std::nullopt;
            auto ap = a_push(en.a, sym);
            if (!ap || ap->gamma != en.d) return std::nullopt;
            auto bp = b_pop(s.a, Dir::Bwd, ap->tok, en.c);
            if (!bp) return std::nullopt;
            return Step{{MTag::Main, bp->p2, en.a}, bp->d2, std::nullopt, bp->out};
          }
        case MTag::Sum: {
          if (d != Dir::Bwd || !call) return std::nullopt;
          Rel u = upd(sym, rels[s.rel], en.sym);
          if (en.tag == ETag::ESum)
            return Step{{MTag::Sum, -1, -1, -1, -1, intern_rel(u.compose(rels[en.rel]))},
                        Dir::Bwd};
          if (en.tag == ETag::EMark) {
            std::vector<int> cand;
            for (int q = 0; q < nA; ++q)
              if (u.get(q, en.b)) cand.push_back(q);
            if (cand.empty()) return std::nullopt;
            if (cand.size() == 1)
              return Step{{MTag::UTurn1, en.a, cand[0]}, Dir::Fwd};
            Rel idd(nA);
            for (int q : cand) idd.set(q, q);
            return Step{{MTag::Multi, en.a, -1, -1, -1, intern_rel(idd)}, Dir::Bwd};
          }
          if (en.tag == ETag::EMarkR) {
            const Rel& r0 = rels[en.rel];
            Rel rp = u.compose(r0);
            std::set<int> values;
            for (int x = 0; x < nA; ++x)
              for (int v : rp.image_of(x)) values.insert(v);
            if (values.empty()) return std::nullopt;
            if (values.size() == 1) {
              int v = *values.begin();
              int q1 = -1;
              for (int y = 0; y < nA && q1 < 0; ++y)
                if (r0.get(y, v)) q1 = y;
              int q2 = decoy(r0, v);
              if (q1 < 0 || q2 < 0) return std::nullopt;
              return Step{{MTag::UTurnPair, en.a, q1, q2}, Dir::Fwd};
            }
            return Step{{MTag::Multi, en.a, -1, -1, -1, intern_rel(rp)}, Dir::Bwd};
          }
          return std::nullopt;
        }
        case MTag::Multi: {
          if (d != Dir::Bwd || !call || en.tag != ETag::EMain) return std::nullopt;
          auto ap = a_push(en.a, sym);
          if (!ap || ap->gamma != en.d) return std::nullopt;
          const Rel& r0 = rels[s.rel];
          auto vs = r0.image_of(ap->q2);
          if (vs.empty()) return std::nullopt;
          int q2 = decoy(r0, vs[0]);
          if (q2 < 0) return std::nullopt;
          return Step{{MTag::UTurnAnchor, s.a, en.a, q2, en.c}, Dir::Fwd};
        }
        case MTag::Single: {
          if (d != Dir::Fwd || call) return std::nullopt;
          if (en.tag == ETag::EDeep1) {
            auto ap = a_pop(s.b, sym, en.d);
            if (!ap) return std::nullopt;
            return Step{{MTag::Single, -1, ap->q2}, Dir::Fwd};
          }
          if (en.tag == ETag::EBase1) {
            auto ap = a_pop(s.b, sym, en.d);
            if (!ap) return std::nullopt;
            return Step{{MTag::Resolved, en.a, en.b, s.b, en.d}, Dir::Bwd};
          }
          return std::nullopt;
        }
        case MTag::Read:
          if (d != Dir::Fwd || call) return std::nullopt;
          if (en.tag == ETag::EDeepRead) return Step{{MTag::Read}, Dir::Fwd};
          if (en.tag == ETag::ESkip)
            return Step{{MTag::PairBase, en.a, en.b, en.c}, Dir::Fwd};
          return std::nullopt;
        case MTag::PairDeep: {
          if (d != Dir::Fwd || call) return std::nullopt;
          if (en.tag == ETag::EDeepPair) {
            auto a1 = a_pop(s.b, sym, en.d), a2 = a_pop(s.c, sym, en.e);
            if (!a1 || !a2) return std::nullopt;
            return Step{{MTag::PairDeep, -1, a1->q2, a2->q2}, Dir::Fwd};
          }
          if (en.tag == ETag::EBasePair) {
            auto a1 = a_pop(s.b, sym, en.d), a2 = a_pop(s.c, sym, en.e);
            if (!a1 || !a2) return std::nullopt;
            if (a1->q2 == a2->q2)  // first merge: this is the engaged return
              return Step{{MTag::Resolved, en.a, en.b, s.b, en.d}, Dir::Bwd};
            return Step{{MTag::PairBase, en.a, a1->q2, a2->q2}, Dir::Fwd};
          }
          return std::nullopt;
        }
        default:
          return std::nullopt;
      }
    }
    // Reverse orientation.
    switch (s.tag) {
      case MTag::Main:
        if (d == Dir::Bwd) {  // backward over a call, possibly the left marker
          if (en.tag != ETag::EMain) return std::nullopt;
          auto rv = rev_push(sym, s.b, en.d);
          if (!rv) return std::nullopt;
          auto bp = b_pop(s.a, Dir::Bwd, rv->tok, en.c);
          if (!bp) return std::nullopt;
          return Step{{MTag::Main, bp->p2, rv->q_prev}, bp->d2, std::nullopt, bp->out};
        }
        {  // forward over a return: consistency against the stored state
          if (en.tag != ETag::EMain) return std::nullopt;
          auto rp = rev_pop(sym, en.a);
          if (!rp || rp->q_prev != s.b || rp->gamma != en.d) return std::nullopt;
          auto bp = b_pop(s.a, Dir::Fwd, rp->tok, en.c);
          if (!bp) return std::nullopt;
          return Step{{MTag::Main, bp->p2, en.a}, bp->d2, std::nullopt, bp->out};
        }
      case MTag::Sum: {
        if (d != Dir::Fwd || call) return std::nullopt;
        Rel u = upd(en.sym, rels[s.rel], sym);
        if (en.tag == ETag::ESum)
          return Step{{MTag::Sum, -1, -1, -1, -1, intern_rel(rels[en.rel].compose(u))},
                      Dir::Fwd};
        if (en.tag == ETag::EMark) {
          auto cand = u.image_of(en.b);
          if (cand.empty()) return std::nullopt;
          if (cand.size() == 1) return Step{{MTag::UTurn1, en.a, cand[0]}, Dir::Bwd};
          Rel idd(nA);
          for (int z : cand) idd.set(z, z);
          return Step{{MTag::Multi, en.a, -1, -1, -1, intern_rel(idd)}, Dir::Fwd};
        }
        if (en.tag == ETag::EMarkR) {
          const Rel& r0 = rels[en.rel];
          Rel rp = u.transpose().compose(r0);
          std::set<int> values;
          for (int x = 0; x < nA; ++x)
            for (int v : rp.image_of(x)) values.insert(v);
          if (values.empty()) return std::nullopt;
          if (values.size() == 1) {
            int v = *values.begin();
            int q1 = -1;
            for (int y = 0; y < nA && q1 < 0; ++y)
              if (r0.get(y, v)) q1 = y;
            int q2 = decoy(r0, v);
            if (q1 < 0 || q2 < 0) return std::nullopt;
            return Step{{MTag::UTurnPair, en.a, q1, q2}, Dir::Bwd};
          }
          return Step{{MTag::Multi, en.a, -1, -1, -1, intern_rel(rp)}, Dir::Fwd};
        }
        return std::nullopt;
      }
      case MTag::Multi: {
        if (d != Dir::Fwd || call || en.tag != ETag::EMain) return std::nullopt;
        auto rp = rev_pop(sym, en.a);
        if (!rp || rp->gamma != en.d) return std::nullopt;
        const Rel& r0 = rels[s.rel];
        auto vs = r0.image_of(rp->q_prev);
        if (vs.empty()) return std::nullopt;
        int q2 = decoy(r0, vs[0]);
        if (q2 < 0) return std::nullopt;
        return Step{{MTag::UTurnAnchor, s.a, en.a, q2, en.c}, Dir::Bwd};
      }
      case MTag::Single: {
        if (d != Dir::Bwd || !call) return std::nullopt;
        if (en.tag == ETag::EDeep1) {
          auto rv = rev_push(sym, s.b, en.d);
          if (!rv) return std::nullopt;
          return Step{{MTag::Single, -1, rv->q_prev}, Dir::Bwd};
        }
        if (en.tag == ETag::EBase1) {
          auto rv = rev_push(sym, s.b, en.d);
          if (!rv) return std::nullopt;
          return Step{{MTag::Resolved, en.a, en.b, s.b, en.d}, Dir::Fwd};
        }
        return std::nullopt;
      }
      case MTag::Read:
        if (d != Dir::Bwd || !call) return std::nullopt;
        if (en.tag == ETag::EDeepRead) return Step{{MTag::Read}, Dir::Bwd};
        if (en.tag == ETag::ESkip)
          return Step{{MTag::PairBase, en.a, en.b, en.c}, Dir::Bwd};
        return std::nullopt;
      case MTag::PairDeep: {
        if (d != Dir::Bwd || !call) return std::nullopt;
        if (en.tag == ETag::EDeepPair) {
          auto r1 = rev_push(sym, s.b, en.d), r2 = rev_push(sym, s.c, en.e);
          if (!r1 || !r2) return std::nullopt;
          return Step{{MTag::PairDeep, -1, r1->q_prev, r2->q_prev}, Dir::Bwd};
        }
        if (en.tag == ETag::EBasePair) {
          auto r1 = rev_push(sym, s.b, en.d), r2 = rev_push(sym, s.c, en.e);
          if (!r1 || !r2) return std::nullopt;
          if (r1->q_prev == r2->q_prev)  // first merge: this is the engaged call
            return Step{{MTag::Resolved, en.a, en.b, s.b, en.d}, Dir::Fwd};
          return Step{{MTag::PairBase, en.a, r1->q_prev, r2->q_prev}, Dir::Bwd};
        }
        return std::nullopt;
      }
      case MTag::Init1:
        if (d != Dir::Fwd || call || en.tag != ETag::ESweepR) return std::nullopt;
        if (sym == kMarkR) return Step{{MTag::Init2, -1, fA}, Dir::Bwd};
        return Step{{MTag::Init1}, Dir::Fwd};
      case MTag::Init2: {
        if (d != Dir::Bwd || !call || en.tag != ETag::ESweep) return std::nullopt;
        if (sym == kMarkL) {
          if (en.d != -1) return std::nullopt;
          bool init_ok = false;
          for (int i : A.a.initial) init_ok |= (i == s.b);
          if (!init_ok) return std::nullopt;
          return Step{{MTag::Main, B.a.initial, s.b}, Dir::Fwd};
        }
        auto rv = rev_push(sym, s.b, en.d);
        if (!rv) return std::nullopt;
        return Step{{MTag::Init2, -1, rv->q_prev}, Dir::Bwd};
      }
      default:
        return std::nullopt;
    }
  }

  TwoVpt run() {
    // Seed.
    if (!rev)
      out.a.initial = intern_state({MTag::Main, B.a.initial, A.a.initial[0]});
    else
      out.a.initial = intern_state({MTag::Init1});

    // Symbol universe on the input side, including the markers.
    std::vector<int> syms{kMarkL, kMarkR};
    for (int i = 0; i < A.a.alph->num_symbols(); ++i) syms.push_back(i);

    struct PendingPush {
      int src;
      Dir d;
      int sym;
      int tgt;
      Dir d2;
      int entry;
      const std::vector<int>* o;
    };
    struct PendingPop {
      int src;
      Dir d;
      int sym;
      int entry;
      int tgt;
      Dir d2;
      const std::vector<int>* o;
    };
    std::vector<PendingPush> pushes;
    std::vector<PendingPop> pops;

    size_t s_done = 0;
    std::vector<size_t> pair_done;  // per state: entries already paired
    for (;;) {
      bool progress = false;
      while (s_done < states.size()) {
        progress = true;
        int si = (int)s_done++;
        CState s = states[si];
        for (Dir d : {Dir::Fwd, Dir::Bwd})
          for (int sym : syms) {
            if (((d == Dir::Fwd) == A.a.alph->is_call(sym))) {
              if (auto st = step_push(s, d, sym)) {
                int tgt = intern_state(st->tgt);
                int en = intern_entry(*st->push);
                pushes.push_back({si, d, sym, tgt, st->d2, en, st->out});
              }
            }
          }
      }
      for (size_t si = 0; si < states.size(); ++si) {
        if (pair_done.size() < states.size()) pair_done.resize(states.size(), 0);
        while (pair_done[si] < entries.size()) {
          progress = true;
          int ei = (int)pair_done[si]++;
          CState s = states[si];
          CEntry en = entries[ei];
          for (Dir d : {Dir::Fwd, Dir::Bwd})
            for (int sym : syms) {
              if (((d == Dir::Fwd) == A.a.alph->is_call(sym))) continue;  // pop role only
              if (auto st = step_pop(s, d, sym, en)) {
                // A pop of the left marker going backward must turn the head
                // forward; drop structurally unreachable offenders.
                if (sym == kMarkL && d == Dir::Bwd && st->d2 == Dir::Bwd) continue;
                int tgt = intern_state(st->tgt);
                pops.push_back({(int)si, d, sym, ei, tgt, st->d2, st->out});
              }
            }
        }
      }
      if (!progress) break;
    }

    static const char* mname[] = {"Main",     "Sum",  "Multi",    "UTurn1",   "Single",
                                  "UTurnPair", "Read", "PairBase", "PairDeep", "Resolved",
                                  "UTurnAnchor", "Init1", "Init2"};
    static const char* ename[] = {"EMain", "EMark",    "EMarkR",    "ESum",      "EBase1",
                                  "EDeep1", "ESkip",    "EDeepRead", "EBasePair", "EDeepPair",
                                  "ESweepR", "ESweep"};
    for (size_t i = 0; i < states.size(); ++i) {
      const CState& s = states[i];
      out.a.states.push_back(std::string(mname[(int)s.tag]) + "_" + std::to_string(s.a) + "." +
                             std::to_string(s.b) + "." + std::to_string(s.c) + "." +
                             std::to_string(s.d) + "." + std::to_string(s.rel));
    }
    for (size_t i = 0; i < entries.size(); ++i) {
      const CEntry& e = entries[i];
      out.a.stack_names.push_back(std::string(ename[(int)e.tag]) + "_" + std::to_string(e.a) +
                                  "." + std::to_string(e.b) + "." + std::to_string(e.c) + "." +
                                  std::to_string(e.d) + "." + std::to_string(e.e) + "." +
                                  std::to_string(e.rel) + "." + std::to_string(e.sym));
    }
    if (out.a.stack_names.empty()) out.a.stack_names.push_back("g0");
    out.a.finals.assign(states.size(), 0);
    for (size_t i = 0; i < states.size(); ++i) {
      const CState& s = states[i];
      if (s.tag == MTag::Main && B.a.finals[s.a] && A.a.finals[s.b]) out.a.finals[i] = 1;
    }
    for (const auto& p : pushes) {
      out.a.push_rules.push_back({p.src, p.d, p.sym, p.tgt, p.d2, p.entry});
      out.push_out.push_back(*p.o);
    }
    for (const auto& p : pops) {
      out.a.pop_rules.push_back({p.src, p.d, p.sym, p.entry, p.tgt, p.d2});
      out.pop_out.push_back(*p.o);
    }
    out.validate();
    return out;
  }
};

}  // namespace

TwoVpt compose_hu(const Vpt& a, const TwoVpt& b, size_t max_states) {
  Composer c(a, b, false, max_states);
  return c.run();
}

TwoVpt compose_hu_codet(const Vpt& a, const TwoVpt& b, size_t max_states) {
  Composer c(a, b, true, max_states);
  return c.run();
}

TwoVpt compose_relabeling(const TwoVpt& b, const Vpt& relabeling, size_t max_states) {
  auto [t1, t2] = codeterminize_l2l(relabeling);
  TwoVpt inner = compose_hu(t1, b, max_states);
  return compose_hu_codet(t2, inner, max_states);
}

TwoVpt remove_lookaround(const TwoVpt& t, size_t max_states) {
  t.validate();
  if (!t.has_lookaround) return t;
  if (!is_unambiguous(t.checker))
    throw Error("AmbiguousChecker", "look-around elimination needs an unambiguous checker");
  const Vpa& chk = t.checker;
  const auto& al = *t.a.alph;
  const int nq = chk.num_states();

  // Annotated alphabet: every proper symbol paired with a checker state.
  auto ann_name = [&](int sym, int q) { return al.name(sym) + "~" + std::to_string(q); };
  std::vector<std::string> ann_calls, ann_rets;
  for (int c = 0; c < al.num_calls(); ++c)
    for (int q = 0; q < nq; ++q) ann_calls.push_back(ann_name(c, q));
  for (int ri = 0; ri < al.num_returns(); ++ri)
    for (int q = 0; q < nq; ++q) ann_rets.push_back(ann_name(al.return_id(ri), q));
  AlphabetRef ann_alph = make_alphabet(ann_calls, ann_rets);
  auto ann_sym = [&](int sym, int q) {
    if (al.is_call(sym)) return ann_alph->call_id(sym * nq + q);
    return ann_alph->return_id((sym - al.num_calls()) * nq + q);
  };

  // The annotator: the checker emitting (symbol, its state before reading it).
  Vpt ann;
  ann.a = chk;
  ann.out_alph = ann_calls;
  ann.out_alph.insert(ann.out_alph.end(), ann_rets.begin(), ann_rets.end());
  auto tok_id = [&](int sym, int q) {
    if (al.is_call(sym)) return sym * nq + q;
    return (int)ann_calls.size() + (sym - al.num_calls()) * nq + q;
  };
  for (const auto& r : chk.push_rules) ann.push_out.push_back({tok_id(r.sym, r.q)});
  for (const auto& r : chk.pop_rules) ann.pop_out.push_back({tok_id(r.sym, r.q)});

  // The guard-free machine over the annotated alphabet.
  TwoVpt tp;
  tp.a.alph = ann_alph;
  tp.a.states = t.a.states;
  tp.a.initial = t.a.initial;
  tp.a.finals = t.a.finals;
  tp.a.stack_names = t.a.stack_names;
  tp.out_alph = t.out_alph;
  for (size_t i = 0; i < t.a.push_rules.size(); ++i) {
    const auto& r = t.a.push_rules[i];
    int g = t.push_guard[i];
    if (StructuredAlphabet::is_marker(r.sym)) {
      tp.a.push_rules.push_back(r);
      tp.push_out.push_back(t.push_out[i]);
      continue;
    }
    for (int q = 0; q < nq; ++q) {
      if (g >= 0 && q != g) continue;
      tp.a.push_rules.push_back({r.q, r.d, ann_sym(r.sym, q), r.q2, r.d2, r.gamma});
      tp.push_out.push_back(t.push_out[i]);
    }
  }
  for (size_t i = 0; i < t.a.pop_rules.size(); ++i) {
    const auto& r = t.a.pop_rules[i];
    int g = t.pop_guard[i];
    if (StructuredAlphabet::is_marker(r.sym)) {
      tp.a.pop_rules.push_back(r);
      tp.pop_out.push_back(t.pop_out[i]);
      continue;
    }
    for (int q = 0; q < nq; ++q) {
      if (g >= 0 && q != g) continue;
      tp.a.pop_rules.push_back({r.q, r.d, ann_sym(r.sym, q), r.gamma, r.q2, r.d2});
      tp.pop_out.push_back(t.pop_out[i]);
    }
  }
  tp.validate();
  return compose_relabeling(tp, ann, max_states);
}

}  // namespace nwtk
