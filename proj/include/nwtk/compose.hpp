#pragma once

#include "nwtk/two_vpt.hpp"
#include "nwtk/vpa.hpp"

namespace nwtk {

// Composition of a one-way letter-to-letter transducer a (applied first)
// with a deterministic two-way transducer b: the result is a deterministic
// two-way transducer computing w -> b(a(w)) without ever materializing a(w).
// b's head movements over a(w) are replayed over w; whenever b moves against
// a's reading direction across a position whose image is not yet known, the
// simulation rewinds: it summarizes the surrounding blocks, identifies the
// candidate states of a, and resolves between them by racing two runs of a
// until they first merge back at the engaged position.
//
// compose_hu: a deterministic (b's backward moves need the rewind).
// compose_hu_codet: a co-deterministic with a single final state (forward
// moves need the rewind; the entry sweep reconstructs a's run from its end).
TwoVpt compose_hu(const Vpt& a, const TwoVpt& b, size_t max_states = 1'000'000);
TwoVpt compose_hu_codet(const Vpt& a, const TwoVpt& b, size_t max_states = 1'000'000);

// b after an unambiguous letter-to-letter relabeling: decomposes the
// relabeling into a deterministic stage after a co-deterministic one and
// applies the two compositions above.
TwoVpt compose_relabeling(const TwoVpt& b, const Vpt& relabeling,
                          size_t max_states = 1'000'000);

// Equivalent machine without look-around: the checker becomes an unambiguous
// relabeling transducer annotating every position with the checker state
// before it, the guarded rules read the annotations, and the composition
// removes the intermediate alphabet again.
TwoVpt remove_lookaround(const TwoVpt& t, size_t max_states = 1'000'000);

}  // namespace nwtk
