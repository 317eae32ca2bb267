#pragma once

#include <string>
#include <variant>

#include "nwtk/stst.hpp"
#include "nwtk/two_vpt.hpp"
#include "nwtk/vpa.hpp"

namespace nwtk {

// One parsed machine file. kind keeps the literal kind token from the file;
// the alternative follows it: vpa/dvpa -> Vpa, vpt -> Vpt, 2vpa -> TwoVpa,
// d2vpt (alias 2vpt) -> TwoVpt, stst -> Stst, fsa -> Fsa.
struct MachineFile {
  std::string kind;
  std::variant<Vpa, Vpt, TwoVpa, TwoVpt, Stst, Fsa> m;
};

// Throws Error("ParseError", "line N: ...") with 1-based line numbers.
MachineFile parse_machine(const std::string& text);
MachineFile load_machine(const std::string& path);
void save_machine(const MachineFile& mf, const std::string& path);

std::string serialize_machine(const MachineFile& mf);
std::string serialize_vpa(const Vpa& a, const std::string& kind = "vpa");
std::string serialize_vpt(const Vpt& t, const std::string& kind = "vpt");
std::string serialize_2vpa(const TwoVpa& a);
std::string serialize_d2vpt(const TwoVpt& t, const std::string& kind = "d2vpt");
std::string serialize_stst(const Stst& s);
std::string serialize_fsa(const Fsa& f);

}  // namespace nwtk
