#pragma once

#include <map>
#include <string>

namespace basisc {

// Bundled example programs, keyed by short name ("bv", "grover", ...).
// The same sources ship as corpus/*.qw; drivers use the bundled copies so
// the binary is self-contained.
const std::map<std::string, std::string> &corpus_sources();
const std::string &corpus_source(const std::string &name);

} // namespace basisc
