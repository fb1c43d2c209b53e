#pragma once

#include <string>
#include <string_view>

#include "amrgen/amr.h"

namespace amrgen {

// Parses a single PENMAN expression. Lines starting with '#' are ignored.
// Throws PenmanError (with 1-based line/column) on malformed input.
AmrGraph parse_penman(std::string_view text);

// Emits PENMAN that re-parses to a graph isomorphic to `graph`. The first
// visit of a reentrant node prints its subtree; later visits print only the
// variable. With `pretty` each relation goes on its own indented line.
std::string serialize_penman(const AmrGraph& graph, bool pretty = true);

}  // namespace amrgen
