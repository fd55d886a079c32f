#pragma once

#include <istream>
#include <string>
#include <vector>

namespace numta::csv {

/// One logical CSV record per call (RFC 4180 quoting, embedded newlines allowed).
/// Returns false at end of input.
bool read_row(std::istream& in, std::vector<std::string>& fields);

/// Quotes a field only when it needs it.
std::string escape(const std::string& field);

}  // namespace numta::csv
