#pragma once

#include <string>

namespace sgrl::io {

// Render a double with enough digits to round-trip exactly (17 significant
// digits, general format, via std::to_chars).  Every number written to CSV or
// JSON output goes through here so that identical runs produce identical
// bytes regardless of locale or stream state.
std::string format_double(double v);

// Inverse of format_double; throws ParseError on malformed input or trailing
// garbage.
double parse_double(const std::string& s);

} // namespace sgrl::io
