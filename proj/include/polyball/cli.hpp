#pragma once

#include <iosfwd>

namespace polyball {

/// Command-line entry point. Exit codes: 0 pass, 1 well-formed negative
/// result, 2 usage or input error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace polyball
