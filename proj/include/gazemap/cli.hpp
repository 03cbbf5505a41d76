#pragma once

#include <iosfwd>

namespace gazemap::cli {

// Exit codes: 0 ok, 1 usage, 2 input format, 3 config, 4 internal invariant.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gazemap::cli
