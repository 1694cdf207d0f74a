#pragma once

#include <iosfwd>

namespace spn::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitViolated = 2,  // certificate violated, or diverging under --expect-stable
    kExitInputError = 3,
};

// Full command-line entry point; artifacts go under --out (or SPN_OUT_DIR).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spn::cli
