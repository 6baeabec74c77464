#pragma once

#include <iosfwd>

namespace dgp::cli {

// Entry point of the dgpaint command line; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dgp::cli
