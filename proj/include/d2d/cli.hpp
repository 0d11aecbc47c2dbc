#pragma once

#include <iosfwd>

namespace d2d {

/// Entry point of the d2d command-line tool. Returns 0 on success, 1 on a
/// fatal error and 2 when a run completed but some items failed.
int cli_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace d2d
