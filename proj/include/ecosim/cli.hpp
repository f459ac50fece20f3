#pragma once

#include <iosfwd>

namespace ecosim {

/// Entry point for the `ecosim` binary. Returns 0 on success, 1 for usage or
/// validation errors, 2 for runtime failures.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ecosim
