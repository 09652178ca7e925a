#pragma once

#include <iosfwd>

namespace adpp {

/// Exit codes: 0 success, 1 validation or usage error, 2 runtime error.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace adpp
