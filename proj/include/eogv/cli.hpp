#pragma once

#include <iosfwd>

namespace eogv {

// Exit codes: 0 ok (and, for eval/bench, thresholds met), 1 thresholds not
// met, 2 usage or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace eogv
