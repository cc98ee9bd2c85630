#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace egame::cli {

// Exit codes: 0 success or PASS, 1 FAIL or rejection, 2 usage error.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace egame::cli
