#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace toprec::cli {

// Exit codes: 0 ok, 1 cache problem or internal error, 2 invalid or unstable
// request, 3 enumeration cap exceeded, 4 evaluation at a pole.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace toprec::cli
