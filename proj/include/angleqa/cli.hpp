#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace angleqa {

/// Exit status: 0 success, 1 input error, 2 backend error.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace angleqa
