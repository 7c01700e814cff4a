#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sdelab {

/// Exit codes: 0 success, 1 error, 2 ran correctly but missed the declared band.
int run(int argc, const char* const* argv);
/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdelab
