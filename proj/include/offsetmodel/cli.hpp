#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace offsetmodel {

// Runs one CLI invocation (argv without the program name). Returns 0 on
// success, 1 on usage errors, 2 on data errors.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace offsetmodel
