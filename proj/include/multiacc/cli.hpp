#ifndef MULTIACC_CLI_HPP
#define MULTIACC_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace multiacc::cli {

// Runs one CLI invocation (args excludes the program name). Exit codes:
// 0 success, 1 usage/parse error, 2 budget or capacity exceeded,
// 3 a verdict came back violated under --assert.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace multiacc::cli

#endif
