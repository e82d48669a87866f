#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace somnnet {

// Full command-line front end, callable in process so tests can drive it
// without spawning. args excludes the program name. Returns the process
// exit code; failures print "error: <kind>: <message>" on err.
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace somnnet
