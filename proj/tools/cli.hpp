#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace inkpark {

class CliError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on usage or validation errors, 2 on internal errors.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace inkpark
