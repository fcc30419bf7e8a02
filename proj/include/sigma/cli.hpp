#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sigma/core.hpp"

namespace sigma {

// Model references:
//   builtin:finitary-z4            finitary group on a named group (cyclic ones carry Z/n multiplication)
//   builtin:zero-only-z2, builtin:pairs-only-z2, builtin:multiset-2
//   builtin:pairs-only-magma, builtin:size-2-only-group   independence table fixtures
//   builtin:<model>:k=v,k=v        any registered model with parameters
//   <model>                        a registered model name, parameters from `params`
//   <path>                         a model file
// Raises InvalidSpec for unknown references, ParseError for bad files.
System resolve_model(const std::string& ref, const std::map<std::string, std::string>& params = {});

// Machine-readable description of the JSON report.
json report_schema();

// Runs one command line (without the program name). Exit codes: 0 when every
// requested check passes within bounds, 1 when one fails, 2 on parse or
// specification errors (message on `err`).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sigma
