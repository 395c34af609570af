#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace dgs::cli {

/// Exit codes: 0 success, 1 module or validation error (structured JSON on
/// `err`), 2 usage error.
int run(std::span<const std::string> argv, std::ostream& out, std::ostream& err);

}  // namespace dgs::cli
