#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace xlene {

inline constexpr const char* kToolVersion = "1.0.0";

// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace xlene
