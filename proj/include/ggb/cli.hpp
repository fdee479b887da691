#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ggb::cli {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;

/// Runs one command. args excludes the program name. Results go to files
/// named by --out (or to `out`), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace ggb::cli
