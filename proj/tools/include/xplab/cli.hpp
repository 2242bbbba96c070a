#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xplab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// args excludes the program name: {"regions2d", "--width", "4", ...}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::vector<std::string> subcommands();

}  // namespace xplab
