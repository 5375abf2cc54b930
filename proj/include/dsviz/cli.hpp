#pragma once

#include <string>
#include <vector>

namespace dsviz::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Entry point behind the `dsviz` executable. Every run, including failed
/// ones, leaves `<out>/run.json`.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace dsviz::cli
