#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace procex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInput = 2;

inline constexpr const char* kOutputRootVariable = "PROCEX_OUTPUT_ROOT";

/// Entry point of the command-line tool. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// $PROCEX_OUTPUT_ROOT, or "procex-out" when unset.
std::filesystem::path default_output_root();

}  // namespace procex::cli
