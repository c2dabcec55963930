#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace nlest {

inline constexpr const char* kCodeVersion = "nlest 1.0.0";

// Exit codes of the command-line front end.
enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitNumerical = 3 };

// "key = value" lines; '#' starts a comment. Throws InvalidArgument on a
// malformed line or a missing file.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

// Appends "--key value" for every config entry whose flag is not already
// present in args (command-line flags win). The "command" key is dropped.
std::vector<std::string> merge_config(const std::vector<std::string>& args,
                                      const std::vector<std::pair<std::string, std::string>>& config);

// args excludes the program name: {"solve", "--sigma", "1.5", ...}.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nlest
