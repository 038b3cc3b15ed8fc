#pragma once

#include <istream>
#include <string>
#include <vector>

namespace hck::cli {

// Reads a flat "key = value" file ('#' starts a comment) into "--key=value"
// arguments. Underscores in keys become dashes, so both n_units and
// n-units name the flag --n-units. Throws kUsage on malformed lines.
std::vector<std::string> read_config_args(std::istream& in);
std::vector<std::string> read_config_file(const std::string& path);

// Removes "--config PATH" / "--config=PATH" from args (args[0] being the
// subcommand) and splices the file's arguments in right after the
// subcommand, ahead of every explicit flag, so explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

// "a, b,c" -> {"a", "b", "c"}; empty items are dropped.
std::vector<std::string> split_list(const std::string& list);

}  // namespace hck::cli
