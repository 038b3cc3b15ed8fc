#include "hck/cli/config.hpp"

#include <algorithm>
#include <fstream>

#include "hck/error.hpp"

namespace hck::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> read_config_args(std::istream& in) {
  std::vector<std::string> args;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kUsage, "config line " + std::to_string(number) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) {
      throw Error(ErrorKind::kUsage, "config line " + std::to_string(number) + ": empty key");
    }
    if (key == "config") {
      throw Error(ErrorKind::kUsage, "config files cannot include other config files");
    }
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::vector<std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kUsage, "cannot open config file '" + path + "'");
  return read_config_args(in);
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string path;
  bool found = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw Error(ErrorKind::kUsage, "--config requires a path");
      path = args[++i];
      found = true;
    } else if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
      found = true;
    } else {
      rest.push_back(a);
    }
  }
  if (!found) return rest;

  const auto file_args = read_config_file(path);
  const auto at = (!rest.empty() && rest.front().rfind('-', 0) != 0) ? rest.begin() + 1 : rest.begin();
  rest.insert(at, file_args.begin(), file_args.end());
  return rest;
}

std::vector<std::string> split_list(const std::string& list) {
  std::vector<std::string> out;
  std::string item;
  for (char c : list + ",") {
    if (c == ',') {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item.push_back(c);
    }
  }
  return out;
}

}  // namespace hck::cli
