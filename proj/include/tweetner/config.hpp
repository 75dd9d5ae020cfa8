#pragma once

// Flat `key = value` run configuration files. Lines starting with '#' and
// blank lines are ignored; keys are long flag names without the dashes.

#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "tweetner/error.hpp"

namespace tweetner {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

inline ConfigEntries parse_config(std::istream& in) {
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  ConfigEntries entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::MalformedLine, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.starts_with("--")) key.erase(0, 2);
    if (key.empty()) throw Error(ErrorKind::MalformedLine, "config line " + std::to_string(lineno) + ": empty key");
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

/// Inserts `--key=value` for every config entry right after the subcommand
/// (position 1), so flags given on the command line come later and win.
inline std::vector<std::string> expand_config_args(std::vector<std::string> args, const ConfigEntries& entries) {
  std::vector<std::string> injected;
  for (const auto& [k, v] : entries) injected.push_back("--" + k + "=" + v);
  const auto at = args.size() >= 2 ? args.begin() + 2 : args.end();
  args.insert(at, injected.begin(), injected.end());
  return args;
}

}  // namespace tweetner
