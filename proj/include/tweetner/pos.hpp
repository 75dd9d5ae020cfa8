#pragma once

// Part-of-speech tags for the POS feature. Tags come either from the third
// column of the IOB input, from nowhere, or from an external tagger process
// speaking a line protocol: one token per line on its stdin, one tag per
// line on its stdout, every sentence terminated by a blank line.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "tweetner/corpus.hpp"
#include "tweetner/error.hpp"

namespace tweetner {

enum class PosSource { None, Column, External };

struct PosProvider {
  PosSource source = PosSource::Column;
  std::string command;  // External only; run through /bin/sh
};

inline PosSource parse_pos_source(std::string_view name) {
  if (name == "none") return PosSource::None;
  if (name == "column") return PosSource::Column;
  if (name == "external") return PosSource::External;
  throw Error(ErrorKind::InvalidParams, "unknown POS provider '" + std::string(name) + "'");
}

inline std::string_view to_string(PosSource s) {
  switch (s) {
    case PosSource::None: return "none";
    case PosSource::Column: return "column";
    case PosSource::External: return "external";
  }
  return "none";
}

namespace detail {

inline std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

inline std::vector<std::vector<std::string>> run_external_tagger(const std::string& command,
                                                                 const std::vector<std::vector<Token>>& sentences) {
  namespace fs = std::filesystem;
  const fs::path input = fs::temp_directory_path() /
                         ("tweetner-pos-" + std::to_string(::getpid()) + "-" +
                          std::to_string(reinterpret_cast<std::uintptr_t>(&sentences)) + ".txt");
  {
    std::ofstream out(input);
    if (!out) throw Error(ErrorKind::ProviderFailure, "cannot create tagger input file");
    for (const auto& s : sentences) {
      for (const auto& t : s) out << t.text << '\n';
      out << '\n';
    }
  }
  const std::string shell = command + " < " + shell_quote(input.string());
  FILE* pipe = ::popen(shell.c_str(), "r");
  if (pipe == nullptr) {
    fs::remove(input);
    throw Error(ErrorKind::ProviderFailure, "cannot start '" + command + "'");
  }
  std::string output;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
  const int status = ::pclose(pipe);
  fs::remove(input);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw Error(ErrorKind::ProviderFailure, "'" + command + "' exited with failure");
  }

  std::vector<std::vector<std::string>> tags(1);
  std::size_t start = 0;
  while (start < output.size()) {
    auto nl = output.find('\n', start);
    if (nl == std::string::npos) nl = output.size();
    std::string line = output.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) tags.emplace_back();
    else tags.back().push_back(std::move(line));
    start = nl + 1;
  }
  if (tags.back().empty()) tags.pop_back();
  if (tags.size() != sentences.size()) {
    throw Error(ErrorKind::ProviderFailure, "tagger returned " + std::to_string(tags.size()) + " sentences, expected " +
                                                std::to_string(sentences.size()));
  }
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].size() != sentences[i].size()) {
      throw Error(ErrorKind::ProviderFailure, "tag count mismatch in sentence " + std::to_string(i));
    }
  }
  return tags;
}

}  // namespace detail

/// One tag per token, or an empty list when the provider yields none.
inline std::vector<std::string> pos_tags(const std::vector<Token>& sentence, const PosProvider& provider) {
  switch (provider.source) {
    case PosSource::None:
      return {};
    case PosSource::Column: {
      std::vector<std::string> tags;
      for (const auto& t : sentence) {
        if (!t.pos) return {};
        tags.push_back(*t.pos);
      }
      return tags;
    }
    case PosSource::External:
      return detail::run_external_tagger(provider.command, {sentence}).front();
  }
  return {};
}

/// Rewrites the pos field of every token according to the provider. The
/// external tagger is started once for the whole batch.
inline void apply_pos_provider(std::vector<std::vector<Token>>& sentences, const PosProvider& provider) {
  switch (provider.source) {
    case PosSource::None:
      for (auto& s : sentences)
        for (auto& t : s) t.pos.reset();
      return;
    case PosSource::Column:
      return;
    case PosSource::External: {
      if (sentences.empty()) return;
      const auto tags = detail::run_external_tagger(provider.command, sentences);
      for (std::size_t i = 0; i < sentences.size(); ++i)
        for (std::size_t j = 0; j < sentences[i].size(); ++j) sentences[i][j].pos = tags[i][j];
      return;
    }
  }
}

}  // namespace tweetner
