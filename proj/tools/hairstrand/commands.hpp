#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hairstrand::cli {

struct GlobalOptions {
  int threads = 0;
  std::uint64_t seed = 0;
  std::string config;
};

struct Command {
  CLI::App* app = nullptr;
  std::function<void()> run;
};

std::vector<Command> add_commands(CLI::App& app, const GlobalOptions& globals);

}  // namespace hairstrand::cli
