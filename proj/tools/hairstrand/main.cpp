#include "commands.hpp"
#include "config_file.hpp"

#include "hairstrand/error.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <omp.h>

namespace {

enum ExitCode { kOk = 0, kIoOrParse = 2, kBadConfig = 3, kInternal = 4 };

// Config values fill options the command line left unset.
void apply_config(CLI::App& app, CLI::App& sub, const std::string& path) {
  for (const auto& [key, value] : hairstrand::cli::read_config_file(path)) {
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (!opt) opt = app.get_option_no_throw("--" + key);
    if (!opt || key == "config") {
      throw hairstrand::InvalidArgument(fmt::format("{}: unknown key '{}' for '{}'", path, key, sub.get_name()));
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hair strand fragment merging, refinement and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  hairstrand::cli::GlobalOptions globals;
  app.add_option("--threads", globals.threads, "OpenMP threads (0 keeps the runtime default)");
  app.add_option("--seed", globals.seed)->capture_default_str();
  app.add_option("--config", globals.config, "flat 'key = value' file; flags override it");
  const auto commands = hairstrand::cli::add_commands(app, globals);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadConfig;
  }

  try {
    for (const auto& c : commands) {
      if (!c.app->parsed()) continue;
      if (!globals.config.empty()) apply_config(app, *c.app, globals.config);
      if (globals.threads < 0) throw hairstrand::InvalidArgument("--threads must be non-negative");
      if (globals.threads > 0) omp_set_num_threads(globals.threads);
      c.run();
    }
  } catch (const hairstrand::FormatError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kIoOrParse;
  } catch (const CLI::ParseError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kBadConfig;
  } catch (const hairstrand::InvalidArgument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kBadConfig;
  } catch (const hairstrand::EmptyInput& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kBadConfig;
  } catch (const hairstrand::DimensionMismatch& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kBadConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return kInternal;
  }
  return kOk;
}
