// bellab: batch front end for correlation scans, CHSH values, the
// derivation-chain verifier and the coupled-oscillator integrator.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "bellab/app/commands.hpp"

namespace {

constexpr const char* kCommands[] = {"correlate", "chsh", "verify", "oscillator"};

std::string default_format(const std::string& command) {
  return command == "correlate" || command == "oscillator" ? "csv" : "json";
}

int write_outputs(const bellab::app::CommandResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::cerr << "bellab: cannot create output directory " << dir << ": " << ec.message() << "\n";
    return bellab::app::kExitConfigError;
  }
  for (const auto& f : result.files) {
    std::ofstream out(dir / f.name, std::ios::binary);
    out << f.content;
    if (!out) {
      std::cerr << "bellab: cannot write " << (dir / f.name) << "\n";
      return bellab::app::kExitConfigError;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bell-test and coupled-oscillator simulation laboratory"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "random seed; overrides the config value");
  app.add_option("--out", out_dir, "directory receiving every output file");
  app.add_option("--format", format, "format printed to stdout when --out is absent")
      ->check(CLI::IsMember({"csv", "json"}));

  for (const char* name : kCommands) app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bellab::app::kExitConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  nlohmann::json doc = nlohmann::json::object();
  bellab::app::OutputSettings output;
  try {
    if (config_path) doc = bellab::app::load_config_file(*config_path);
    output = bellab::app::take_output_settings(doc);
  } catch (const bellab::app::ConfigError& e) {
    std::cerr << "bellab: config error: " << e.what() << "\n";
    return bellab::app::kExitConfigError;
  }
  if (out_dir) output.out = out_dir;
  if (format) output.format = format;

  const auto result = bellab::app::run_command(command, doc, {.seed = seed});
  if (result.exit_code == bellab::app::kExitConfigError) {
    std::cerr << "bellab: " << result.diagnostics << "\n";
    return result.exit_code;
  }

  if (output.out) {
    if (const int rc = write_outputs(result, *output.out)) return rc;
    std::cout << result.summary;
  } else {
    const auto* file = result.file_with_extension(output.format.value_or(default_format(command)));
    if (file) std::cout << file->content;
    std::cerr << result.summary;
  }
  return result.exit_code;
}
