#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sderates/manifest.hpp"
#include "sderates/registry.hpp"

namespace cli = sderates::cli;

namespace {

int cmd_run(const std::string& path, const std::vector<std::string>& sets,
            const std::string& out_dir, bool no_timestamp) {
  cli::ExperimentManifest manifest;
  try {
    nlohmann::json doc = cli::apply_overrides(cli::load_json_file(path), sets);
    if (no_timestamp) doc["no_timestamp"] = true;
    if (!out_dir.empty()) doc["outputs"]["dir"] = out_dir;
    manifest = cli::ExperimentManifest::from_json(doc);
  } catch (const cli::ManifestError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return cli::kExitValidationError;
  }
  try {
    const cli::RunResult result = cli::run_and_write(manifest);
    for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& a : result.summary.value("assertions", nlohmann::json::array()))
      std::cout << (a.value("pass", false) ? "[PASS] " : "[FAIL] ")
                << a.value("id", std::string("?")) << "\n";
    std::cout << "wrote " << manifest.outputs.dir << "/" << manifest.outputs.summary << "\n";
    return result.exit_code;
  } catch (const cli::ManifestError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return cli::kExitValidationError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return cli::kExitRuntimeError;
  }
}

int cmd_validate(const std::string& path, const std::vector<std::string>& sets) {
  try {
    cli::ExperimentManifest::from_json(cli::apply_overrides(cli::load_json_file(path), sets));
    std::cout << "manifest ok\n";
    return cli::kExitPass;
  } catch (const cli::ManifestError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return cli::kExitValidationError;
  }
}

int cmd_list() {
  for (const auto& entry : sderates::registry::catalog())
    std::printf("%-13s %-22s %s\n", entry.kind.c_str(), entry.name.c_str(),
                entry.description.c_str());
  return cli::kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sderates: SDE functional approximation-error experiments"};
  app.require_subcommand(1);

  std::string manifest_path, out_dir;
  std::vector<std::string> sets;
  bool no_timestamp = false;

  CLI::App* run = app.add_subcommand("run", "execute an experiment manifest");
  run->add_option("manifest", manifest_path, "manifest JSON file")->required();
  run->add_option("--set", sets, "override a manifest field (key=value, dotted paths)");
  run->add_option("--out", out_dir, "output directory (overrides outputs.dir)");
  run->add_flag("--no-timestamp", no_timestamp, "omit the timestamped CSV header line");

  CLI::App* validate = app.add_subcommand("validate", "validate a manifest without running");
  validate->add_option("manifest", manifest_path, "manifest JSON file")->required();
  validate->add_option("--set", sets, "override a manifest field before validation");

  app.add_subcommand("list", "list built-in models, functionals and bumps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kExitPass : cli::kExitValidationError;
  }

  if (run->parsed()) return cmd_run(manifest_path, sets, out_dir, no_timestamp);
  if (validate->parsed()) return cmd_validate(manifest_path, sets);
  return cmd_list();
}
