// Command-line front end: jcmp run <config> [--out DIR] [--format LIST] [--seed S] [--threads K]
//
// Exit codes: 0 success, 2 configuration error, 3 computation failure.
// Flags override the corresponding fields of the file; the output directory
// otherwise falls back to $JCMP_OUTPUT_DIR, then ./jcmp-output.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "jcmp/cli/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::string> formats;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

jcmp::cli::Json effective_document(const Overrides& o) {
  using jcmp::cli::Json;
  Json doc = jcmp::cli::load_document(o.config_path);
  if (!doc.is_object()) throw jcmp::cli::ConfigError("<root>", "expected a JSON object");
  if (doc.contains("output") && !doc.at("output").is_object()) {
    throw jcmp::cli::ConfigError("output", "expected an object");
  }
  Json& output = doc["output"];
  if (output.is_null()) output = Json::object();
  if (o.out) {
    output["dir"] = *o.out;
  } else if (!output.contains("dir")) {
    const char* env = std::getenv("JCMP_OUTPUT_DIR");
    output["dir"] = env && *env ? std::string(env) : std::string("jcmp-output");
  }
  if (o.formats) {
    const auto set = jcmp::cli::parse_formats(*o.formats);
    output["formats"] = Json(std::vector<std::string>(set.begin(), set.end()));
  }
  if (o.seed) doc["seeds"] = Json::array({*o.seed});
  if (o.threads) doc["threads"] = *o.threads;
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven Jaynes-Cummings and Kerr oscillator experiments"};
  app.set_version_flag("--version", std::string(jcmp::kVersion));
  app.require_subcommand(1);
  Overrides o;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file (or a manifest)");
  run->add_option("config", o.config_path, "Config file (JSON)")->required();
  run->add_option("--out", o.out, "Output directory");
  run->add_option("--format", o.formats, "Comma-separated subset of csv,json,svg");
  run->add_option("--seed", o.seed, "Single trajectory seed, replaces the seed list");
  run->add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const auto config = jcmp::cli::parse_config(effective_document(o));
    const auto result = jcmp::cli::run(config);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& f : result.files) std::cout << (result.out_dir / f).string() << "\n";
    std::cout << (result.out_dir / "manifest.json").string() << "\n";
    return 0;
  } catch (const jcmp::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "computation failed: " << e.what() << "\n";
    return kExitCompute;
  }
}
