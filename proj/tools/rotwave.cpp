// Configuration-driven entry point. One experiment per invocation:
//   rotwave --config cfg.json [--output-dir DIR] [--threads N] [--model.p=3 ...]
// Unrecognized --key.path=value flags override the corresponding config entry.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "rotwave/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rotwave: prescribed-mass minimizers and dynamics of the rotating "
               "Gross-Pitaevskii equation at critical rotation speed"};
  std::string config_path;
  std::string output_dir;
  int threads = 0;
  app.add_option("-c,--config", config_path, "JSON config file")->required();
  app.add_option("-o,--output-dir", output_dir, "override output directory");
  app.add_option("-t,--threads", threads, "worker threads for sweeps");
  app.allow_extras();

  CLI11_PARSE(app, argc, argv);

  nlohmann::json doc;
  try {
    std::ifstream is(config_path);
    if (!is) {
      std::cerr << "validation error: cannot open config " << config_path << "\n";
      return rotwave::kValidationFailure;
    }
    doc = nlohmann::json::parse(is);
  } catch (const std::exception& e) {
    std::cerr << "validation error: config parse: " << e.what() << "\n";
    return rotwave::kValidationFailure;
  }

  try {
    for (std::string extra : app.remaining()) {
      if (extra.rfind("--", 0) == 0) extra = extra.substr(2);
      rotwave::apply_override(doc, extra);
    }
    if (!output_dir.empty()) doc["output_dir"] = output_dir;
    if (threads > 0) doc["threads"] = threads;

    const rotwave::RunConfig cfg = rotwave::parse_config(doc);
    const rotwave::RunResult res = rotwave::run_config(cfg);
    std::cout << "manifest: " << res.manifest_path.string() << "\n";
    return res.exit_code;
  } catch (const rotwave::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return rotwave::kValidationFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return rotwave::kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return rotwave::kNumericalFailure;
  }
}
