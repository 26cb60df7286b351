#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fhj/config.hpp"
#include "fhj/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "fhj -- boundary blow-up laboratory for fractional Hamilton-Jacobi "
      "equations"};
  app.get_formatter()->column_width(28);

  std::string command, config_path, out_dir;
  std::vector<std::string> overrides;
  std::string cmd_help = "one of:";
  for (const std::string& c : fhj::command_names()) cmd_help += " " + c;
  app.add_option("command", command, cmd_help)->required();
  app.add_option("--config", config_path, "experiment configuration file");
  app.add_option("--out", out_dir, "artifact directory (overrides out.dir)");
  app.add_option("--override", overrides,
                 "key=value assignment applied after the file (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fhj::run_invalid;
  }

  fhj::ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = fhj::ExperimentConfig::parse_file(config_path);
    for (const std::string& o : overrides) cfg.apply_override(o);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fhj: %s\n", e.what());
    return fhj::run_invalid;
  }

  const fhj::RunResult res = fhj::run_command(command, cfg);
  if (!res.message.empty()) std::printf("%s\n", res.message.c_str());
  for (const std::string& a : res.artifacts) std::printf("wrote %s\n", a.c_str());
  return res.status;
}
