#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nodal_idn/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Reconstruct a nodal curve from Dirichlet-to-Neumann data", "nodal-idn"};
  std::string command, config, out;
  unsigned jobs = 0;
  app.add_option("command", command, "forward | invert | residues | characterize | compact")
      ->required()
      ->check(CLI::IsMember({"forward", "invert", "residues", "characterize", "compact"}));
  app.add_option("--config", config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output path, overrides the config");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  std::optional<unsigned> j;
  if (jobs > 0) j = jobs;
  std::optional<std::filesystem::path> o;
  if (!out.empty()) o = out;
  return nodal_idn::pipeline::run(command, config, j, o, std::cerr);
}
