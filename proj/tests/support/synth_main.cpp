// Writes a planted-structure dataset plus config.json into a directory.

#include <CLI11.hpp>

#include <iostream>

#include "support/synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synthetic dataset generator"};
  puon::test::SynthSpec spec;
  std::string out, extra = "{}";
  app.add_option("out", out, "output directory")->required();
  app.add_option("--drugs", spec.n_drugs);
  app.add_option("--diseases", spec.n_diseases);
  app.add_option("--clusters", spec.clusters);
  app.add_option("--links", spec.links_per_cluster);
  app.add_option("--density", spec.density);
  app.add_option("--boost", spec.block_boost);
  app.add_option("--popularity", spec.popularity);
  app.add_option("--seed", spec.seed);
  app.add_option("--config-json", extra, "extra keys merged into config.json");
  CLI11_PARSE(app, argc, argv);
  try {
    const auto data = puon::test::make_synthetic(spec);
    std::cout << puon::test::write_synthetic(data, out, extra).string() << '\n';
    std::cerr << data.matrix.n_drugs() << " x " << data.matrix.n_diseases() << ", "
              << data.matrix.ones() << " associations\n";
  } catch (const std::exception& e) {
    std::cerr << "puon-synth: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
