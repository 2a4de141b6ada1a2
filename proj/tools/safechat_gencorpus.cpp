#include <iostream>

#include <CLI11.hpp>

#include "safechat/app.hpp"

namespace app = safechat::app;

int main(int argc, char** argv) {
  CLI::App cli{"Write a synthetic labeled corpus (corpus.csv, negatives.txt)"};
  app::GenCorpusArgs args;
  cli.add_option("--out-dir", args.out_dir, "Output directory")->required();
  cli.add_option("--n-docs", args.n_docs, "Total documents, half reports and half negatives")
      ->check(CLI::PositiveNumber);
  cli.add_option("--seed", args.seed, "Generator seed");
  cli.add_option("--label-noise", args.label_noise, "Probability of flipping each type label")
      ->check(CLI::Range(0.0, 1.0));
  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? app::kOk : app::kBadInput;
  }
  return app::cmd_gencorpus(args, std::cout, std::cerr);
}
