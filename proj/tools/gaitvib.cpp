#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gaitvib/app/commands.hpp"
#include "gaitvib/core/error.hpp"

namespace {

int exit_code(gaitvib::ErrorKind k) {
  switch (k) {
    case gaitvib::ErrorKind::Config: return 2;
    case gaitvib::ErrorKind::Data: return 3;
    case gaitvib::ErrorKind::Numeric: return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Footstep vibration to joint angle toolkit"};
  app.require_subcommand(1);

  std::string config, out, model, split;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON run config (defaults when omitted)")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "global seed, overrides the config");
  };

  auto* simulate = app.add_subcommand("simulate", "synthesize the trial bundles and manifest");
  add_common(simulate);
  simulate->add_option("--out", out, "dataset directory (default dataset.dir)");

  auto* train = app.add_subcommand("train", "train one model on the dataset in dataset.dir");
  add_common(train);
  train->add_option("--model", model, "pig or lstm")->check(CLI::IsMember({"pig", "lstm"}));
  train->add_option("--out", out, "run directory (default output_dir)");
  train->add_option("--split", split, "loso trains leave-one-subject-out")->check(CLI::IsMember({"train", "test", "loso"}));

  auto* eval = app.add_subcommand("eval", "report per-group MAE of trained checkpoints");
  add_common(eval);
  eval->add_option("--model", model, "pig or lstm (default: every checkpoint found)")
      ->check(CLI::IsMember({"pig", "lstm"}));
  eval->add_option("--out", out, "run directory (default output_dir)");
  eval->add_option("--split", split, "train, test or loso (default test)")->check(CLI::IsMember({"train", "test", "loso"}));

  auto* print = app.add_subcommand("print-config", "print the effective config as JSON");
  add_common(print);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  using namespace gaitvib;
  app::CommandOptions o;
  CLI::App* sub = app.get_subcommands().front();
  if (!config.empty()) o.config = config;
  if (sub->count("--seed")) o.seed = seed;
  if (!out.empty()) o.out = out;
  if (!split.empty()) o.split = split;
  try {
    if (!model.empty()) o.model = pig::parse_model_kind(model);
    if (sub == simulate) app::cmd_simulate(o, std::cerr);
    else if (sub == train) app::cmd_train(o, std::cerr);
    else if (sub == eval) app::cmd_eval(o, std::cerr);
    else app::cmd_print_config(o, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
