#include <iostream>

#include <CLI11.hpp>

#include "app/commands.hpp"

int main(int argc, char** argv) {
  using namespace cnet::app;
  CLI::App cli{"Concatenated-network histopathology classifier"};
  cli.require_subcommand(1);

  SplitArgs split;
  std::string exclusion_list;
  auto* split_cmd = cli.add_subcommand("split", "Scan an image tree and write a stratified manifest CSV");
  split_cmd->add_option("--data-dir", split.data_dir, "Root holding one directory per class")->required();
  split_cmd->add_option("--classes", split.classes, "Negative and positive class directory names")
      ->capture_default_str();
  split_cmd->add_option("--group", split.group, "Keep only images whose group tag equals this");
  split_cmd->add_option("--ratios", split.ratios, "Train, val and test fractions")->capture_default_str();
  split_cmd->add_option("--seed", split.seed, "Shuffle seed")->capture_default_str();
  split_cmd->add_option("--out", split.out, "Manifest CSV to write")->required();
  split_cmd->add_option("--exclude", exclusion_list, "File listing images to leave out, one per line");

  TrainArgs train;
  auto* train_cmd = cli.add_subcommand("train", "Train a network from a run config");
  train_cmd->add_option("--config", train.config, "Run config (key=value)")->required();
  train_cmd->add_option("--manifest", train.manifest, "Manifest CSV (overrides the config)");
  train_cmd->add_option("--checkpoint-out", train.checkpoint_out, "Checkpoint to write (overrides the config)");
  train_cmd->add_option("--log-out", train.log_out, "Training log CSV (overrides the config)");

  EvalArgs eval;
  std::string eval_config;
  auto* eval_cmd = cli.add_subcommand("eval", "Score the test split and write a metric report");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint to evaluate")->required();
  eval_cmd->add_option("--manifest", eval.manifest, "Manifest CSV")->required();
  eval_cmd->add_option("--report-out", eval.report_out, "Report file to write (default: the config report key)");
  eval_cmd->add_option("--format", eval.format, "csv or json (default: the config report_format, else csv)");
  eval_cmd->add_option("--config", eval_config, "Run config the checkpoint must match");
  eval_cmd->add_option("--batch-size", eval.batch_size, "Images per forward pass")->capture_default_str();

  PredictArgs predict;
  auto* predict_cmd = cli.add_subcommand("predict", "Classify one image");
  predict_cmd->add_option("--checkpoint", predict.checkpoint, "Checkpoint to use")->required();
  predict_cmd->add_option("--image", predict.image, "PNG or JPEG image")->required();

  VerifyArgs verify;
  auto* verify_cmd = cli.add_subcommand("verify", "Run the built-in correctness checks");
  verify_cmd->add_flag("--fast", verify.fast, "3 gradient-check seeds instead of 20");
  verify_cmd->add_option("--mutate", verify.mutate, "Inject a defect: none, conv-sign or mcc-swap")
      ->capture_default_str();

  CLI11_PARSE(cli, argc, argv);

  try {
    if (*split_cmd) {
      if (!exclusion_list.empty()) split.exclusion_list = exclusion_list;
      return cmd_split(split, std::cout, std::cerr);
    }
    if (*train_cmd) return cmd_train(train, std::cout, std::cerr);
    if (*eval_cmd) {
      if (!eval_config.empty()) eval.config = eval_config;
      return cmd_eval(eval, std::cout, std::cerr);
    }
    if (*predict_cmd) return cmd_predict(predict, std::cout, std::cerr);
    if (*verify_cmd) return cmd_verify(verify, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code::kFailure;
  }
  return exit_code::kFailure;
}
