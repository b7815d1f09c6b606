#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "riplab/commands.hpp"
#include "riplab/error.hpp"

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw riplab::Error(riplab::Errc::BadInput, "cannot write " + path.string());
  out << content;
  std::cerr << "wrote " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metastability toolkit for reversible inclusion processes: exact capacities and hitting times, "
               "kinetic Monte Carlo, and time-scale predictions over (N, d_N) sweeps."};
  app.require_subcommand(1, 1);

  std::string scenario_path;
  riplab::CommandOptions options;
  options.workers = riplab::default_workers();
  std::string out_dir;
  std::string format_name = "csv";

  std::map<std::string, riplab::OutputFormat> formats{
      {"csv", riplab::OutputFormat::Csv}, {"json", riplab::OutputFormat::Json}, {"svg", riplab::OutputFormat::Svg}};

  auto add_common = [&](CLI::App* sub, bool sweep) {
    sub->add_option("scenario", scenario_path, "Scenario YAML file")->required()->check(CLI::ExistingFile);
    if (!sweep) return;
    sub->add_option("--scale", options.scale, "Time-scale 1, 2 or 3 (overrides the scenario)")
        ->check(CLI::Range(1, 3));
    sub->add_option("--trials", options.trials, "Monte Carlo trials per sweep point");
    sub->add_option("--seed", options.seed, "Base seed; trial t uses the substream (seed, t)");
    sub->add_option("--workers", options.workers,
                    "Sweep points run concurrently (default from RIPLAB_WORKERS, else 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--epsilon", options.epsilon, "Test-function epsilon for verify (default 0.05)");
    sub->add_option("--out-dir", out_dir, "Write outputs into this directory instead of stdout");
    sub->add_option("--format", format_name, "Output format")->check(CLI::IsMember({"csv", "json", "svg"}));
  };

  auto* validate = app.add_subcommand("validate", "Check the kernel and sweep; print S*, m* and the chain shape");
  add_common(validate, false);
  auto* capacity = app.add_subcommand("capacity", "Exact capacities per sweep point");
  add_common(capacity, true);
  auto* hitting = app.add_subcommand("hitting", "Exact mean hitting times, predictions and optional Monte Carlo");
  add_common(hitting, true);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo hitting times and condensate paths");
  add_common(simulate, true);
  auto* predict = app.add_subcommand("predict", "Closed-form time-scale predictions only");
  add_common(predict, true);
  auto* verify = app.add_subcommand("verify", "Run the verification battery of a time-scale");
  add_common(verify, true);

  CLI11_PARSE(app, argc, argv);

  try {
    riplab::CommandResult result;
    std::string command;
    if (validate->parsed()) {
      command = "validate";
      result = riplab::cmd_validate(scenario_path);
      std::cout << result.output;
      return result.exit_code;
    }
    const auto scenario = riplab::load_scenario(scenario_path);
    const auto format = formats.at(format_name);
    if (capacity->parsed()) {
      command = "capacity";
      result = riplab::cmd_capacity(scenario, options, format);
    } else if (hitting->parsed()) {
      command = "hitting";
      result = riplab::cmd_hitting(scenario, options, format);
    } else if (simulate->parsed()) {
      command = "simulate";
      result = riplab::cmd_simulate(scenario, options, format);
    } else if (predict->parsed()) {
      command = "predict";
      result = riplab::cmd_predict(scenario, options, format);
    } else {
      command = "verify";
      const int scale = options.scale.value_or(scenario.scale);
      if (scale == 0) throw riplab::Error(riplab::Errc::BadParameter, "verify needs --scale or a scenario scale");
      result = riplab::cmd_verify(scenario, scale, options, format);
    }

    if (out_dir.empty()) {
      std::cout << result.output;
    } else {
      std::filesystem::create_directories(out_dir);
      const bool svg = format == riplab::OutputFormat::Svg && (command == "capacity" || command == "hitting");
      const std::string ext = svg ? "svg" : format == riplab::OutputFormat::Json ? "json" : "csv";
      write_file(std::filesystem::path(out_dir) / (command + "." + ext), result.output);
      for (const auto& extra : result.extras) write_file(std::filesystem::path(out_dir) / extra.name, extra.content);
    }
    return result.exit_code;
  } catch (const riplab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
