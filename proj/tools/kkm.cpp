// kkm: approximate kernel k-means experiments from the command line.
#include "kkm/runner.hpp"

#include <fstream>
#include <iostream>

#include "CLI11.hpp"

namespace {

void emit(const nlohmann::ordered_json& report, const std::string& out) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out);
  if (!file) throw kkm::InvalidArgument("cannot write '" + out + "'");
  file << text;
}

void emit_csv(const std::string& csv, const std::string& path) {
  if (path.empty()) return;
  std::ofstream file(path);
  if (!file) throw kkm::InvalidArgument("cannot write '" + path + "'");
  file << csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate kernel k-means with rank-restricted Nystrom features"};
  app.require_subcommand(1);

  std::string out, csv;
  std::string config_path, config_a, config_b, grid_text, harness;
  std::uint64_t verify_seed = 0;

  auto* run_cmd = app.add_subcommand("run", "Run the trials of one configuration");
  run_cmd->add_option("--config", config_path, "key=value or JSON config")->required();
  run_cmd->add_option("--out", out, "JSON report path (default stdout)");
  run_cmd->add_option("--csv", csv, "Per-trial CSV path");

  auto* compare_cmd = app.add_subcommand("compare", "Paired trials of two configurations");
  compare_cmd->add_option("--a", config_a)->required();
  compare_cmd->add_option("--b", config_b)->required();
  compare_cmd->add_option("--out", out);
  compare_cmd->add_option("--csv", csv);

  auto* sweep_cmd = app.add_subcommand("sweep", "One run per grid value");
  sweep_cmd->add_option("--config", config_path)->required();
  sweep_cmd->add_option("--grid", grid_text, "key=v1,v2,...")->required();
  sweep_cmd->add_option("--out", out);

  auto* verify_cmd = app.add_subcommand("verify", "Run a verification harness");
  verify_cmd->add_option("name", harness, "theorem1 | pcp | kernel-trick")
      ->required()
      ->check(CLI::IsMember({"theorem1", "pcp", "kernel-trick"}));
  verify_cmd->add_option("--seed", verify_seed);
  verify_cmd->add_option("--out", out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      kkm::RunConfig config = kkm::load_config(config_path);
      if (out.empty()) out = config.output;
      const kkm::Report report = kkm::run(config);
      emit(report.to_json(), out);
      emit_csv(report.to_csv(), csv);
    } else if (*compare_cmd) {
      const kkm::PairedReport report =
          kkm::compare(kkm::load_config(config_a), kkm::load_config(config_b));
      emit(report.to_json(), out);
      emit_csv(report.to_csv(), csv);
    } else if (*sweep_cmd) {
      emit(kkm::sweep(kkm::load_config(config_path), kkm::parse_grid(grid_text)), out);
    } else if (*verify_cmd) {
      const auto result = kkm::verify(harness, verify_seed);
      emit(result, out);
      return result["passed"].get<bool>() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "kkm: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
