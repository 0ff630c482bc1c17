#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "deepref/error.hpp"
#include "deepref/harness/commands.hpp"
#include "deepref/harness/config.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kData = 2, kRuntime = 3 };

}  // namespace

int main(int argc, char** argv) {
  using namespace deepref;

  CLI::App app{"Trace-driven simulator for learned CDN edge prefetching"};
  app.require_subcommand(1);

  std::string config_path;
  harness::CommandOptions opts;
  std::uint64_t seed = 0;
  int edge = 0, target = 0, capacity = 0;
  std::string policy, out;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Config file (key = value lines)");
    cmd->add_option("--seed", seed, "Override the seed list with one seed");
    cmd->add_option("--out", out, "Output root (default: output_dir)");
  };
  auto add_edge = [&](CLI::App* cmd) { cmd->add_option("--edge", edge, "Edge id"); };
  auto add_cell = [&](CLI::App* cmd) {
    cmd->add_option("--capacity", capacity, "Edge cache capacity");
    cmd->add_option("--policy", policy, "Policy name");
  };

  auto* prepare = app.add_subcommand("prepare", "Cluster users into edges and write traces");
  add_common(prepare);
  auto* train = app.add_subcommand("train", "Train dqn/drqn on an edge's train split");
  add_common(train);
  add_edge(train);
  add_cell(train);
  auto* eval = app.add_subcommand("eval", "Greedy evaluation on an edge's test split");
  add_common(eval);
  add_edge(eval);
  add_cell(eval);
  auto* transfer = app.add_subcommand("transfer", "Zero-shot evaluation on another edge");
  add_common(transfer);
  add_edge(transfer);
  add_cell(transfer);
  transfer->add_option("--target", target, "Target edge id (default: transfer_edge)");
  auto* report = app.add_subcommand("report", "Pivot result rows into a table");
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  auto* cmd = app.get_subcommands().front();
  auto given = [&](const char* name) {
    auto* o = cmd->get_option_no_throw(name);
    return o && o->count() > 0;
  };
  if (given("--seed")) opts.seed = seed;
  if (given("--edge")) opts.edge = edge;
  if (given("--target")) opts.target_edge = target;
  if (given("--capacity")) opts.capacity = capacity;
  if (given("--policy")) opts.policy = policy;
  if (given("--out")) opts.out = out;

  try {
    const auto config = config_path.empty() ? harness::default_config() : harness::load_config(config_path);
    std::vector<std::filesystem::path> written;
    if (cmd == prepare) written = harness::cmd_prepare(config, opts);
    if (cmd == train) written = harness::cmd_train(config, opts);
    if (cmd == eval) written = harness::cmd_eval(config, opts);
    if (cmd == transfer) written = harness::cmd_transfer(config, opts);
    if (cmd == report) written = harness::cmd_report(config, opts);
    for (const auto& p : written) std::cout << p.string() << "\n";
    if (cmd == report) {
      std::ifstream in(written.at(1));
      std::cout << in.rdbuf();
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
