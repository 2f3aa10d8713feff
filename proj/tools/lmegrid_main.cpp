#include <CLI11.hpp>

#include "lmegrid/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Grid dispatch, locational marginal emissions, and carbon accounts"};
  app.require_subcommand(1);

  lmegrid::RunConfig cfg;
  const std::vector<std::string> commands = {
      "validate", "dispatch", "lme", "accounts", "scenario", "storage", "verify"};
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--network", cfg.network_path, "Network JSON file")
        ->required()
        ->envname("LMEGRID_NETWORK");
    sub->add_option("--demand", cfg.demand_path,
                    "Scenario CSV (scenario) or horizon demand CSV (storage)")
        ->envname("LMEGRID_DEMAND");
    sub->add_option("--capacity", cfg.capacity_path,
                    "Horizon capacity-factor CSV (storage)")
        ->envname("LMEGRID_CAPACITY");
    sub->add_option("--tol", cfg.tol, "Solver tolerance")->envname("LMEGRID_TOL");
    sub->add_option("--ref-node", cfg.ref_node, "Reference node override")
        ->envname("LMEGRID_REF_NODE");
    sub->add_option("--window", cfg.window, "Storage horizon window length")
        ->check(CLI::PositiveNumber)
        ->envname("LMEGRID_WINDOW");
    sub->add_option("--out", cfg.out_dir, "Output directory")
        ->envname("LMEGRID_OUT");
    sub->add_option("--format", cfg.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->envname("LMEGRID_FORMAT");
    sub->add_option("--workers", cfg.workers, "Concurrent scenario workers")
        ->check(CLI::PositiveNumber)
        ->envname("LMEGRID_WORKERS");
    sub->add_option("--periods-per-day", cfg.periods_per_day,
                    "Periods per day for hourly buckets")
        ->check(CLI::PositiveNumber)
        ->envname("LMEGRID_PERIODS_PER_DAY");
    sub->add_flag("--allow-negative-demand", cfg.allow_negative_demand,
                  "Accept negative nodal demand (behind-the-meter injection)");
    sub->add_option("--default-efficiency", cfg.default_storage_efficiency,
                    "Storage efficiency when the network omits it")
        ->envname("LMEGRID_DEFAULT_EFFICIENCY");
  }

  CLI11_PARSE(app, argc, argv);
  cfg.command = app.get_subcommands().front()->get_name();
  return lmegrid::run_command(cfg);
}
