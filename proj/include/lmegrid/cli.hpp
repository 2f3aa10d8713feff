// Command front end shared by the binary and the tests. Commands write
// byte-deterministic result files under out_dir and report through exit
// codes: 0 success, 1 solver or numerical failure, 2 input validation
// failure.
#pragma once

#include <string>

namespace lmegrid {

struct RunConfig {
  std::string command;        // validate|dispatch|lme|accounts|scenario|storage|verify
  std::string network_path;
  std::string demand_path;    // scenario CSV or horizon demand CSV
  std::string capacity_path;  // optional horizon capacity-factor CSV
  double tol = 1e-8;
  std::string ref_node;       // optional reference-node override
  int window = 24;            // storage horizon window length
  std::string out_dir = ".";
  std::string format = "csv";  // csv|json
  int workers = 1;
  int periods_per_day = 24;    // hour-of-day bucketing for scenario aggregates
  bool allow_negative_demand = false;
  double default_storage_efficiency = 0.81;
};

int run_command(const RunConfig& config);

}  // namespace lmegrid
