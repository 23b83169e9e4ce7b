#pragma once

#include "hybavg/settings.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace hybavg::cli {

enum ExitCode { kOk = 0, kNegative = 1, kUsage = 2, kNumerical = 3 };

struct CommonOptions {
  std::string model;
  std::map<std::string, double> params;  // --key value overrides
  std::string settings_path;
  std::string out;  // path prefix: <out>.toml and <out>.csv
  bool quiet = false;
};

/// Turns leftover `--key value` / `--key=value` tokens into parameter
/// overrides. Dashes in keys become underscores. Throws InvalidArgument.
std::map<std::string, double> parse_overrides(const std::vector<std::string>& tokens);

Settings resolve_settings(const CommonOptions& o);

int cmd_simulate(const CommonOptions& o, int strides, double x2_init, bool has_x2_init,
                 std::ostream& out);
int cmd_certify(const CommonOptions& o, std::ostream& out);
int cmd_sweep(const CommonOptions& o, double eps_min, double eps_max, int points,
              std::ostream& out);
int cmd_check(const CommonOptions& o, std::ostream& out);

}  // namespace hybavg::cli
