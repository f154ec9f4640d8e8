// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "scion/cli/config.hpp"

namespace scion::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitViolation = 2,
  kExitNumerical = 3,
};

/// Entry point behind the `scion` executable. args excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_lmo_check(const Config& cfg, std::ostream& out);
int cmd_train(const Config& cfg, std::ostream& out);
int cmd_coord_check(const Config& cfg, std::ostream& out);
int cmd_sweep(const Config& cfg, std::ostream& out);
int cmd_rate(const Config& cfg, std::ostream& out);

}  // namespace scion::cli
