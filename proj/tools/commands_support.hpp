#pragma once

#include <string>
#include <vector>

#include "cli.hpp"

namespace hetfb::cli {

/// Same clusters with `users` split as evenly as possible.
SystemConfig with_users(const SystemConfig& sys, int users);
void require_subband_fading(const RunConfig& cfg);
const ImpairmentParams& require_impairments(const RunConfig& cfg, const std::string& what);

// Estimation-error and delay grids of the parameter-sensitivity study.
std::vector<double> est_err_var_grid();
std::vector<double> alpha_grid();

} // namespace hetfb::cli
