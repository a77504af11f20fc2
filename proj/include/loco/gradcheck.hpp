// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "loco/layers.hpp"

namespace loco {

struct GradCheckCase {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  std::vector<GradCheckCase> cases;
  double worst_rel_err = 0.0;
  bool all_pass = true;
};

// Checks the production backward of every layer kind against central finite
// differences of the float64 reference forward, through the weighted-MSE
// loss. `step` is the central-difference step, `tol` the max relative error
// allowed per case. Inputs are resampled/nudged so no ReLU pre-activation
// sits within the kink band, which would invalidate the difference quotient.
GradCheckReport run_gradient_checks(std::uint64_t seed, int cases_per_kind, double step,
                                    double tol);

}  // namespace loco
