#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fvl/diff/matrix.hpp"
#include "fvl/diff/tape.hpp"

namespace fvl::diff {

// Builds a scalar loss on `tape` from leaf arrays bound to the parameters.
using Objective = std::function<DiffArray(Tape& tape, std::span<const DiffArray> params)>;

struct GradCheckOptions {
  double step = 1e-6;
  double tolerance = 1e-4;
};

struct ParameterCheck {
  std::string name;
  std::size_t checked = 0;
  // Elements whose +/- perturbation flipped a relu input across zero.
  std::size_t skipped = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
};

struct GradCheckReport {
  std::vector<ParameterCheck> parameters;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  bool passed = false;
};

// |a - n| / max(1, |a|, |n|)
double relative_error(double analytic, double numeric);

// Compares tape adjoints against central finite differences, one element at
// a time. `names` may be empty or must match `params` in length.
GradCheckReport grad_check(std::vector<Matrix> params, std::span<const std::string> names,
                           const Objective& objective, GradCheckOptions options = {});

}  // namespace fvl::diff
