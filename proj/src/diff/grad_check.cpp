#include "fvl/diff/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "fvl/common/error.hpp"

namespace fvl::diff {

namespace {

struct Evaluation {
  double loss = 0.0;
  std::vector<std::uint8_t> kinks;
};

Evaluation evaluate(Tape& tape, const std::vector<Matrix>& params, const Objective& objective) {
  tape.clear();
  tape.set_kink_tracking(true);
  std::vector<DiffArray> bound;
  bound.reserve(params.size());
  for (const auto& p : params) bound.push_back(tape.constant(p));
  const DiffArray loss = objective(tape, bound);
  return {loss.scalar(), tape.kink_pattern()};
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(std::vector<Matrix> params, std::span<const std::string> names,
                           const Objective& objective, GradCheckOptions options) {
  if (!(options.step > 0.0)) throw ContractError("grad_check step must be positive");
  if (!names.empty() && names.size() != params.size()) {
    throw ContractError("grad_check needs one name per parameter");
  }

  Tape tape;
  tape.set_kink_tracking(true);
  std::vector<DiffArray> bound;
  for (const auto& p : params) bound.push_back(tape.variable(p));
  const DiffArray loss = objective(tape, bound);
  tape.backward(loss);
  const std::vector<std::uint8_t> base_kinks = tape.kink_pattern();
  std::vector<Matrix> analytic;
  analytic.reserve(bound.size());
  for (const auto& b : bound) analytic.push_back(b.adjoint_matrix());

  GradCheckReport report;
  Tape scratch;
  for (std::size_t p = 0; p < params.size(); ++p) {
    ParameterCheck check;
    check.name = names.empty() ? "param" + std::to_string(p) : names[p];
    for (std::size_t k = 0; k < params[p].size(); ++k) {
      const double original = params[p].data[k];
      params[p].data[k] = original + options.step;
      const Evaluation plus = evaluate(scratch, params, objective);
      params[p].data[k] = original - options.step;
      const Evaluation minus = evaluate(scratch, params, objective);
      params[p].data[k] = original;
      if (plus.kinks != base_kinks || minus.kinks != base_kinks) {
        ++check.skipped;
        continue;
      }
      const double numeric = (plus.loss - minus.loss) / (2.0 * options.step);
      const double err = relative_error(analytic[p].data[k], numeric);
      ++check.checked;
      if (err > check.max_rel_error || !std::isfinite(err)) {
        check.max_rel_error = std::isfinite(err) ? err : INFINITY;
        check.worst_index = k;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.checked += check.checked;
    report.skipped += check.skipped;
    report.parameters.push_back(std::move(check));
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace fvl::diff
