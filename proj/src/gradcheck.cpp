#include "polywsd/gradcheck.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "polywsd/errors.hpp"

namespace polywsd {

namespace {

double evaluate(const LossBuilder& loss) {
  Tape tape;
  return tape.value(loss(tape)).item();
}

}  // namespace

GradCheckReport finite_diff_check(const LossBuilder& loss, std::span<Tensor* const> params, double h) {
  if (!(h > 0.0)) throw ContractError("finite_diff_check: step must be positive");

  const double base = evaluate(loss);
  const double again = evaluate(loss);
  if (std::bit_cast<std::uint64_t>(base) != std::bit_cast<std::uint64_t>(again)) {
    throw OracleError("finite_diff_check: loss is not deterministic (" + std::to_string(base) + " vs " +
                      std::to_string(again) + ")");
  }

  for (Tensor* p : params) {
    p->set_requires_grad(true);
    p->zero_grad();
  }
  {
    Tape tape;
    tape.backward(loss(tape));
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    auto data = p.mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + h;
      const double plus = evaluate(loss);
      data[i] = saved - h;
      const double minus = evaluate(loss);
      data[i] = saved;

      const double numeric = (plus - minus) / (2.0 * h);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
      ++report.coordinates;
      if (err > report.max_rel_error || report.coordinates == 1) {
        report.max_rel_error = std::max(report.max_rel_error, err);
        report.worst_param = k;
        report.worst_index = i;
        report.worst_analytic = analytic[i];
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

GradCheckReport finite_diff_check(const LossBuilder& loss, Tensor& params, double h) {
  Tensor* one[] = {&params};
  return finite_diff_check(loss, std::span<Tensor* const>(one), h);
}

}  // namespace polywsd
