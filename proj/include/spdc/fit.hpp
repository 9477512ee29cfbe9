#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace spdc {

// Evaluate the model at point index i for parameters p; write the value and,
// when grad is non-null, d(value)/d(p_j) into grad[j].
using LmModelFn =
    std::function<void(const std::vector<double>& p, std::size_t i, double& value, double* grad)>;

struct LmOptions {
  double tolerance = 1e-8;   // relative step / relative chi-square change
  int max_iterations = 200;
  double initial_lambda = 1e-3;
};

struct LmResult {
  std::vector<double> params;
  std::vector<double> uncertainties;  // sqrt of the covariance diagonal
  double chi_square = 0.0;            // weighted sum of squared residuals
  std::size_t points = 0;
  int iterations = 0;
};

// Damped least squares with analytic Jacobian and per-point weights
// (weights multiply squared residuals; for counting data use 1/variance).
// Convergence failure raises an estimate error naming the last iterate.
LmResult lm_fit(const std::vector<double>& initial, std::size_t n_points,
                const LmModelFn& model, const std::vector<double>& observations,
                const std::vector<double>& weights, const LmOptions& opt = {});

}  // namespace spdc
