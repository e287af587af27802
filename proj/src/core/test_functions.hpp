#ifndef LCLAB_TEST_FUNCTIONS_HPP
#define LCLAB_TEST_FUNCTIONS_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lclab {

// Locally Lipschitz probe with analytic gradient where available; sup_bound
// and lipschitz are filled for members used in sup-convolutions.
struct TestFunction {
  std::string label;
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  double sup_bound = 0.0;  // 0 = unbounded / unknown
  double lipschitz = 0.0;

  bool has_gradient() const { return static_cast<bool>(gradient); }
};

using TestFunctionFamily = std::vector<TestFunction>;

// Coordinates, |x|^2, pair products, smooth bumps, ridges, clipped linears,
// trigonometric probes. At least 12 members in every dimension, all with
// analytic gradients.
TestFunctionFamily standard_test_functions(int dim);

// Differentiable bounded Lipschitz members with known sup and Lipschitz
// constants, for sup-convolution checks.
TestFunctionFamily hj_test_functions(int dim);

// Fixed versioned family of 20 bounded prefix functions for the
// martingale-increment certification: constants, coordinates, squares, pair
// products, clipped linears, scaled tanh, sigmoid products. Index arithmetic
// is modulo the prefix length so the family is defined for every axis.
std::vector<std::function<double(std::span<const double>)>> martingale_prefix_family(
    int prefix_dim);

}  // namespace lclab

#endif
