#pragma once

#include <functional>

namespace kgl {

// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
// Recursion splits an interval until |S(left)+S(right) - S(whole)| <= 15 tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12, int max_depth = 48);

}  // namespace kgl
