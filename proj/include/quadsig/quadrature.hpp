#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace quadsig::detail {

struct KronrodResult {
  double value;
  double error;
};

// 15-point Kronrod rule with the embedded 7-point Gauss rule.
template <class F>
KronrodResult gauss_kronrod15(const F& f, double a, double b) {
  static constexpr std::array<double, 8> xk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * wk[7];
  double gauss = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * xk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += wk[j] * sum;
    if (j % 2 == 1) gauss += wg[j / 2] * sum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

// Recursive adaptive Gauss-Kronrod. Stops on a panel when the embedded error
// estimate is below max(abs_tol, rel_tol * |panel value|).
template <class F>
double adaptive_integrate(const F& f, double a, double b, double abs_tol, double rel_tol,
                          int depth = 0) {
  const auto whole = gauss_kronrod15(f, a, b);
  if (depth >= 40 || whole.error <= std::max(abs_tol, rel_tol * std::abs(whole.value))) {
    return whole.value;
  }
  const double mid = 0.5 * (a + b);
  return adaptive_integrate(f, a, mid, 0.5 * abs_tol, rel_tol, depth + 1) +
         adaptive_integrate(f, mid, b, 0.5 * abs_tol, rel_tol, depth + 1);
}

}  // namespace quadsig::detail
