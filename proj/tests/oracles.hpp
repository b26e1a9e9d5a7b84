// Independent reference computations used by the tests. These deliberately
// avoid the library's discretization path: Bessel functions come from the
// standard library, the radial Neumann problem is integrated by quadrature
// on a fine one-dimensional grid.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

/// Smallest positive root of k J1(k) = J0(k), by bisection. The principal
/// Robin eigenvalue of the flat unit disk (unit coefficient) is the square.
inline double robin_disk_root() {
  auto f = [](double k) { return k * std::cyl_bessel_j(1, k) - std::cyl_bessel_j(0, k); };
  double lo = 0.5, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (f(lo) * f(mid) <= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

inline double robin_disk_eigenvalue() {
  double k = robin_disk_root();
  return k * k;
}

/// Radial flat Neumann problem: Laplace(f) = q(r) on the unit disk with
/// dq compatibility, solved by the closed form r f'(r) = int_0^r s q(s) ds
/// and composite-trapezoid quadrature on a fine grid. Returns f sampled at
/// the requested radii, gauged to f(0) = 0 (callers re-gauge as needed).
inline std::vector<double> radial_neumann(const std::function<double(double)>& q,
                                          const std::vector<double>& radii, int grid = 200001) {
  std::vector<double> r(grid), sq(grid), flux(grid), f(grid);
  double h = 1.0 / (grid - 1);
  for (int i = 0; i < grid; ++i) {
    r[i] = i * h;
    sq[i] = r[i] * q(r[i]);
  }
  flux[0] = 0.0;
  for (int i = 1; i < grid; ++i) flux[i] = flux[i - 1] + 0.5 * h * (sq[i - 1] + sq[i]);
  f[0] = 0.0;
  auto fprime = [&](int i) { return i == 0 ? 0.0 : flux[i] / r[i]; };
  for (int i = 1; i < grid; ++i) f[i] = f[i - 1] + 0.5 * h * (fprime(i - 1) + fprime(i));
  std::vector<double> out(radii.size());
  for (size_t k = 0; k < radii.size(); ++k) {
    double x = std::clamp(radii[k], 0.0, 1.0) / h;
    int i = std::min(static_cast<int>(x), grid - 2);
    double a = x - i;
    out[k] = (1.0 - a) * f[i] + a * f[i + 1];
  }
  return out;
}

}  // namespace oracles
