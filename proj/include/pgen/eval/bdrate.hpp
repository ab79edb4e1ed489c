#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "pgen/codec/codec.hpp"
#include "pgen/common/error.hpp"

namespace pgen {

// Same content coded at several QPs.
struct RDCurve {
  std::vector<RDPoint> points;
};

// log10(rate) ≈ c0 + c1·u + c2·u² + c3·u³ with u = psnr − center.
struct CubicFit {
  double center = 0.0;
  std::array<double, 4> coeffs{};

  double operator()(double psnr) const {
    const double u = psnr - center;
    return coeffs[0] + u * (coeffs[1] + u * (coeffs[2] + u * coeffs[3]));
  }

  // Integral of the fit over [lo, hi].
  double integrate(double lo, double hi) const {
    const auto antiderivative = [&](double u) {
      return u * (coeffs[0] + u * (coeffs[1] / 2.0 + u * (coeffs[2] / 3.0 + u * coeffs[3] / 4.0)));
    };
    return antiderivative(hi - center) - antiderivative(lo - center);
  }
};

// Least-squares cubic through (psnr, log10 rate) via the normal equations.
inline CubicFit fit_log_rate_cubic(const RDCurve& curve) {
  if (curve.points.size() < 4)
    throw ArityError("bd_rate: curve has " + std::to_string(curve.points.size()) + " points, need at least 4");
  CubicFit fit;
  for (const RDPoint& p : curve.points) {
    if (!(p.rate > 0.0) || !std::isfinite(p.rate) || !std::isfinite(p.psnr))
      throw DomainError("bd_rate: rate must be positive and PSNR finite");
    fit.center += p.psnr;
  }
  fit.center /= static_cast<double>(curve.points.size());

  double a[4][5] = {};
  for (const RDPoint& p : curve.points) {
    const double u = p.psnr - fit.center;
    const double powers[4] = {1.0, u, u * u, u * u * u};
    const double y = std::log10(p.rate);
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) a[r][c] += powers[r] * powers[c];
      a[r][4] += powers[r] * y;
    }
  }
  double scale = 0.0;
  for (int r = 0; r < 4; ++r) scale = std::max(scale, std::abs(a[r][r]));

  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) <= 1e-12 * scale)
      throw NumericError("bd_rate: singular normal equations (PSNR values too few or coincident)");
    if (pivot != col)
      for (int c = 0; c < 5; ++c) std::swap(a[col][c], a[pivot][c]);
    for (int r = col + 1; r < 4; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 5; ++c) a[r][c] -= f * a[col][c];
    }
  }
  for (int r = 3; r >= 0; --r) {
    double v = a[r][4];
    for (int c = r + 1; c < 4; ++c) v -= a[r][c] * fit.coeffs[static_cast<std::size_t>(c)];
    fit.coeffs[static_cast<std::size_t>(r)] = v / a[r][r];
  }
  return fit;
}

// Bjontegaard rate difference of test against anchor, in percent. Negative
// means test needs fewer bits for the same quality.
inline double bd_rate(const RDCurve& anchor, const RDCurve& test) {
  const CubicFit fa = fit_log_rate_cubic(anchor);
  const CubicFit ft = fit_log_rate_cubic(test);
  const auto range = [](const RDCurve& c) {
    const auto [lo, hi] = std::minmax_element(c.points.begin(), c.points.end(),
                                              [](const RDPoint& a, const RDPoint& b) { return a.psnr < b.psnr; });
    return std::pair{lo->psnr, hi->psnr};
  };
  const auto [alo, ahi] = range(anchor);
  const auto [tlo, thi] = range(test);
  const double lo = std::max(alo, tlo);
  const double hi = std::min(ahi, thi);
  if (!(hi > lo)) throw DomainError("bd_rate: PSNR ranges of the two curves do not overlap");
  const double avg_diff = (ft.integrate(lo, hi) - fa.integrate(lo, hi)) / (hi - lo);
  return (std::pow(10.0, avg_diff) - 1.0) * 100.0;
}

}  // namespace pgen
