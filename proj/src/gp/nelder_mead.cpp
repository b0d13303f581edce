#include "hybrid/gp/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hybrid::gp {

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                             const NelderMeadOptions& opts) {
  const Eigen::Index n = x0.size();
  const bool boxed = opts.lower.size() == n && opts.upper.size() == n;
  auto clamp = [&](Vector x) {
    if (boxed) x = x.cwiseMax(opts.lower).cwiseMin(opts.upper);
    return x;
  };
  NelderMeadResult res;
  auto eval = [&](const Vector& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vector> pts;
  std::vector<double> vals;
  pts.push_back(clamp(x0));
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector p = x0;
    p(i) += opts.initial_step;
    p = clamp(p);
    // A vertex clamped back onto x0 would collapse the simplex.
    if ((p - pts.front()).cwiseAbs().maxCoeff() == 0.0) {
      p = x0;
      p(i) -= opts.initial_step;
      p = clamp(p);
    }
    pts.push_back(p);
  }
  for (const auto& p : pts) vals.push_back(eval(p));
  if (std::all_of(vals.begin(), vals.end(), [](double v) { return std::isinf(v); })) {
    throw NumericalError("Nelder-Mead: objective is non-finite at every initial vertex");
  }

  std::vector<std::size_t> order(pts.size());
  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];

    double diameter = 0.0;
    for (const auto& p : pts) diameter = std::max(diameter, (p - pts[best]).cwiseAbs().maxCoeff());
    if (diameter < opts.diameter_tol) {
      res.converged = true;
      break;
    }

    Vector centroid = Vector::Zero(n);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (i != worst) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Vector xr = clamp(centroid + (centroid - pts[worst]));
    const double fr = eval(xr);
    if (fr < vals[best]) {
      const Vector xe = clamp(centroid + 2.0 * (centroid - pts[worst]));
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Vector xc = outside ? clamp(centroid + 0.5 * (xr - centroid)) : clamp(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = clamp(pts[best] + 0.5 * (pts[i] - pts[best]));
      vals[i] = eval(pts[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  res.x = pts[best];
  res.value = vals[best];
  return res;
}

}  // namespace hybrid::gp
