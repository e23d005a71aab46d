#pragma once

// Derivative-free minimizers shared by the capacity and coding searches.
// Both report every evaluation through f; callers track the minimum.

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

namespace bavc::detail {

inline constexpr double kGolden = 0.6180339887498949;

// Golden-section minimization on [a, b] after probing both ends.
inline void golden_section(const std::function<double(double)>& f, double a, double b, int iterations) {
  f(a);
  if (b <= a) return;
  f(b);
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    }
  }
}

// Nelder-Mead on the unit cube [0, 1]^n with clamping.
inline void nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                        double step, int iterations) {
  using P = std::vector<double>;
  const std::size_t n = x0.size();
  const auto clamp = [](P p) {
    for (auto& v : p) v = std::clamp(v, 0.0, 1.0);
    return p;
  };
  std::vector<P> s(n + 1);
  std::vector<double> fs(n + 1);
  s[0] = clamp(std::move(x0));
  for (std::size_t k = 0; k < n; ++k) {
    s[k + 1] = s[0];
    s[k + 1][k] += s[0][k] + step <= 1.0 ? step : -step;
  }
  for (std::size_t k = 0; k <= n; ++k) fs[k] = f(s[k]);
  std::vector<std::size_t> order(n + 1);
  for (int it = 0; it < iterations; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];
    P centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t d = 0; d < n; ++d) centroid[d] += s[order[k]][d] / static_cast<double>(n);
    const auto along = [&](double t) {
      P p(n);
      for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + t * (s[worst][d] - centroid[d]);
      return clamp(p);
    };
    const P xr = along(-1.0);
    const double fr = f(xr);
    if (fr < fs[best]) {
      const P xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        s[worst] = xe;
        fs[worst] = fe;
      } else {
        s[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      s[worst] = xr;
      fs[worst] = fr;
    } else {
      const P xc = fr < fs[worst] ? along(-0.5) : along(0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, fs[worst])) {
        s[worst] = xc;
        fs[worst] = fc;
      } else {
        for (std::size_t k = 0; k <= n; ++k) {
          if (k == best) continue;
          for (std::size_t d = 0; d < n; ++d) s[k][d] = s[best][d] + 0.5 * (s[k][d] - s[best][d]);
          fs[k] = f(s[k]);
        }
      }
    }
  }
}

}  // namespace bavc::detail
