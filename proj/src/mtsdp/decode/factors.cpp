#include "mtsdp/decode/factors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "mtsdp/error.hpp"

namespace mtsdp::decode {

void project_simplex(std::span<double> a) {
  const size_t n = a.size();
  if (n == 0) return;
  std::vector<double> s(a.begin(), a.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (size_t k = 0; k < n; ++k) {
    cum += s[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (s[k] - t > 0.0) tau = t;
  }
  for (double& v : a) v = std::max(v - tau, 0.0);
}

void project_at_most_one(std::span<double> x) {
  double sum = 0.0;
  for (double v : x) sum += std::max(v, 0.0);
  if (sum <= 1.0) {
    for (double& v : x) v = std::max(v, 0.0);
    return;
  }
  project_simplex(x);
}

void project_xor_with_output(std::span<double> x, double& y) {
  // Substitute w = 1 - y: (x, w) lies on the probability simplex.
  std::vector<double> buf(x.begin(), x.end());
  buf.push_back(1.0 - y);
  project_simplex(buf);
  std::copy(buf.begin(), buf.end() - 1, x.begin());
  y = 1.0 - buf.back();
}

namespace {

// Projection onto {0 <= x_i <= y <= 1}.
void project_box_under_output(std::span<double> x, double& y) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  // Minimise (y - b)^2 + sum_i max(0, a_i - y)^2 over y, then clip to [0, 1].
  double cum = y;
  double best = y;
  for (size_t m = 0; m <= s.size(); ++m) {
    const double cand = cum / static_cast<double>(m + 1);
    const bool upper_ok = m == 0 || s[m - 1] > cand;
    const bool lower_ok = m == s.size() || s[m] <= cand;
    if (upper_ok && lower_ok) {
      best = cand;
      break;
    }
    if (m < s.size()) cum += s[m];
  }
  y = std::clamp(best, 0.0, 1.0);
  for (double& v : x) v = std::clamp(v, 0.0, y);
}

}  // namespace

void project_or_with_output(std::span<double> x, double& y) {
  std::vector<double> x0(x.begin(), x.end());
  const double y0 = y;
  project_box_under_output(x, y);
  const double sum = std::accumulate(x.begin(), x.end(), 0.0);
  if (y <= sum + 1e-12) return;
  std::copy(x0.begin(), x0.end(), x.begin());
  y = y0;
  project_xor_with_output(x, y);
}

namespace {

// Root of sum_i clamp(z_i - nu, 0, 1) = target for nu, with the sum
// decreasing piecewise linearly in nu.
double solve_shift(std::span<const double> z, double target) {
  std::vector<double> bps;
  for (double v : z) {
    bps.push_back(v);
    bps.push_back(v - 1.0);
  }
  std::sort(bps.begin(), bps.end());
  auto sigma = [&](double nu) {
    double s = 0.0;
    for (double v : z) s += std::clamp(v - nu, 0.0, 1.0);
    return s;
  };
  // sigma(bps.front()) = k >= target and sigma(bps.back()) = 0 <= target.
  for (size_t i = 0; i + 1 < bps.size(); ++i) {
    const double lo = bps[i], hi = bps[i + 1];
    const double s_lo = sigma(lo), s_hi = sigma(hi);
    if (s_lo >= target && s_hi <= target) {
      if (s_lo == s_hi) return lo;
      return lo + (s_lo - target) * (hi - lo) / (s_lo - s_hi);
    }
  }
  return bps.back();
}

}  // namespace

double solve_dense_and(std::span<const double> z, double potential, double rho,
                       std::span<double> q) {
  const size_t k = z.size();
  if (k == 0 || k > 3 || q.size() != k) throw LogicError("solve_dense_and: bad arity");
  const double t = std::abs(potential) / rho;
  if (potential >= 0.0) {
    // u = min q. With q_i = max(m, c_i) the objective is a convex piecewise
    // quadratic in the floor m, minimised over stationary points of each piece
    // and the breakpoints (the derivative jumps where c_i was clipped).
    std::vector<double> c(k);
    for (size_t i = 0; i < k; ++i) c[i] = std::clamp(z[i], 0.0, 1.0);
    auto g = [&](double m) {
      double f = -potential * m;
      for (size_t i = 0; i < k; ++i) {
        const double d = std::max(m, c[i]) - z[i];
        f += 0.5 * rho * d * d;
      }
      return f;
    };
    std::vector<double> cands{0.0, 1.0};
    cands.insert(cands.end(), c.begin(), c.end());
    std::vector<size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return c[a] < c[b]; });
    double cum = 0.0;
    for (size_t s = 1; s <= k; ++s) {
      cum += z[order[s - 1]];
      cands.push_back(std::clamp((t + cum) / static_cast<double>(s), 0.0, 1.0));
    }
    double m = 0.0, best = std::numeric_limits<double>::infinity();
    for (double cand : cands) {
      const double f = g(cand);
      if (f < best) {
        best = f;
        m = cand;
      }
    }
    for (size_t i = 0; i < k; ++i) q[i] = std::max(m, c[i]);
    return *std::min_element(q.begin(), q.end());
  }
  // Negative potential: penalty |potential| * max(0, sum q - (k - 1)).
  const double bound = static_cast<double>(k) - 1.0;
  double sum = 0.0;
  for (size_t i = 0; i < k; ++i) sum += (q[i] = std::clamp(z[i], 0.0, 1.0));
  if (sum <= bound) return 0.0;
  sum = 0.0;
  for (size_t i = 0; i < k; ++i) sum += (q[i] = std::clamp(z[i] - t, 0.0, 1.0));
  if (sum >= bound) return std::max(0.0, sum - bound);
  const double nu = solve_shift(z, bound);
  for (size_t i = 0; i < k; ++i) q[i] = std::clamp(z[i] - nu, 0.0, 1.0);
  return 0.0;
}

namespace {

// Solves the symmetric system a x = b in place by Gaussian elimination with
// partial pivoting. Returns false when numerically singular.
bool solve_linear(std::vector<double>& a, std::vector<double>& b, size_t n) {
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (std::abs(a[piv * n + col]) < 1e-12) return false;
    if (piv != col) {
      for (size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    for (size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (size_t i = n; i-- > 0;) {
    double s = b[i];
    for (size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * b[c];
    b[i] = s / a[i * n + i];
  }
  return true;
}

}  // namespace

double solve_dense_and_by_vertices(std::span<const double> z, double potential, double rho,
                                   std::span<double> q) {
  const size_t k = z.size();
  if (k == 0 || k > 3 || q.size() != k) throw LogicError("solve_dense_and_by_vertices: bad arity");
  const size_t nv = size_t{1} << k;
  auto coord = [](size_t v, size_t i) { return static_cast<double>((v >> i) & 1u); };
  auto all_on = [nv](size_t v) { return v == nv - 1 ? 1.0 : 0.0; };

  auto objective = [&](std::span<const double> qq, double u) {
    double f = 0.0;
    for (size_t i = 0; i < k; ++i) f += 0.5 * rho * (qq[i] - z[i]) * (qq[i] - z[i]);
    return f - potential * u;
  };

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_q(k);
  double best_u = 0.0;
  // Every support S: minimise over the affine hull in barycentric coordinates.
  for (size_t mask = 1; mask < (size_t{1} << nv); ++mask) {
    std::vector<size_t> sup;
    for (size_t v = 0; v < nv; ++v) {
      if (mask >> v & 1u) sup.push_back(v);
    }
    const size_t m = sup.size();
    if (m > k + 2) continue;
    // KKT: rho Q^T Q beta + tau 1 = rho Q^T z + potential U^T, 1^T beta = 1.
    const size_t n = m + 1;
    std::vector<double> a(n * n, 0.0), b(n, 0.0);
    for (size_t r = 0; r < m; ++r) {
      for (size_t c = 0; c < m; ++c) {
        double dotv = 0.0;
        for (size_t i = 0; i < k; ++i) dotv += coord(sup[r], i) * coord(sup[c], i);
        a[r * n + c] = rho * dotv;
      }
      a[r * n + m] = 1.0;
      a[m * n + r] = 1.0;
      double rhs = potential * all_on(sup[r]);
      for (size_t i = 0; i < k; ++i) rhs += rho * coord(sup[r], i) * z[i];
      b[r] = rhs;
    }
    b[m] = 1.0;
    if (!solve_linear(a, b, n)) continue;
    bool feasible = true;
    for (size_t r = 0; r < m; ++r) feasible = feasible && b[r] >= -1e-12;
    if (!feasible) continue;
    std::vector<double> qq(k, 0.0);
    double u = 0.0;
    for (size_t r = 0; r < m; ++r) {
      for (size_t i = 0; i < k; ++i) qq[i] += b[r] * coord(sup[r], i);
      u += b[r] * all_on(sup[r]);
    }
    const double f = objective(qq, u);
    if (f < best) {
      best = f;
      best_q = qq;
      best_u = u;
    }
  }
  std::copy(best_q.begin(), best_q.end(), q.begin());
  return best_u;
}

double map_xor_with_output(std::span<const double> a) {
  const size_t k = a.size() - 1;
  double best = 0.0;
  for (size_t i = 0; i < k; ++i) best = std::max(best, a[i] + a[k]);
  return best;
}

double map_or_with_output(std::span<const double> a) {
  const size_t k = a.size() - 1;
  double pos = 0.0, top = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < k; ++i) {
    pos += std::max(a[i], 0.0);
    top = std::max(top, a[i]);
  }
  if (k == 0) return 0.0;
  // At least one input must be on when the output is on.
  const double on = a[k] + (pos > 0.0 ? pos : top);
  return std::max(0.0, on);
}

double map_at_most_one(std::span<const double> a) {
  double best = 0.0;
  for (double v : a) best = std::max(best, v);
  return best;
}

double map_dense_and(std::span<const double> a, double potential) {
  const size_t k = a.size();
  double best = -std::numeric_limits<double>::infinity();
  for (size_t v = 0; v < (size_t{1} << k); ++v) {
    double s = v == (size_t{1} << k) - 1 ? potential : 0.0;
    for (size_t i = 0; i < k; ++i) {
      if (v >> i & 1u) s += a[i];
    }
    best = std::max(best, s);
  }
  return best;
}

}  // namespace mtsdp::decode
