#include "hypstrata/polycore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace hypstrata {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Distinct root of some P^(j) with its multiplicity and, when it sits on a
// root of P, that root's index.
struct LevelRoot {
  double value;
  int mult;
  int carried;
};

// Unique zero of sum_r mult_r / (x - r) strictly between two consecutive
// distinct roots. The function decreases from +inf to -inf there, so plain
// bisection to machine precision always converges.
double log_derivative_zero(const std::vector<LevelRoot>& level, double lo, double hi) {
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    double f = 0.0;
    for (const auto& r : level) f += r.mult / (mid - r.value);
    if (f > 0.0) {
      lo = mid;
    } else if (f < 0.0) {
      hi = mid;
    } else {
      return mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

double bisect_sign_change(const poly::Coeffs& c, double lo, double hi) {
  const bool lo_positive = poly::horner(c, lo) > 0.0;
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double v = poly::horner(c, mid);
    if (v == 0.0) return mid;
    if ((v > 0.0) == lo_positive) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

}  // namespace

RootConfiguration::RootConfiguration(std::vector<double> roots, std::vector<int> mults)
    : roots_(std::move(roots)), mults_(std::move(mults)) {
  if (roots_.empty()) throw DomainError("root configuration needs at least one root");
  if (roots_.size() != mults_.size())
    throw DomainError("roots and multiplicities differ in length (" + std::to_string(roots_.size()) +
                      " vs " + std::to_string(mults_.size()) + ")");
  for (std::size_t i = 0; i < roots_.size(); ++i) {
    if (!std::isfinite(roots_[i])) throw DomainError("root " + std::to_string(i + 1) + " is not finite");
    if (mults_[i] < 1) throw DomainError("multiplicity " + std::to_string(i + 1) + " is not positive");
    if (i > 0 && !(roots_[i - 1] < roots_[i]))
      throw DomainError("roots must be strictly increasing (positions " + std::to_string(i) + ", " +
                        std::to_string(i + 1) + ")");
  }
  degree_ = std::accumulate(mults_.begin(), mults_.end(), 0);
}

RootConfiguration RootConfiguration::simple(std::vector<double> roots) {
  std::vector<int> mults(roots.size(), 1);
  return RootConfiguration(std::move(roots), std::move(mults));
}

std::vector<double> RootConfiguration::expanded() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(degree_));
  for (std::size_t i = 0; i < roots_.size(); ++i) out.insert(out.end(), static_cast<std::size_t>(mults_[i]), roots_[i]);
  return out;
}

double RootConfiguration::min_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < roots_.size(); ++i) gap = std::min(gap, roots_[i] - roots_[i - 1]);
  return gap;
}

bool RootConfiguration::strictly_hyperbolic() const {
  return std::all_of(mults_.begin(), mults_.end(), [](int m) { return m == 1; });
}

RootConfiguration RootConfiguration::with_roots(std::vector<double> roots) const {
  return RootConfiguration(std::move(roots), mults_);
}

namespace poly {

Coeffs from_roots(const RootConfiguration& rc) {
  Coeffs c{1.0};
  c.reserve(static_cast<std::size_t>(rc.degree()) + 1);
  for (std::size_t i = 0; i < rc.distinct(); ++i) {
    for (int t = 0; t < rc.mult(i); ++t) {
      const double r = rc.root(i);
      c.push_back(0.0);
      for (std::size_t j = c.size() - 1; j > 0; --j) c[j] -= r * c[j - 1];
    }
  }
  return c;
}

Coeffs derivative(const Coeffs& c) {
  if (c.size() <= 1) return Coeffs{0.0};
  const std::size_t d = c.size() - 1;
  Coeffs out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = c[i] * static_cast<double>(d - i);
  return out;
}

Coeffs derivative(Coeffs c, int order) {
  for (int i = 0; i < order; ++i) c = derivative(c);
  return c;
}

double horner(const Coeffs& c, double x) {
  double acc = 0.0;
  for (double a : c) acc = acc * x + a;
  return acc;
}

double horner_magnitude(const Coeffs& c, double x) {
  double acc = 0.0;
  const double ax = std::fabs(x);
  for (double a : c) acc = acc * ax + std::fabs(a);
  return acc;
}

Coeffs deflate(const Coeffs& c, double r) {
  if (c.size() <= 1) return Coeffs{0.0};
  Coeffs q(c.size() - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    acc = acc * r + c[i];
    q[i] = acc;
  }
  return q;
}

}  // namespace poly

CoefficientVector coeffs_from_roots(const RootConfiguration& rc) {
  auto full = poly::from_roots(rc);
  return CoefficientVector{std::vector<double>(full.begin() + 1, full.end())};
}

DerivedRoots derivative_roots(const RootConfiguration& rc, int k) {
  const int n = rc.degree();
  if (k < 1 || k > n - 1)
    throw DomainError("derivative order k=" + std::to_string(k) + " outside [1, " + std::to_string(n - 1) + "]");

  std::vector<LevelRoot> level;
  level.reserve(rc.distinct());
  for (std::size_t i = 0; i < rc.distinct(); ++i) level.push_back({rc.root(i), rc.mult(i), static_cast<int>(i)});

  for (int j = 0; j < k; ++j) {
    std::vector<LevelRoot> next;
    next.reserve(2 * level.size());
    for (std::size_t t = 0; t < level.size(); ++t) {
      if (level[t].mult >= 2) next.push_back({level[t].value, level[t].mult - 1, level[t].carried});
      if (t + 1 < level.size())
        next.push_back({log_derivative_zero(level, level[t].value, level[t + 1].value), 1, -1});
    }
    level = std::move(next);
  }

  DerivedRoots out;
  out.k = k;
  for (const auto& r : level) {
    for (int t = 0; t < r.mult; ++t) {
      out.roots.push_back(r.value);
      out.carried.push_back(r.carried);
    }
  }
  return out;
}

RootConfiguration gamma_normalize(const RootConfiguration& rc) {
  const std::size_t q = rc.distinct();
  if (q < 2) throw DomainError("gamma normalization needs two distinct roots");
  const double lo = rc.root(0);
  const double span = rc.root(q - 1) - lo;
  std::vector<double> out(q);
  out.front() = 0.0;
  out.back() = 1.0;
  for (std::size_t i = 1; i + 1 < q; ++i) out[i] = (rc.root(i) - lo) / span;
  return rc.with_roots(std::move(out));
}

RootConfiguration std_normalize(const RootConfiguration& rc) {
  if (rc.distinct() < 2) throw DomainError("(x - c)^n has no representative with a_1 = 0, a_2 = -1");
  const double n = rc.degree();
  double mean = 0.0;
  for (std::size_t i = 0; i < rc.distinct(); ++i) mean += rc.mult(i) * rc.root(i);
  mean /= n;
  double sq = 0.0;
  for (std::size_t i = 0; i < rc.distinct(); ++i) {
    const double d = rc.root(i) - mean;
    sq += rc.mult(i) * d * d;
  }
  // After centering a_2 = -sum(x^2)/2.
  const double scale = std::sqrt(2.0 / sq);
  std::vector<double> out(rc.distinct());
  for (std::size_t i = 0; i < rc.distinct(); ++i) out[i] = (rc.root(i) - mean) * scale;
  return rc.with_roots(std::move(out));
}

RootConfiguration roots_from_coeffs(const CoefficientVector& cv, double cluster_tol) {
  const int n = cv.degree();
  if (n < 1) throw DomainError("empty coefficient vector");
  for (double a : cv.coeffs)
    if (!std::isfinite(a)) throw DomainError("coefficients must be finite");

  poly::Coeffs full{1.0};
  full.insert(full.end(), cv.coeffs.begin(), cv.coeffs.end());

  // Work down the derivative chain: P^(n-1) is linear, and the distinct roots
  // of P^(j+1) split the line into intervals on which P^(j) is monotone.
  std::vector<poly::Coeffs> chain(static_cast<std::size_t>(n));
  chain[0] = full;
  for (int j = 1; j < n; ++j) chain[static_cast<std::size_t>(j)] = poly::derivative(chain[static_cast<std::size_t>(j - 1)]);

  const auto& lin = chain[static_cast<std::size_t>(n - 1)];
  std::vector<std::pair<double, int>> roots{{-lin[1] / lin[0], 1}};

  for (int j = n - 2; j >= 0; --j) {
    const auto& c = chain[static_cast<std::size_t>(j)];
    const int expected = n - j;
    double bound = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i) bound = std::max(bound, std::fabs(c[i] / c[0]));
    bound += 1.0;

    std::vector<char> zero(roots.size());
    std::vector<double> value(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
      const double r = roots[i].first;
      const double v = poly::horner(c, r);
      const double eps = cluster_tol * std::max(1.0, std::fabs(r));
      const double var = std::max(std::fabs(poly::horner(c, r - eps) - v), std::fabs(poly::horner(c, r + eps) - v));
      value[i] = v;
      zero[i] = std::fabs(v) <= var || std::fabs(v) <= 64.0 * kEps * poly::horner_magnitude(c, r);
    }

    std::vector<std::pair<double, int>> next;
    int count = 0;
    auto try_interval = [&](double lo, double vlo, bool lo_zero, double hi, double vhi, bool hi_zero) {
      if (lo_zero || hi_zero) return;
      if ((vlo > 0.0) != (vhi > 0.0)) {
        next.emplace_back(bisect_sign_change(c, lo, hi), 1);
        ++count;
      }
    };

    const double left = roots.front().first - bound;
    try_interval(left, poly::horner(c, left), false, roots.front().first, value.front(), zero.front());
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (zero[i]) {
        next.emplace_back(roots[i].first, roots[i].second + 1);
        count += roots[i].second + 1;
      }
      if (i + 1 < roots.size())
        try_interval(roots[i].first, value[i], zero[i], roots[i + 1].first, value[i + 1], zero[i + 1]);
    }
    const double right = roots.back().first + bound;
    try_interval(roots.back().first, value.back(), zero.back(), right, poly::horner(c, right), false);

    if (count != expected)
      throw DomainError("polynomial is not hyperbolic: derivative of order " + std::to_string(j) + " has " +
                        std::to_string(count) + " real roots out of " + std::to_string(expected));
    std::sort(next.begin(), next.end());
    roots = std::move(next);
  }

  std::vector<double> ys;
  std::vector<int> ms;
  for (const auto& [r, m] : roots) {
    if (!ys.empty() && r - ys.back() < cluster_tol) {
      ms.back() += m;
      continue;
    }
    ys.push_back(r);
    ms.push_back(m);
  }
  return RootConfiguration(std::move(ys), std::move(ms));
}

}  // namespace hypstrata
