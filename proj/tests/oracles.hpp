#pragma once

// Reference computations written independently of the library: expanded
// products, long-double root finding on the logarithmic derivative, closed
// forms, and a brute-force enumeration of root arrangements.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// Coefficients a_1..a_n of prod (x - x_i) from elementary symmetric
// functions: a_j = (-1)^j e_j, e_j summed over all j-subsets.
inline std::vector<double> esf_coeffs(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<long double> e(n + 1, 0.0L);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    long double prod = 1.0L;
    std::size_t bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        prod *= xs[i];
        ++bits;
      }
    }
    e[bits] += prod;
  }
  std::vector<double> a(n);
  for (std::size_t j = 1; j <= n; ++j) a[j - 1] = static_cast<double>((j % 2 ? -1.0L : 1.0L) * e[j]);
  return a;
}

// Roots of P' for simple roots ys: one zero of sum 1/(x - y_i) per gap,
// found by long-double bisection.
inline std::vector<long double> critical_points(const std::vector<long double>& ys) {
  std::vector<long double> out;
  for (std::size_t g = 0; g + 1 < ys.size(); ++g) {
    long double lo = ys[g];
    long double hi = ys[g + 1];
    auto f = [&](long double x) {
      long double s = 0.0L;
      for (auto y : ys) s += 1.0L / (x - y);
      return s;
    };
    for (int it = 0; it < 200; ++it) {
      const long double mid = 0.5L * (lo + hi);
      if (mid == lo || mid == hi) break;
      // f runs from +inf at the left end to -inf at the right end.
      if (f(mid) > 0.0L)
        lo = mid;
      else
        hi = mid;
    }
    out.push_back(0.5L * (lo + hi));
  }
  return out;
}

// d xi_j / d y_i for k = 1 by long-double central differences.
inline double k1_sensitivity(const std::vector<double>& ys, std::size_t j, std::size_t i, long double h = 1e-7L) {
  std::vector<long double> up(ys.begin(), ys.end());
  std::vector<long double> down = up;
  up[i] += h;
  down[i] -= h;
  return static_cast<double>((critical_points(up)[j] - critical_points(down)[j]) / (2.0L * h));
}

// Configuration vectors as token lists: "m" class A, "m_a" class B, "a" free.
inline std::string cv_text(const std::vector<std::string>& tokens) {
  std::string s = "(";
  for (std::size_t i = 0; i < tokens.size(); ++i) s += (i ? "," : "") + tokens[i];
  return s + ")";
}

// Literal Rolle chain plus class A extremes, evaluated on explicit ranks.
inline bool admissible_tokens(const std::vector<std::string>& tokens, int n, int k) {
  std::vector<int> xrank;
  std::vector<int> xirank;
  int rank = 0;
  int mult_sum = 0;
  std::vector<int> root_kinds;  // 0 = A, 1 = B
  for (const auto& t : tokens) {
    ++rank;
    if (t == "a") {
      xirank.push_back(rank);
      continue;
    }
    const bool b = t.size() > 2 && t.substr(t.size() - 2) == "_a";
    const int m = std::stoi(b ? t.substr(0, t.size() - 2) : t);
    if (b && m >= k) return false;
    mult_sum += m;
    root_kinds.push_back(b ? 1 : 0);
    for (int c = 0; c < m; ++c) xrank.push_back(rank);
    if (b) xirank.push_back(rank);
    if (!b && m > k)
      for (int c = 0; c < m - k; ++c) xirank.push_back(rank);
  }
  if (mult_sum != n || static_cast<int>(xirank.size()) != n - k) return false;
  if (root_kinds.empty() || root_kinds.front() != 0 || root_kinds.back() != 0) return false;
  if (tokens.front() == "a" || tokens.back() == "a") return false;
  std::sort(xirank.begin(), xirank.end());
  for (int i = 0; i < n - k; ++i)
    if (!(xrank[static_cast<std::size_t>(i)] <= xirank[static_cast<std::size_t>(i)] &&
          xirank[static_cast<std::size_t>(i)] <= xrank[static_cast<std::size_t>(i + k)]))
      return false;
  return true;
}

// Every token string with multiplicities summing to n and n-k roots of P^(k).
inline std::set<std::string> brute_force_cvs(int n, int k) {
  std::set<std::string> out;
  std::vector<std::string> tokens;
  std::function<void(int, int)> rec = [&](int mult_left, int xi_budget) {
    if (mult_left == 0) {
      if (admissible_tokens(tokens, n, k)) out.insert(cv_text(tokens));
      return;
    }
    if (xi_budget > 0) {
      tokens.push_back("a");
      rec(mult_left, xi_budget - 1);
      tokens.pop_back();
    }
    for (int m = 1; m <= mult_left; ++m) {
      tokens.push_back(std::to_string(m));
      rec(mult_left - m, xi_budget);
      tokens.pop_back();
      if (m < k && xi_budget > 0) {
        tokens.push_back(std::to_string(m) + "_a");
        rec(mult_left - m, xi_budget - 1);
        tokens.pop_back();
      }
    }
  };
  rec(n, n - k);
  return out;
}

}  // namespace oracle
