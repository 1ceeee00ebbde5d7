#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypstrata {

// Bad user input: malformed configuration, out-of-range order, non-hyperbolic polynomial.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical procedure did not reach its target (Newton, projection, event location).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kRootTol = 1e-12;
inline constexpr double kClusterTol = 1e-8;

/// Distinct real roots y_1 < ... < y_q with multiplicities m_1, ..., m_q.
///
/// Every value of this type is a point of the hyperbolicity domain: the monic
/// polynomial prod (x - y_i)^{m_i} has only real roots by construction.
class RootConfiguration {
 public:
  RootConfiguration(std::vector<double> roots, std::vector<int> mults);

  /// All multiplicities equal to one.
  static RootConfiguration simple(std::vector<double> roots);

  std::span<const double> roots() const { return roots_; }
  std::span<const int> mults() const { return mults_; }
  double root(std::size_t i) const { return roots_[i]; }
  int mult(std::size_t i) const { return mults_[i]; }
  std::size_t distinct() const { return roots_.size(); }
  int degree() const { return degree_; }

  /// Roots listed with multiplicity, x_1 <= ... <= x_n.
  std::vector<double> expanded() const;

  /// Smallest gap between consecutive distinct roots; +inf when q = 1.
  double min_gap() const;

  bool strictly_hyperbolic() const;

  /// Same multiplicities, new positions (validated).
  RootConfiguration with_roots(std::vector<double> roots) const;

  friend bool operator==(const RootConfiguration&, const RootConfiguration&) = default;

 private:
  std::vector<double> roots_;
  std::vector<int> mults_;
  int degree_ = 0;
};

/// Coefficients (a_1, ..., a_n) of the monic x^n + a_1 x^{n-1} + ... + a_n.
struct CoefficientVector {
  std::vector<double> coeffs;
  int degree() const { return static_cast<int>(coeffs.size()); }
};

/// The n-k roots of P^(k) listed with multiplicity in non-decreasing order.
///
/// `carried[j]` is the index of the distinct root of P that the entry sits on
/// when it is one of the m_i - k copies inherited from a root of multiplicity
/// m_i > k; it is -1 for roots found by bisection.
struct DerivedRoots {
  int k = 0;
  std::vector<double> roots;
  std::vector<int> carried;

  std::size_t size() const { return roots.size(); }
};

namespace poly {

// Dense polynomials are stored highest degree first: c[0] x^d + ... + c[d].
using Coeffs = std::vector<double>;

Coeffs from_roots(const RootConfiguration& rc);
Coeffs derivative(const Coeffs& c);
Coeffs derivative(Coeffs c, int order);
double horner(const Coeffs& c, double x);
/// Running error bound of Horner evaluation: sum |c_i| |x|^{d-i}.
double horner_magnitude(const Coeffs& c, double x);
/// Exact synthetic division by (x - r); the remainder is discarded.
Coeffs deflate(const Coeffs& c, double r);

}  // namespace poly

CoefficientVector coeffs_from_roots(const RootConfiguration& rc);

/// Roots of the k-th derivative via repeated interlacing bisection.
DerivedRoots derivative_roots(const RootConfiguration& rc, int k);

/// Affine image with the smallest root at 0 and the greatest at 1.
RootConfiguration gamma_normalize(const RootConfiguration& rc);

/// Affine image whose coefficients satisfy a_1 = 0, a_2 = -1.
RootConfiguration std_normalize(const RootConfiguration& rc);

/// Inverse of coeffs_from_roots for hyperbolic input; multiplicities are
/// detected to `cluster_tol`. Throws DomainError on a complex root.
RootConfiguration roots_from_coeffs(const CoefficientVector& cv, double cluster_tol = kClusterTol);

}  // namespace hypstrata
