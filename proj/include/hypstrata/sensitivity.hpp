#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypstrata/polycore.hpp"

namespace hypstrata {

/// Partial derivatives of the roots of P^(k) with respect to the distinct
/// roots of P, multiplicities held fixed.
///
/// Rows follow DerivedRoots (all n-k roots, with multiplicity); columns follow
/// the distinct roots y_1 < ... < y_q. A row whose root is carried by a root
/// of P of multiplicity > k is exactly the unit vector of that root.
struct SensitivityMatrix {
  int k = 0;
  std::vector<double> xi;
  std::vector<int> carried;
  Eigen::MatrixXd values;

  double operator()(std::size_t row, std::size_t col) const {
    return values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }
  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

SensitivityMatrix sensitivity_matrix(const RootConfiguration& rc, int k);

/// Central differences of derivative_roots; h <= 0 selects 1e-6 times the
/// smallest root gap.
SensitivityMatrix sensitivity_fd(const RootConfiguration& rc, int k, double h = 0.0);

/// d xi_j / d y_i for k = 1 from -P(xi) / ((xi - c)^2 P''(xi)). Indices are
/// zero-based: `i` a distinct root of P, `j` a root of P'.
double deriv_k1_formula(const RootConfiguration& rc, std::size_t i, std::size_t j);

struct PropertyCheck {
  std::string name;
  bool pass = true;
  double worst = 0.0;
};

struct LemmaReport {
  std::vector<PropertyCheck> checks;

  bool ok() const;
  const PropertyCheck& at(const std::string& name) const;
};

/// Sign pattern, row sums (= 1), column sums (= m_i (n-k)/n) and the
/// entrywise upper bound of the sensitivity matrix.
LemmaReport lemma_report(const RootConfiguration& rc, int k);

/// The constraint y_root = (root number `xi` of P^(order)), zero-based.
struct Equality {
  std::size_t root = 0;
  int order = 0;
  std::size_t xi = 0;

  friend bool operator==(const Equality&, const Equality&) = default;
};

inline constexpr double kActiveTol = 1e-8;

struct TransversalityCertificate {
  Eigen::MatrixXd jacobian;
  double dominance_margin = 0.0;
  std::vector<Equality> equalities;

  bool valid() const { return equalities.empty() || dominance_margin > 0.0; }
};

/// Jacobian of (y_root - xi) over the constrained roots and its row
/// diagonal-dominance margin.
TransversalityCertificate transversality_jacobian(const RootConfiguration& rc, std::span<const Equality> equalities,
                                                  double active_tol = kActiveTol);

struct EqualitySolveOptions {
  int max_iter = 200;
  double tol = 1e-14;
};

/// Moves the constrained roots (all others held fixed) until every equality
/// holds, by damped Newton on y_U - xi(y) with an ordering safeguard and a
/// fixed-point fallback. Throws NumericalError on failure.
RootConfiguration solve_equalities(const RootConfiguration& start, std::span<const Equality> equalities,
                                   const EqualitySolveOptions& opts = {});

/// Largest |y_root - xi| over the equalities.
double equality_residual(const RootConfiguration& rc, std::span<const Equality> equalities);

}  // namespace hypstrata
