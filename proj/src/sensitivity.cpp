#include "hypstrata/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace hypstrata {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i - 1] < v[i])) return false;
  return true;
}

// Roots of every derivative order appearing in the equalities.
std::map<int, DerivedRoots> derived_by_order(const RootConfiguration& rc, std::span<const Equality> eqs) {
  std::map<int, DerivedRoots> out;
  for (const auto& e : eqs)
    if (!out.contains(e.order)) out.emplace(e.order, derivative_roots(rc, e.order));
  return out;
}

Eigen::VectorXd equality_values(const RootConfiguration& rc, std::span<const Equality> eqs) {
  const auto dr = derived_by_order(rc, eqs);
  Eigen::VectorXd f(static_cast<Eigen::Index>(eqs.size()));
  for (std::size_t r = 0; r < eqs.size(); ++r)
    f(static_cast<Eigen::Index>(r)) = rc.root(eqs[r].root) - dr.at(eqs[r].order).roots[eqs[r].xi];
  return f;
}

Eigen::MatrixXd equality_jacobian(const RootConfiguration& rc, std::span<const Equality> eqs) {
  std::map<int, SensitivityMatrix> sens;
  for (const auto& e : eqs)
    if (!sens.contains(e.order)) sens.emplace(e.order, sensitivity_matrix(rc, e.order));
  const auto s = static_cast<Eigen::Index>(eqs.size());
  Eigen::MatrixXd jac(s, s);
  for (Eigen::Index r = 0; r < s; ++r) {
    const auto& eq = eqs[static_cast<std::size_t>(r)];
    const auto& sm = sens.at(eq.order);
    for (Eigen::Index c = 0; c < s; ++c)
      jac(r, c) = (r == c ? 1.0 : 0.0) - sm(eq.xi, eqs[static_cast<std::size_t>(c)].root);
  }
  return jac;
}

void check_equalities(const RootConfiguration& rc, std::span<const Equality> eqs) {
  std::vector<std::size_t> seen;
  for (const auto& e : eqs) {
    if (e.root >= rc.distinct()) throw DomainError("equality names root " + std::to_string(e.root + 1) + " of " + std::to_string(rc.distinct()));
    if (e.order < 1 || e.order > rc.degree() - 1)
      throw DomainError("equality derivative order " + std::to_string(e.order) + " out of range");
    if (e.xi >= static_cast<std::size_t>(rc.degree() - e.order))
      throw DomainError("equality names root " + std::to_string(e.xi + 1) + " of P^(" + std::to_string(e.order) + ")");
    if (std::find(seen.begin(), seen.end(), e.root) != seen.end())
      throw DomainError("root " + std::to_string(e.root + 1) + " constrained twice");
    seen.push_back(e.root);
  }
}

// Lowest `upto`+1 coefficients (ascending) of prod (t - d_i)^{m_i}.
std::vector<double> taylor_low(const std::vector<double>& d, const std::vector<int>& m, std::size_t upto) {
  std::vector<double> c(upto + 1, 0.0);
  c[0] = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (int rep = 0; rep < m[i]; ++rep) {
      for (std::size_t p = upto; p > 0; --p) c[p] = c[p - 1] - d[i] * c[p];
      c[0] *= -d[i];
    }
  }
  return c;
}

// Same with every factor replaced by (t + |d_i|): bounds the rounding error.
std::vector<double> taylor_low_abs(const std::vector<double>& d, const std::vector<int>& m, std::size_t upto) {
  std::vector<double> a(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) a[i] = -std::fabs(d[i]);
  return taylor_low(a, m, upto);
}

}  // namespace

SensitivityMatrix sensitivity_matrix(const RootConfiguration& rc, int k) {
  const auto dr = derivative_roots(rc, k);
  const auto q = rc.distinct();
  const auto top = static_cast<std::size_t>(k + 1);

  SensitivityMatrix s;
  s.k = k;
  s.xi = dr.roots;
  s.carried = dr.carried;
  s.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dr.size()), static_cast<Eigen::Index>(q));
  std::vector<double> d(q);
  std::vector<int> m(rc.mults().begin(), rc.mults().end());
  for (std::size_t j = 0; j < dr.size(); ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    if (dr.carried[j] >= 0) {
      s.values(row, dr.carried[j]) = 1.0;
      continue;
    }
    const double x = dr.roots[j];
    for (std::size_t i = 0; i < q; ++i) d[i] = rc.root(i) - x;
    // P^(k+1)(x) / (k+1)! and R_i^(k)(x) / k! are Taylor coefficients at x.
    const auto full = taylor_low(d, m, top);
    const auto bound = taylor_low_abs(d, m, top);
    const double den = full[top];
    if (std::fabs(den) <= 1e3 * kEps * bound[top])
      throw NumericalError("root " + std::to_string(j + 1) + " of P^(" + std::to_string(k) + ") at " + std::to_string(x) +
                           " is not simple");
    for (std::size_t i = 0; i < q; ++i) {
      --m[i];
      const auto part = taylor_low(d, m, top);
      ++m[i];
      s.values(row, static_cast<Eigen::Index>(i)) = rc.mult(i) * part[top - 1] / (static_cast<double>(k + 1) * den);
    }
  }
  return s;
}

SensitivityMatrix sensitivity_fd(const RootConfiguration& rc, int k, double h) {
  const auto q = rc.distinct();
  if (h <= 0.0) h = 1e-6 * (q >= 2 ? rc.min_gap() : std::max(1.0, std::fabs(rc.root(0))));
  const auto base = derivative_roots(rc, k);

  SensitivityMatrix s;
  s.k = k;
  s.xi = base.roots;
  s.carried = base.carried;
  s.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(base.size()), static_cast<Eigen::Index>(q));
  for (std::size_t i = 0; i < q; ++i) {
    std::vector<double> plus(rc.roots().begin(), rc.roots().end());
    std::vector<double> minus = plus;
    plus[i] += h;
    minus[i] -= h;
    if (!strictly_increasing(plus) || !strictly_increasing(minus))
      throw DomainError("finite-difference step " + std::to_string(h) + " collapses the root ordering");
    const auto up = derivative_roots(rc.with_roots(std::move(plus)), k);
    const auto down = derivative_roots(rc.with_roots(std::move(minus)), k);
    for (std::size_t j = 0; j < base.size(); ++j)
      s.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = (up.roots[j] - down.roots[j]) / (2.0 * h);
  }
  return s;
}

double deriv_k1_formula(const RootConfiguration& rc, std::size_t i, std::size_t j) {
  if (i >= rc.distinct()) throw DomainError("root index out of range");
  if (rc.mult(i) != 1) throw DomainError("d xi / d c formula needs a simple root c");
  const auto dr = derivative_roots(rc, 1);
  if (j >= dr.size()) throw DomainError("index of root of P' out of range");
  const double xi = dr.roots[j];
  if ((j > 0 && dr.roots[j - 1] == xi) || (j + 1 < dr.size() && dr.roots[j + 1] == xi))
    throw DomainError("root of P' is not simple");
  const double c = rc.root(i);
  if (xi == c) throw DomainError("root of P' coincides with c");
  // P''/P = (sum m/(xi-y))^2 - sum m/(xi-y)^2 in product form.
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t r = 0; r < rc.distinct(); ++r) {
    const double inv = 1.0 / (xi - rc.root(r));
    s1 += rc.mult(r) * inv;
    s2 += rc.mult(r) * inv * inv;
  }
  const double d = xi - c;
  return -1.0 / (d * d * (s1 * s1 - s2));
}

bool LemmaReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.pass; });
}

const PropertyCheck& LemmaReport::at(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no lemma check named " + name);
}

LemmaReport lemma_report(const RootConfiguration& rc, int k) {
  const auto s = sensitivity_matrix(rc, k);
  const int n = rc.degree();
  const double share = static_cast<double>(n - k) / n;
  const auto q = rc.distinct();
  const bool strict = rc.strictly_hyperbolic();

  // Signs: zero exactly when the row is carried by another root, positive otherwise.
  PropertyCheck signs{"signs", true, 0.0};
  for (std::size_t j = 0; j < s.rows(); ++j) {
    for (std::size_t i = 0; i < q; ++i) {
      const double v = s(j, i);
      const bool zero_expected = s.carried[j] >= 0 && static_cast<std::size_t>(s.carried[j]) != i;
      if (zero_expected) {
        signs.worst = std::max(signs.worst, std::fabs(v));
        if (v != 0.0) signs.pass = false;
      } else if (!(v > 0.0)) {
        signs.pass = false;
        signs.worst = std::max(signs.worst, std::fabs(v));
      }
    }
  }

  PropertyCheck rows{"row_sums", true, 0.0};
  for (std::size_t j = 0; j < s.rows(); ++j)
    rows.worst = std::max(rows.worst, std::fabs(s.values.row(static_cast<Eigen::Index>(j)).sum() - 1.0));
  rows.pass = rows.worst <= 1e-8;

  PropertyCheck cols{"column_sums", true, 0.0};
  for (std::size_t i = 0; i < q; ++i)
    cols.worst = std::max(cols.worst, std::fabs(s.values.col(static_cast<Eigen::Index>(i)).sum() - rc.mult(i) * share));
  cols.pass = cols.worst <= 1e-8;

  // Entrywise bound m_i (n-k)/n; strict for strictly hyperbolic P with n-k >= 2.
  PropertyCheck bound{"entry_bound", true, -std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j < s.rows(); ++j) {
    for (std::size_t i = 0; i < q; ++i) {
      const double excess = s(j, i) - rc.mult(i) * share;
      bound.worst = std::max(bound.worst, excess);
      const bool strict_case = strict && n - k >= 2;
      if (strict_case ? !(excess < 0.0) : excess > 1e-12) bound.pass = false;
    }
  }

  return LemmaReport{{signs, rows, cols, bound}};
}

TransversalityCertificate transversality_jacobian(const RootConfiguration& rc, std::span<const Equality> equalities,
                                                  double active_tol) {
  TransversalityCertificate cert;
  cert.equalities.assign(equalities.begin(), equalities.end());
  if (equalities.empty()) return cert;
  check_equalities(rc, equalities);

  const auto f = equality_values(rc, equalities);
  for (Eigen::Index r = 0; r < f.size(); ++r)
    if (std::fabs(f(r)) >= active_tol)
      throw DomainError("equality " + std::to_string(r + 1) + " is not active (|y - xi| = " + std::to_string(std::fabs(f(r))) + ")");

  cert.jacobian = equality_jacobian(rc, equalities);
  cert.dominance_margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < cert.jacobian.rows(); ++r) {
    double off = 0.0;
    for (Eigen::Index c = 0; c < cert.jacobian.cols(); ++c)
      if (c != r) off += std::fabs(cert.jacobian(r, c));
    cert.dominance_margin = std::min(cert.dominance_margin, cert.jacobian(r, r) - off);
  }
  return cert;
}

double equality_residual(const RootConfiguration& rc, std::span<const Equality> equalities) {
  if (equalities.empty()) return 0.0;
  return equality_values(rc, equalities).cwiseAbs().maxCoeff();
}

RootConfiguration solve_equalities(const RootConfiguration& start, std::span<const Equality> equalities,
                                   const EqualitySolveOptions& opts) {
  if (equalities.empty()) return start;
  check_equalities(start, equalities);

  const double scale = std::max(1.0, std::fabs(start.root(start.distinct() - 1) - start.root(0)));
  RootConfiguration rc = start;
  Eigen::VectorXd f = equality_values(rc, equalities);
  double norm = f.cwiseAbs().maxCoeff();

  for (int it = 0; it < opts.max_iter && norm > opts.tol * scale; ++it) {
    const Eigen::VectorXd step = equality_jacobian(rc, equalities).partialPivLu().solve(-f);
    bool accepted = false;
    for (double t = 1.0; t > 1e-9; t *= 0.5) {
      std::vector<double> y(rc.roots().begin(), rc.roots().end());
      for (std::size_t r = 0; r < equalities.size(); ++r) y[equalities[r].root] += t * step(static_cast<Eigen::Index>(r));
      if (!strictly_increasing(y)) continue;
      auto cand = rc.with_roots(std::move(y));
      auto fc = equality_values(cand, equalities);
      const double nc = fc.cwiseAbs().maxCoeff();
      if (nc < (1.0 - 1e-4 * t) * norm || nc <= opts.tol * scale) {
        rc = std::move(cand);
        f = std::move(fc);
        norm = nc;
        accepted = true;
        break;
      }
    }
    if (accepted) continue;

    // Fixed-point step y_U <- xi(y): maps ordered configurations of one
    // derivative order into themselves.
    std::vector<double> y(rc.roots().begin(), rc.roots().end());
    for (std::size_t r = 0; r < equalities.size(); ++r) y[equalities[r].root] -= f(static_cast<Eigen::Index>(r));
    if (!strictly_increasing(y)) break;
    rc = rc.with_roots(std::move(y));
    f = equality_values(rc, equalities);
    norm = f.cwiseAbs().maxCoeff();
  }

  if (!(norm <= 1e-11 * scale))
    throw NumericalError("equality solve did not converge (residual " + std::to_string(norm) + ")");
  return rc;
}

}  // namespace hypstrata
