#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypstrata/configvec.hpp"
#include "hypstrata/sensitivity.hpp"

namespace hypstrata {

/// Graded graph of the admissible configuration vectors for fixed (n, k).
/// An edge (lo, hi) means the stratum of nodes[hi] contains the stratum of
/// nodes[lo] in its closure and is one dimension larger.
struct StrataPoset {
  int n = 0;
  int k = 0;
  std::vector<ConfigVector> nodes;
  std::vector<int> dims;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::optional<std::size_t> find(const ConfigVector& cv) const;
  std::vector<std::size_t> successors(std::size_t node) const;
  int max_dim() const;

  /// True when `upper` is reachable from `lower` along edges (each edge is one
  /// inverse degeneration).
  bool reachable(std::size_t lower, std::size_t upper) const;

  /// Graded-structure violations; empty when the poset is well formed.
  std::vector<std::string> check() const;

  std::string to_dot() const;
};

/// Every admissible vector for (n, k), sorted by dimension and then text.
std::vector<ConfigVector> enumerate_cvs(int n, int k, std::optional<int> dim_filter = std::nullopt);

/// Vectors one dimension up reachable by a single splitting operation: a
/// class B root released to either side of its root of P^(k), a class B root
/// split into a class A and a class B part, or a class A root of multiplicity
/// r replaced by a dimension-0 arrangement of r roots.
std::vector<ConfigVector> expansions(const ConfigVector& cv);

StrataPoset build_poset(int n, int k);

/// The constraints y_b = xi_j carried by the class B entries, indexed by
/// distinct root and by position among the roots of P^(k).
std::vector<Equality> class_b_equalities(const ConfigVector& cv);

struct ZeroDimOptions {
  /// Interior starting positions (q - 2 values in (0, 1)); equally spaced when empty.
  std::vector<double> initial;
  int restarts = 8;
  std::uint64_t seed = 0x5eed;
};

/// The unique gamma-normalized point of a dimension-0 stratum.
RootConfiguration zero_dim_point(const ConfigVector& cv, const ZeroDimOptions& opts = {});

/// A random gamma-normalized point of the stratum of `cv` (conv_dim >= 0):
/// class A roots drawn uniformly, class B roots solved for, result verified
/// by classification. Throws NumericalError after `max_tries` rejections.
RootConfiguration sample_point(const ConfigVector& cv, std::mt19937_64& rng, int max_tries = 2000);

}  // namespace hypstrata
