#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hypstrata/polycore.hpp"

namespace hypstrata {

// Two roots of P^(k) and P are considered ambiguous rather than distinct or
// equal when their distance falls in [tol, 10 tol) times the smallest root gap.
class AmbiguityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class EntryKind { ClassA, ClassB, FreeXi };

/// One component of a configuration vector: a plain multiplicity (class A
/// root), a multiplicity indexed by `a` (class B root, coincides with a
/// simple root of P^(k)), or a bare `a` (a root of P^(k) that is not a root of P).
struct CvEntry {
  EntryKind kind = EntryKind::FreeXi;
  int mult = 0;

  static CvEntry a(int m) { return {EntryKind::ClassA, m}; }
  static CvEntry b(int m) { return {EntryKind::ClassB, m}; }
  static CvEntry xi() { return {EntryKind::FreeXi, 0}; }

  bool is_root() const { return kind != EntryKind::FreeXi; }

  friend bool operator==(const CvEntry&, const CvEntry&) = default;
  friend auto operator<=>(const CvEntry&, const CvEntry&) = default;
};

/// Arrangement of the roots of P (degree n) and P^(k), read left to right.
struct ConfigVector {
  std::vector<CvEntry> entries;
  int n = 0;
  int k = 0;

  /// Parses the text form, e.g. "(1,a,1,2_a,a,a,4)"; n is the sum of the
  /// multiplicities.
  static ConfigVector parse(std::string_view text, int k);
  /// Builds a vector from entries, deriving n.
  static ConfigVector from_entries(std::vector<CvEntry> entries, int k);

  std::string str() const;

  std::size_t num_roots() const;
  std::size_t num_class_a() const;
  std::size_t num_class_b() const;
  std::size_t num_free_xi() const;

  friend bool operator==(const ConfigVector&, const ConfigVector&) = default;
  friend auto operator<=>(const ConfigVector&, const ConfigVector&) = default;
};

struct ValidityReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

struct DimensionReport {
  int excess = 0;        // sum over distinct roots of (m - 1)
  int num_class_b = 0;
  int codim = 0;         // excess + num_class_b
  int ambient_dim = 0;   // n - codim
  int conv_dim = 0;      // n - codim - 2, modulo shifts and rescalings
};

ValidityReport validate(const ConfigVector& cv);

/// Rolle chain x_i <= xi_i <= x_{i+k} on the ranked positions encoded by the
/// vector, together with the requirement that both extreme roots are class A.
/// Structurally invalid vectors are not admissible.
bool is_admissible(const ConfigVector& cv);

DimensionReport dimension(const ConfigVector& cv);

inline constexpr double kClassifyTol = 1e-9;

/// Configuration vector of the stratum containing `rc`.
ConfigVector classify(const RootConfiguration& rc, int k, double tol = kClassifyTol);

}  // namespace hypstrata
