#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hypstrata/polycore.hpp"
#include "hypstrata/sensitivity.hpp"

namespace hypstrata {

struct VerifyOptions {
  int n_max = 6;
  int samples = 50;
  std::uint64_t seed = 7;
  /// Worker threads; 0 uses the hardware concurrency.
  unsigned threads = 0;
};

struct PropertyResult {
  std::string name;
  bool pass = true;
  /// Largest residual (or smallest margin, for margins) seen.
  double worst = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  /// First few failure descriptions, in sample order.
  std::vector<std::string> failures;
};

struct SuiteReport {
  std::string suite;
  std::vector<PropertyResult> properties;

  bool ok() const;
  const PropertyResult& at(const std::string& name) const;
};

/// Seed of sample `index` under the run seed; independent of thread count.
std::uint64_t sample_seed(std::uint64_t seed, std::size_t index);

/// Uniform distinct roots in [0, 1] with smallest gap at least `min_gap`,
/// gamma-normalized. With `strict` false the multiplicities are a random
/// composition of n into at least two parts.
RootConfiguration random_configuration(std::mt19937_64& rng, int n, bool strict, double min_gap = 1e-3);

/// Largest |analytic - fd| over entries, each scaled by the l1 norm of its
/// finite-difference row.
double fd_relative_deviation(const SensitivityMatrix& analytic, const SensitivityMatrix& fd);

SuiteReport verify_lemmas(const VerifyOptions& opts);
SuiteReport verify_transversality(const VerifyOptions& opts);
SuiteReport verify_flows(const VerifyOptions& opts);
SuiteReport verify_enumeration(const VerifyOptions& opts);

std::vector<std::string> suite_names();

/// Dispatches on the suite name; throws DomainError for an unknown suite.
SuiteReport run_suite(const std::string& suite, const VerifyOptions& opts);

}  // namespace hypstrata
