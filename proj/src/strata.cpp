#include "hypstrata/strata.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace hypstrata {

namespace {

void check_order(int n, int k) {
  if (n < 2 || k < 1 || k > n - 1)
    throw DomainError("need 1 <= k <= n-1 (got n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
}

void for_each_composition(int n, const std::function<void(const std::vector<int>&)>& fn) {
  const std::uint32_t cuts = 1u << (n - 1);
  std::vector<int> parts;
  for (std::uint32_t mask = 0; mask < cuts; ++mask) {
    parts.clear();
    int run = 1;
    for (int i = 0; i < n - 1; ++i) {
      if (mask & (1u << i)) {
        parts.push_back(run);
        run = 1;
      } else {
        ++run;
      }
    }
    parts.push_back(run);
    fn(parts);
  }
}

// All ways of putting `balls` indistinguishable markers into `slots` slots.
void for_each_placement(int balls, int slots, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> counts(static_cast<std::size_t>(slots), 0);
  std::function<void(int, int)> rec = [&](int slot, int left) {
    if (slot == slots - 1) {
      counts[static_cast<std::size_t>(slot)] = left;
      fn(counts);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[static_cast<std::size_t>(slot)] = c;
      rec(slot + 1, left - c);
    }
  };
  if (slots == 0) {
    if (balls == 0) fn(counts);
    return;
  }
  rec(0, balls);
}

bool sort_key_less(const ConfigVector& a, const ConfigVector& b) {
  const int da = dimension(a).conv_dim;
  const int db = dimension(b).conv_dim;
  if (da != db) return da < db;
  return a.str() < b.str();
}

// Dimension-0 arrangements of an r-fold root splitting under the same k.
// When r <= k no root of P^(k) stays near the cluster, so only two class A
// roots remain.
std::vector<ConfigVector> local_zero_dim(int r, int k) {
  if (r > k) return enumerate_cvs(r, k, 0);
  std::vector<ConfigVector> out;
  for (int left = 1; left < r; ++left)
    out.push_back(ConfigVector::from_entries({CvEntry::a(left), CvEntry::a(r - left)}, k));
  return out;
}

// Solutions closer than this have collapsed onto a neighbouring stratum.
constexpr double kMinSeparation = 1e-7;

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i - 1] < v[i])) return false;
  return true;
}

}  // namespace

std::vector<ConfigVector> enumerate_cvs(int n, int k, std::optional<int> dim_filter) {
  check_order(n, k);
  std::set<ConfigVector> found;
  for_each_composition(n, [&](const std::vector<int>& parts) {
    const auto q = parts.size();
    std::vector<std::size_t> b_candidates;
    for (std::size_t i = 1; i + 1 < q; ++i)
      if (parts[i] < k) b_candidates.push_back(i);
    int carried = 0;
    for (int m : parts) carried += std::max(0, m - k);

    const std::uint32_t subsets = 1u << b_candidates.size();
    for (std::uint32_t mask = 0; mask < subsets; ++mask) {
      std::vector<char> is_b(q, 0);
      int nb = 0;
      for (std::size_t t = 0; t < b_candidates.size(); ++t) {
        if (mask & (1u << t)) {
          is_b[b_candidates[t]] = 1;
          ++nb;
        }
      }
      const int free = n - k - nb - carried;
      if (free < 0) continue;
      // Markers outside the extreme roots always break the Rolle chain.
      for_each_placement(free, static_cast<int>(q) - 1, [&](const std::vector<int>& gaps) {
        std::vector<CvEntry> entries;
        for (std::size_t i = 0; i < q; ++i) {
          entries.push_back(is_b[i] ? CvEntry::b(parts[i]) : CvEntry::a(parts[i]));
          if (i + 1 < q) entries.insert(entries.end(), static_cast<std::size_t>(gaps[i]), CvEntry::xi());
        }
        auto cv = ConfigVector::from_entries(std::move(entries), k);
        if (!is_admissible(cv)) return;
        if (dim_filter && dimension(cv).conv_dim != *dim_filter) return;
        found.insert(std::move(cv));
      });
    }
  });
  std::vector<ConfigVector> out(found.begin(), found.end());
  std::sort(out.begin(), out.end(), sort_key_less);
  return out;
}

std::vector<ConfigVector> expansions(const ConfigVector& cv) {
  std::set<ConfigVector> found;
  const auto& e = cv.entries;
  auto emit = [&](std::size_t at, std::vector<CvEntry> replacement) {
    std::vector<CvEntry> entries(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(at));
    entries.insert(entries.end(), replacement.begin(), replacement.end());
    entries.insert(entries.end(), e.begin() + static_cast<std::ptrdiff_t>(at) + 1, e.end());
    auto w = ConfigVector::from_entries(std::move(entries), cv.k);
    if (is_admissible(w)) found.insert(std::move(w));
  };

  for (std::size_t p = 0; p < e.size(); ++p) {
    const bool interior = p > 0 && p + 1 < e.size();
    if (e[p].kind == EntryKind::ClassB && interior) {
      const int l = e[p].mult;
      emit(p, {CvEntry::a(l), CvEntry::xi()});
      emit(p, {CvEntry::xi(), CvEntry::a(l)});
      for (int left = 1; left < l; ++left) {
        emit(p, {CvEntry::a(left), CvEntry::b(l - left)});
        emit(p, {CvEntry::b(left), CvEntry::a(l - left)});
      }
    } else if (e[p].kind == EntryKind::ClassA && e[p].mult >= 2) {
      for (const auto& c : local_zero_dim(e[p].mult, cv.k)) emit(p, c.entries);
    }
  }

  std::vector<ConfigVector> out(found.begin(), found.end());
  std::sort(out.begin(), out.end(), sort_key_less);
  return out;
}

std::optional<std::size_t> StrataPoset::find(const ConfigVector& cv) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == cv) return i;
  return std::nullopt;
}

std::vector<std::size_t> StrataPoset::successors(std::size_t node) const {
  std::vector<std::size_t> out;
  for (const auto& [lo, hi] : edges)
    if (lo == node) out.push_back(hi);
  return out;
}

int StrataPoset::max_dim() const {
  return dims.empty() ? std::numeric_limits<int>::min() : *std::max_element(dims.begin(), dims.end());
}

bool StrataPoset::reachable(std::size_t lower, std::size_t upper) const {
  std::vector<char> seen(nodes.size(), 0);
  std::deque<std::size_t> queue{lower};
  seen[lower] = 1;
  while (!queue.empty()) {
    const auto cur = queue.front();
    queue.pop_front();
    if (cur == upper) return true;
    for (auto next : successors(cur)) {
      if (!seen[next]) {
        seen[next] = 1;
        queue.push_back(next);
      }
    }
  }
  return false;
}

std::vector<std::string> StrataPoset::check() const {
  std::vector<std::string> problems;
  std::vector<char> has_out(nodes.size(), 0);
  for (const auto& [lo, hi] : edges) {
    has_out[lo] = 1;
    if (dims[hi] != dims[lo] + 1)
      problems.push_back("edge " + nodes[lo].str() + " -> " + nodes[hi].str() + " changes dimension by " +
                         std::to_string(dims[hi] - dims[lo]));
  }
  const int top = max_dim();
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (dims[i] < top && !has_out[i]) problems.push_back("non-maximal node " + nodes[i].str() + " has no expansion");
  return problems;
}

std::string StrataPoset::to_dot() const {
  std::ostringstream out;
  out << "digraph strata_n" << n << "_k" << k << " {\n";
  for (std::size_t i = 0; i < nodes.size(); ++i)
    out << "  n" << i << " [label=\"" << nodes[i].str() << "\", dim=" << dims[i] << "];\n";
  for (const auto& [lo, hi] : edges) out << "  n" << lo << " -> n" << hi << ";\n";
  out << "}\n";
  return out.str();
}

StrataPoset build_poset(int n, int k) {
  StrataPoset poset;
  poset.n = n;
  poset.k = k;
  poset.nodes = enumerate_cvs(n, k);
  std::map<ConfigVector, std::size_t> index;
  for (std::size_t i = 0; i < poset.nodes.size(); ++i) {
    index.emplace(poset.nodes[i], i);
    poset.dims.push_back(dimension(poset.nodes[i]).conv_dim);
  }
  for (std::size_t i = 0; i < poset.nodes.size(); ++i)
    for (const auto& w : expansions(poset.nodes[i])) poset.edges.emplace_back(i, index.at(w));
  return poset;
}

std::vector<Equality> class_b_equalities(const ConfigVector& cv) {
  std::vector<Equality> out;
  std::size_t root = 0;
  std::size_t xi = 0;
  for (const auto& e : cv.entries) {
    switch (e.kind) {
      case EntryKind::ClassA:
        xi += static_cast<std::size_t>(std::max(0, e.mult - cv.k));
        ++root;
        break;
      case EntryKind::ClassB:
        out.push_back({root, cv.k, xi});
        ++xi;
        ++root;
        break;
      case EntryKind::FreeXi:
        ++xi;
        break;
    }
  }
  return out;
}

RootConfiguration zero_dim_point(const ConfigVector& cv, const ZeroDimOptions& opts) {
  if (!is_admissible(cv)) throw DomainError(cv.str() + " is not an admissible configuration vector");
  if (dimension(cv).conv_dim != 0) throw DomainError(cv.str() + " does not define a stratum of dimension 0");

  std::vector<int> mults;
  for (const auto& e : cv.entries)
    if (e.is_root()) mults.push_back(e.mult);
  const auto q = mults.size();
  if (q == 2) return RootConfiguration({0.0, 1.0}, mults);

  const auto eqs = class_b_equalities(cv);
  std::vector<double> y(q);
  if (!opts.initial.empty()) {
    if (opts.initial.size() != q - 2) throw DomainError("initial guess needs " + std::to_string(q - 2) + " interior values");
    std::copy(opts.initial.begin(), opts.initial.end(), y.begin() + 1);
  } else {
    for (std::size_t i = 1; i + 1 < q; ++i) y[i] = static_cast<double>(i) / static_cast<double>(q - 1);
  }
  y.front() = 0.0;
  y.back() = 1.0;

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
    if (attempt > 0) {
      for (std::size_t i = 1; i + 1 < q; ++i) y[i] = unit(rng);
      std::sort(y.begin() + 1, y.end() - 1);
    }
    if (!strictly_increasing(y)) continue;
    try {
      auto rc = solve_equalities(RootConfiguration(y, mults), eqs);
      if (rc.min_gap() > kMinSeparation && classify(rc, cv.k) == cv) return rc;
      last_error = "converged to a point of another stratum";
    } catch (const NumericalError& err) {
      last_error = err.what();
    }
  }
  throw NumericalError("no point found for " + cv.str() + ": " + last_error);
}

RootConfiguration sample_point(const ConfigVector& cv, std::mt19937_64& rng, int max_tries) {
  if (!is_admissible(cv)) throw DomainError(cv.str() + " is not an admissible configuration vector");
  if (dimension(cv).conv_dim < 0) throw DomainError(cv.str() + " has no gamma-normalized point");

  std::vector<int> mults;
  std::vector<char> is_b;
  for (const auto& e : cv.entries) {
    if (!e.is_root()) continue;
    mults.push_back(e.mult);
    is_b.push_back(e.kind == EntryKind::ClassB);
  }
  const auto q = mults.size();
  const auto eqs = class_b_equalities(cv);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int attempt = 0; attempt < max_tries; ++attempt) {
    std::vector<double> y(q);
    for (std::size_t i = 1; i + 1 < q; ++i) y[i] = unit(rng);
    y.front() = 0.0;
    y.back() = 1.0;
    std::sort(y.begin() + 1, y.end() - 1);
    if (!strictly_increasing(y)) continue;
    try {
      auto rc = solve_equalities(RootConfiguration(y, mults), eqs);
      if (rc.min_gap() > kMinSeparation && classify(rc, cv.k) == cv) return rc;
    } catch (const NumericalError&) {
    } catch (const DomainError&) {
    }
  }
  throw NumericalError("could not sample a point of " + cv.str() + " in " + std::to_string(max_tries) + " tries");
}

}  // namespace hypstrata
