#include "hypstrata/configvec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

namespace hypstrata {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

int parse_positive(std::string_view s, std::string_view whole) {
  int value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || value < 1)
    throw DomainError("bad configuration vector entry '" + std::string(s) + "' in " + std::string(whole));
  return value;
}

// Ranked positions: one rank per entry, roots of P and of P^(k) with multiplicity.
struct Expansion {
  std::vector<int> x_rank;
  std::vector<int> xi_rank;
};

Expansion expand(const ConfigVector& cv) {
  Expansion e;
  int rank = 0;
  for (const auto& entry : cv.entries) {
    switch (entry.kind) {
      case EntryKind::ClassA:
        e.x_rank.insert(e.x_rank.end(), static_cast<std::size_t>(entry.mult), rank);
        if (entry.mult > cv.k) e.xi_rank.insert(e.xi_rank.end(), static_cast<std::size_t>(entry.mult - cv.k), rank);
        break;
      case EntryKind::ClassB:
        e.x_rank.insert(e.x_rank.end(), static_cast<std::size_t>(entry.mult), rank);
        e.xi_rank.push_back(rank);
        break;
      case EntryKind::FreeXi:
        e.xi_rank.push_back(rank);
        break;
    }
    ++rank;
  }
  return e;
}

}  // namespace

ConfigVector ConfigVector::parse(std::string_view text, int k) {
  auto body = trim(text);
  if (body.size() < 2 || body.front() != '(' || body.back() != ')')
    throw DomainError("configuration vector must be parenthesised: " + std::string(text));
  body = body.substr(1, body.size() - 2);
  std::vector<CvEntry> entries;
  while (true) {
    const auto comma = body.find(',');
    const auto token = trim(body.substr(0, comma));
    if (token == "a") {
      entries.push_back(CvEntry::xi());
    } else if (token.size() > 2 && token.substr(token.size() - 2) == "_a") {
      entries.push_back(CvEntry::b(parse_positive(token.substr(0, token.size() - 2), text)));
    } else {
      entries.push_back(CvEntry::a(parse_positive(token, text)));
    }
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return from_entries(std::move(entries), k);
}

ConfigVector ConfigVector::from_entries(std::vector<CvEntry> entries, int k) {
  ConfigVector cv;
  cv.n = std::accumulate(entries.begin(), entries.end(), 0, [](int s, const CvEntry& e) { return s + e.mult; });
  cv.entries = std::move(entries);
  cv.k = k;
  return cv;
}

std::string ConfigVector::str() const {
  std::string out = "(";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) out += ',';
    switch (entries[i].kind) {
      case EntryKind::ClassA: out += std::to_string(entries[i].mult); break;
      case EntryKind::ClassB: out += std::to_string(entries[i].mult) + "_a"; break;
      case EntryKind::FreeXi: out += 'a'; break;
    }
  }
  return out + ")";
}

std::size_t ConfigVector::num_roots() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const CvEntry& e) { return e.is_root(); }));
}

std::size_t ConfigVector::num_class_a() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const CvEntry& e) { return e.kind == EntryKind::ClassA; }));
}

std::size_t ConfigVector::num_class_b() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const CvEntry& e) { return e.kind == EntryKind::ClassB; }));
}

std::size_t ConfigVector::num_free_xi() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const CvEntry& e) { return e.kind == EntryKind::FreeXi; }));
}

ValidityReport validate(const ConfigVector& cv) {
  ValidityReport report;
  auto& v = report.violations;
  if (cv.k < 1) v.push_back("derivative order k=" + std::to_string(cv.k) + " must be at least 1");
  if (cv.entries.empty()) {
    v.push_back("empty configuration vector");
    return report;
  }

  int mult_sum = 0;
  int xi_count = 0;
  for (std::size_t i = 0; i < cv.entries.size(); ++i) {
    const auto& e = cv.entries[i];
    if (e.kind != EntryKind::FreeXi && e.mult < 1)
      v.push_back("entry " + std::to_string(i + 1) + " has non-positive multiplicity");
    if (e.kind == EntryKind::ClassB && e.mult >= cv.k)
      v.push_back("entry " + std::to_string(i + 1) + ": indexed multiplicity " + std::to_string(e.mult) +
                  " is not below k=" + std::to_string(cv.k));
    if (e.kind == EntryKind::FreeXi) ++xi_count;
    if (e.kind == EntryKind::ClassB) ++xi_count;
    if (e.kind == EntryKind::ClassA && e.mult > cv.k) xi_count += e.mult - cv.k;
    mult_sum += e.mult;
  }
  if (mult_sum != cv.n)
    v.push_back("multiplicities sum to " + std::to_string(mult_sum) + ", expected n=" + std::to_string(cv.n));
  if (cv.n >= 1 && cv.k < cv.n && xi_count != cv.n - cv.k)
    v.push_back("vector encodes " + std::to_string(xi_count) + " roots of P^(k), expected n-k=" +
                std::to_string(cv.n - cv.k));
  if (cv.k >= cv.n) v.push_back("derivative order k=" + std::to_string(cv.k) + " must be below n=" + std::to_string(cv.n));

  const auto first = std::find_if(cv.entries.begin(), cv.entries.end(), [](const CvEntry& e) { return e.is_root(); });
  const auto last = std::find_if(cv.entries.rbegin(), cv.entries.rend(), [](const CvEntry& e) { return e.is_root(); });
  if (first == cv.entries.end()) {
    v.push_back("no root of P in the vector");
  } else {
    if (first->kind != EntryKind::ClassA) v.push_back("smallest root of P must be class A");
    if (last->kind != EntryKind::ClassA) v.push_back("greatest root of P must be class A");
  }
  return report;
}

bool is_admissible(const ConfigVector& cv) {
  if (!validate(cv).ok()) return false;
  const auto e = expand(cv);
  const auto m = e.xi_rank.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (e.x_rank[i] > e.xi_rank[i]) return false;
    if (e.xi_rank[i] > e.x_rank[i + static_cast<std::size_t>(cv.k)]) return false;
  }
  return true;
}

DimensionReport dimension(const ConfigVector& cv) {
  DimensionReport d;
  for (const auto& e : cv.entries) {
    if (e.is_root()) d.excess += e.mult - 1;
    if (e.kind == EntryKind::ClassB) ++d.num_class_b;
  }
  d.codim = d.excess + d.num_class_b;
  d.ambient_dim = cv.n - d.codim;
  d.conv_dim = cv.n - d.codim - 2;
  if (d.conv_dim != static_cast<int>(cv.num_class_a()) - 2)
    throw DomainError("dimension cross-check failed for " + cv.str());
  return d;
}

ConfigVector classify(const RootConfiguration& rc, int k, double tol) {
  const auto xi = derivative_roots(rc, k);
  const std::size_t q = rc.distinct();
  const double scale = q >= 2 ? rc.min_gap() : std::max(1.0, std::fabs(rc.root(0)));
  const double hit = tol * scale;

  // Assign each computed (non-carried) root of P^(k) to the nearest root of P
  // when it coincides; otherwise it stays free.
  std::vector<int> bound_to(xi.size(), -1);
  std::vector<int> bound_xi(q, -1);
  for (std::size_t j = 0; j < xi.size(); ++j) {
    if (xi.carried[j] >= 0) continue;
    const auto it = std::lower_bound(rc.roots().begin(), rc.roots().end(), xi.roots[j]);
    std::size_t best = q;
    double dist = std::numeric_limits<double>::infinity();
    for (auto cand : {it - rc.roots().begin() - 1, it - rc.roots().begin()}) {
      if (cand < 0 || static_cast<std::size_t>(cand) >= q) continue;
      const double d = std::fabs(rc.root(static_cast<std::size_t>(cand)) - xi.roots[j]);
      if (d < dist) {
        dist = d;
        best = static_cast<std::size_t>(cand);
      }
    }
    if (best == q || dist >= 10.0 * hit) continue;
    if (dist >= hit)
      throw AmbiguityError("root " + std::to_string(j + 1) + " of P^(" + std::to_string(k) + ") lies " +
                           std::to_string(dist) + " from root " + std::to_string(best + 1) +
                           " of P, inside the ambiguity band");
    if (rc.mult(best) >= k)
      throw NumericalError("root " + std::to_string(j + 1) + " of P^(" + std::to_string(k) +
                           ") coincides with root " + std::to_string(best + 1) + " of multiplicity >= k");
    if (bound_xi[best] >= 0)
      throw NumericalError("two roots of P^(k) coincide with root " + std::to_string(best + 1));
    bound_to[j] = static_cast<int>(best);
    bound_xi[best] = static_cast<int>(j);
  }

  std::vector<CvEntry> entries;
  std::size_t j = 0;
  for (std::size_t i = 0; i < q; ++i) {
    for (; j < xi.size() && xi.roots[j] < rc.root(i); ++j)
      if (xi.carried[j] < 0 && bound_to[j] < 0) entries.push_back(CvEntry::xi());
    entries.push_back(bound_xi[i] >= 0 ? CvEntry::b(rc.mult(i)) : CvEntry::a(rc.mult(i)));
    for (; j < xi.size() && xi.roots[j] <= rc.root(i); ++j)
      if (xi.carried[j] < 0 && bound_to[j] < 0) entries.push_back(CvEntry::xi());
  }
  for (; j < xi.size(); ++j)
    if (xi.carried[j] < 0 && bound_to[j] < 0) entries.push_back(CvEntry::xi());
  return ConfigVector::from_entries(std::move(entries), k);
}

}  // namespace hypstrata
