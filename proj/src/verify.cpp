#include "hypstrata/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <thread>
#include <utility>

#include "hypstrata/configvec.hpp"
#include "hypstrata/flow.hpp"
#include "hypstrata/strata.hpp"

namespace hypstrata {

namespace {

constexpr std::size_t kMaxFailures = 5;

enum class Mode { Max, Min };

struct Observation {
  std::string property;
  bool pass = true;
  bool skipped = false;
  double value = 0.0;
  std::string note;
};

using Observations = std::vector<Observation>;

struct PropertySpec {
  std::string name;
  Mode mode = Mode::Max;
};

template <class Fn>
std::vector<Observations> parallel_samples(std::size_t count, unsigned threads, Fn fn) {
  std::vector<Observations> out(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = fn(i);
      } catch (const std::exception& err) {
        out[i].push_back({"sample_errors", false, false, 1.0, "sample " + std::to_string(i) + ": " + err.what()});
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

SuiteReport aggregate(std::string suite, const std::vector<PropertySpec>& specs, const std::vector<Observations>& samples) {
  SuiteReport rep{std::move(suite), {}};
  std::map<std::string, std::size_t> slot;
  auto add = [&](const std::string& name, Mode mode) {
    slot[name] = rep.properties.size();
    PropertyResult r;
    r.name = name;
    r.worst = mode == Mode::Max ? 0.0 : std::numeric_limits<double>::infinity();
    rep.properties.push_back(std::move(r));
  };
  std::map<std::string, Mode> modes;
  for (const auto& s : specs) {
    add(s.name, s.mode);
    modes[s.name] = s.mode;
  }
  for (const auto& obs : samples) {
    for (const auto& o : obs) {
      if (!slot.contains(o.property)) {
        add(o.property, Mode::Max);
        modes[o.property] = Mode::Max;
      }
      auto& r = rep.properties[slot[o.property]];
      if (o.skipped) {
        ++r.skipped;
        continue;
      }
      ++r.checked;
      r.worst = modes[o.property] == Mode::Max ? std::max(r.worst, o.value) : std::min(r.worst, o.value);
      if (!o.pass) {
        r.pass = false;
        if (r.failures.size() < kMaxFailures) r.failures.push_back(o.note);
      }
    }
  }
  for (auto& r : rep.properties)
    if (r.checked == 0 && !std::isfinite(r.worst)) r.worst = 0.0;
  return rep;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

int pick_degree(std::mt19937_64& rng, int n_max) {
  return uniform_int(rng, std::min(3, n_max), n_max);
}

std::string describe(const RootConfiguration& rc, int k) {
  std::string s = "k=" + std::to_string(k) + " roots";
  for (std::size_t i = 0; i < rc.distinct(); ++i)
    s += (i ? "," : " ") + std::to_string(rc.root(i)) + "^" + std::to_string(rc.mult(i));
  return s;
}

double max_root_distance(const RootConfiguration& a, const RootConfiguration& b) {
  if (a.distinct() != b.distinct()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < a.distinct(); ++i) {
    if (a.mult(i) != b.mult(i)) return std::numeric_limits<double>::infinity();
    d = std::max(d, std::fabs(a.root(i) - b.root(i)));
  }
  return d;
}

// Nearest root of P^(order) to y_root, as an equality.
Equality nearest_equality(const RootConfiguration& rc, std::size_t root, int order) {
  const auto dr = derivative_roots(rc, order);
  std::size_t best = 0;
  for (std::size_t j = 1; j < dr.size(); ++j)
    if (std::fabs(dr.roots[j] - rc.root(root)) < std::fabs(dr.roots[best] - rc.root(root))) best = j;
  return {root, order, best};
}

bool distinct_targets(const std::vector<Equality>& eqs) {
  std::set<std::pair<int, std::size_t>> seen;
  std::set<std::size_t> roots;
  for (const auto& e : eqs)
    if (!seen.insert({e.order, e.xi}).second || !roots.insert(e.root).second) return false;
  return true;
}

std::size_t distinct_orders(const std::vector<Equality>& eqs) {
  std::set<int> orders;
  for (const auto& e : eqs) orders.insert(e.order);
  return orders.size();
}

}  // namespace

bool SuiteReport::ok() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.pass; });
}

const PropertyResult& SuiteReport::at(const std::string& name) const {
  for (const auto& p : properties)
    if (p.name == name) return p;
  throw DomainError("no property named '" + name + "' in suite " + suite);
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

RootConfiguration random_configuration(std::mt19937_64& rng, int n, bool strict, double min_gap) {
  if (n < 2) throw DomainError("random configurations need n >= 2");
  std::vector<int> mults;
  if (strict) {
    mults.assign(static_cast<std::size_t>(n), 1);
  } else {
    const int q = uniform_int(rng, 2, n);
    std::vector<int> cuts(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n - 1; ++i) cuts[static_cast<std::size_t>(i)] = i + 1;
    std::shuffle(cuts.begin(), cuts.end(), rng);
    cuts.resize(static_cast<std::size_t>(q - 1));
    std::sort(cuts.begin(), cuts.end());
    int prev = 0;
    for (int c : cuts) {
      mults.push_back(c - prev);
      prev = c;
    }
    mults.push_back(n - prev);
  }
  const auto q = mults.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    std::vector<double> y(q);
    for (auto& v : y) v = unit(rng);
    std::sort(y.begin(), y.end());
    bool ok = true;
    for (std::size_t i = 1; i < q; ++i) ok = ok && y[i] - y[i - 1] >= min_gap;
    if (ok) return gamma_normalize(RootConfiguration(std::move(y), mults));
  }
}

double fd_relative_deviation(const SensitivityMatrix& analytic, const SensitivityMatrix& fd) {
  if (analytic.values.rows() != fd.values.rows() || analytic.values.cols() != fd.values.cols())
    throw DomainError("sensitivity matrices differ in shape");
  double worst = 0.0;
  for (Eigen::Index j = 0; j < fd.values.rows(); ++j) {
    const double scale = std::max(fd.values.row(j).cwiseAbs().sum(), std::numeric_limits<double>::min());
    for (Eigen::Index i = 0; i < fd.values.cols(); ++i)
      worst = std::max(worst, std::fabs(analytic.values(j, i) - fd.values(j, i)) / scale);
  }
  return worst;
}

SuiteReport verify_lemmas(const VerifyOptions& opts) {
  const std::vector<PropertySpec> specs{{"signs"},       {"row_sums"},     {"column_sums"},      {"entry_bound"},
                                        {"fd_agreement"}, {"k1_formula"}, {"multiple_root_cases"}};
  auto samples = parallel_samples(static_cast<std::size_t>(opts.samples), opts.threads, [&](std::size_t i) {
    std::mt19937_64 rng(sample_seed(opts.seed, i));
    const int n = pick_degree(rng, opts.n_max);
    const int k = uniform_int(rng, 1, n - 1);
    const bool strict = i % 4 != 3;
    const auto rc = random_configuration(rng, n, strict);
    const auto where = describe(rc, k);
    Observations obs;

    const auto rep = lemma_report(rc, k);
    for (const auto& c : rep.checks) obs.push_back({c.name, c.pass, false, c.worst, where});

    const auto s = sensitivity_matrix(rc, k);
    if (strict) {
      const double dev = fd_relative_deviation(s, sensitivity_fd(rc, k));
      obs.push_back({"fd_agreement", dev <= 1e-6, false, dev, where});
      if (k == 1) {
        double worst = 0.0;
        for (std::size_t j = 0; j < s.rows(); ++j)
          for (std::size_t c = 0; c < s.cols(); ++c)
            worst = std::max(worst, std::fabs(deriv_k1_formula(rc, c, j) - s(j, c)) / std::max(1.0, std::fabs(s(j, c))));
        obs.push_back({"k1_formula", worst <= 1e-10, false, worst, where});
      }
    } else {
      bool any = false;
      bool exact = true;
      for (std::size_t j = 0; j < s.rows(); ++j) {
        if (s.carried[j] < 0) continue;
        any = true;
        for (std::size_t c = 0; c < s.cols(); ++c)
          exact = exact && s(j, c) == (static_cast<int>(c) == s.carried[j] ? 1.0 : 0.0);
      }
      if (any)
        obs.push_back({"multiple_root_cases", exact, false, exact ? 0.0 : 1.0, where});
      else
        obs.push_back({"multiple_root_cases", true, true, 0.0, ""});
    }
    return obs;
  });
  return aggregate("lemmas", specs, samples);
}

SuiteReport verify_transversality(const VerifyOptions& opts) {
  const std::vector<PropertySpec> specs{{"random_equalities", Mode::Min},
                                        {"mixed_orders", Mode::Min},
                                        {"flow_endpoints", Mode::Min},
                                        {"flow_mixed_orders", Mode::Min}};
  auto samples = parallel_samples(static_cast<std::size_t>(opts.samples), opts.threads, [&](std::size_t i) {
    std::mt19937_64 rng(sample_seed(opts.seed, i));
    Observations obs;
    const int n = pick_degree(rng, opts.n_max);
    if (n < 3) return obs;

    // Up to three equalities y_i = xi^(k_i) with independently drawn orders k_i >= 2.
    {
      const auto rc = random_configuration(rng, n, true, 0.02);
      const int interior = static_cast<int>(rc.distinct()) - 2;
      if (interior >= 1) {
        const int s = uniform_int(rng, 1, std::min(3, interior));
        std::vector<std::size_t> roots;
        for (int r = 1; r <= interior; ++r) roots.push_back(static_cast<std::size_t>(r));
        std::shuffle(roots.begin(), roots.end(), rng);
        roots.resize(static_cast<std::size_t>(s));
        std::vector<Equality> eqs;
        for (auto r : roots) eqs.push_back(nearest_equality(rc, r, uniform_int(rng, 2, n - 1)));
        bool done = false;
        if (distinct_targets(eqs)) {
          try {
            const auto pt = solve_equalities(rc, eqs);
            if (pt.min_gap() > 1e-7) {
              const auto cert = transversality_jacobian(pt, eqs);
              const auto where = describe(pt, eqs.front().order) + " s=" + std::to_string(eqs.size());
              obs.push_back({"random_equalities", cert.dominance_margin > 0.0, false, cert.dominance_margin, where});
              if (distinct_orders(eqs) >= 2)
                obs.push_back({"mixed_orders", cert.dominance_margin > 0.0, false, cert.dominance_margin, where});
              done = true;
            }
          } catch (const NumericalError&) {
          }
        }
        if (!done) obs.push_back({"random_equalities", true, true, 0.0, ""});
      }
    }

    // Equalities met by retraction flows, optionally joined by one of another order.
    const int kf = uniform_int(rng, std::min(2, n - 1), n - 1);
    const auto start = random_configuration(rng, n, i % 2 == 0);
    if (dimension(classify(start, kf)).conv_dim < 1) return obs;
    const auto res = retract(start, kf, MoverPolicy::Targeted, sample_seed(opts.seed, i));
    for (const auto& link : res.chain) {
      auto eqs = class_b_equalities(link.cv);
      if (eqs.empty()) continue;
      if (eqs.size() > 3) eqs.resize(3);
      const auto where = link.cv.str();
      const auto cert = transversality_jacobian(link.rc, eqs);
      obs.push_back({"flow_endpoints", cert.dominance_margin > 0.0, false, cert.dominance_margin, where});

      if (eqs.size() >= 3) continue;
      if (n < 4) continue;
      int order = uniform_int(rng, 2, n - 2);
      if (order >= kf) ++order;
      std::vector<std::size_t> free_roots;
      for (std::size_t r = 1; r + 1 < link.rc.distinct(); ++r) {
        if (link.rc.mult(r) >= order) continue;
        bool used = std::any_of(eqs.begin(), eqs.end(), [&](const Equality& e) { return e.root == r; });
        if (!used) free_roots.push_back(r);
      }
      if (free_roots.empty()) continue;
      auto mixed = eqs;
      mixed.push_back(nearest_equality(link.rc, free_roots[rng() % free_roots.size()], order));
      if (!distinct_targets(mixed)) continue;
      try {
        const auto pt = solve_equalities(link.rc, mixed);
        if (pt.min_gap() <= 1e-7) continue;
        const auto mc = transversality_jacobian(pt, mixed);
        obs.push_back({"flow_mixed_orders", mc.dominance_margin > 0.0, false, mc.dominance_margin,
                       where + " + order " + std::to_string(order)});
      } catch (const NumericalError&) {
        obs.push_back({"flow_mixed_orders", true, true, 0.0, ""});
      }
    }
    return obs;
  });
  return aggregate("transversality", specs, samples);
}

SuiteReport verify_flows(const VerifyOptions& opts) {
  const std::vector<PropertySpec> specs{{"class_b_speeds"},  {"sigma0_bound"},     {"dimension_descent"},
                                        {"drift"},           {"reverse_check"},    {"poset_connection"},
                                        {"zero_dim_match"},  {"q2_closed_form"},   {"path_independence"}};
  std::map<std::pair<int, int>, StrataPoset> posets;
  for (int n = 3; n <= std::max(opts.n_max, 3); ++n)
    for (int k = 1; k < n; ++k) posets.emplace(std::make_pair(n, k), build_poset(n, k));

  auto samples = parallel_samples(static_cast<std::size_t>(opts.samples), opts.threads, [&](std::size_t i) {
    std::mt19937_64 rng(sample_seed(opts.seed, i));
    const int n = pick_degree(rng, std::max(opts.n_max, 3));
    const int k = uniform_int(rng, 1, n - 1);
    std::optional<RootConfiguration> start;
    ConfigVector cv;
    for (int tries = 0; tries < 100 && !start; ++tries) {
      auto rc = random_configuration(rng, n, tries % 2 == 0 && i % 2 == 0);
      cv = classify(rc, k);
      if (dimension(cv).conv_dim >= 1) start = std::move(rc);
    }
    Observations obs;
    if (!start) return obs;
    const auto where = describe(*start, k) + " " + cv.str();
    const auto res = retract(*start, k, MoverPolicy::Targeted, sample_seed(opts.seed, i));
    const auto& poset = posets.at({n, k});

    for (const auto& leg : res.legs) {
      const int dir = leg.start.direction;
      const double lo = std::min(dir * leg.min_class_b_speed, dir * leg.max_class_b_speed);
      const double hi = std::max(dir * leg.min_class_b_speed, dir * leg.max_class_b_speed);
      const double excess = std::max({0.0, -lo, hi - 1.0});
      obs.push_back({"class_b_speeds", excess <= 1e-9, false, excess, where});
      obs.push_back({"sigma0_bound", leg.sigma0 <= 1.0 + 1e-9, false, leg.sigma0, where});
      const int drop = dimension(leg.start.cv).conv_dim - dimension(leg.endpoint_cv).conv_dim;
      obs.push_back({"dimension_descent", drop >= 1, false, drop >= 1 ? 0.0 : 1.0, where});
      obs.push_back({"drift", leg.max_drift < 1e-10, false, leg.max_drift, where});
      const auto rev = reverse_check(leg);
      obs.push_back({"reverse_check", rev.ok(), false, rev.ok() ? 0.0 : 1.0, where + " leg " + leg.start.cv.str()});
      const auto lo_node = poset.find(leg.endpoint_cv);
      const auto hi_node = poset.find(leg.start.cv);
      const bool linked = lo_node && hi_node && poset.reachable(*lo_node, *hi_node);
      obs.push_back({"poset_connection", linked, false, linked ? 0.0 : 1.0, where});
    }

    const auto& fin = res.final();
    try {
      const auto z = zero_dim_point(fin.cv);
      const double d = max_root_distance(z, fin.rc);
      obs.push_back({"zero_dim_match", d <= 1e-6, false, d, where + " -> " + fin.cv.str()});
    } catch (const NumericalError&) {
      obs.push_back({"zero_dim_match", true, true, 0.0, ""});
    }
    if (fin.rc.distinct() == 2) {
      const bool exact = fin.rc.root(0) == 0.0 && fin.rc.root(1) == 1.0;
      obs.push_back({"q2_closed_form", exact, false, exact ? 0.0 : 1.0, where});
    }

    try {
      const auto other = sample_point(cv, rng, 300);
      const auto res2 = retract(other, k, MoverPolicy::Targeted, sample_seed(opts.seed, i) + 1);
      const double d = res2.final().cv == fin.cv ? max_root_distance(res2.final().rc, fin.rc)
                                                 : std::numeric_limits<double>::infinity();
      obs.push_back({"path_independence", d <= 1e-6, false, d, where + " ends " + fin.cv.str() + " vs " + res2.final().cv.str()});
    } catch (const NumericalError&) {
      obs.push_back({"path_independence", true, true, 0.0, ""});
    }
    return obs;
  });
  return aggregate("flows", specs, samples);
}

SuiteReport verify_enumeration(const VerifyOptions& opts) {
  const std::vector<PropertySpec> specs{{"enumeration_valid"}, {"poset_structure"}, {"expansion_grading"},
                                        {"zero_dim_roundtrip"}, {"sampling_completeness"}};
  std::vector<std::pair<int, int>> pairs;
  for (int n = 2; n <= opts.n_max; ++n)
    for (int k = 1; k < n; ++k) pairs.emplace_back(n, k);

  auto samples = parallel_samples(pairs.size(), opts.threads, [&](std::size_t i) {
    const auto [n, k] = pairs[i];
    const std::string where = "n=" + std::to_string(n) + " k=" + std::to_string(k);
    std::mt19937_64 rng(sample_seed(opts.seed, i));
    Observations obs;

    const auto cvs = enumerate_cvs(n, k);
    const std::set<ConfigVector> known(cvs.begin(), cvs.end());
    bool valid = known.size() == cvs.size();
    for (const auto& cv : cvs) valid = valid && validate(cv).ok() && is_admissible(cv) && cv.n == n;
    obs.push_back({"enumeration_valid", valid, false, valid ? 0.0 : 1.0, where});

    const auto poset = build_poset(n, k);
    const auto problems = poset.check();
    obs.push_back({"poset_structure", problems.empty(), false, static_cast<double>(problems.size()),
                   where + (problems.empty() ? "" : ": " + problems.front())});

    for (const auto& cv : cvs) {
      for (const auto& up : expansions(cv)) {
        const bool ok = is_admissible(up) && dimension(up).conv_dim == dimension(cv).conv_dim + 1;
        obs.push_back({"expansion_grading", ok, false, ok ? 0.0 : 1.0, cv.str() + " -> " + up.str()});
      }
      if (dimension(cv).conv_dim != 0) continue;
      try {
        const auto pt = zero_dim_point(cv);
        const bool ok = classify(pt, k) == cv;
        obs.push_back({"zero_dim_roundtrip", ok, false, ok ? 0.0 : 1.0, cv.str()});
      } catch (const NumericalError&) {
        obs.push_back({"zero_dim_roundtrip", true, true, 0.0, ""});
      }
    }

    for (int s = 0; s < opts.samples; ++s) {
      const auto rc = random_configuration(rng, n, s % 2 == 0, 1e-6);
      try {
        const auto cv = classify(rc, k);
        const bool seen = known.contains(cv);
        obs.push_back({"sampling_completeness", seen, false, seen ? 0.0 : 1.0, where + " unseen " + cv.str()});
      } catch (const AmbiguityError&) {
        obs.push_back({"sampling_completeness", true, true, 0.0, ""});
      }
    }
    return obs;
  });
  return aggregate("enumeration", specs, samples);
}

std::vector<std::string> suite_names() { return {"lemmas", "transversality", "flows", "enumeration"}; }

SuiteReport run_suite(const std::string& suite, const VerifyOptions& opts) {
  if (opts.n_max < 2) throw DomainError("n-max must be at least 2");
  if (opts.samples < 0) throw DomainError("samples must be non-negative");
  if (suite == "lemmas") return verify_lemmas(opts);
  if (suite == "transversality") return verify_transversality(opts);
  if (suite == "flows") return verify_flows(opts);
  if (suite == "enumeration") return verify_enumeration(opts);
  throw DomainError("unknown suite '" + suite + "'");
}

}  // namespace hypstrata
