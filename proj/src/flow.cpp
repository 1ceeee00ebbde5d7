#include "hypstrata/flow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <random>
#include <sstream>

#include "hypstrata/strata.hpp"

namespace hypstrata {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDrift = 1e-10;

// Per CV entry: the distinct root it names and the root of P^(k) it names (-1 if none).
struct EntryIndex {
  std::vector<long> root;
  std::vector<long> xi;
};

EntryIndex index_entries(const ConfigVector& cv) {
  EntryIndex idx;
  long root = 0;
  long xi = 0;
  for (const auto& e : cv.entries) {
    switch (e.kind) {
      case EntryKind::ClassA:
        idx.root.push_back(root++);
        idx.xi.push_back(-1);
        xi += std::max(0, e.mult - cv.k);
        break;
      case EntryKind::ClassB:
        idx.root.push_back(root++);
        idx.xi.push_back(xi++);
        break;
      case EntryKind::FreeXi:
        idx.root.push_back(-1);
        idx.xi.push_back(xi++);
        break;
    }
  }
  return idx;
}

std::size_t entry_of_root(const ConfigVector& cv, std::size_t root) {
  std::size_t r = 0;
  for (std::size_t e = 0; e < cv.entries.size(); ++e) {
    if (!cv.entries[e].is_root()) continue;
    if (r == root) return e;
    ++r;
  }
  throw DomainError("root index " + std::to_string(root + 1) + " out of range for " + cv.str());
}

int carried_count(const CvEntry& e, int k) { return e.kind == EntryKind::ClassA ? std::max(0, e.mult - k) : 0; }

struct Merge {
  CvEntry entry;
  bool ok = false;
};

// Entry produced when consecutive entries [first, last] coincide.
Merge merge_entries(const ConfigVector& cv, std::size_t first, std::size_t last) {
  int m = 0;
  int xis = 0;
  for (std::size_t e = first; e <= last; ++e) {
    const auto& entry = cv.entries[e];
    if (entry.is_root()) m += entry.mult;
    if (entry.kind != EntryKind::ClassA) ++xis;
    xis += carried_count(entry, cv.k);
  }
  if (m == 0) return {};
  if (m > cv.k) return {CvEntry::a(m), xis == m - cv.k};
  if (xis == 0) return {CvEntry::a(m), true};
  if (xis == 1 && m < cv.k) return {CvEntry::b(m), true};
  return {};
}

ConfigVector replace_range(const ConfigVector& cv, std::size_t first, std::size_t last, const CvEntry& with) {
  std::vector<CvEntry> entries(cv.entries.begin(), cv.entries.begin() + static_cast<std::ptrdiff_t>(first));
  entries.push_back(with);
  entries.insert(entries.end(), cv.entries.begin() + static_cast<std::ptrdiff_t>(last) + 1, cv.entries.end());
  return ConfigVector::from_entries(std::move(entries), cv.k);
}

struct Motion {
  std::vector<double> pos;
  std::vector<double> vel;
};

Motion entry_motion(const FlowState& state, const SpeedVector& sp) {
  const auto idx = index_entries(state.cv);
  const auto dr = derivative_roots(state.rc, state.cv.k);
  const auto xv = xi_speeds(state, sp);
  Motion m;
  for (std::size_t e = 0; e < state.cv.entries.size(); ++e) {
    if (idx.root[e] >= 0) {
      const auto r = static_cast<std::size_t>(idx.root[e]);
      m.pos.push_back(state.rc.root(r));
      m.vel.push_back(sp.speeds[r]);
    } else {
      const auto j = static_cast<std::size_t>(idx.xi[e]);
      m.pos.push_back(dr.roots[j]);
      m.vel.push_back(xv[j]);
    }
  }
  return m;
}

// Time until consecutive entries e and e+1 meet at current velocities.
std::vector<double> collision_times(const Motion& m) {
  std::vector<double> ttc;
  for (std::size_t e = 0; e + 1 < m.pos.size(); ++e) {
    const double gap = m.pos[e + 1] - m.pos[e];
    const double closing = m.vel[e] - m.vel[e + 1];
    ttc.push_back(closing > 0.0 ? std::max(0.0, gap) / closing : kInf);
  }
  return ttc;
}

RootConfiguration ordered_config(std::vector<double> y, std::vector<int> mults) {
  for (std::size_t i = 1; i < y.size(); ++i)
    if (!(y[i - 1] < y[i])) throw NumericalError("root ordering lost during the flow");
  return RootConfiguration(std::move(y), std::move(mults));
}

}  // namespace

FlowState make_flow_state(const RootConfiguration& rc, int k, std::size_t mover, int direction) {
  if (direction != 1 && direction != -1) throw DomainError("flow direction must be +1 or -1");
  FlowState s{rc, classify(rc, k), mover, {}, 0.0, direction};
  const auto q = rc.distinct();
  if (mover == 0 || mover + 1 >= q)
    throw DomainError("mover must be an interior root (got root " + std::to_string(mover + 1) + " of " +
                      std::to_string(q) + ")");
  if (s.cv.entries[entry_of_root(s.cv, mover)].kind != EntryKind::ClassA)
    throw DomainError("mover root " + std::to_string(mover + 1) + " is not of class A in " + s.cv.str());
  s.bindings = class_b_equalities(s.cv);
  return s;
}

SpeedVector solve_speeds(const FlowState& state) {
  const auto q = state.rc.distinct();
  SpeedVector out;
  out.speeds.assign(q, 0.0);
  out.speeds[state.mover] = state.direction;
  const auto d = static_cast<Eigen::Index>(state.bindings.size());
  if (d == 0) return out;

  const auto s = sensitivity_matrix(state.rc, state.cv.k);
  Eigen::MatrixXd g(d, d);
  Eigen::VectorXd h(d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto& b = state.bindings[static_cast<std::size_t>(r)];
    h(r) = s(b.xi, state.mover) * state.direction;
    for (Eigen::Index c = 0; c < d; ++c) g(r, c) = s(b.xi, state.bindings[static_cast<std::size_t>(c)].root);
  }
  out.margin = kInf;
  for (Eigen::Index r = 0; r < d; ++r) {
    double off = 0.0;
    for (Eigen::Index c = 0; c < d; ++c)
      if (c != r) off += std::fabs(g(r, c));
    out.margin = std::min(out.margin, 1.0 - g(r, r) - off);
  }
  if (!(out.margin > 0.0))
    throw NumericalError("speed system I - G is not diagonally dominant (margin " + std::to_string(out.margin) + ")");

  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d) - g;
  const Eigen::VectorXd v = a.partialPivLu().solve(h);

  Eigen::VectorXd sum = h;
  Eigen::VectorXd term = h;
  int terms = 1;
  for (; terms < 1000000; ++terms) {
    term = g * term;
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-17 * (1.0 + sum.cwiseAbs().maxCoeff())) break;
  }
  out.series_terms = terms;
  out.series_deviation = (sum - v).cwiseAbs().maxCoeff();

  for (Eigen::Index r = 0; r < d; ++r) {
    out.class_b.push_back(v(r));
    out.speeds[state.bindings[static_cast<std::size_t>(r)].root] = v(r);
  }
  return out;
}

std::vector<double> xi_speeds(const FlowState& state, const SpeedVector& speeds) {
  const auto s = sensitivity_matrix(state.rc, state.cv.k);
  Eigen::VectorXd yd(static_cast<Eigen::Index>(speeds.speeds.size()));
  for (std::size_t i = 0; i < speeds.speeds.size(); ++i) yd(static_cast<Eigen::Index>(i)) = speeds.speeds[i];
  const Eigen::VectorXd xd = s.values * yd;
  return {xd.data(), xd.data() + xd.size()};
}

FlowState advance(const FlowState& state, double dsigma) {
  if (dsigma < 0.0) throw DomainError("advance needs a non-negative step");
  if (dsigma == 0.0) return state;

  const std::vector<double> y0(state.rc.roots().begin(), state.rc.roots().end());
  const std::vector<int> mults(state.rc.mults().begin(), state.rc.mults().end());
  const auto q = y0.size();
  auto field = [&](const std::vector<double>& y) {
    FlowState s = state;
    s.rc = ordered_config(y, mults);
    return solve_speeds(s).speeds;
  };
  auto shifted = [&](const std::vector<double>& dy, double t) {
    auto y = y0;
    for (std::size_t i = 0; i < q; ++i) y[i] += t * dy[i];
    return y;
  };

  const auto k1 = field(y0);
  const auto k2 = field(shifted(k1, 0.5 * dsigma));
  const auto k3 = field(shifted(k2, 0.5 * dsigma));
  const auto k4 = field(shifted(k3, dsigma));
  auto y = y0;
  for (std::size_t i = 0; i < q; ++i) y[i] += dsigma / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  y[state.mover] = y0[state.mover] + state.direction * dsigma;
  y.front() = y0.front();
  y.back() = y0.back();

  FlowState next = state;
  next.rc = solve_equalities(ordered_config(std::move(y), mults), state.bindings);
  const double drift = equality_residual(next.rc, next.bindings);
  if (!(drift < kDrift)) throw NumericalError("projection left drift " + std::to_string(drift));
  next.sigma = state.sigma + dsigma;
  return next;
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::XiMeetsARoot: return "xi-meets-A-root";
    case EventKind::MoverMeetsXi: return "mover-meets-xi";
    case EventKind::MoverMeetsARoot: return "mover-meets-A-root";
  }
  return "unknown";
}

std::string Trajectory::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(17);
  if (samples.empty()) return "sigma\n";
  out << "sigma";
  for (std::size_t i = 0; i < samples.front().y.size(); ++i) out << ",y_" << i + 1;
  for (std::size_t j = 0; j < samples.front().xi.size(); ++j) out << ",xi_" << j + 1;
  out << '\n';
  for (const auto& s : samples) {
    out << s.sigma;
    for (double v : s.y) out << ',' << v;
    for (double v : s.xi) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

FlowResult flow_to_boundary(const RootConfiguration& rc, int k, std::size_t mover, const FlowOptions& opts,
                            int direction) {
  FlowState state = make_flow_state(gamma_normalize(rc), k, mover, direction);
  FlowResult result{state, state, 0.0, {}, state.rc, state.cv, {}, {}, kInf, -kInf, 0.0, 0};

  Motion motion;
  std::vector<double> ttc;
  double tmin = kInf;
  SpeedVector sp;
  for (;; ++result.steps) {
    if (result.steps >= static_cast<std::size_t>(opts.max_steps))
      throw NumericalError("flow did not reach a confluence in " + std::to_string(opts.max_steps) + " steps");
    sp = solve_speeds(state);
    for (double v : sp.class_b) {
      result.min_class_b_speed = std::min(result.min_class_b_speed, v);
      result.max_class_b_speed = std::max(result.max_class_b_speed, v);
    }
    motion = entry_motion(state, sp);
    ttc = collision_times(motion);
    tmin = ttc.empty() ? kInf : *std::min_element(ttc.begin(), ttc.end());
    if (opts.record) {
      result.trajectory.samples.push_back({state.sigma,
                                           {state.rc.roots().begin(), state.rc.roots().end()},
                                           derivative_roots(state.rc, k).roots,
                                           sp.class_b});
    }
    if (tmin <= opts.event_tol) break;
    if (state.sigma > 1.0 + 1e-9) throw NumericalError("no confluence before sigma = 1");
    if (tmin > 1e-3) {
      bool same = false;
      try {
        same = classify(state.rc, k) == state.cv;
      } catch (const NumericalError&) {
      }
      if (!same) throw NumericalError("flow left the stratum " + state.cv.str() + " tmin " + std::to_string(tmin) + " at sigma " + std::to_string(state.sigma));
    }

    double h = std::min(opts.max_step, 0.5 * tmin);
    std::optional<FlowState> next;
    for (; h > 1e-16; h *= 0.5) {
      try {
        next = advance(state, h);
        break;
      } catch (const NumericalError&) {
      } catch (const DomainError&) {
      }
    }
    if (!next) {
      if (tmin < 1e-9) break;
      throw NumericalError("flow step failed at sigma " + std::to_string(state.sigma));
    }
    result.max_drift = std::max(result.max_drift, equality_residual(next->rc, next->bindings));
    state = std::move(*next);
  }
  result.last = state;
  result.sigma0 = state.sigma + tmin;
  if (!(result.sigma0 <= 1.0 + 1e-9)) throw NumericalError("confluence after sigma = 1");

  // Group simultaneous collisions into runs of coinciding entries.
  const auto& cv = state.cv;
  const auto idx = index_entries(cv);
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t e = 0; e < ttc.size(); ++e) {
    if (!(ttc[e] <= tmin + opts.simultaneity)) continue;
    if (!groups.empty() && groups.back().second == e)
      groups.back().second = e + 1;
    else
      groups.emplace_back(e, e + 1);
  }
  if (groups.empty()) throw NumericalError("no confluence located");

  std::vector<CvEntry> entries;
  std::vector<double> pos;
  std::vector<int> mults;
  std::vector<std::size_t> root_map(state.rc.distinct());
  std::size_t g = 0;
  for (std::size_t e = 0; e < cv.entries.size();) {
    if (g < groups.size() && groups[g].first == e) {
      const auto [first, last] = groups[g++];
      const auto merged = merge_entries(cv, first, last);
      FlowEvent ev;
      ev.sigma0 = result.sigma0;
      bool has_mover = false;
      std::vector<std::size_t> fixed_a;
      for (std::size_t t = first; t <= last; ++t) {
        if (idx.root[t] >= 0) {
          const auto r = static_cast<std::size_t>(idx.root[t]);
          ev.roots.push_back(r);
          root_map[r] = mults.size();
          if (r == state.mover)
            has_mover = true;
          else if (cv.entries[t].kind == EntryKind::ClassA)
            fixed_a.push_back(t);
        }
        if (idx.xi[t] >= 0) ev.xis.push_back(static_cast<std::size_t>(idx.xi[t]));
      }
      if (!merged.ok || ev.roots.empty() || fixed_a.size() > 1)
        throw NumericalError("unexpected confluence of entries " + std::to_string(first + 1) + ".." +
                             std::to_string(last + 1) + " in " + cv.str());
      if (has_mover)
        ev.kind = fixed_a.empty() ? EventKind::MoverMeetsXi : EventKind::MoverMeetsARoot;
      else if (!fixed_a.empty())
        ev.kind = EventKind::XiMeetsARoot;
      else
        throw NumericalError("confluence without the mover or a fixed root in " + cv.str());
      double at = 0.0;
      if (!fixed_a.empty()) {
        at = motion.pos[fixed_a.front()];
      } else {
        at = state.rc.root(state.mover) + state.direction * tmin;
      }
      entries.push_back(merged.entry);
      pos.push_back(at);
      mults.push_back(merged.entry.mult);
      result.events.push_back(std::move(ev));
      e = last + 1;
      continue;
    }
    if (idx.root[e] >= 0) {
      const auto r = static_cast<std::size_t>(idx.root[e]);
      root_map[r] = mults.size();
      pos.push_back(motion.pos[e] + tmin * motion.vel[e]);
      mults.push_back(cv.entries[e].mult);
    }
    entries.push_back(cv.entries[e]);
    ++e;
  }
  pos.front() = 0.0;
  pos.back() = 1.0;

  auto end_cv = ConfigVector::from_entries(std::move(entries), k);
  if (!is_admissible(end_cv)) throw NumericalError("confluence produced the inadmissible vector " + end_cv.str());
  if (dimension(end_cv).conv_dim != dimension(cv).conv_dim - static_cast<int>(groups.size()))
    throw NumericalError("endpoint " + end_cv.str() + " does not drop one dimension per event");
  auto end_rc = solve_equalities(ordered_config(std::move(pos), std::move(mults)), class_b_equalities(end_cv));
  ConfigVector check;
  try {
    check = classify(end_rc, k);
  } catch (const NumericalError& err) {
    throw NumericalError(std::string("endpoint classification failed: ") + err.what());
  }
  if (!(check == end_cv))
    throw NumericalError("endpoint classifies as " + check.str() + ", expected " + end_cv.str());

  result.endpoint = std::move(end_rc);
  result.endpoint_cv = std::move(end_cv);
  result.root_map = std::move(root_map);
  if (opts.record) {
    TrajectorySample last_row{result.sigma0, {}, derivative_roots(result.endpoint, k).roots, sp.class_b};
    for (auto r : result.root_map) last_row.y.push_back(result.endpoint.root(r));
    auto& samples = result.trajectory.samples;
    if (!samples.empty() && !(samples.back().sigma < result.sigma0)) samples.pop_back();
    samples.push_back(std::move(last_row));
  }
  if (result.min_class_b_speed == kInf) {
    result.min_class_b_speed = 0.0;
    result.max_class_b_speed = 0.0;
  }
  return result;
}

std::string to_string(MoverPolicy policy) {
  switch (policy) {
    case MoverPolicy::Leftmost: return "leftmost";
    case MoverPolicy::Rightmost: return "rightmost";
    case MoverPolicy::Targeted: return "targeted";
    case MoverPolicy::Random: return "random";
  }
  return "unknown";
}

MoverPolicy parse_policy(const std::string& name) {
  for (auto p : {MoverPolicy::Leftmost, MoverPolicy::Rightmost, MoverPolicy::Targeted, MoverPolicy::Random})
    if (to_string(p) == name) return p;
  throw DomainError("unknown mover policy '" + name + "'");
}

std::vector<std::size_t> mover_candidates(const ConfigVector& cv) {
  std::vector<std::size_t> out;
  const auto q = cv.num_roots();
  std::size_t r = 0;
  for (const auto& e : cv.entries) {
    if (!e.is_root()) continue;
    if (e.kind == EntryKind::ClassA && r > 0 && r + 1 < q) out.push_back(r);
    ++r;
  }
  return out;
}

namespace {

ConfigVector mirrored(const ConfigVector& cv) {
  return ConfigVector::from_entries({cv.entries.rbegin(), cv.entries.rend()}, cv.k);
}

using Range = std::pair<std::size_t, std::size_t>;

bool merge_admissible(const ConfigVector& cv, std::size_t first, std::size_t last) {
  const auto m = merge_entries(cv, first, last);
  return m.ok && is_admissible(replace_range(cv, first, last, m.entry));
}

// Single confluences available when `mover` runs right: exactly one of
// `own` involves the mover, each of `others` is a free root of P^(k) or a
// class B root reaching the fixed class A root on its right.
struct Confluences {
  std::vector<Range> own;
  std::vector<Range> others;
};

Confluences forward_confluences(const ConfigVector& cv, std::size_t mover) {
  Confluences out;
  const auto me = entry_of_root(cv, mover);
  const auto last = cv.entries.size() - 1;
  auto next_a = me + 1;
  while (next_a <= last && cv.entries[next_a].kind != EntryKind::ClassA) ++next_a;
  if (next_a != me + 1 && merge_admissible(cv, me, me + 1)) out.own.emplace_back(me, me + 1);
  if (next_a <= last && merge_admissible(cv, me, next_a)) out.own.emplace_back(me, next_a);
  for (std::size_t e = 0; e + 1 < last; ++e) {
    if (e + 1 == me || cv.entries[e].kind == EntryKind::ClassA || cv.entries[e + 1].kind != EntryKind::ClassA) continue;
    if (merge_admissible(cv, e, e + 1)) out.others.emplace_back(e, e + 1);
  }
  return out;
}

std::optional<ConfigVector> apply_ranges(const ConfigVector& cv, std::vector<Range> ranges) {
  std::sort(ranges.begin(), ranges.end());
  for (std::size_t i = 1; i < ranges.size(); ++i)
    if (ranges[i].first <= ranges[i - 1].second) return std::nullopt;
  ConfigVector out = cv;
  for (auto it = ranges.rbegin(); it != ranges.rend(); ++it) {
    const auto m = merge_entries(out, it->first, it->second);
    if (!m.ok) return std::nullopt;
    out = replace_range(out, it->first, it->second, m.entry);
  }
  if (!is_admissible(out)) return std::nullopt;
  if (dimension(out).conv_dim != dimension(cv).conv_dim - static_cast<int>(ranges.size())) return std::nullopt;
  return out;
}

// Vectors a single leg ends on when one confluence happens at a time.
std::vector<ConfigVector> forward_outcomes(const ConfigVector& cv, std::size_t mover) {
  const auto c = forward_confluences(cv, mover);
  std::set<ConfigVector> found;
  for (const auto& r : c.own)
    if (auto out = apply_ranges(cv, {r})) found.insert(std::move(*out));
  for (const auto& r : c.others)
    if (auto out = apply_ranges(cv, {r})) found.insert(std::move(*out));
  return {found.begin(), found.end()};
}

std::vector<MoveChoice> all_moves(const ConfigVector& cv) {
  std::vector<MoveChoice> out;
  for (int dir : {1, -1})
    for (auto c : mover_candidates(cv)) out.push_back({c, dir});
  return out;
}

// Whether some sequence of moves reaches `target` whatever confluences occur.
class Planner {
 public:
  explicit Planner(ConfigVector target) : target_(std::move(target)) {}

  bool forceable(const ConfigVector& cv) {
    if (dimension(cv).conv_dim <= 0) return cv == target_;
    if (auto it = memo_.find(cv); it != memo_.end()) return it->second;
    memo_[cv] = false;
    bool ok = false;
    for (const auto& mv : all_moves(cv)) {
      if (safe(cv, mv)) {
        ok = true;
        break;
      }
    }
    memo_[cv] = ok;
    return ok;
  }

  bool safe(const ConfigVector& cv, const MoveChoice& mv) {
    const auto outs = leg_outcomes(cv, mv.mover, mv.direction);
    if (outs.empty()) return false;
    return std::all_of(outs.begin(), outs.end(), [&](const ConfigVector& o) { return forceable(o); });
  }

 private:
  ConfigVector target_;
  std::map<ConfigVector, bool> memo_;
};

void collect_floor(const ConfigVector& cv, std::set<ConfigVector>& seen, std::set<ConfigVector>& floor) {
  if (!seen.insert(cv).second) return;
  if (dimension(cv).conv_dim <= 0) {
    floor.insert(cv);
    return;
  }
  for (const auto& mv : all_moves(cv))
    for (const auto& o : leg_outcomes(cv, mv.mover, mv.direction)) collect_floor(o, seen, floor);
}

std::set<ConfigVector> floor_of(const ConfigVector& cv) {
  std::set<ConfigVector> seen;
  std::set<ConfigVector> floor;
  collect_floor(cv, seen, floor);
  return floor;
}

// Depth-first over actual flows: a leg is kept only when `target` stays
// reachable from where it ends.
std::optional<std::vector<FlowResult>> search_towards(const RootConfiguration& rc, const ConfigVector& cv,
                                                      const ConfigVector& target, const FlowOptions& opts) {
  if (dimension(cv).conv_dim <= 0) {
    if (cv == target) return std::vector<FlowResult>{};
    return std::nullopt;
  }
  for (const auto& mv : all_moves(cv)) {
    std::optional<FlowResult> attempt;
    try {
      attempt = flow_to_boundary(rc, cv.k, mv.mover, opts, mv.direction);
    } catch (const NumericalError&) {
      continue;
    }
    auto& leg = *attempt;
    if (dimension(leg.endpoint_cv).conv_dim >= dimension(cv).conv_dim) continue;
    if (!floor_of(leg.endpoint_cv).contains(target)) continue;
    if (auto rest = search_towards(leg.endpoint, leg.endpoint_cv, target, opts)) {
      rest->insert(rest->begin(), std::move(leg));
      return rest;
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<ConfigVector> leg_outcomes(const ConfigVector& cv, std::size_t mover, int direction) {
  if (direction > 0) return forward_outcomes(cv, mover);
  std::vector<ConfigVector> out;
  for (const auto& o : forward_outcomes(mirrored(cv), cv.num_roots() - 1 - mover)) out.push_back(mirrored(o));
  std::sort(out.begin(), out.end());
  return out;
}

int possible_events(const ConfigVector& cv, std::size_t mover, int direction) {
  const auto c = direction > 0 ? forward_confluences(cv, mover) : forward_confluences(mirrored(cv), cv.num_roots() - 1 - mover);
  return static_cast<int>(c.own.size() + c.others.size());
}

std::optional<ConfigVector> plan_target(const ConfigVector& cv) {
  if (dimension(cv).conv_dim < 0) return std::nullopt;
  std::set<ConfigVector> seen;
  std::set<ConfigVector> floor;
  collect_floor(cv, seen, floor);
  for (const auto& t : floor) {
    Planner planner(t);
    if (planner.forceable(cv)) return t;
  }
  return std::nullopt;
}

MoveChoice choose_move(const ConfigVector& cv, MoverPolicy policy, std::uint64_t seed,
                       const std::optional<ConfigVector>& target) {
  const auto cands = mover_candidates(cv);
  if (cands.empty()) throw DomainError(cv.str() + " has no interior class A root to move");
  switch (policy) {
    case MoverPolicy::Leftmost: return {cands.front(), 1};
    case MoverPolicy::Rightmost: return {cands.back(), 1};
    case MoverPolicy::Random: {
      std::mt19937_64 rng(seed);
      return {cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)], 1};
    }
    case MoverPolicy::Targeted: break;
  }
  const auto moves = all_moves(cv);
  if (target) {
    Planner planner(*target);
    for (const auto& mv : moves)
      if (planner.safe(cv, mv)) return mv;
  }
  MoveChoice best = moves.front();
  int fewest = std::numeric_limits<int>::max();
  for (const auto& mv : moves) {
    const int n = possible_events(cv, mv.mover, mv.direction);
    if (n < fewest) {
      fewest = n;
      best = mv;
    }
  }
  return best;
}

RetractResult retract(const RootConfiguration& rc, int k, MoverPolicy policy, std::uint64_t seed, const FlowOptions& opts) {
  if (rc.distinct() < 2) throw DomainError("a single distinct root has no gamma-normalized retraction");
  RetractResult out;
  auto cur = gamma_normalize(rc);
  auto cv = classify(cur, k);
  int dim = dimension(cv).conv_dim;
  out.chain.push_back({cv, cur});
  if (policy == MoverPolicy::Targeted && dim > 0) {
    out.target = plan_target(cv);
    if (!out.target) {
      for (const auto& t : floor_of(cv)) {
        if (auto legs = search_towards(cur, cv, t, opts)) {
          out.target = t;
          for (auto& leg : *legs) {
            out.chain.push_back({leg.endpoint_cv, leg.endpoint});
            out.legs.push_back(std::move(leg));
          }
          return out;
        }
      }
    }
  }
  std::mt19937_64 rng(seed);
  while (dim > 0) {
    const auto move = choose_move(cv, policy, rng(), out.target);
    auto leg = flow_to_boundary(cur, k, move.mover, opts, move.direction);
    const int next_dim = dimension(leg.endpoint_cv).conv_dim;
    if (next_dim >= dim) throw NumericalError("flow from " + cv.str() + " did not lower the dimension");
    cur = leg.endpoint;
    cv = leg.endpoint_cv;
    dim = next_dim;
    out.chain.push_back({cv, cur});
    out.legs.push_back(std::move(leg));
  }
  return out;
}

ReverseReport reverse_check(const FlowResult& result, double step) {
  ReverseReport rep;
  rep.step = step;

  // Rates are reported in the orientation of a forward flow.
  const int forward = result.last.direction;
  FlowState back = result.last;
  back.direction = -forward;
  const auto sp = solve_speeds(back);
  for (double v : sp.class_b) {
    rep.reversed_speeds.push_back(forward * v);
    if (forward * v < -1.0 - 1e-9 || forward * v > 1e-9) rep.speeds_in_range = false;
  }

  const auto xv = xi_speeds(back, sp);
  for (const auto& ev : result.events) {
    for (auto j : ev.xis) {
      const double rate = forward * xv[j];
      rep.confluence_xi_rates.push_back(rate);
      if (!(rate > -1.0 && rate < 0.0)) rep.xi_rates_in_range = false;
    }
  }

  // Split the endpoint back along the reversed speeds, then restore the bindings.
  const auto& start = result.start;
  std::vector<double> y;
  for (std::size_t i = 0; i < start.rc.distinct(); ++i) y.push_back(result.endpoint.root(result.root_map[i]) + step * sp.speeds[i]);
  try {
    auto rc = solve_equalities(ordered_config(std::move(y), {start.rc.mults().begin(), start.rc.mults().end()}),
                               start.bindings);
    rep.reentered_cv = classify(rc, start.cv.k);
    rep.reentered = *rep.reentered_cv == start.cv;
  } catch (const NumericalError&) {
    rep.reentered = false;
  }
  return rep;
}

}  // namespace hypstrata
