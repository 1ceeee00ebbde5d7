#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hypstrata/configvec.hpp"
#include "hypstrata/sensitivity.hpp"

namespace hypstrata {

/// A point of a gamma-normalized stratum together with the root that drives
/// the retraction flow. Class B roots follow the roots of P^(k) they are bound to.
struct FlowState {
  RootConfiguration rc;
  ConfigVector cv;
  std::size_t mover = 0;
  std::vector<Equality> bindings;
  double sigma = 0.0;
  /// +1 moves the mover right, -1 runs the field backwards.
  int direction = 1;
};

/// Builds the state for `rc` (expected gamma-normalized) and an interior class A mover.
FlowState make_flow_state(const RootConfiguration& rc, int k, std::size_t mover, int direction = 1);

struct SpeedVector {
  /// dy_i/dsigma for every distinct root.
  std::vector<double> speeds;
  /// Speeds of the class B roots, in binding order.
  std::vector<double> class_b;
  /// Row dominance margin of I - G.
  double margin = 1.0;
  /// Largest difference between the direct solve and the series H + GH + G^2H + ...
  double series_deviation = 0.0;
  int series_terms = 0;
};

/// Solves (I - G) V = H for the class B speeds, where G is the class B block of
/// the sensitivity matrix and H the mover column times the direction.
SpeedVector solve_speeds(const FlowState& state);

/// Velocities of every root of P^(k) (with multiplicity) under the given speeds.
std::vector<double> xi_speeds(const FlowState& state, const SpeedVector& speeds);

/// One classical fourth-order step of length `dsigma` followed by projection
/// of the class B roots back onto their bindings.
FlowState advance(const FlowState& state, double dsigma);

enum class EventKind { XiMeetsARoot, MoverMeetsXi, MoverMeetsARoot };

std::string to_string(EventKind kind);

struct FlowEvent {
  EventKind kind = EventKind::MoverMeetsXi;
  /// Distinct roots of the start configuration taking part (zero-based).
  std::vector<std::size_t> roots;
  /// Roots of P^(k) taking part, as indices into the start DerivedRoots.
  std::vector<std::size_t> xis;
  double sigma0 = 0.0;
};

struct TrajectorySample {
  double sigma = 0.0;
  std::vector<double> y;
  std::vector<double> xi;
  std::vector<double> class_b_speeds;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;

  /// Header `sigma,y_1,...,y_q,xi_1,...,xi_{n-k}`, one row per sample.
  std::string to_csv() const;
};

struct FlowOptions {
  double max_step = 1e-2;
  /// A remaining time-to-collision at or below this ends the integration.
  double event_tol = 1e-12;
  /// Collisions predicted within this of the first one are simultaneous.
  double simultaneity = 1e-10;
  int max_steps = 100000;
  bool record = true;
};

struct FlowResult {
  FlowState start;
  /// Last integrated state before the confluence.
  FlowState last;
  double sigma0 = 0.0;
  std::vector<FlowEvent> events;
  RootConfiguration endpoint;
  ConfigVector endpoint_cv;
  /// Start root index -> endpoint root index.
  std::vector<std::size_t> root_map;
  Trajectory trajectory;
  double min_class_b_speed = 0.0;
  double max_class_b_speed = 0.0;
  /// Largest |y_b - xi| seen after any projection.
  double max_drift = 0.0;
  std::size_t steps = 0;
};

/// Integrates the retraction flow from `rc` (gamma-normalized first) until the
/// first confluence, and returns the boundary point with its configuration vector.
/// With direction -1 the mover runs left and every class B speed lies in [-1, 0].
FlowResult flow_to_boundary(const RootConfiguration& rc, int k, std::size_t mover, const FlowOptions& opts = {},
                            int direction = 1);

/// Leftmost and Rightmost drive the named root forward; Random picks any
/// interior class A root. Targeted may also run the field backwards and steers
/// every leg towards the dimension-0 vector chosen by plan_target.
enum class MoverPolicy { Leftmost, Rightmost, Targeted, Random };

std::string to_string(MoverPolicy policy);
MoverPolicy parse_policy(const std::string& name);

/// Interior class A roots of `cv` (zero-based distinct root indices).
std::vector<std::size_t> mover_candidates(const ConfigVector& cv);

/// Number of confluences the arrangement allows when `mover` is driven in
/// `direction`: the mover's own collision plus every free root of P^(k) or
/// class B root that can reach a fixed class A root ahead of it.
int possible_events(const ConfigVector& cv, std::size_t mover, int direction = 1);

struct MoveChoice {
  std::size_t mover = 0;
  int direction = 1;
};

/// Vectors one leg can end on, one confluence at a time (coincident
/// confluences need a non-generic start).
std::vector<ConfigVector> leg_outcomes(const ConfigVector& cv, std::size_t mover, int direction = 1);

/// A dimension-0 vector that Targeted can reach from `cv` whatever confluences
/// occur on the way; the first in vector order when several qualify.
std::optional<ConfigVector> plan_target(const ConfigVector& cv);

/// `target`, when set, makes Targeted pick a move whose every outcome can
/// still be steered to it.
MoveChoice choose_move(const ConfigVector& cv, MoverPolicy policy, std::uint64_t seed = 0,
                       const std::optional<ConfigVector>& target = std::nullopt);

struct ChainLink {
  ConfigVector cv;
  RootConfiguration rc;
};

struct RetractResult {
  std::vector<ChainLink> chain;
  std::vector<FlowResult> legs;
  /// Dimension-0 vector the Targeted policy aimed at.
  std::optional<ConfigVector> target;

  const ChainLink& final() const { return chain.back(); }
};

/// Applies flow_to_boundary until a dimension-0 stratum is reached.
RetractResult retract(const RootConfiguration& rc, int k, MoverPolicy policy = MoverPolicy::Targeted,
                      std::uint64_t seed = 0, const FlowOptions& opts = {});

struct ReverseReport {
  /// Configuration vector found after stepping back from the endpoint.
  std::optional<ConfigVector> reentered_cv;
  bool reentered = false;
  double step = 0.0;
  /// Class B speeds with the field reversed (in [-1, 0] for a forward flow).
  std::vector<double> reversed_speeds;
  bool speeds_in_range = true;
  /// Backward rate of each root of P^(k) taking part in the confluence.
  std::vector<double> confluence_xi_rates;
  bool xi_rates_in_range = true;

  bool ok() const { return reentered && speeds_in_range && xi_rates_in_range; }
};

/// Runs the field backwards out of the endpoint of `result` and checks that the
/// point re-enters the open stratum it came from.
ReverseReport reverse_check(const FlowResult& result, double step = 1e-4);

}  // namespace hypstrata
