#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypstrata/configvec.hpp"
#include "hypstrata/flow.hpp"
#include "hypstrata/verify.hpp"

namespace hypstrata::cli {

using json = nlohmann::ordered_json;

enum class Format { Json, Text };

Format parse_format(const std::string& name);

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitVerification = 2;

struct CommandResult {
  int exit_code = kExitOk;
  json payload = json::object();
  std::vector<std::string> diagnostics;
  /// Human-readable rendering of the payload.
  std::string text;

  std::string status() const { return exit_code == kExitOk ? "ok" : "error"; }
  std::string render(Format format) const;
};

json cv_to_json(const ConfigVector& cv);
ConfigVector cv_from_json(const json& j);
json dimension_to_json(const DimensionReport& d);

std::vector<double> parse_doubles(const std::string& list);
std::vector<int> parse_ints(const std::string& list);

/// Roots and multiplicities from comma-separated lists; empty `mults` means all ones.
RootConfiguration parse_configuration(const std::string& roots, const std::string& mults);

CommandResult cmd_enumerate(int n, int k, std::optional<int> dim_filter);

CommandResult cmd_classify(const RootConfiguration& rc, int k, double tol);

/// `mover` is 1-based among the distinct roots. Writes `flow.csv` under
/// `traj_dir` when set.
CommandResult cmd_flow(const RootConfiguration& rc, int k, int mover, int direction, const std::string& traj_dir);

/// Writes `leg_<i>.csv` (1-based) under `traj_dir` when set.
CommandResult cmd_retract(const RootConfiguration& rc, int k, MoverPolicy policy, std::uint64_t seed,
                          const std::string& traj_dir);

/// Writes the DOT graph to `out` when set; otherwise it is part of the payload.
CommandResult cmd_poset(int n, int k, const std::string& out);

CommandResult cmd_verify(const std::string& suite, const VerifyOptions& opts);

/// Runs `body`, mapping DomainError and NumericalError to an error result.
template <class Fn>
CommandResult guarded(Fn body) {
  try {
    return body();
  } catch (const DomainError& err) {
    CommandResult r;
    r.exit_code = kExitDomain;
    r.diagnostics.push_back(err.what());
    r.text = std::string("error: ") + err.what() + "\n";
    return r;
  } catch (const NumericalError& err) {
    CommandResult r;
    r.exit_code = kExitDomain;
    r.diagnostics.push_back(std::string("numerical failure: ") + err.what());
    r.text = std::string("numerical failure: ") + err.what() + "\n";
    return r;
  }
}

}  // namespace hypstrata::cli
