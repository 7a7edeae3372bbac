#ifndef CERTLOOP_COMMANDS_HPP
#define CERTLOOP_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "certloop/archive.hpp"

namespace certloop {

/// Everything one invocation needs.  Exit codes across commands: 0 success,
/// 1 property/verification/audit failure, 2 usage or configuration error.
struct RunManifest {
  std::string application;  // uuv | fx
  std::string registry_path;
  std::string scenario_path;
  std::string automata_path;
  std::string out_dir;
  std::optional<double> w1, w2;
  std::optional<double> deadline_seconds;
  bool wall_clock = false;
  std::uint64_t seed = 0;
};

/// Composes the application's MAPE network with its stubs, checks the
/// generic property suite plus the file's application properties, and writes
/// the report.  Exit 0 iff every property holds.
int cmd_verify_controller(const RunManifest& manifest, std::ostream& log);

/// Runs the full pipeline: design-time verification (partial argument),
/// deployment, scenario replay through the MAPE loop, and archiving of
/// decisions, evidence, and argument versions.
int cmd_run_scenario(const RunManifest& manifest, std::ostream& log);

/// Audits an archive directory and prints the decision table plus timing
/// summary.  Exit 1 when referential completeness fails.
int cmd_report(const std::string& archive_dir, std::ostream& log);

}  // namespace certloop

#endif
