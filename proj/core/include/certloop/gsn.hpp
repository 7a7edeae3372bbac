#ifndef CERTLOOP_GSN_HPP
#define CERTLOOP_GSN_HPP

#include <optional>
#include <string>
#include <vector>

#include "certloop/configuration.hpp"
#include "certloop/ctl.hpp"

namespace certloop {

enum class GsnKind { Goal, Strategy, Solution, Context, Assumption, Justification, AwayGoal };

std::string gsn_kind_name(GsnKind kind);
GsnKind gsn_kind_from(const std::string& name);

/// Argument node.  `{placeholder}` spans in the text mark content that a
/// later stage must bind; any node with an unresolved placeholder carries the
/// uninstantiated flag.
struct GsnNode {
  std::string id;
  GsnKind kind = GsnKind::Goal;
  std::string text;
  bool uninstantiated = false;
  bool undeveloped = false;
  std::optional<std::string> evidence_ref;  // Solutions only

  bool has_placeholder() const;
};

enum class GsnEdgeKind { SupportedBy, InContextOf };

struct GsnEdge {
  std::string parent;
  std::string child;
  GsnEdgeKind kind = GsnEdgeKind::SupportedBy;
  std::string annotation;  // multiplicity / optionality marker
};

enum class GsnStage { Pattern, Partial, Full };

std::string gsn_stage_name(GsnStage stage);

/// Immutable-by-convention argument value; instantiation returns new
/// versions and never mutates prior ones.
struct GsnArgument {
  std::vector<GsnNode> nodes;  // insertion order is render order
  std::vector<GsnEdge> edges;
  GsnStage stage = GsnStage::Pattern;
  int version = 0;
  double timestamp = 0.0;  // logical seconds

  const GsnNode* find(const std::string& id) const;
  GsnNode* find(const std::string& id);
  std::vector<const GsnEdge*> edges_from(const std::string& parent) const;
};

// ---------------------------------------------------------------------------

/// One requirement of the application from the argument's point of view.
struct RequirementDescriptor {
  std::string id;            // "R1"
  std::string text;          // human-readable formulation
  bool design_time = false;  // verified by controller model checking
  std::string value_column;  // batch column carrying its verified value
};

/// The built-in argument pattern: a root claim over the active configuration
/// supported by per-requirement verification branches, a reconfiguration
/// claim backed by controller model-checking evidence, and an
/// erroneous-behaviour module with externally assured away goals.
GsnArgument load_argument_pattern();

/// Digest bound to the reusable platform evidence solution.
std::string platform_evidence_digest();

/// Expands the per-requirement branch for each requirement and binds the
/// design-time evidence (controller verification report).  Runtime
/// requirement solutions stay uninstantiated.  Throws MissingDesignEvidence
/// when the report lacks a generic property or a design-time requirement.
GsnArgument instantiate_partial(const GsnArgument& pattern,
                                const std::vector<RequirementDescriptor>& requirements,
                                const SuiteReport& design_evidence,
                                const std::string& design_evidence_digest);

struct EvidenceBinding {
  std::string requirement_id;
  std::string digest;
};

/// Binds the configuration context and every runtime requirement solution.
/// Throws EvidenceMismatch when a runtime requirement has no binding.
GsnArgument instantiate_full(const GsnArgument& partial, const Configuration& config,
                             const std::vector<EvidenceBinding>& evidence, int version,
                             double timestamp);

/// Per-stage structural validation; empty report means valid.
std::vector<std::string> validate(const GsnArgument& argument);

/// format: "dot" or "text-outline"; output is deterministic.
std::string render(const GsnArgument& argument, const std::string& format);

/// Inverse of render(..., "text-outline").
GsnArgument parse_outline(const std::string& text);

}  // namespace certloop

#endif
