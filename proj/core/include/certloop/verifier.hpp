#ifndef CERTLOOP_VERIFIER_HPP
#define CERTLOOP_VERIFIER_HPP

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "certloop/configuration.hpp"
#include "certloop/deadline.hpp"
#include "certloop/errors.hpp"
#include "certloop/markov.hpp"

namespace certloop {

/// Raised internally when a cooperative deadline check fires inside a solver;
/// verify_config_space converts it into a DeadlineExceeded batch outcome.
class DeadlineExpired : public Error {
 public:
  DeadlineExpired() : Error("verification deadline expired") {}
};

struct VerificationResult {
  std::string property_id;
  double value = 0.0;
  std::optional<bool> satisfied;  // empty for =? queries
  double wall_seconds = 0.0;
  std::string model_digest;
};

// ---------------------------------------------------------------------------
// Solvers

/// Probability of eventually reaching a target-labelled state from the
/// initial state.  Linear system over states that can reach the target;
/// direct elimination up to 2000 unknowns, Gauss-Seidel beyond (eps 1e-9,
/// iteration cap 1e5, NonConvergence on failure).
double dtmc_reach_probability(const MarkovModel& model, const std::string& target_label,
                              const Deadline& deadline = Deadline::unlimited());

/// Expected reward accumulated until first hitting the target label.  The
/// target must be reached with probability 1 (within 1e-9); otherwise the
/// expectation diverges and DivergentReward is thrown.
double dtmc_expected_reward(const MarkovModel& model, const std::string& reward,
                            const std::string& target_label,
                            const Deadline& deadline = Deadline::unlimited());

/// Expected reward accumulated over [0, horizon]: state rewards integrate
/// over sojourn times, transition rewards count per jump.  Uniformisation
/// with rate 1.02 x max exit rate, truncated once the Poisson mass reaches
/// 1 - 1e-6; HorizonOverflow past 1e6 terms.
double ctmc_cumulative_reward(const MarkovModel& model, const std::string& reward,
                              double horizon,
                              const Deadline& deadline = Deadline::unlimited());

/// Fast path for independent parallel composition: the sum of per-component
/// cumulative rewards.
double ctmc_cumulative_reward(const IndependentSum& sum, double horizon,
                              const Deadline& deadline = Deadline::unlimited());

/// Dispatches on the property type, checks model-kind compatibility and fills
/// in the satisfaction verdict (bounds are inclusive).
VerificationResult evaluate(const MarkovModel& model, const Property& property,
                            const Deadline& deadline = Deadline::unlimited());

// ---------------------------------------------------------------------------
// Deadline-aware batch verification over a configuration space

/// One configuration space to verify: bound models plus requirement
/// properties per configuration.  Implemented by the case-study modules;
/// `evaluate` must return one result per value column, in column order.
class ConfigurationSpace {
 public:
  virtual ~ConfigurationSpace() = default;
  virtual std::size_t size() const = 0;
  virtual const Configuration& configuration(std::size_t i) const = 0;
  virtual std::vector<std::string> value_columns() const = 0;
  virtual std::vector<VerificationResult> evaluate(std::size_t i,
                                                   const Deadline& deadline) const = 0;
};

struct ConfigResult {
  std::size_t index = 0;
  std::vector<VerificationResult> results;
  std::optional<std::string> error;  // per-entry solver failure

  bool feasible() const;
  double value_of(const std::string& property_id) const;  // throws when absent
};

struct BatchOutcome {
  std::vector<ConfigResult> completed;  // prefix of the enumeration order
  bool deadline_exceeded = false;
  double elapsed_seconds = 0.0;

  const ConfigResult* find(std::size_t index) const;
};

struct LatencyInjection {
  std::size_t config_index = 0;
  double seconds = 0.0;
};

struct BatchOptions {
  Deadline deadline = Deadline::unlimited();
  std::optional<LatencyInjection> injected_latency;  // experiment hook
};

/// Evaluates every configuration in enumeration order.  The deadline is
/// checked between configurations (and inside solvers between term blocks);
/// expiry yields the completed prefix with deadline_exceeded set.  Solver
/// errors are recorded per entry without aborting the batch.
BatchOutcome verify_config_space(const ConfigurationSpace& space,
                                 const BatchOptions& options = {});

/// One row per completed configuration: configuration fields, one numeric
/// column per property, a final boolean `feasible` column.  Wall times stay
/// out of this file so archives are reproducible.
void write_batch_csv(std::ostream& out, const ConfigurationSpace& space,
                     const BatchOutcome& outcome);

}  // namespace certloop

#endif
