#include "doctest.h"

#include <sstream>

#include "certloop/verifier.hpp"

using namespace certloop;

namespace {

/// Small synthetic space: cost = index, configuration 2 is infeasible,
/// configuration 4 fails with a solver error, and every evaluation can be
/// slowed down for deadline experiments.
class ToySpace : public ConfigurationSpace {
 public:
  explicit ToySpace(std::size_t n) : n_(n) {
    for (std::size_t i = 0; i < n; ++i) {
      Configuration c;
      c.fields.emplace_back("id", std::to_string(i));
      configs_.push_back(std::move(c));
    }
  }

  std::size_t size() const override { return n_; }
  const Configuration& configuration(std::size_t i) const override { return configs_[i]; }
  std::vector<std::string> value_columns() const override { return {"v", "cost"}; }

  std::vector<VerificationResult> evaluate(std::size_t i, const Deadline&) const override {
    if (i == 4) throw Error("synthetic solver failure");
    VerificationResult v;
    v.property_id = "v";
    v.value = static_cast<double>(i);
    v.satisfied = i != 2;
    v.model_digest = "toy";
    VerificationResult cost;
    cost.property_id = "cost";
    cost.value = static_cast<double>(i);
    cost.model_digest = "toy";
    return {v, cost};
  }

 private:
  std::size_t n_;
  std::vector<Configuration> configs_;
};

}  // namespace

TEST_CASE("unlimited deadline returns every configuration in order") {
  ToySpace space(6);
  BatchOutcome outcome = verify_config_space(space);
  CHECK(!outcome.deadline_exceeded);
  REQUIRE(outcome.completed.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(outcome.completed[i].index == i);
    if (i == 4) {
      CHECK(outcome.completed[i].error.has_value());
      CHECK(!outcome.completed[i].feasible());
      continue;
    }
    // identical to an individual evaluate call
    auto direct = space.evaluate(i, Deadline::unlimited());
    REQUIRE(outcome.completed[i].results.size() == direct.size());
    for (std::size_t k = 0; k < direct.size(); ++k)
      CHECK(outcome.completed[i].results[k].value == direct[k].value);
  }
  CHECK(!outcome.completed[2].feasible());
  CHECK(outcome.completed[3].feasible());
}

TEST_CASE("zero deadline yields DeadlineExceeded with an empty prefix") {
  ToySpace space(6);
  BatchOptions options;
  options.deadline = Deadline::after(0.0);
  BatchOutcome outcome = verify_config_space(space, options);
  CHECK(outcome.deadline_exceeded);
  CHECK(outcome.completed.empty());
}

TEST_CASE("injected latency is cancelled cooperatively at the deadline") {
  ToySpace space(10);
  BatchOptions options;
  options.deadline = Deadline::after(0.12);
  options.injected_latency = LatencyInjection{3, 5.0};
  auto start = std::chrono::steady_clock::now();
  BatchOutcome outcome = verify_config_space(space, options);
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(outcome.deadline_exceeded);
  CHECK(outcome.completed.size() == 3);  // configurations before the injection point
  CHECK(elapsed < 0.12 + 0.05);          // cancellation within the 50 ms allowance
}

TEST_CASE("csv export carries configuration fields, values, and feasibility") {
  ToySpace space(3);
  BatchOutcome outcome = verify_config_space(space);
  std::ostringstream csv;
  write_batch_csv(csv, space, outcome);
  CHECK(csv.str() ==
        "id,v,cost,feasible\n"
        "0,0,0,true\n"
        "1,1,1,true\n"
        "2,2,2,false\n");
}

TEST_CASE("solver errors surface as NA rows in the export") {
  ToySpace space(5);
  BatchOutcome outcome = verify_config_space(space);
  std::ostringstream csv;
  write_batch_csv(csv, space, outcome);
  CHECK(csv.str().find("4,NA,NA,false") != std::string::npos);
}

TEST_CASE("logical deadlines never fire once granted a positive budget") {
  ToySpace space(4);
  BatchOptions options;
  options.deadline = Deadline::logical(2.0);
  BatchOutcome outcome = verify_config_space(space, options);
  CHECK(!outcome.deadline_exceeded);
  CHECK(outcome.completed.size() == 4);

  options.deadline = Deadline::logical(0.0);
  BatchOutcome zero = verify_config_space(space, options);
  CHECK(zero.deadline_exceeded);
  CHECK(zero.completed.empty());
}
