#include "doctest.h"

#include <string>

#include "ateband/dataset.hpp"
#include "ateband/errors.hpp"
#include "helpers.hpp"

using namespace ateband;

namespace {

const char* kCsv =
    "id,time,status,treatment,z1\n"
    "# a comment\n"
    "a,1.0,1,0,0.5\n"
    "b,2.0,1,1,-0.25\n"
    "c,3.0,0,0,0.0\n";

}  // namespace

TEST_CASE("parse: minimal well-formed input") {
  const Dataset ds = parse_dataset(kCsv, 1);
  CHECK(ds.n() == 3);
  CHECK(ds.n_causes() == 1);
  CHECK(ds.n_covariates() == 1);
  CHECK(ds.subject(0).id == "a");
  CHECK(ds.time(1) == 2.0);
  CHECK(ds.status(2) == 0);
  CHECK(ds.tau() == 3.0);
  CHECK(ds.design()(1, 0) == 1.0);    // treatment column first
  CHECK(ds.design()(0, 1) == 0.5);
}

TEST_CASE("parse: malformed row reports the line") {
  const std::string bad =
      "id,time,status,treatment,z1\n"
      "a,1.0,1,0,0.5\n"
      "b,oops,1,1,0.1\n";
  try {
    parse_dataset(bad, 1);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("parse: header must match the schema") {
  CHECK_THROWS_AS(parse_dataset("id,time,status\na,1,1\n", 1), ParseError);
}

TEST_CASE("parse: status outside range rejected") {
  const std::string bad =
      "id,time,status,treatment,z1\n"
      "a,1.0,3,0,0.5\n"
      "b,2.0,1,1,0.1\n";
  CHECK_THROWS_AS(parse_dataset(bad, 2), ValidationError);
}

TEST_CASE("parse: treatment must be binary") {
  const std::string bad =
      "id,time,status,treatment,z1\n"
      "a,1.0,1,2,0.5\n";
  CHECK_THROWS_AS(parse_dataset(bad, 1), ParseError);
}

TEST_CASE("ties rejected by default, jitter preserves ranks") {
  std::vector<Subject> subjects = {
      testutil::row("a", 1.0, 1, 0), testutil::row("b", 2.0, 1, 1),
      testutil::row("c", 2.0, 0, 0), testutil::row("d", 3.0, 1, 1)};
  CHECK_THROWS_AS(Dataset(subjects, 1), ValidationError);

  DatasetOptions opts;
  opts.jitter_ties = true;
  opts.jitter_seed = 9;
  const Dataset ds(subjects, 1, opts);
  // All times distinct afterwards, ordering of distinct times unchanged.
  for (int i = 0; i < ds.n(); ++i)
    for (int j = i + 1; j < ds.n(); ++j) CHECK(ds.time(i) != ds.time(j));
  CHECK(ds.time(0) < ds.time(1));
  CHECK(ds.time(2) < ds.time(3));
  CHECK(std::abs(ds.time(1) - 2.0) < 1e-6);
  CHECK(validate(ds).jitter_applied);
}

TEST_CASE("risk_set_size on the hand dataset") {
  const Dataset ds = testutil::d3();
  CHECK(risk_set_size(ds, 0.0) == 3);
  CHECK(risk_set_size(ds, 2.0) == 2);
  CHECK(risk_set_size(ds, 3.5) == 0);
}

TEST_CASE("validate: hand counts") {
  const auto report = validate(testutil::d3());
  REQUIRE(report.events_per_cause.size() == 1);
  CHECK(report.events_per_cause[0] == 2);
  CHECK(report.min_at_risk == 1);
  CHECK(report.n_censored == 1);
  CHECK(report.unfittable_causes.empty());
  CHECK(report.covariate_bound_ok);
}

TEST_CASE("validate: flags unfittable cause") {
  const Dataset ds({testutil::row("a", 1.0, 1, 0), testutil::row("b", 2.0, 0, 1)}, 2);
  const auto report = validate(ds);
  REQUIRE(report.unfittable_causes.size() == 1);
  CHECK(report.unfittable_causes[0] == 2);
}

TEST_CASE("validate: covariate bound violation is report-only") {
  DatasetOptions opts;
  opts.covariate_cap = 1e3;
  const Dataset ds({testutil::row("a", 1.0, 1, 0, {1e9}),
                    testutil::row("b", 2.0, 1, 1, {0.0})},
                   1, opts);
  CHECK_FALSE(validate(ds).covariate_bound_ok);
}

TEST_CASE("tau truncation drops late events") {
  DatasetOptions opts;
  opts.tau = 1.5;
  const Dataset ds({testutil::row("a", 1.0, 1, 0), testutil::row("b", 2.0, 1, 1),
                    testutil::row("c", 3.0, 0, 0)},
                   1, opts);
  CHECK(ds.tau() == 1.5);
  CHECK(ds.event_count(1) == 1);
}

TEST_CASE("counting identity: events plus censored equals n") {
  const Dataset ds = testutil::simulated(200, 4);
  const auto report = validate(ds);
  int events = 0;
  for (int c : report.events_per_cause) events += c;
  CHECK(events + report.n_censored == ds.n());
}

TEST_CASE("generated data have no ties") {
  const auto report = validate(testutil::simulated(500, 11));
  CHECK_FALSE(report.had_ties);
}
