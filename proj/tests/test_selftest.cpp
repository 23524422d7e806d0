#include <doctest.h>

#include <algorithm>

#include "symberg/errors.hpp"
#include "symberg/selftest.hpp"

using namespace symberg;

TEST_CASE("self-test passes on every module") {
  const std::vector<SelftestResult> results = run_selftest(SelftestOptions{});
  REQUIRE(!results.empty());
  for (const SelftestResult& r : results) {
    INFO(r.module << ": " << r.name << " value " << r.value << " limit " << r.limit << " " << r.error);
    CHECK(r.passed);
    CHECK(r.seconds >= 0.0);
  }
  for (const std::string& m : selftest_modules()) {
    const bool present =
        std::any_of(results.begin(), results.end(), [&](const SelftestResult& r) { return r.module == m; });
    CHECK(present);
  }
}

TEST_CASE("self-test filter restricts to one module") {
  SelftestOptions o;
  o.filter = "sympow";
  const std::vector<SelftestResult> results = run_selftest(o);
  REQUIRE(results.size() == 3);
  for (const SelftestResult& r : results) CHECK(r.module == "sympow");
  o.filter = "nope";
  CHECK_THROWS_AS(run_selftest(o), ConfigError);
}

TEST_CASE("self-test filtering does not change a check's value") {
  const std::vector<SelftestResult> all = run_selftest(SelftestOptions{});
  SelftestOptions o;
  o.filter = "diastatic";
  const std::vector<SelftestResult> some = run_selftest(o);
  for (const SelftestResult& r : some) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const SelftestResult& a) { return a.name == r.name; });
    REQUIRE(it != all.end());
    CHECK(it->value == r.value);
  }
}

TEST_CASE("flipping the curvature sign breaks the curvature link") {
  SelftestOptions o;
  o.filter = "diastatic";
  o.debug.flip_lambdaF_sign = true;
  const std::vector<SelftestResult> results = run_selftest(o);
  bool link_failed = false;
  for (const SelftestResult& r : results)
    if (r.name == "curvature link") link_failed = !r.passed;
  CHECK(link_failed);
}
