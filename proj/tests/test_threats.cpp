#include "lwm2m/threat_checks.hpp"

#include "doctest.h"

using namespace lwm2m;

namespace {

bool pass_of(const std::vector<ThreatResult>& results, const std::string& id) {
    for (const auto& r : results)
        if (r.id == id) return r.pass;
    FAIL("missing threat id ", id);
    return false;
}

}  // namespace

TEST_CASE("default build passes all four threat checks") {
    auto results = run_threat_checks({});
    REQUIRE(results.size() == 4);
    for (const auto& r : results) CHECK_MESSAGE(r.pass, r.id, " ", r.description);
}

TEST_CASE("disabling the cookie fails exactly the amplification check") {
    ThreatOptions options;
    options.cookie_required = false;
    auto results = run_threat_checks(options);
    CHECK(pass_of(results, "T0"));
    CHECK_FALSE(pass_of(results, "T1"));
    CHECK(pass_of(results, "T2"));
    CHECK(pass_of(results, "T3"));
}

TEST_CASE("disabling lifetime enforcement fails exactly the privilege check") {
    ThreatOptions options;
    options.lifetime_enforcement = false;
    auto results = run_threat_checks(options);
    CHECK(pass_of(results, "T0"));
    CHECK(pass_of(results, "T1"));
    CHECK_FALSE(pass_of(results, "T2"));
    CHECK(pass_of(results, "T3"));
}
