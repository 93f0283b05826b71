#pragma once

#include <string>
#include <vector>

namespace lwm2m {

struct ThreatOptions {
    bool lifetime_enforcement = true;  // negative control for T2
    bool cookie_required = true;       // negative control for T1
};

struct ThreatResult {
    std::string id;
    std::string description;
    bool pass = false;
};

// The four scripted checks: T0 hint indistinguishability, T1 cookie-flood
// statelessness, T2 lifetime expiry, T3 rogue-hint rejection.
std::vector<ThreatResult> run_threat_checks(const ThreatOptions& options = {});

}  // namespace lwm2m
