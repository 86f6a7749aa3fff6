// Config-driven usage: define a metric as an expression string, run the
// property suite over sampled points, and inspect the report object — the
// same flow the `finsler check` command wraps.

#include <cstdio>

#include "finsler/suite.hpp"

using namespace finsler;

int main() {
    // A genuinely Finslerian (non-Riemannian, position-dependent) norm.
    Json cfg_json = {
        {"metric",
         {{"expression", "sqrt(y1^2 + y2^2 + y3^2) + x1*y2/8"}, {"dimension", 3}}},
        {"sampler", {{"seed", 5}, {"count", 10}}},
    };

    RunConfig cfg = config_from_json(cfg_json);
    Report rep = run_suite(cfg);

    int passed = 0, failed = 0, skipped = 0;
    for (const CheckEntry& e : rep.entries) {
        bool na = e.witness.is_object() && e.witness.contains("status") &&
                  e.witness["status"] == "not-applicable";
        if (na)
            ++skipped;
        else if (e.pass)
            ++passed;
        else
            ++failed;
    }
    std::printf("suite over %d sampled points: %d passed, %d failed, %d not applicable\n",
                cfg.sampler.count, passed, failed, skipped);
    std::printf("overall: %s\n\n", rep.all_pass() ? "PASS" : "FAIL");

    std::printf("sample entries (name, residual, tolerance):\n");
    int shown = 0;
    for (const CheckEntry& e : rep.entries) {
        if (e.witness.is_object() && e.witness.contains("status")) continue;
        std::printf("  %-36s %.3e  <  %.1e\n", e.name.c_str(), e.residual, e.tolerance);
        if (++shown == 6) break;
    }

    // Malformed input is rejected with a diagnostic, never a crash.
    std::printf("\nrejecting a malformed config:\n");
    try {
        config_from_json(Json{{"metric", "heisenberg3"}, {"jet_order", 2}});
    } catch (const ConfigError& e) {
        std::printf("  ConfigError: %s\n", e.what());
    }
    return 0;
}
