#pragma once

#include <cstdint>
#include <string>

#include "evcond/limit_sim.hpp"
#include "evcond/sample.hpp"
#include "evcond/statistic.hpp"

namespace evcond {

/// Outcome of one full test run: statistic, simulated critical value and
/// verdict. The null is rejected iff the statistic is not smaller than the
/// simulated (1 - alpha) quantile.
struct TestReport {
    int n = 0;
    int k = 0;
    double beta = 0.0;
    double alpha = 0.0;
    double kln = 0.0;
    double quantile = 0.0;
    bool reject = false;
    int reps = 0;
    int quad_cells = 0;
    int theta_cells = 0;
    std::uint64_t seed = 0;
    int ties = 0;
    double timing_ms = 0.0;

    /// Timing is emitted only on request: the default report is a pure
    /// function of the inputs and stays byte-identical across runs.
    std::string to_json(bool include_timing = false) const;
    static TestReport from_json(const std::string& text);
    std::string to_csv() const;
};

/// Full pipeline: ranks, statistic, empirical exponent measure, simulated
/// critical value, verdict.
TestReport run_test(const BivariateSample& sample, const TestConfig& config);

/// Two-polyline plot of a scan curve (statistic and critical value vs k).
std::string render_scan_svg(const ScanCurve& curve);

}  // namespace evcond
