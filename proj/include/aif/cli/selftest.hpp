#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aif::cli {

struct SelftestCheck {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

struct SelftestOptions {
    /// Fault-injection seam: bias added to the entropy estimate under test.
    double inject_entropy_bias = 0.0;
};

/// Fast numerical oracle suite: autodiff vs central finite differences,
/// analytic KL vs Monte Carlo, nearest-neighbor entropy vs analytic
/// Gaussian entropy (plus the scaling shift), and CEM on a known quadratic.
std::vector<SelftestCheck> run_selftest(const SelftestOptions& opts = {});

/// Prints the table (measured value next to each threshold); returns true
/// when every check passed.
bool report_selftest(const std::vector<SelftestCheck>& checks, std::ostream& os);

}  // namespace aif::cli
