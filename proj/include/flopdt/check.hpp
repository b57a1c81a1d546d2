#pragma once

#include <string>

#include "flopdt/series.hpp"

namespace flopdt {

/// Outcome of one machine-verified identity.
struct CheckResult {
    bool ok = false;
    std::string detail;
};

/// Compares two series on their common validity range and reports the first
/// mismatching exponent with both coefficient values.
inline CheckResult compare_series(const FormalSeries& lhs,
                                  const FormalSeries& rhs) {
    CheckResult r;
    auto mismatch = series_first_mismatch(lhs, rhs);
    if (!mismatch) {
        r.ok = true;
        Grade common = min(lhs.valid_to(), rhs.valid_to());
        r.detail = "equal up to grade " + common.str();
        return r;
    }
    r.ok = false;
    r.detail = "first mismatch at " + mismatch->str() + ": lhs=" +
               lhs.coefficient(*mismatch).str() + " rhs=" +
               rhs.coefficient(*mismatch).str();
    return r;
}

} // namespace flopdt
