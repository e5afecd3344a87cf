#pragma once

#include <ostream>

namespace evd::checks {

// Runs the whole invariant suite on freshly generated synthetic data,
// printing one PASS/FAIL line per property. Returns the number of failures.
int run_all(std::ostream& os);

}  // namespace evd::checks
