// Self-contained invariant suite behind the `check` subcommand: one line
// per property, nonzero count of failures means a broken build.

#pragma once

#include <hrvem/types.hpp>

#include <cstdint>
#include <iosfwd>

namespace hrvem {

/// Runs the full property suite; prints one line per check to `log`.
/// Returns the number of failed checks.
int run_property_suite(std::uint64_t seed, std::ostream& log, int threads = 1);

}  // namespace hrvem
