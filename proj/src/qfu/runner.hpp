#pragma once

#include <string>

namespace qfu {

// Executes one JSON job request and returns the JSON report line.
//
// Request shape: {"cmd": "<subcommand>", "seed": <u64>, "trials": <n>, ...}
// plus per-command parameters. A missing seed falls back to the QFUBQC_SEED
// environment variable, then to 1. "jobs" > 1 splits Monte-Carlo trials
// across that many worker threads (per-chunk RNG streams; the reduction is
// a plain sum, so the result depends on the jobs value but not on thread
// scheduling).
//
// Subcommands: qfactory4, qfactory8, ubqc, qf-ubqc, blindness, hybrids,
// basis-blindness, describe, cloning-bound, signaling, verify-lemmas.
//
// Reports carry "schema": 1 and echo cmd/seed/parameters; suite commands add
// "all_passed". Usage problems throw Error(Err::Usage, ...).
std::string run_request(const std::string& request_json);

}  // namespace qfu
