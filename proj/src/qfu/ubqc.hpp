#pragma once

#include <map>

#include "qfu/brickwork.hpp"
#include "qfu/qfactory.hpp"

namespace qfu {

enum class QubitSource { QuantumChannel, QFactory8 };

struct UBQCSession {
  std::vector<AngleOctant> theta;   // per node, client's hidden pad angle
  Bits r;                           // per node, outcome pad bit
  Bits s;                           // raw server outcomes
  Bits sbar;                        // corrected outcomes, sbar = s ^ r
  std::vector<AngleOctant> delta;   // sent measurement angles
  QubitSource source = QubitSource::QuantumChannel;
  Transcript transcript;
};

struct UBQCResult {
  Bits output;  // corrected last-column bits, row order
  UBQCSession session;
};

// delta = (-1)^{sX} phi + sZ*4 + theta + r*4 (octant arithmetic).
AngleOctant angle_update(AngleOctant phi, AngleOctant theta, int r, int sX, int sZ);

// Runs the blind protocol over the pattern. The QFactory8 source prepares
// each qubit through a fresh pair of toy-family eight-state sessions; the
// QuantumChannel source sends |+_theta> directly. A scripted behavior
// consumes one instrument step per node (classical input: the 3 delta bits;
// outcome label "0"/"1" is the reported measurement result).
UBQCResult run_ubqc(const MeasurementPattern& pattern, QubitSource source,
                    const ServerBehavior& behavior, Rng& rng);

// Unblinded reference evaluator: exact output distribution over the
// last-column outcome bits by branch enumeration (requires n*m <= 12).
std::map<Bits, double> reference_mbqc(const MeasurementPattern& pattern);

}  // namespace qfu
