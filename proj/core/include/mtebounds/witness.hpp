#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mtebounds/bernstein.hpp"
#include "mtebounds/types.hpp"

// Constructive sharpness check: given a curve pair and a candidate effect
// value delta at one evaluation point, build an explicit latent distribution
// that reproduces the observable curves there and realizes exactly that
// always-observed effect. Existence of this witness for every delta inside
// the bound interval is what makes the interval sharp rather than merely
// valid.
//
// The construction works under the increasing selection direction: the
// latent selection index V given U = u_bar follows a piecewise linear CDF
// with knots at the average selection probabilities (q0, q1), both arms
// select via V <= q_d, and the potential outcomes are constant (or two-point
// on a bounded support) on each V segment.

namespace mtebounds {

enum class WitnessSupportMode {
  Interval,  // constant outcome values per segment
  TwoPoint,  // two-point masses on the support endpoints (two-sided only)
};

// Discrete conditional law of one potential outcome on one V segment.
struct SegmentMass {
  double value = 0.0;
  double prob = 1.0;
};

struct SegmentLaw {
  std::vector<SegmentMass> y0;
  std::vector<SegmentMass> y1;
};

struct WitnessDistribution {
  double u_bar = 0.0;
  double delta = 0.0;

  // Selection geometry: thresholds and the V-CDF knot values at u_bar.
  double q0 = 0.0;   // untreated threshold, average untreated selection
  double q1 = 0.0;   // treated threshold
  double f_q0 = 0.0; // P[V <= q0 | U = u_bar], the untreated curve at u_bar
  double f_q1 = 0.0; // P[V <= q1 | U = u_bar]

  // Outcome levels: always-observed untreated mean, always-observed treated
  // mean, treated-only mean.
  double r0 = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;

  SupportSpec support;
  MeanDominance dominance = MeanDominance::None;
  WitnessSupportMode mode = WitnessSupportMode::Interval;

  // Conditional outcome laws on the segments v <= q0, q0 < v <= q1, v > q1.
  std::array<SegmentLaw, 3> segments;
};

// Builds the witness; throws validation_error when delta or the implied
// segment means cannot be realized on the support, when the selection
// geometry is degenerate (needs 0 < q0 < q1 < 1 and a positive selection
// contrast at u_bar), or when the requested dominance fails at this delta.
WitnessDistribution build_witness(const MTRSet&, double u_bar, double delta,
                                  const SupportSpec&, MeanDominance,
                                  WitnessSupportMode);

struct WitnessCheckLine {
  std::string name;
  double target = 0.0;     // value implied by the curves
  double analytic = 0.0;   // exact value under the witness
  double simulated = 0.0;  // Monte Carlo value under the witness
  double z = 0.0;          // (simulated - target) / simulation SE
};

struct WitnessCheck {
  double max_analytic_residual = 0.0;
  std::vector<WitnessCheckLine> lines;
};

// Verifies the witness against the curves it was built from: exact segment
// arithmetic first (a residual above 1e-10 is a construction bug and throws
// numeric_error), then a simulation cross-check with at least 1e4 draws.
WitnessCheck verify_witness(const WitnessDistribution&, const MTRSet&,
                            std::size_t n_draws, std::uint64_t seed);

}  // namespace mtebounds
