#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

// Shared value types for bound computations: outcome support descriptions,
// identification assumption profiles, and pointwise bound curves with
// diagnostic flags. Infinite endpoints are first-class values throughout and
// serialize as "inf"/"-inf".

namespace mtebounds {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Denominators smaller than this are never divided by; the affected grid
// point is flagged instead. Also the collapse threshold below which the
// selection contrast counts as zero (point identification).
inline constexpr double kGuardEps = 1e-8;

// Tolerance for deciding that an inequality constraint is active.
inline constexpr double kActiveTol = 1e-9;

enum class SupportCase { BelowBounded, AboveBounded, TwoSided, RealLine };

// Support of the latent outcome, [y_lower, y_upper] with either end possibly
// infinite. The case tag is kept consistent with endpoint finiteness.
struct SupportSpec {
  double y_lower = 0.0;
  double y_upper = kInf;
  SupportCase kind = SupportCase::BelowBounded;

  static SupportSpec below_bounded(double lo);
  static SupportSpec above_bounded(double hi);
  static SupportSpec two_sided(double lo, double hi);
  static SupportSpec real_line();
  // Classifies by endpoint finiteness; rejects lo >= hi and NaN.
  static SupportSpec from_endpoints(double lo, double hi);
};

enum class SelectionDirection { Increasing, Decreasing, Agnostic };
enum class MeanDominance { None, GreaterEqual, LessEqual };

struct AssumptionProfile {
  SelectionDirection direction = SelectionDirection::Increasing;
  MeanDominance dominance = MeanDominance::None;
};

std::string to_string(SelectionDirection);
std::string to_string(MeanDominance);

enum BoundFlag : std::uint8_t {
  kFlagPointIdentified = 1,
  kFlagEmptyInterval = 2,
  kFlagDenominatorGuard = 4,
};

std::string format_flags(std::uint8_t flags);   // "a|b" tokens, "" when none
std::uint8_t parse_flags(const std::string&);

// Lower/upper envelopes over a u-grid. Endpoints may be infinite; where the
// denominator-guard flag is set the endpoints are NaN and must not be used.
struct BoundCurve {
  std::vector<double> u;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::uint8_t> flags;
  AssumptionProfile profile;
  SupportSpec support;

  std::size_t size() const { return u.size(); }
  bool any_flag(std::uint8_t mask) const;
};

// Evenly spaced grid on [0,1] including both endpoints; n_points >= 2.
std::vector<double> uniform_grid(std::size_t n_points);

// Shortest round-trip decimal formatting; infinities as "inf"/"-inf".
std::string format_value(double x);
// Accepts decimal/scientific numbers and the infinity spellings above.
double parse_value(const std::string& text);

}  // namespace mtebounds
