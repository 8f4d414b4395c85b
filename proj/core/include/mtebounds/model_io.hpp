#pragma once

#include <string>

#include "mtebounds/bernstein.hpp"
#include "mtebounds/sample.hpp"
#include "mtebounds/types.hpp"

// CSV round trips for fitted curve pairs, propensity tables and bound
// curves. Numbers are written in shortest round-trip form, so a load of a
// save reproduces every value bit for bit.
//
// Formats:
//   model:      variable,arm,l,theta   (variable in {outcome, selection})
//   propensity: z,p,mass
//   bounds:     u,lower,upper,flags    (flags joined with '|', inf spelled
//                                       inf/-inf, guarded points nan)
//
// The assumption profile and the outcome support behind a bound curve are
// not persisted; a loaded curve carries only grid, endpoints and flags.

namespace mtebounds {

void save_model_csv(const MTRSet&, const std::string& path);
MTRSet load_model_csv(const std::string& path);

void save_propensity_csv(const PropensityTable&, const std::string& path);
PropensityTable load_propensity_csv(const std::string& path);

void save_bound_curve_csv(const BoundCurve&, const std::string& path);
BoundCurve load_bound_curve_csv(const std::string& path);

}  // namespace mtebounds
