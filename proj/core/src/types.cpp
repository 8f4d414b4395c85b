#include "mtebounds/types.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "mtebounds/errors.hpp"

namespace mtebounds {

SupportSpec SupportSpec::below_bounded(double lo) {
  return {lo, kInf, SupportCase::BelowBounded};
}

SupportSpec SupportSpec::above_bounded(double hi) {
  return {-kInf, hi, SupportCase::AboveBounded};
}

SupportSpec SupportSpec::two_sided(double lo, double hi) {
  return from_endpoints(lo, hi);
}

SupportSpec SupportSpec::real_line() {
  return {-kInf, kInf, SupportCase::RealLine};
}

SupportSpec SupportSpec::from_endpoints(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
    throw validation_error(
        fmt::format("invalid outcome support [{}, {}]: lower endpoint must be "
                    "strictly below upper",
                    format_value(lo), format_value(hi)));
  }
  SupportCase kind;
  if (std::isinf(lo) && std::isinf(hi)) {
    kind = SupportCase::RealLine;
  } else if (std::isinf(hi)) {
    kind = SupportCase::BelowBounded;
  } else if (std::isinf(lo)) {
    kind = SupportCase::AboveBounded;
  } else {
    kind = SupportCase::TwoSided;
  }
  return {lo, hi, kind};
}

std::string to_string(SelectionDirection d) {
  switch (d) {
    case SelectionDirection::Increasing: return "increasing";
    case SelectionDirection::Decreasing: return "decreasing";
    case SelectionDirection::Agnostic: return "agnostic";
  }
  return "?";
}

std::string to_string(MeanDominance m) {
  switch (m) {
    case MeanDominance::None: return "none";
    case MeanDominance::GreaterEqual: return "ge";
    case MeanDominance::LessEqual: return "le";
  }
  return "?";
}

std::string format_flags(std::uint8_t flags) {
  std::string out;
  auto append = [&out](const char* token) {
    if (!out.empty()) out += '|';
    out += token;
  };
  if (flags & kFlagPointIdentified) append("point_identified");
  if (flags & kFlagEmptyInterval) append("empty_interval");
  if (flags & kFlagDenominatorGuard) append("denominator_guard");
  return out;
}

std::uint8_t parse_flags(const std::string& text) {
  std::uint8_t flags = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('|', start);
    if (end == std::string::npos) end = text.size();
    const std::string token = text.substr(start, end - start);
    if (token == "point_identified") {
      flags |= kFlagPointIdentified;
    } else if (token == "empty_interval") {
      flags |= kFlagEmptyInterval;
    } else if (token == "denominator_guard") {
      flags |= kFlagDenominatorGuard;
    } else if (!token.empty()) {
      throw validation_error(fmt::format("unknown bound flag '{}'", token));
    }
    start = end + 1;
  }
  return flags;
}

bool BoundCurve::any_flag(std::uint8_t mask) const {
  for (std::uint8_t f : flags) {
    if (f & mask) return true;
  }
  return false;
}

std::vector<double> uniform_grid(std::size_t n_points) {
  if (n_points < 2) {
    throw validation_error("grid needs at least 2 points");
  }
  std::vector<double> grid(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(n_points - 1);
  }
  grid.front() = 0.0;
  grid.back() = 1.0;
  return grid;
}

std::string format_value(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_value(const std::string& text) {
  if (text == "inf" || text == "+inf") return kInf;
  if (text == "-inf") return -kInf;
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw validation_error(fmt::format("cannot parse number '{}'", text));
  }
  return value;
}

}  // namespace mtebounds
