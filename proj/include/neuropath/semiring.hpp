#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

#include "neuropath/error.hpp"

namespace neuropath {

enum class SemiringId : std::uint8_t { sum_product = 0, max_product = 1, max_min = 2 };

inline std::string_view to_string(SemiringId id) {
  switch (id) {
    case SemiringId::sum_product: return "sum-product";
    case SemiringId::max_product: return "max-product";
    case SemiringId::max_min: return "max-min";
  }
  return "?";
}

inline SemiringId parse_semiring(std::string_view name) {
  if (name == "sum-product") return SemiringId::sum_product;
  if (name == "max-product") return SemiringId::max_product;
  if (name == "max-min") return SemiringId::max_min;
  throw Error(ErrorCode::format, "unknown semiring '" + std::string(name) + "'");
}

// Operator pairs. `zero` is the oplus identity and odot annihilator, `one`
// the odot identity, on the non-negative reals (max-min: on [0, 1]).

struct SumProduct {
  static constexpr SemiringId id = SemiringId::sum_product;
  static constexpr bool exact = false;
  static constexpr double zero = 0.0;
  static constexpr double one = 1.0;
  static double oplus(double a, double b) noexcept { return a + b; }
  static double odot(double a, double b) noexcept { return a * b; }
};

struct MaxProduct {
  static constexpr SemiringId id = SemiringId::max_product;
  static constexpr bool exact = false;
  static constexpr double zero = 0.0;
  static constexpr double one = 1.0;
  static double oplus(double a, double b) noexcept { return std::max(a, b); }
  static double odot(double a, double b) noexcept { return a * b; }
};

struct MaxMin {
  static constexpr SemiringId id = SemiringId::max_min;
  static constexpr bool exact = true;
  static constexpr double zero = 0.0;
  static constexpr double one = 1.0;
  static double oplus(double a, double b) noexcept { return std::max(a, b); }
  static double odot(double a, double b) noexcept { return std::min(a, b); }
};

template <typename S>
concept SemiringPolicy = requires(double a, double b) {
  { S::oplus(a, b) } -> std::convertible_to<double>;
  { S::odot(a, b) } -> std::convertible_to<double>;
  { S::zero } -> std::convertible_to<double>;
  { S::one } -> std::convertible_to<double>;
};

/// Runtime handle: operator pointers plus the identity elements.
struct Semiring {
  SemiringId id;
  double (*oplus)(double, double);
  double (*odot)(double, double);
  double zero;
  double one;
};

template <SemiringPolicy S>
Semiring make_semiring() {
  return {S::id, &S::oplus, &S::odot, S::zero, S::one};
}

inline Semiring make_semiring(SemiringId id) {
  switch (id) {
    case SemiringId::sum_product: return make_semiring<SumProduct>();
    case SemiringId::max_product: return make_semiring<MaxProduct>();
    case SemiringId::max_min: return make_semiring<MaxMin>();
  }
  throw Error(ErrorCode::unsupported, "semiring id");
}

/// Calls fn with a default-constructed policy object for `id`.
template <typename Fn>
decltype(auto) visit_semiring(SemiringId id, Fn&& fn) {
  switch (id) {
    case SemiringId::sum_product: return std::forward<Fn>(fn)(SumProduct{});
    case SemiringId::max_product: return std::forward<Fn>(fn)(MaxProduct{});
    case SemiringId::max_min: break;
  }
  return std::forward<Fn>(fn)(MaxMin{});
}

struct Triple {
  double a, b, c;
};

struct LawReport {
  bool associativity = true;
  bool commutativity = true;
  bool distributivity = true;
  bool identity = true;
  bool annihilator = true;
  std::size_t checked = 0;

  bool all() const noexcept {
    return associativity && commutativity && distributivity && identity && annihilator;
  }
};

/// Tests the semiring laws on every sampled triple. A tolerance of 0
/// demands exact equality; otherwise the comparison is relative.
template <typename Oplus, typename Odot>
LawReport check_laws(Oplus oplus, Odot odot, double zero, double one,
                     std::span<const Triple> samples, double rel_tol) {
  auto eq = [rel_tol](double x, double y) {
    if (rel_tol == 0.0) return x == y;
    const double scale = std::max(std::abs(x), std::abs(y));
    return std::abs(x - y) <= rel_tol * scale;
  };
  LawReport report;
  for (const Triple& t : samples) {
    const double a = t.a, b = t.b, c = t.c;
    report.associativity &= eq(oplus(oplus(a, b), c), oplus(a, oplus(b, c)));
    report.commutativity &= eq(oplus(a, b), oplus(b, a));
    report.distributivity &= eq(odot(a, oplus(b, c)), oplus(odot(a, b), odot(a, c)));
    report.identity &= eq(oplus(zero, a), a) && eq(odot(one, a), a);
    report.annihilator &= eq(odot(zero, a), zero);
    ++report.checked;
  }
  return report;
}

inline LawReport check_laws(const Semiring& sr, std::span<const Triple> samples) {
  const double tol = sr.id == SemiringId::max_min ? 0.0 : 1e-12;
  return check_laws(sr.oplus, sr.odot, sr.zero, sr.one, samples, tol);
}

}  // namespace neuropath
