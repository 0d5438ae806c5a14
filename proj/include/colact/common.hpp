#pragma once

#include <boost/rational.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace colact {

/// Exact scalar backend for the small worked-example checks.
/// int64 numerators/denominators are ample for the table sizes involved.
using Rational = boost::rational<long long>;

struct SpaceMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct DivergenceUndefinedError : std::domain_error {
    using std::domain_error::domain_error;
};

struct DegenerateWeightError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class R>
struct scalar_traits {
    static constexpr bool is_exact = false;
    static R zero() { return R(0); }
    static R one() { return R(1); }
    // Mass-sum slack accepted by validation.
    static R sum_tolerance() { return R(1e-12); }
};

template <>
struct scalar_traits<Rational> {
    static constexpr bool is_exact = true;
    static Rational zero() { return Rational(0); }
    static Rational one() { return Rational(1); }
    static Rational sum_tolerance() { return Rational(0); }
};

inline double scalar_abs(double x) { return std::abs(x); }
inline Rational scalar_abs(const Rational& x) { return x < Rational(0) ? -x : x; }

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return boost::rational_cast<double>(x); }

}  // namespace colact
