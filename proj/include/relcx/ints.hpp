#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace relcx {

using Int = long long;

/// Raised when a constructor-time structural invariant fails (dd != 0,
/// a map that does not commute with differentials, and the like).
struct InvariantError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Raised on int64 overflow; callers retry with arbitrary precision.
struct OverflowError : std::overflow_error {
    using std::overflow_error::overflow_error;
};

/// Structured error for scenario/table files.
struct LoadError : std::runtime_error {
    explicit LoadError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what) {}
    explicit LoadError(const std::string& what) : std::runtime_error(what) {}
};

inline Int checked_add(Int a, Int b) {
    Int r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer overflow in add");
    return r;
}

inline Int checked_sub(Int a, Int b) {
    Int r;
    if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("integer overflow in sub");
    return r;
}

inline Int checked_mul(Int a, Int b) {
    Int r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer overflow in mul");
    return r;
}

// Uniform arithmetic entry points so Smith-normal-form code can be written
// once and instantiated with either machine ints (checked) or mpz.
inline Int num_add(Int a, Int b) { return checked_add(a, b); }
inline Int num_sub(Int a, Int b) { return checked_sub(a, b); }
inline Int num_mul(Int a, Int b) { return checked_mul(a, b); }
inline mpz_class num_add(const mpz_class& a, const mpz_class& b) { return a + b; }
inline mpz_class num_sub(const mpz_class& a, const mpz_class& b) { return a - b; }
inline mpz_class num_mul(const mpz_class& a, const mpz_class& b) { return a * b; }

template <class T>
T num_from(Int v);
template <>
inline Int num_from<Int>(Int v) { return v; }
template <>
inline mpz_class num_from<mpz_class>(Int v) {
    mpz_class z;
    mpz_set_si(z.get_mpz_t(), static_cast<long>(v));
    return z;
}

inline bool num_is_zero(Int a) { return a == 0; }
inline bool num_is_zero(const mpz_class& a) { return a == 0; }
inline Int num_abs(Int a) { return a < 0 ? -a : a; }
inline mpz_class num_abs(const mpz_class& a) { return abs(a); }
inline Int num_div(Int a, Int b) { return a / b; }
inline mpz_class num_div(const mpz_class& a, const mpz_class& b) { mpz_class q; mpz_tdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t()); return q; }
inline bool num_divides(Int d, Int a) { return d != 0 && a % d == 0; }
inline bool num_divides(const mpz_class& d, const mpz_class& a) { return d != 0 && mpz_divisible_p(a.get_mpz_t(), d.get_mpz_t()); }
inline long num_to_long(Int a) { return static_cast<long>(a); }
inline long num_to_long(const mpz_class& a) { return a.get_si(); }

}  // namespace relcx
