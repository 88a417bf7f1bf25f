#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nonterm {

/// Arbitrary-precision integer used for every coefficient, bound and
/// concrete int value.
using Int = mpz_class;

inline Int floor_div(const Int& a, const Int& b) {
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline Int ceil_div(const Int& a, const Int& b) {
    Int q;
    mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline Int gcd(const Int& a, const Int& b) {
    Int g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

inline int sign(const Int& a) { return sgn(a); }

inline std::string to_string(const Int& a) { return a.get_str(); }

inline Int parse_int(const std::string& text) {
    Int v;
    if (text.empty() || v.set_str(text, 10) != 0) {
        throw std::invalid_argument("not an integer: '" + text + "'");
    }
    return v;
}

inline Int magnitude(const Int& a) { return a < 0 ? Int(-a) : a; }

inline bool fits_long(const Int& a) { return a.fits_slong_p(); }

inline long to_long(const Int& a) {
    if (!a.fits_slong_p()) throw std::overflow_error("integer does not fit in long: " + a.get_str());
    return a.get_si();
}

}  // namespace nonterm
