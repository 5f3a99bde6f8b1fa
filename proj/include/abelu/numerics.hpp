#pragma once

#include <mpfr.h>

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace abelu {

using cplx = std::complex<double>;

inline constexpr long kMinBits = 64;
inline constexpr long kDefaultBits = 256;

struct PrecisionContext {
    long bits = kDefaultBits;

    PrecisionContext() = default;
    explicit PrecisionContext(long b);
};

// max(256, 1.3 * degree * log2(1 / r_min) + 64)
long working_bits(long degree, double r_min);

class PrecisionExhausted : public std::runtime_error {
public:
    PrecisionExhausted(const std::string& where, long exponent);
    long exponent() const { return exponent_; }

private:
    long exponent_;
};

// Owning wrapper around an mpfr_t. Binary operators produce a result at the
// larger of the two operand precisions.
class Real {
public:
    explicit Real(long bits = kDefaultBits);
    Real(double v, long bits);
    Real(const std::string& text, long bits);
    Real(const Real& o);
    Real(Real&& o) noexcept;
    Real& operator=(const Real& o);
    Real& operator=(Real&& o) noexcept;
    Real& operator=(double v);
    ~Real();

    long bits() const { return static_cast<long>(mpfr_get_prec(v_)); }
    void set_bits(long bits);  // rounds the current value
    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

    double to_double() const;  // throws PrecisionExhausted if out of double range
    long double to_long_double() const;
    std::string to_hex() const;
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    long exponent() const;  // binary exponent e with 2^(e-1) <= |x| < 2^e; LONG_MIN for 0
    double log2_abs() const;  // -inf for 0

    Real& operator+=(const Real& o);
    Real& operator-=(const Real& o);
    Real& operator*=(const Real& o);
    Real& operator/=(const Real& o);
    Real operator-() const;

    friend Real operator+(const Real& a, const Real& b);
    friend Real operator-(const Real& a, const Real& b);
    friend Real operator*(const Real& a, const Real& b);
    friend Real operator/(const Real& a, const Real& b);
    friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
    friend bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
    friend bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
    friend bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }
    friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }

private:
    mpfr_t v_;
};

Real abs(const Real& x);
Real sqrt(const Real& x);
Real pow(const Real& x, long n);
Real ldexp(const Real& x, long e);
Real pi(long bits);

// Throws PrecisionExhausted when x is not a finite number.
void check_finite(mpfr_srcptr x, const char* where);

class CNum {
public:
    explicit CNum(long bits = kDefaultBits) : re_(bits), im_(bits) {}
    CNum(Real re, Real im) : re_(std::move(re)), im_(std::move(im)) {}
    CNum(cplx z, long bits) : re_(z.real(), bits), im_(z.imag(), bits) {}

    static CNum polar(const Real& modulus, const Real& angle);
    static CNum unit(double angle, long bits);  // e^{i angle} computed at full precision

    const Real& re() const { return re_; }
    const Real& im() const { return im_; }
    Real& re() { return re_; }
    Real& im() { return im_; }
    long bits() const { return re_.bits(); }
    void set_bits(long bits);

    cplx to_cplx() const;
    bool is_zero() const { return re_.is_zero() && im_.is_zero(); }

    CNum& operator+=(const CNum& o);
    CNum& operator-=(const CNum& o);
    CNum& operator*=(const CNum& o);
    CNum& operator*=(const Real& s);
    CNum operator-() const;

    friend CNum operator+(CNum a, const CNum& b) { return a += b; }
    friend CNum operator-(CNum a, const CNum& b) { return a -= b; }
    friend CNum operator*(CNum a, const CNum& b) { return a *= b; }
    friend CNum operator*(CNum a, const Real& s) { return a *= s; }
    friend CNum operator/(const CNum& a, const CNum& b);
    friend bool operator==(const CNum& a, const CNum& b) { return a.re_ == b.re_ && a.im_ == b.im_; }

private:
    Real re_, im_;
};

Real abs(const CNum& z);
Real norm(const CNum& z);  // |z|^2
CNum conj(const CNum& z);

// Dense polynomial a_0 + a_1 z + ... + a_N z^N. Trailing zero coefficients are
// trimmed on construction, so the stored length is degree + 1 except for the
// zero polynomial, which keeps one zero coefficient.
class Poly {
public:
    explicit Poly(long bits = kDefaultBits);
    Poly(std::vector<CNum> coeffs, long bits);

    static Poly from_cplx(std::span<const cplx> coeffs, long bits);
    static Poly monomial(std::size_t m, long bits, cplx c = 1.0);
    static Poly constant(cplx c, long bits) { return monomial(0, bits, c); }

    long bits() const { return bits_; }
    std::size_t size() const { return coeffs_.size(); }
    long degree() const;  // -1 for the zero polynomial
    bool is_zero() const { return degree() < 0; }
    const CNum& operator[](std::size_t k) const { return coeffs_[k]; }
    const std::vector<CNum>& coeffs() const { return coeffs_; }
    CNum coeff(std::size_t k) const;  // zero beyond the stored length
    Poly with_bits(long bits) const;

    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }

private:
    void trim();

    std::vector<CNum> coeffs_;
    long bits_;
};

// z^m * p
Poly shift(const Poly& p, std::size_t m);
// coefficients a_lo .. a_hi of p (others zero)
Poly truncate(const Poly& p, std::size_t hi);
Poly derivative(const Poly& p);
// coefficient k multiplied by s^k, for any real s > 0
Poly rescale(const Poly& p, const Real& s);

struct PartialSumTrace {
    CNum point;
    std::vector<CNum> values;
};

CNum eval(const Poly& p, const CNum& z);
cplx eval(const Poly& p, cplx z);  // evaluated in full precision, rounded at the end
std::vector<cplx> eval_many(const Poly& p, std::span<const cplx> zs);

// Horner evaluation plus a rigorous-style bound on the accumulated rounding
// error (|error| <= bound), used for certification.
struct EvalWithBound {
    cplx value;
    double error_bound;
};
EvalWithBound eval_with_bound(const Poly& p, cplx z);

PartialSumTrace partial_sums_at(const Poly& p, const CNum& z);

// |f(r zeta) - [sum_{k<=N} r^k (1-r) S_k(zeta) + r^{N+1} S_N(zeta)]|
Real abel_identity_residual(const Poly& p, const Real& r, const CNum& zeta);

Poly dilate(const Poly& p, const Real& r);

struct CauchyBounds {
    std::vector<Real> bounds;  // bounds[k] >= |a_k|
    Real sup_estimate;         // grid sup times margin
    double margin_factor = 1.0;
    std::size_t grid_points = 0;
    bool certified = true;  // every |a_k| <= bounds[k]
};
CauchyBounds cauchy_coefficient_bounds(const Poly& p, double R);

// Circle-sup estimate used across modules: grid of 8*deg+64 points, inflated
// by 1/(1 - pi*deg/gridsize).
struct CircleSup {
    double raw = 0.0;
    double certified = 0.0;
    double margin_factor = 1.0;
    std::size_t grid_points = 0;
};
CircleSup circle_sup(const Poly& p, double radius);

double margin_factor(long degree, std::size_t grid_points);

nlohmann::json poly_to_json(const Poly& p);
Poly poly_from_json(const nlohmann::json& j);

}  // namespace abelu
