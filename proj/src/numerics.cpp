#include "abelu/numerics.hpp"

#include <algorithm>
#include <climits>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

namespace abelu {

namespace {

constexpr mpfr_rnd_t kRnd = MPFR_RNDN;

long max_bits(const Real& a, const Real& b) { return std::max(a.bits(), b.bits()); }

// acc <- acc * z + a, complex, using two scratch reals.
void horner_step(Real& acc_re, Real& acc_im, const Real& z_re, const Real& z_im, const CNum& a, Real& t_re,
                 Real& t_im) {
    mpfr_fmms(t_re.get(), acc_re.get(), z_re.get(), acc_im.get(), z_im.get(), kRnd);
    mpfr_fmma(t_im.get(), acc_re.get(), z_im.get(), acc_im.get(), z_re.get(), kRnd);
    mpfr_add(acc_re.get(), t_re.get(), a.re().get(), kRnd);
    mpfr_add(acc_im.get(), t_im.get(), a.im().get(), kRnd);
}

// out <- x * y (complex)
void cmul(Real& out_re, Real& out_im, const Real& x_re, const Real& x_im, const Real& y_re, const Real& y_im) {
    mpfr_fmms(out_re.get(), x_re.get(), y_re.get(), x_im.get(), y_im.get(), kRnd);
    mpfr_fmma(out_im.get(), x_re.get(), y_im.get(), x_im.get(), y_re.get(), kRnd);
}

}  // namespace

PrecisionContext::PrecisionContext(long b) : bits(b) {
    if (b < kMinBits) throw std::invalid_argument("precision below 64 bits");
}

long working_bits(long degree, double r_min) {
    if (degree <= 0 || r_min >= 1.0) return kDefaultBits;
    if (r_min <= 0.0) throw std::invalid_argument("working_bits: r_min must be positive");
    double b = 1.3 * static_cast<double>(degree) * std::log2(1.0 / r_min) + 64.0;
    return std::max(kDefaultBits, static_cast<long>(std::ceil(b)));
}

PrecisionExhausted::PrecisionExhausted(const std::string& where, long exponent)
    : std::runtime_error(where + ": value leaves the representable range (needs binary exponent " +
                         std::to_string(exponent) + ")"),
      exponent_(exponent) {}

void check_finite(mpfr_srcptr x, const char* where) {
    if (mpfr_number_p(x)) return;
    long e = mpfr_inf_p(x) ? static_cast<long>(mpfr_get_emax()) + 1 : 0;
    throw PrecisionExhausted(where, e);
}

// ---------------------------------------------------------------- Real

Real::Real(long bits) {
    mpfr_init2(v_, std::max<long>(bits, MPFR_PREC_MIN));
    mpfr_set_zero(v_, 1);
}

Real::Real(double v, long bits) : Real(bits) {
    if (!std::isfinite(v)) throw std::invalid_argument("Real: non-finite double");
    mpfr_set_d(v_, v, kRnd);
}

Real::Real(const std::string& text, long bits) : Real(bits) {
    char* end = nullptr;
    mpfr_strtofr(v_, text.c_str(), &end, 0, kRnd);
    if (end == text.c_str() || *end != '\0' || !mpfr_number_p(v_))
        throw std::invalid_argument("Real: cannot parse '" + text + "'");
}

Real::Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, kRnd);
}

Real::Real(Real&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
}

Real& Real::operator=(const Real& o) {
    if (this != &o) {
        mpfr_set_prec(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, kRnd);
    }
    return *this;
}

Real& Real::operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
}

Real& Real::operator=(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("Real: non-finite double");
    mpfr_set_d(v_, v, kRnd);
    return *this;
}

Real::~Real() { mpfr_clear(v_); }

void Real::set_bits(long bits) { mpfr_prec_round(v_, std::max<long>(bits, MPFR_PREC_MIN), kRnd); }

double Real::to_double() const {
    double d = mpfr_get_d(v_, kRnd);
    if (!std::isfinite(d)) throw PrecisionExhausted("Real::to_double", exponent());
    return d;
}

long double Real::to_long_double() const { return mpfr_get_ld(v_, kRnd); }

std::string Real::to_hex() const {
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%Ra", v_);
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
}

long Real::exponent() const {
    if (mpfr_zero_p(v_)) return LONG_MIN;
    return static_cast<long>(mpfr_get_exp(v_));
}

double Real::log2_abs() const {
    if (mpfr_zero_p(v_)) return -std::numeric_limits<double>::infinity();
    long e = 0;
    double m = mpfr_get_d_2exp(&e, v_, kRnd);
    return std::log2(std::fabs(m)) + static_cast<double>(e);
}

Real& Real::operator+=(const Real& o) {
    if (o.bits() > bits()) set_bits(o.bits());
    mpfr_add(v_, v_, o.v_, kRnd);
    check_finite(v_, "add");
    return *this;
}

Real& Real::operator-=(const Real& o) {
    if (o.bits() > bits()) set_bits(o.bits());
    mpfr_sub(v_, v_, o.v_, kRnd);
    check_finite(v_, "sub");
    return *this;
}

Real& Real::operator*=(const Real& o) {
    if (o.bits() > bits()) set_bits(o.bits());
    mpfr_mul(v_, v_, o.v_, kRnd);
    check_finite(v_, "mul");
    return *this;
}

Real& Real::operator/=(const Real& o) {
    if (mpfr_zero_p(o.v_)) throw std::domain_error("Real: division by zero");
    if (o.bits() > bits()) set_bits(o.bits());
    mpfr_div(v_, v_, o.v_, kRnd);
    check_finite(v_, "div");
    return *this;
}

Real Real::operator-() const {
    Real r(*this);
    mpfr_neg(r.v_, r.v_, kRnd);
    return r;
}

Real operator+(const Real& a, const Real& b) {
    Real r(max_bits(a, b));
    mpfr_add(r.v_, a.v_, b.v_, kRnd);
    check_finite(r.v_, "add");
    return r;
}

Real operator-(const Real& a, const Real& b) {
    Real r(max_bits(a, b));
    mpfr_sub(r.v_, a.v_, b.v_, kRnd);
    check_finite(r.v_, "sub");
    return r;
}

Real operator*(const Real& a, const Real& b) {
    Real r(max_bits(a, b));
    mpfr_mul(r.v_, a.v_, b.v_, kRnd);
    check_finite(r.v_, "mul");
    return r;
}

Real operator/(const Real& a, const Real& b) {
    if (mpfr_zero_p(b.v_)) throw std::domain_error("Real: division by zero");
    Real r(max_bits(a, b));
    mpfr_div(r.v_, a.v_, b.v_, kRnd);
    check_finite(r.v_, "div");
    return r;
}

Real abs(const Real& x) {
    Real r(x.bits());
    mpfr_abs(r.get(), x.get(), kRnd);
    return r;
}

Real sqrt(const Real& x) {
    Real r(x.bits());
    mpfr_sqrt(r.get(), x.get(), kRnd);
    check_finite(r.get(), "sqrt");
    return r;
}

Real pow(const Real& x, long n) {
    Real r(x.bits());
    mpfr_pow_si(r.get(), x.get(), n, kRnd);
    check_finite(r.get(), "pow");
    return r;
}

Real ldexp(const Real& x, long e) {
    Real r(x);
    mpfr_mul_2si(r.get(), r.get(), e, kRnd);
    check_finite(r.get(), "ldexp");
    return r;
}

Real pi(long bits) {
    Real r(bits);
    mpfr_const_pi(r.get(), kRnd);
    return r;
}

// ---------------------------------------------------------------- CNum

CNum CNum::polar(const Real& modulus, const Real& angle) {
    long b = std::max(modulus.bits(), angle.bits());
    Real s(b), c(b);
    mpfr_sin_cos(s.get(), c.get(), angle.get(), kRnd);
    return CNum(c * modulus, s * modulus);
}

CNum CNum::unit(double angle, long bits) {
    Real s(bits), c(bits);
    Real a(angle, bits);
    mpfr_sin_cos(s.get(), c.get(), a.get(), kRnd);
    return CNum(std::move(c), std::move(s));
}

void CNum::set_bits(long bits) {
    re_.set_bits(bits);
    im_.set_bits(bits);
}

cplx CNum::to_cplx() const { return {re_.to_double(), im_.to_double()}; }

CNum& CNum::operator+=(const CNum& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
}

CNum& CNum::operator-=(const CNum& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
}

CNum& CNum::operator*=(const CNum& o) {
    long b = std::max(bits(), o.bits());
    Real r(b), i(b);
    cmul(r, i, re_, im_, o.re_, o.im_);
    check_finite(r.get(), "cmul");
    check_finite(i.get(), "cmul");
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
}

CNum& CNum::operator*=(const Real& s) {
    re_ *= s;
    im_ *= s;
    return *this;
}

CNum CNum::operator-() const { return CNum(-re_, -im_); }

CNum operator/(const CNum& a, const CNum& b) {
    Real d = norm(b);
    if (d.is_zero()) throw std::domain_error("CNum: division by zero");
    CNum n = a * conj(b);
    return CNum(n.re() / d, n.im() / d);
}

Real abs(const CNum& z) {
    Real r(z.bits());
    mpfr_hypot(r.get(), z.re().get(), z.im().get(), kRnd);
    check_finite(r.get(), "abs");
    return r;
}

Real norm(const CNum& z) {
    Real r(z.bits());
    mpfr_fmma(r.get(), z.re().get(), z.re().get(), z.im().get(), z.im().get(), kRnd);
    check_finite(r.get(), "norm");
    return r;
}

CNum conj(const CNum& z) { return CNum(z.re(), -z.im()); }

// ---------------------------------------------------------------- Poly

Poly::Poly(long bits) : bits_(bits) {
    PrecisionContext check(bits);
    coeffs_.emplace_back(bits);
}

Poly::Poly(std::vector<CNum> coeffs, long bits) : coeffs_(std::move(coeffs)), bits_(bits) {
    PrecisionContext check(bits);
    if (coeffs_.empty()) coeffs_.emplace_back(bits);
    for (auto& c : coeffs_)
        if (c.bits() != bits) c.set_bits(bits);
    trim();
}

Poly Poly::from_cplx(std::span<const cplx> coeffs, long bits) {
    std::vector<CNum> v;
    v.reserve(coeffs.size());
    for (cplx c : coeffs) v.emplace_back(c, bits);
    return Poly(std::move(v), bits);
}

Poly Poly::monomial(std::size_t m, long bits, cplx c) {
    std::vector<CNum> v;
    v.reserve(m + 1);
    for (std::size_t k = 0; k < m; ++k) v.emplace_back(bits);
    v.emplace_back(c, bits);
    return Poly(std::move(v), bits);
}

void Poly::trim() {
    while (coeffs_.size() > 1 && coeffs_.back().is_zero()) coeffs_.pop_back();
}

long Poly::degree() const {
    if (coeffs_.size() == 1 && coeffs_[0].is_zero()) return -1;
    return static_cast<long>(coeffs_.size()) - 1;
}

CNum Poly::coeff(std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : CNum(bits_); }

Poly Poly::with_bits(long bits) const { return Poly(coeffs_, bits); }

Poly& Poly::operator+=(const Poly& o) {
    bits_ = std::max(bits_, o.bits_);
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), CNum(bits_));
    for (auto& c : coeffs_)
        if (c.bits() < bits_) c.set_bits(bits_);
    for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    trim();
    return *this;
}

Poly& Poly::operator-=(const Poly& o) {
    bits_ = std::max(bits_, o.bits_);
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), CNum(bits_));
    for (auto& c : coeffs_)
        if (c.bits() < bits_) c.set_bits(bits_);
    for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
    trim();
    return *this;
}

Poly shift(const Poly& p, std::size_t m) {
    if (p.is_zero() || m == 0) return p;
    std::vector<CNum> v;
    v.reserve(p.size() + m);
    for (std::size_t k = 0; k < m; ++k) v.emplace_back(p.bits());
    for (const auto& c : p.coeffs()) v.push_back(c);
    return Poly(std::move(v), p.bits());
}

Poly truncate(const Poly& p, std::size_t hi) {
    std::vector<CNum> v(p.coeffs().begin(), p.coeffs().begin() + std::min(hi + 1, p.size()));
    return Poly(std::move(v), p.bits());
}

Poly derivative(const Poly& p) {
    if (p.size() <= 1) return Poly(p.bits());
    std::vector<CNum> v;
    v.reserve(p.size() - 1);
    for (std::size_t k = 1; k < p.size(); ++k) {
        Real kk(static_cast<double>(k), p.bits());
        v.push_back(p[k] * kk);
    }
    return Poly(std::move(v), p.bits());
}

Poly rescale(const Poly& p, const Real& s) {
    if (s.sign() < 0) throw std::invalid_argument("rescale: negative factor");
    std::vector<CNum> v;
    v.reserve(p.size());
    Real sk(1.0, p.bits());
    Real sb(s);
    sb.set_bits(std::max(s.bits(), p.bits()));
    for (std::size_t k = 0; k < p.size(); ++k) {
        v.push_back(p[k] * sk);
        sk *= sb;
    }
    return Poly(std::move(v), p.bits());
}

CNum eval(const Poly& p, const CNum& z) {
    long b = p.bits();
    const auto& a = p.coeffs();
    Real zr(z.re()), zi(z.im());
    zr.set_bits(std::max(b, zr.bits()));
    zi.set_bits(std::max(b, zi.bits()));
    Real acc_re(a.back().re()), acc_im(a.back().im());
    Real t_re(b), t_im(b);
    for (std::size_t k = a.size() - 1; k-- > 0;) horner_step(acc_re, acc_im, zr, zi, a[k], t_re, t_im);
    check_finite(acc_re.get(), "eval");
    check_finite(acc_im.get(), "eval");
    return CNum(std::move(acc_re), std::move(acc_im));
}

cplx eval(const Poly& p, cplx z) { return eval(p, CNum(z, p.bits())).to_cplx(); }

std::vector<cplx> eval_many(const Poly& p, std::span<const cplx> zs) {
    std::vector<cplx> out;
    out.reserve(zs.size());
    long b = p.bits();
    const auto& a = p.coeffs();
    Real zr(b), zi(b), acc_re(b), acc_im(b), t_re(b), t_im(b);
    for (cplx z : zs) {
        zr = z.real();
        zi = z.imag();
        mpfr_set(acc_re.get(), a.back().re().get(), kRnd);
        mpfr_set(acc_im.get(), a.back().im().get(), kRnd);
        for (std::size_t k = a.size() - 1; k-- > 0;) horner_step(acc_re, acc_im, zr, zi, a[k], t_re, t_im);
        check_finite(acc_re.get(), "eval_many");
        check_finite(acc_im.get(), "eval_many");
        out.emplace_back(acc_re.to_double(), acc_im.to_double());
    }
    return out;
}

EvalWithBound eval_with_bound(const Poly& p, cplx z) {
    long b = p.bits();
    const auto& a = p.coeffs();
    Real zr(z.real(), b), zi(z.imag(), b);
    Real acc_re(a.back().re()), acc_im(a.back().im()), t_re(b), t_im(b);
    Real mag(64), az(std::abs(z), 64), ak(64);
    mpfr_hypot(mag.get(), a.back().re().get(), a.back().im().get(), MPFR_RNDU);
    for (std::size_t k = a.size() - 1; k-- > 0;) {
        horner_step(acc_re, acc_im, zr, zi, a[k], t_re, t_im);
        mpfr_hypot(ak.get(), a[k].re().get(), a[k].im().get(), MPFR_RNDU);
        mpfr_mul(mag.get(), mag.get(), az.get(), MPFR_RNDU);
        mpfr_add(mag.get(), mag.get(), ak.get(), MPFR_RNDU);
    }
    check_finite(acc_re.get(), "eval_with_bound");
    check_finite(acc_im.get(), "eval_with_bound");
    cplx v(acc_re.to_double(), acc_im.to_double());
    // each Horner step contributes at most ~4 units of relative rounding
    double n = static_cast<double>(a.size());
    double rel = (4.0 * n + 4.0) * std::ldexp(1.0, static_cast<int>(1 - b));
    double bound = mag.log2_abs() + std::log2(rel);
    double err = bound > 1000.0 ? std::numeric_limits<double>::infinity() : std::exp2(bound);
    err += std::abs(v) * 0x1p-52;
    return {v, err};
}

PartialSumTrace partial_sums_at(const Poly& p, const CNum& z) {
    long b = p.bits();
    PartialSumTrace tr{z, {}};
    tr.values.reserve(p.size());
    CNum zk(Real(1.0, b), Real(b));
    CNum zz(z);
    zz.set_bits(std::max(b, z.bits()));
    CNum acc(b);
    Real t_re(b), t_im(b);
    for (std::size_t k = 0; k < p.size(); ++k) {
        cmul(t_re, t_im, p[k].re(), p[k].im(), zk.re(), zk.im());
        acc.re() += t_re;
        acc.im() += t_im;
        tr.values.push_back(acc);
        if (k + 1 < p.size()) zk *= zz;
    }
    return tr;
}

Real abel_identity_residual(const Poly& p, const Real& r, const CNum& zeta) {
    long b = p.bits();
    Real one(1.0, b);
    Real dev = abs(abs(zeta) - one);
    if (dev > ldexp(one, -b / 2)) throw std::invalid_argument("abel_identity_residual: zeta not unimodular");
    if (r.sign() < 0 || r >= one) throw std::invalid_argument("abel_identity_residual: r outside [0,1)");

    long wb = b + 64;
    Poly pw = p.with_bits(wb);
    CNum zw(zeta);
    zw.set_bits(wb);
    Real rw(r);
    rw.set_bits(wb);

    CNum lhs = eval(pw, CNum(zw.re() * rw, zw.im() * rw));
    PartialSumTrace tr = partial_sums_at(pw, zw);
    Real one_w(1.0, wb);
    Real omr = one_w - rw;
    Real rk(1.0, wb);
    CNum sum(wb);
    for (const auto& s : tr.values) {
        Real w = rk * omr;
        sum.re() += s.re() * w;
        sum.im() += s.im() * w;
        rk *= rw;
    }
    sum.re() += tr.values.back().re() * rk;
    sum.im() += tr.values.back().im() * rk;
    Real res = abs(lhs - sum);
    res.set_bits(b);
    return res;
}

Poly dilate(const Poly& p, const Real& r) {
    if (r.sign() < 0 || r > Real(1.0, r.bits())) throw std::invalid_argument("dilate: r outside [0,1]");
    return rescale(p, r);
}

double margin_factor(long degree, std::size_t grid_points) {
    if (degree <= 0) return 1.0;
    double x = std::numbers::pi * static_cast<double>(degree) / static_cast<double>(grid_points);
    if (x >= 1.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (1.0 - x);
}

CircleSup circle_sup(const Poly& p, double radius) {
    long d = std::max<long>(p.degree(), 0);
    std::size_t m = static_cast<std::size_t>(8 * d + 64);
    std::vector<cplx> zs(m);
    for (std::size_t j = 0; j < m; ++j)
        zs[j] = std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m));
    double raw = 0.0;
    for (cplx v : eval_many(p, zs)) raw = std::max(raw, std::abs(v));
    CircleSup out;
    out.raw = raw;
    out.margin_factor = margin_factor(d, m);
    out.certified = raw * out.margin_factor;
    out.grid_points = m;
    return out;
}

CauchyBounds cauchy_coefficient_bounds(const Poly& p, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("cauchy_coefficient_bounds: R must be positive");
    CircleSup s = circle_sup(p, R);
    // the grid sup is rounded to double; widen by a few ulps so equality cases survive
    CauchyBounds out{{}, Real(s.certified * (1.0 + 0x1p-48), p.bits()), s.margin_factor, s.grid_points, true};
    Real inv(1.0 / R, p.bits());
    Real Rk(1.0, p.bits());
    for (std::size_t k = 0; k < p.size(); ++k) {
        Real bk = out.sup_estimate * Rk;
        if (abs(p[k]) > bk) out.certified = false;
        out.bounds.push_back(std::move(bk));
        Rk *= inv;
    }
    return out;
}

nlohmann::json poly_to_json(const Poly& p) {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& c : p.coeffs()) coeffs.push_back({c.re().to_hex(), c.im().to_hex()});
    return {{"precision_bits", p.bits()}, {"coeffs", coeffs}};
}

Poly poly_from_json(const nlohmann::json& j) {
    long bits = j.at("precision_bits").get<long>();
    std::vector<CNum> v;
    for (const auto& c : j.at("coeffs")) {
        if (!c.is_array() || c.size() != 2) throw std::invalid_argument("poly json: coefficient must be [re, im]");
        v.emplace_back(Real(c[0].get<std::string>(), bits), Real(c[1].get<std::string>(), bits));
    }
    return Poly(std::move(v), bits);
}

}  // namespace abelu
