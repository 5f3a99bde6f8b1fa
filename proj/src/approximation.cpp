#include "abelu/approximation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace abelu {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

// ---------------------------------------------------------------- grids

struct PieceGrid {
    std::vector<cplx> points;
    double length = 0.0;          // arclength of the piece (0 for a point)
    double circle_equiv = 0.0;    // equivalent number of nodes on a full circle
};

// Chebyshev-clustered fit nodes.
PieceGrid fit_nodes(const CompactTarget& K, const PieceRef& piece, std::size_t n) {
    PieceGrid g;
    auto cheb = [n](std::size_t j) { return std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n)); };
    switch (piece.kind) {
        case PieceKind::Disc: {
            double rho = *K.disc_r;
            if (rho == 0.0) {
                g.points.emplace_back(0.0, 0.0);
                break;
            }
            for (std::size_t j = 0; j < n; ++j)
                g.points.push_back(std::polar(rho, kTwoPi * static_cast<double>(j) / static_cast<double>(n)));
            break;
        }
        case PieceKind::Arc: {
            const Arc& a = K.arcs[piece.index];
            for (std::size_t j = 0; j < n; ++j) g.points.push_back(std::polar(1.0, a.center_angle + a.half_width * cheb(j)));
            break;
        }
        case PieceKind::Segment: {
            const RadialSegment& s = K.segments[piece.index];
            double lo = K.disc_r ? std::max(s.from_r, *K.disc_r) : s.from_r;
            double mid = 0.5 * (lo + s.to_r), half = 0.5 * (s.to_r - lo);
            for (std::size_t j = 0; j < n; ++j) g.points.push_back(std::polar(mid + half * cheb(j), s.angle));
            break;
        }
    }
    return g;
}

// Equispaced validation nodes.
PieceGrid validation_nodes(const CompactTarget& K, const PieceRef& piece, std::size_t n) {
    PieceGrid g;
    n = std::max<std::size_t>(n, 2);
    switch (piece.kind) {
        case PieceKind::Disc: {
            double rho = *K.disc_r;
            if (rho == 0.0) {
                g.points.emplace_back(0.0, 0.0);
                g.circle_equiv = std::numeric_limits<double>::infinity();
                break;
            }
            for (std::size_t j = 0; j < n; ++j)
                g.points.push_back(std::polar(rho, kTwoPi * static_cast<double>(j) / static_cast<double>(n)));
            g.length = kTwoPi * rho;
            g.circle_equiv = static_cast<double>(n);
            break;
        }
        case PieceKind::Arc: {
            const Arc& a = K.arcs[piece.index];
            double lo = a.center_angle - a.half_width;
            for (std::size_t j = 0; j < n; ++j)
                g.points.push_back(std::polar(1.0, lo + a.length() * static_cast<double>(j) / static_cast<double>(n - 1)));
            g.length = a.length();
            g.circle_equiv = static_cast<double>(n - 1) * kTwoPi / a.length();
            break;
        }
        case PieceKind::Segment: {
            const RadialSegment& s = K.segments[piece.index];
            double lo = K.disc_r ? std::max(s.from_r, *K.disc_r) : s.from_r;
            double hi = s.to_r;
            // the closure point on the circle is never sampled
            std::size_t last = hi >= 1.0 ? n - 1 : n;
            for (std::size_t j = 0; j < last; ++j)
                g.points.push_back(std::polar(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1), s.angle));
            g.length = hi - lo;
            g.circle_equiv = static_cast<double>(n - 1) * kTwoPi / std::max(hi - lo, 1e-300);
            break;
        }
    }
    return g;
}

std::size_t fit_count(long d, const ApproxOptions& o) { return static_cast<std::size_t>(o.fit_per_degree * std::max<long>(d, 1) + 64); }

// ---------------------------------------------------------------- Arnoldi fit

struct ArnoldiFit {
    long degree = 0;  // number of basis vectors minus one
    double s0 = 1.0;
    MatC H;           // (degree+1) x degree, upper Hessenberg
    VecC c;           // coefficients in the orthonormal basis
    double fit_residual = 0.0;
};

ArnoldiFit arnoldi_fit(const std::vector<cplx>& Z, const std::vector<cplx>& F, long d, long u0) {
    const Eigen::Index N = static_cast<Eigen::Index>(Z.size());
    Eigen::Map<const VecC> z(Z.data(), N), f(F.data(), N);
    d = std::min<long>(d, static_cast<long>(N) - 1);
    MatC Q(N, d + 1);
    MatC H = MatC::Zero(d + 1, std::max<long>(d, 1));
    VecC v(N);
    for (Eigen::Index i = 0; i < N; ++i) v(i) = u0 == 0 ? cplx(1.0) : std::pow(z(i), static_cast<int>(u0));
    ArnoldiFit fit;
    fit.s0 = v.norm();
    if (!(fit.s0 > 0.0) || !std::isfinite(fit.s0)) throw std::runtime_error("approximate: degenerate start vector");
    Q.col(0) = v / fit.s0;
    long k_used = 0;
    for (long k = 0; k < d; ++k) {
        VecC w = z.cwiseProduct(Q.col(k));
        VecC h = Q.leftCols(k + 1).adjoint() * w;
        w -= Q.leftCols(k + 1) * h;
        VecC h2 = Q.leftCols(k + 1).adjoint() * w;
        w -= Q.leftCols(k + 1) * h2;
        h += h2;
        double nw = w.norm();
        H.col(k).head(k + 1) = h;
        if (nw < 1e-13 * h.norm() || nw == 0.0) break;  // basis exhausted on this grid
        H(k + 1, k) = nw;
        Q.col(k + 1) = w / nw;
        k_used = k + 1;
    }
    fit.degree = k_used;
    fit.H = H.topLeftCorner(k_used + 1, std::max<long>(k_used, 1));
    fit.c = Q.leftCols(k_used + 1).adjoint() * f;
    fit.fit_residual = (Q.leftCols(k_used + 1) * fit.c - f).cwiseAbs().maxCoeff();
    return fit;
}

// Largest intermediate magnitude of the monomial recurrence, in long double.
long double recurrence_magnitude(const ArnoldiFit& fit) {
    using cl = std::complex<long double>;
    const long d = fit.degree;
    std::vector<std::vector<cl>> pi(d + 1);
    pi[0] = {cl(1.0L / fit.s0)};
    long double mx = std::abs(pi[0][0] * cl(fit.c(0)));
    for (long k = 0; k < d; ++k) {
        std::vector<cl> nx(k + 2, cl(0));
        for (long i = 0; i <= k; ++i) nx[i + 1] = pi[k][i];
        for (long j = 0; j <= k; ++j) {
            cl h(fit.H(j, k));
            for (long i = 0; i <= j; ++i) {
                cl t = h * pi[j][i];
                mx = std::max(mx, std::abs(t));
                nx[i] -= t;
            }
        }
        cl inv = cl(1.0L) / cl(fit.H(k + 1, k));
        for (auto& x : nx) {
            x *= inv;
            mx = std::max(mx, std::abs(x) * std::abs(cl(fit.c(k + 1))));
        }
        pi[k + 1] = std::move(nx);
    }
    return mx;
}

// Monomial coefficients of z^u0 * sum_k c_k pi_k(z), computed in MPFR.
Poly to_monomial(const ArnoldiFit& fit, long u0, long bits) {
    const long d = fit.degree;
    std::vector<std::vector<CNum>> pi(d + 1);
    Real one(1.0, bits);
    pi[0].emplace_back(Real(1.0, bits) / Real(fit.s0, bits), Real(bits));
    std::vector<CNum> acc(d + 1, CNum(bits));
    auto axpy = [&](std::vector<CNum>& y, const std::vector<CNum>& x, cplx a, Real& tr, Real& ti) {
        Real ar(a.real(), bits), ai(a.imag(), bits);
        for (std::size_t i = 0; i < x.size(); ++i) {
            mpfr_fmms(tr.get(), ar.get(), x[i].re().get(), ai.get(), x[i].im().get(), MPFR_RNDN);
            mpfr_fmma(ti.get(), ar.get(), x[i].im().get(), ai.get(), x[i].re().get(), MPFR_RNDN);
            mpfr_add(y[i].re().get(), y[i].re().get(), tr.get(), MPFR_RNDN);
            mpfr_add(y[i].im().get(), y[i].im().get(), ti.get(), MPFR_RNDN);
        }
    };
    Real tr(bits), ti(bits);
    axpy(acc, pi[0], fit.c(0), tr, ti);
    for (long k = 0; k < d; ++k) {
        std::vector<CNum> nx(k + 2, CNum(bits));
        for (long i = 0; i <= k; ++i) nx[i + 1] = pi[k][i];
        for (long j = 0; j <= k; ++j) axpy(nx, pi[j], -fit.H(j, k), tr, ti);
        cplx inv = 1.0 / fit.H(k + 1, k);
        Real ir(inv.real(), bits), ii(inv.imag(), bits);
        CNum sc(std::move(ir), std::move(ii));
        for (auto& x : nx) x *= sc;
        pi[k + 1] = std::move(nx);
        axpy(acc, pi[k + 1], fit.c(k + 1), tr, ti);
    }
    for (auto& x : acc) {
        check_finite(x.re().get(), "approximate");
        check_finite(x.im().get(), "approximate");
    }
    return shift(Poly(std::move(acc), bits), static_cast<std::size_t>(u0));
}

long bits_for(long double magnitude, double tol, long d) {
    double need = static_cast<double>(std::log2(std::max<long double>(magnitude, 1.0L))) - std::log2(tol) +
                  std::log2(static_cast<double>(d + 1)) + 64.0;
    return std::max<long>(kDefaultBits, static_cast<long>(std::ceil(need)));
}

bool same_poly(const Poly& a, const Poly& b) {
    if (a.degree() != b.degree()) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (!(a[k] == b[k])) return false;
    return true;
}

}  // namespace

// ---------------------------------------------------------------- PieceTarget

PieceTarget PieceTarget::constant(cplx c) {
    PieceTarget t;
    t.kind = Kind::Constant;
    t.c = c;
    return t;
}

PieceTarget PieceTarget::polynomial(Poly q) {
    PieceTarget t;
    t.kind = Kind::Polynomial;
    t.q = std::move(q);
    return t;
}

PieceTarget PieceTarget::modulated(long u, Poly q, Poly p) {
    if (u < 0) throw std::invalid_argument("modulated target: u must be nonnegative");
    PieceTarget t;
    t.kind = Kind::Modulated;
    t.u = u;
    t.q = std::move(q);
    t.p = std::move(p);
    return t;
}

std::vector<cplx> PieceTarget::eval(std::span<const cplx> zs) const {
    switch (kind) {
        case Kind::Constant:
            return std::vector<cplx>(zs.size(), c);
        case Kind::Polynomial:
            return eval_many(q, zs);
        case Kind::Modulated: {
            std::vector<cplx> v = eval_many(q - p, zs);
            for (std::size_t i = 0; i < zs.size(); ++i) v[i] *= std::pow(zs[i], -static_cast<int>(u));
            return v;
        }
    }
    return {};
}

long PieceTarget::error_degree(long approx_degree) const {
    long dp = std::max<long>(approx_degree, 0);
    switch (kind) {
        case Kind::Constant:
            return dp;
        case Kind::Polynomial:
            return std::max(dp, q.degree());
        case Kind::Modulated:
            return std::max(dp + u, (q - p).degree());
    }
    return dp;
}

std::optional<Poly> PieceTarget::as_poly(long bits) const {
    if (kind == Kind::Constant) return Poly::constant(c, bits);
    if (kind == Kind::Polynomial) return q;
    return std::nullopt;
}

nlohmann::json certificate_to_json(const ApproxCertificate& c) {
    nlohmann::json pieces = nlohmann::json::array();
    for (const auto& p : c.pieces)
        pieces.push_back({{"raw", p.raw}, {"margin_factor", p.margin_factor}, {"certified", p.certified},
                          {"points", p.points}, {"density", p.density}});
    return {{"degree", c.degree},
            {"nominal_degree", c.nominal_degree},
            {"certified_sup_error", c.certified_sup_error},
            {"raw_sup_error", c.raw_sup_error},
            {"validation_density", c.validation_density},
            {"margin_factor", c.margin_factor},
            {"validation_points", c.validation_points},
            {"bits", c.bits},
            {"pieces", pieces}};
}

// ---------------------------------------------------------------- certification

ApproxCertificate certify(const CompactTarget& K, std::span<const PieceTarget> target, const Poly& P,
                          std::size_t min_points) {
    auto pieces = K.pieces();
    if (target.size() != pieces.size()) throw std::invalid_argument("certify: one target per piece required");
    ApproxCertificate cert;
    cert.degree = P.degree();
    cert.bits = P.bits();
    cert.validation_density = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        long D = target[i].error_degree(P.degree());
        std::size_t n = std::max<std::size_t>(min_points, static_cast<std::size_t>(16 * std::max<long>(D, 4)));
        PieceGrid g = validation_nodes(K, pieces[i], n);
        std::vector<cplx> pv = eval_many(P, g.points);
        std::vector<cplx> tv = target[i].eval(g.points);
        PieceError e;
        for (std::size_t j = 0; j < g.points.size(); ++j) e.raw = std::max(e.raw, std::abs(pv[j] - tv[j]));
        e.points = g.points.size();
        e.margin_factor = std::isinf(g.circle_equiv) ? 1.0 : margin_factor(D, static_cast<std::size_t>(g.circle_equiv));
        e.certified = e.raw * e.margin_factor;
        e.density = g.length > 0.0 ? static_cast<double>(e.points) / g.length : std::numeric_limits<double>::infinity();
        cert.raw_sup_error = std::max(cert.raw_sup_error, e.raw);
        cert.certified_sup_error = std::max(cert.certified_sup_error, e.certified);
        cert.margin_factor = std::max(cert.margin_factor, e.margin_factor);
        cert.validation_points += e.points;
        cert.validation_density = std::min(cert.validation_density, e.density);
        cert.pieces.push_back(e);
    }
    return cert;
}

// ---------------------------------------------------------------- engine

ApproxResult approximate(const CompactTarget& K, std::span<const PieceTarget> target, double tol, long max_degree,
                         const ApproxOptions& opts) {
    K.validate();
    auto pieces = K.pieces();
    if (target.size() != pieces.size()) throw std::invalid_argument("approximate: one target per piece required");
    if (!(tol > 0.0)) throw std::invalid_argument("approximate: tol must be positive");
    for (std::size_t i = 0; i < pieces.size(); ++i)
        if (target[i].kind == PieceTarget::Kind::Modulated && pieces[i].kind != PieceKind::Arc)
            throw std::invalid_argument("approximate: modulated targets are only allowed on arcs");
    const long u0 = opts.min_power;

    auto validation_min = [&](long d) { return static_cast<std::size_t>(opts.validation_factor) * fit_count(d, opts); };

    // zero polynomial
    ApproxResult best;
    best.poly = Poly(kDefaultBits);
    best.certificate = certify(K, target, best.poly, validation_min(0));
    best.certificate.nominal_degree = -1;
    if (best.certificate.certified_sup_error <= tol) return best;

    // the target is a single polynomial on all pieces
    if (auto p0 = target[0].as_poly(kDefaultBits)) {
        bool common = true;
        for (std::size_t i = 1; i < target.size() && common; ++i) {
            auto pi = target[i].as_poly(kDefaultBits);
            common = pi && same_poly(*pi, *p0);
        }
        bool low_ok = true;
        for (long k = 0; k < std::min<long>(u0, static_cast<long>(p0->size())); ++k) low_ok = low_ok && (*p0)[k].is_zero();
        if (common && low_ok && p0->degree() <= max_degree + u0) {
            ApproxResult r;
            r.poly = *p0;
            r.certificate = certify(K, target, r.poly, validation_min(std::max<long>(p0->degree(), 0)));
            r.certificate.nominal_degree = std::max<long>(p0->degree() - u0, 0);
            if (r.certificate.certified_sup_error <= tol) return r;
        }
    }

    std::vector<long> degrees{0};
    for (long d = opts.start_degree; d < max_degree; d *= 2) degrees.push_back(d);
    if (max_degree > 0) degrees.push_back(max_degree);

    std::optional<ArnoldiFit> best_fit;
    for (long d : degrees) {
        std::vector<cplx> Z, F;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            PieceGrid g = fit_nodes(K, pieces[i], fit_count(d, opts));
            auto tv = target[i].eval(g.points);
            Z.insert(Z.end(), g.points.begin(), g.points.end());
            F.insert(F.end(), tv.begin(), tv.end());
        }
        ArnoldiFit fit = arnoldi_fit(Z, F, d, u0);
        if (opts.on_round) opts.on_round(fit.degree, fit.fit_residual);
        if (!best_fit || fit.fit_residual < best_fit->fit_residual) best_fit = fit;
        if (fit.fit_residual > tol) continue;
        long bits = bits_for(recurrence_magnitude(fit), tol, fit.degree);
        ApproxResult r;
        r.poly = to_monomial(fit, u0, bits);
        r.certificate = certify(K, target, r.poly, validation_min(d));
        r.certificate.nominal_degree = fit.degree;
        if (r.certificate.certified_sup_error <= tol) return r;
        if (r.certificate.certified_sup_error < best.certificate.certified_sup_error) best = std::move(r);
    }

    if (best_fit && best_fit->fit_residual < best.certificate.certified_sup_error) {
        long bits = bits_for(recurrence_magnitude(*best_fit), tol, best_fit->degree);
        ApproxResult r;
        r.poly = to_monomial(*best_fit, u0, bits);
        r.certificate = certify(K, target, r.poly, validation_min(best_fit->degree));
        r.certificate.nominal_degree = best_fit->degree;
        if (r.certificate.certified_sup_error < best.certificate.certified_sup_error) best = std::move(r);
    }
    best.failed = true;
    best.message = "max_degree " + std::to_string(max_degree) + " exhausted; best certified error " +
                   std::to_string(best.certificate.certified_sup_error) + " > tol " + std::to_string(tol);
    return best;
}

// ---------------------------------------------------------------- sequences and tails

SequenceSpec SequenceSpec::power_law(double c, double p, long shift) {
    if (!(c >= 0.0)) throw std::invalid_argument("sequence scale must be nonnegative");
    if (shift < 0) throw std::invalid_argument("sequence shift must be nonnegative");
    SequenceSpec s;
    s.kind = Kind::Power;
    s.scale = c;
    s.power = p;
    s.shift = shift;
    return s;
}

SequenceSpec SequenceSpec::custom(std::function<double(long)> f) {
    SequenceSpec s;
    s.kind = Kind::Custom;
    s.fn = std::move(f);
    return s;
}

double SequenceSpec::operator()(long k) const {
    switch (kind) {
        case Kind::Zero:
            return 0.0;
        case Kind::Power: {
            double base = static_cast<double>(k + shift);
            if (base == 0.0) return power > 0.0 ? 0.0 : (power == 0.0 ? scale : std::numeric_limits<double>::infinity());
            return scale * std::pow(base, power);
        }
        case Kind::Custom:
            return fn(k);
    }
    return 0.0;
}

Real SequenceSpec::upper(long k, long bits) const {
    if (kind == Kind::Power && power == std::floor(power) && std::fabs(power) <= 64.0 && k + shift > 0) {
        // three roundings to nearest; pad by a few ulps
        Real v = Real(scale, bits) * pow(Real(static_cast<double>(k + shift), bits), static_cast<long>(power));
        return v + ldexp(v, 4 - bits);
    }
    double d = (*this)(k);
    return Real(d + std::fabs(d) * 0x1p-50, bits);
}

bool SequenceSpec::integer_polynomial() const {
    return kind == Kind::Power && power >= 0.0 && power == std::floor(power) && power <= 32.0;
}

nlohmann::json sequence_to_json(const SequenceSpec& s) {
    switch (s.kind) {
        case SequenceSpec::Kind::Zero:
            return {{"kind", "zero"}};
        case SequenceSpec::Kind::Power:
            return {{"kind", "power"}, {"scale", s.scale}, {"power", s.power}, {"shift", s.shift}};
        case SequenceSpec::Kind::Custom:
            return {{"kind", "custom"}};
    }
    return {};
}

SequenceSpec sequence_from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") return SequenceSpec::zero();
    if (kind == "power")
        return SequenceSpec::power_law(j.at("scale").get<double>(), j.at("power").get<double>(), j.value("shift", 0L));
    if (kind == "k4") return SequenceSpec::k4();
    if (kind == "2k2") return SequenceSpec::two_k2();
    if (kind == "inverse") return SequenceSpec::inverse_index();
    throw std::invalid_argument("unknown sequence kind '" + kind + "'");
}

namespace {

constexpr long kTailBits = 256;

// sum_{m>=0} m^i r^m for i = 0..imax
std::vector<Real> power_moments(const Real& r, int imax) {
    Real one(1.0, kTailBits);
    Real omr = one - r;
    std::vector<Real> S;
    S.push_back(one / omr);
    for (int i = 1; i <= imax; ++i) {
        Real acc(kTailBits);
        Real binom(1.0, kTailBits);
        for (int j = 0; j < i; ++j) {
            acc += binom * S[j];
            binom = binom * Real(static_cast<double>(i - j), kTailBits) / Real(static_cast<double>(j + 1), kTailBits);
        }
        S.push_back(r * acc / omr);
    }
    return S;
}

// coefficients of prod (linear factors) as polynomial in m
std::vector<Real> poly_mul_linear(const std::vector<Real>& a, const Real& c) {
    // a(m) * (m + c)
    std::vector<Real> out(a.size() + 1, Real(kTailBits));
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i + 1] += a[i];
        out[i] += a[i] * c;
    }
    return out;
}

// exact-form tail for w_k = scale (k+shift)^p with integer p >= 0:
// weighted = true gives sum_{k>=n} (k-n+1) w_k r^k, else sum_{k>=n} w_k r^k
Real closed_tail(const SequenceSpec& w, double r, long n, bool weighted) {
    int p = static_cast<int>(w.power);
    Real rr(r, kTailBits);
    Real base(static_cast<double>(n + w.shift), kTailBits);
    // (m + 1)^[weighted] (m + n + shift)^p
    std::vector<Real> poly{Real(1.0, kTailBits)};
    for (int i = 0; i < p; ++i) poly = poly_mul_linear(poly, base);
    if (weighted) poly = poly_mul_linear(poly, Real(1.0, kTailBits));
    auto S = power_moments(rr, static_cast<int>(poly.size()) - 1);
    Real sum(kTailBits);
    for (std::size_t i = 0; i < poly.size(); ++i) sum += poly[i] * S[i];
    return sum * pow(rr, n) * Real(w.scale, kTailBits);
}

// summation with a geometric closure; ratios of consecutive terms are
// nonincreasing for power laws, so the current ratio bounds the rest
double summed_tail(const SequenceSpec& w, double r, long n, double eps, bool weighted) {
    long double sum = 0.0L;
    long double floor_term = static_cast<long double>(eps) * std::ldexp(1.0L, -20);
    long double prev = -1.0L;
    long double max_ratio = 0.0L;
    long window = 0;
    const long kMaxTerms = 50'000'000;
    for (long k = n; k < n + kMaxTerms; ++k) {
        long double mult = weighted ? static_cast<long double>(k - n + 1) : 1.0L;
        long double t = mult * static_cast<long double>(w(k)) * std::pow(static_cast<long double>(r), static_cast<long double>(k));
        if (!std::isfinite(static_cast<double>(t))) throw TailDivergence("tail term is not finite");
        sum += t;
        if (prev > 0.0L) {
            long double ratio = t / prev;
            if (w.kind == SequenceSpec::Kind::Custom) {
                max_ratio = std::max(max_ratio, ratio);
                if (++window > 64 && t < floor_term && max_ratio < 1.0L)
                    return static_cast<double>(sum + t * max_ratio / (1.0L - max_ratio));
                if (window % 4096 == 0) max_ratio = ratio;
            } else if (t < floor_term && ratio < 1.0L) {
                return static_cast<double>(sum + t * ratio / (1.0L - ratio));
            }
        } else if (t == 0.0L && k > n + 64 && w.kind != SequenceSpec::Kind::Custom) {
            return static_cast<double>(sum);
        }
        prev = t;
    }
    throw TailDivergence("tail did not settle (ratio test fails persistently)");
}

}  // namespace

double double_tail(const SequenceSpec& w, double r, long n, double eps) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("tail: r must lie in (0,1)");
    if (w.kind == SequenceSpec::Kind::Zero || (w.kind == SequenceSpec::Kind::Power && w.scale == 0.0)) return 0.0;
    if (w.integer_polynomial()) return closed_tail(w, r, n, true).to_double();
    return summed_tail(w, r, n, eps, true);
}

double single_tail(const SequenceSpec& w, double r, long n, double eps) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("tail: r must lie in (0,1)");
    if (w.kind == SequenceSpec::Kind::Zero || (w.kind == SequenceSpec::Kind::Power && w.scale == 0.0)) return 0.0;
    if (w.integer_polynomial()) return closed_tail(w, r, n, false).to_double();
    return summed_tail(w, r, n, eps, false);
}

long tail_index(const SequenceSpec& w, double r, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("tail_index: eps must be positive");
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("tail_index: r must lie in (0,1)");
    if (w.kind == SequenceSpec::Kind::Zero || (w.kind == SequenceSpec::Kind::Power && w.scale == 0.0)) return 0;
    // closed forms are accurate to ~2^-250 relative; allow that much rounding
    const double slack = w.integer_polynomial() ? 1.0 + 0x1p-200 : 1.0;
    auto ok = [&](long n) { return double_tail(w, r, n, eps) <= eps * slack; };
    if (ok(0)) return 0;
    long hi = 1;
    while (!ok(hi)) {
        if (hi > (1L << 40)) throw TailDivergence("tail_index: no index found");
        hi *= 2;
    }
    long lo = hi / 2;  // fails (or is 0, which failed)
    while (hi - lo > 1) {
        long mid = lo + (hi - lo) / 2;
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

// ---------------------------------------------------------------- dilation radius

DilationResult uniform_dilation_radius(const std::function<cplx(cplx)>& expr, const Arc& K, double delta,
                                       double r_floor, long degree_hint) {
    if (!(delta > 0.0)) throw std::invalid_argument("uniform_dilation_radius: delta must be positive");
    if (!(r_floor >= 0.0 && r_floor < 1.0)) throw std::invalid_argument("uniform_dilation_radius: r_floor outside [0,1)");
    // 64 points per degree on the circle-equivalent scale
    double per_arc = 64.0 * static_cast<double>(std::max<long>(degree_hint, 1)) * K.length() / kTwoPi;
    std::size_t n = std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(per_arc)) + 1);
    std::vector<cplx> zs(n);
    std::vector<cplx> base(n);
    double lo = K.center_angle - K.half_width;
    for (std::size_t j = 0; j < n; ++j) {
        zs[j] = std::polar(1.0, lo + K.length() * static_cast<double>(j) / static_cast<double>(n - 1));
        base[j] = expr(zs[j]);
    }
    double equiv = static_cast<double>(n - 1) * kTwoPi / K.length();
    double mf = margin_factor(degree_hint, static_cast<std::size_t>(equiv));
    double best = std::numeric_limits<double>::infinity();
    double gap = 1.0 - r_floor;
    for (int k = 1; k <= 52; ++k) {
        double v = 1.0 - gap * std::ldexp(1.0, -k);
        if (!(v > r_floor && v < 1.0)) break;
        double raw = 0.0;
        for (std::size_t j = 0; j < n; ++j) raw = std::max(raw, std::abs(expr(v * zs[j]) - base[j]));
        double cert = raw * mf;
        best = std::min(best, cert);
        if (cert <= delta) return {v, cert, mf, n};
    }
    throw DilationSearchFailed("uniform_dilation_radius: no radius found above r_floor", best);
}

}  // namespace abelu
