#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abelu/geometry.hpp"
#include "abelu/numerics.hpp"

namespace abelu {

// Target on one piece of a CompactTarget.
//   Constant   : c
//   Polynomial : q(z)
//   Modulated  : z^(-u) (q(z) - p(z)), arcs only
struct PieceTarget {
    enum class Kind { Constant, Polynomial, Modulated };

    Kind kind = Kind::Constant;
    cplx c{0.0, 0.0};
    Poly q;
    Poly p;
    long u = 0;

    static PieceTarget constant(cplx c);
    static PieceTarget polynomial(Poly q);
    static PieceTarget modulated(long u, Poly q, Poly p);

    std::vector<cplx> eval(std::span<const cplx> zs) const;
    // Degree of the trigonometric polynomial |P - target| on a circle, given deg P.
    long error_degree(long approx_degree) const;
    // The target as a polynomial, if it is one.
    std::optional<Poly> as_poly(long bits) const;
};

struct PieceError {
    double raw = 0.0;
    double margin_factor = 1.0;
    double certified = 0.0;
    std::size_t points = 0;
    double density = 0.0;  // points per unit length
};

struct ApproxCertificate {
    long degree = -1;          // degree of the returned polynomial
    long nominal_degree = -1;  // basis size used by the fit
    double certified_sup_error = 0.0;
    double raw_sup_error = 0.0;
    double validation_density = 0.0;
    double margin_factor = 1.0;
    std::size_t validation_points = 0;
    long bits = 0;
    std::vector<PieceError> pieces;
};

nlohmann::json certificate_to_json(const ApproxCertificate& c);

struct ApproxOptions {
    long min_power = 0;         // result is z^min_power * (polynomial)
    long start_degree = 16;     // first escalation degree; doubled each round
    long fit_per_degree = 4;    // fit nodes per piece: fit_per_degree * d + 64
    long validation_factor = 3; // validation grid is this many times denser than the fit grid
    std::function<void(long, double)> on_round;  // (degree, fit residual) after each fit
};

struct ApproxResult {
    Poly poly;
    ApproxCertificate certificate;
    bool failed = false;
    std::string message;
};

ApproxResult approximate(const CompactTarget& K, std::span<const PieceTarget> target, double tol, long max_degree,
                         const ApproxOptions& opts = {});

// Certified error of P against the target on an equispaced grid with at least
// min_points per piece (more if the degree requires it).
ApproxCertificate certify(const CompactTarget& K, std::span<const PieceTarget> target, const Poly& P,
                          std::size_t min_points);

// Nonnegative sequence k -> c * (k + shift)^power, or a user function.
struct SequenceSpec {
    enum class Kind { Zero, Power, Custom };

    Kind kind = Kind::Zero;
    double scale = 0.0;
    double power = 0.0;
    long shift = 0;
    std::function<double(long)> fn;

    static SequenceSpec zero() { return {}; }
    static SequenceSpec power_law(double c, double p, long shift);
    static SequenceSpec custom(std::function<double(long)> f);
    static SequenceSpec k4() { return power_law(1.0, 4.0, 0); }
    static SequenceSpec two_k2() { return power_law(2.0, 2.0, 0); }
    static SequenceSpec inverse_index() { return power_law(1.0, -1.0, 1); }  // 1/(k+1)

    double operator()(long k) const;
    // value at k rounded up, never below the exact term
    Real upper(long k, long bits) const;
    bool integer_polynomial() const;
};

nlohmann::json sequence_to_json(const SequenceSpec& s);
SequenceSpec sequence_from_json(const nlohmann::json& j);

class TailDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Upper bound for sum_{j>=n} sum_{k>=j} w_k r^k = sum_{k>=n} (k-n+1) w_k r^k.
double double_tail(const SequenceSpec& w, double r, long n, double eps);
// Same, single tail sum_{k>=n} w_k r^k.
double single_tail(const SequenceSpec& w, double r, long n, double eps);

long tail_index(const SequenceSpec& w, double r, double eps);

class DilationSearchFailed : public std::runtime_error {
public:
    DilationSearchFailed(const std::string& msg, double achieved) : std::runtime_error(msg), achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

struct DilationResult {
    double v = 0.0;
    double certified = 0.0;  // grid sup times margin
    double margin_factor = 1.0;
    std::size_t grid_points = 0;
};

// v in (r_floor, 1) with sup over the arc grid of |expr(v z) - expr(z)| <= delta.
// degree_hint sizes the grid and the margin factor.
DilationResult uniform_dilation_radius(const std::function<cplx(cplx)>& expr, const Arc& K, double delta,
                                       double r_floor, long degree_hint = 0);

}  // namespace abelu
