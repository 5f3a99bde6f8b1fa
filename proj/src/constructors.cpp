#include "abelu/constructors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

namespace abelu {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// smallest u >= lo with pred(u); pred must be monotone
long smallest_index(long lo, const std::function<bool(long)>& pred) {
    if (pred(lo)) return lo;
    long step = 1;
    long hi = lo + step;
    while (!pred(hi)) {
        if (step > (1L << 40)) throw std::runtime_error("index search did not terminate");
        lo = hi;
        step *= 2;
        hi = lo + step;
    }
    while (hi - lo > 1) {
        long mid = lo + (hi - lo) / 2;
        (pred(mid) ? hi : lo) = mid;
    }
    return hi;
}

std::vector<cplx> arc_points(const Arc& a, std::size_t n) {
    std::vector<cplx> z(n);
    double lo = a.center_angle - a.half_width;
    for (std::size_t j = 0; j < n; ++j)
        z[j] = std::polar(1.0, lo + a.length() * static_cast<double>(j) / static_cast<double>(n - 1));
    return z;
}

Real inverse(double r, long bits) { return Real(1.0, bits) / Real(r, bits); }

void log_to(const ConstructionOptions& o, const std::string& s) {
    if (o.log) o.log(s);
}

// P_n(z) = H(z / r) where H ~ 0 on |zeta| <= R/r and H ~ phi - S(r zeta) on the arc.
ApproxResult zeta_step(const std::optional<std::pair<Poly, Arc>>& target, const Poly& S, double r, double R,
                       double eps, long u, long max_degree, Poly& P) {
    CompactTarget K;
    K.disc_r = R / r;
    std::vector<PieceTarget> t{PieceTarget::constant(0.0)};
    if (target) {
        K.arcs.push_back(target->second);
        Poly T = target->first.with_bits(std::max(target->first.bits(), S.bits()));
        T -= dilate(S, Real(r, S.bits()));
        t.push_back(PieceTarget::polynomial(std::move(T)));
    }
    ApproxOptions o;
    o.min_power = u;
    ApproxResult res = approximate(K, t, eps, max_degree, o);
    P = res.poly.is_zero() ? Poly(res.poly.bits()) : rescale(res.poly, inverse(r, res.poly.bits()));
    return res;
}

double sup_on(const Poly& p, std::span<const cplx> zs, const std::function<cplx(cplx)>& ref, double scale) {
    std::vector<cplx> scaled(zs.begin(), zs.end());
    for (auto& z : scaled) z *= scale;
    auto v = eval_many(p, scaled);
    double m = 0.0;
    for (std::size_t j = 0; j < zs.size(); ++j) m = std::max(m, std::abs(v[j] - ref(zs[j])));
    return m;
}

// sum_{i in [lo, hi]} |b_i| r^i
double block_weight(const Poly& Q, long lo, long hi, double r) {
    double s = 0.0;
    for (long i = lo; i <= hi && i < static_cast<long>(Q.size()); ++i) {
        double b = abs(Q[static_cast<std::size_t>(i)]).to_double();
        if (b != 0.0) s += b * std::pow(r, static_cast<double>(i));
    }
    return s;
}

// Dilate check shared by the three Q-block constructions.
nlohmann::json dilate_check(const Poly& f, const TargetEnrollment& enroll, const StageRecord& st, const Poly& Q,
                            const StagePolicy& policy, std::size_t npts) {
    if (!st.pair) return nullptr;
    const Poly& phi = enroll.phis[st.pair->first];
    const Arc& arc = enroll.arcs[st.pair->second];
    auto zs = arc_points(arc, npts);
    double err = sup_on(f, zs, [&](cplx z) { return eval(phi, z); }, st.radius);
    double qterm = block_weight(Q, st.block_lo, st.block_hi, st.radius);
    double budget = 2.0 * st.eps + qterm + policy.eps_tail(st.n);
    return {{"sup_error", err}, {"budget", budget}, {"q_term", qterm}, {"points", npts}, {"pass", err <= budget}};
}

nlohmann::json convergence_check(const Poly& P, const Poly& Q, const StageRecord& st) {
    Poly B = P + Q;
    CircleSup s = circle_sup(B, st.aux_radius);
    double tail = block_weight(Q, st.block_lo, st.block_hi, st.aux_radius);
    double budget = 2.0 * st.eps + tail;
    return {{"sup_certified", s.certified}, {"grid_points", s.grid_points}, {"margin_factor", s.margin_factor},
            {"budget", budget}, {"pass", s.certified <= budget}};
}

StageRecord start_record(int n, long u, double r, double R, double eps,
                         std::optional<std::pair<std::size_t, std::size_t>> pair) {
    StageRecord st;
    st.n = n;
    st.u = u;
    st.radius = r;
    st.aux_radius = R;
    st.eps = eps;
    st.pair = pair;
    return st;
}

void finish_block(StageRecord& st, const Poly& P) {
    st.p_degree = P.degree();
    st.block_lo = st.u;
    st.block_hi = P.is_zero() ? st.u : P.degree();
}

long max_bits(const Poly& a, long b) { return std::max(a.bits(), b); }

}  // namespace

// ---------------------------------------------------------------- StagePolicy

StagePolicy StagePolicy::dyadic(int stages) {
    StagePolicy p;
    p.stages_ = stages;
    p.dyadic_ = true;
    p.validate();
    return p;
}

StagePolicy StagePolicy::explicit_radii(int stages, std::vector<double> eps, std::vector<double> rho,
                                        std::vector<double> aux) {
    StagePolicy p;
    p.stages_ = stages;
    p.dyadic_ = false;
    p.eps_ = std::move(eps);
    p.rho_ = std::move(rho);
    p.aux_ = std::move(aux);
    p.validate();
    return p;
}

StagePolicy StagePolicy::from_rho(int stages, std::vector<double> rho) {
    std::vector<double> eps, aux{0.0};
    for (int n = 1; n <= stages; ++n) eps.push_back(std::ldexp(1.0, -n - 2));
    for (std::size_t j = 1; j < rho.size(); ++j) aux.push_back(std::sqrt(rho[j - 1] * rho[j]));
    return explicit_radii(stages, std::move(eps), std::move(rho), std::move(aux));
}

double StagePolicy::eps(int n) const {
    if (n < 1 || n > stages_) throw std::out_of_range("eps index outside 1..N");
    if (dyadic_ || eps_.empty()) return std::ldexp(1.0, -n - 2);
    return eps_.at(static_cast<std::size_t>(n - 1));
}

double StagePolicy::eps_tail(int n) const {
    if (dyadic_ || eps_.empty()) return std::ldexp(1.0, -n - 2);
    double s = 0.0;
    for (std::size_t i = static_cast<std::size_t>(n); i < eps_.size(); ++i) s += eps_[i];
    return s;
}

double StagePolicy::r(long j) const {
    if (j < 0) throw std::out_of_range("radius index must be nonnegative");
    if (dyadic_) return 1.0 - std::ldexp(1.0, static_cast<int>(-j - 1));
    if (static_cast<std::size_t>(j) >= rho_.size())
        throw std::out_of_range("policy has no radius r_" + std::to_string(j));
    return rho_[static_cast<std::size_t>(j)];
}

double StagePolicy::R(long j) const {
    if (j < 1) throw std::out_of_range("aux radius index must be >= 1");
    if (dyadic_) return 0.5 * (r(j - 1) + r(j));
    if (static_cast<std::size_t>(j) >= aux_.size())
        throw std::out_of_range("policy has no aux radius R_" + std::to_string(j));
    return aux_[static_cast<std::size_t>(j)];
}

long StagePolicy::radius_count() const { return dyadic_ ? -1 : static_cast<long>(rho_.size()); }

void StagePolicy::validate() const {
    if (stages_ < 0) throw std::invalid_argument("stage count must be nonnegative");
    if (dyadic_) return;
    if (!eps_.empty()) {
        if (static_cast<int>(eps_.size()) < stages_) throw std::invalid_argument("eps sequence shorter than stage count");
        double sum = 0.0;
        for (std::size_t i = 0; i < eps_.size(); ++i) {
            if (!(eps_[i] > 0.0)) throw std::invalid_argument("eps must be positive");
            if (i > 0 && !(eps_[i] < eps_[i - 1])) throw std::invalid_argument("eps must be decreasing");
            sum += eps_[i];
        }
        if (sum > 0.5) throw std::invalid_argument("sum of eps exceeds 1/2");
    }
    if (rho_.size() < static_cast<std::size_t>(stages_) + 2)
        throw std::invalid_argument("need radii r_0 .. r_{N+1}");
    if (aux_.size() != rho_.size()) throw std::invalid_argument("aux radii must align with rho");
    for (std::size_t j = 0; j < rho_.size(); ++j) {
        if (!(rho_[j] >= 0.0 && rho_[j] < 1.0)) throw std::invalid_argument("radii must lie in [0,1)");
        if (j > 0 && !(rho_[j] > rho_[j - 1])) throw std::invalid_argument("radii must increase");
        if (j >= 1 && !(aux_[j] > 0.0 && aux_[j] < rho_[j])) throw std::invalid_argument("need 0 < R_n < r_n");
        if (j >= 1 && !(rho_[j - 1] < aux_[j])) throw std::invalid_argument("need r_{n-1} < R_n");
    }
}

nlohmann::json StagePolicy::to_json() const {
    nlohmann::json j{{"stages", stages_}, {"kind", dyadic_ ? "dyadic" : "explicit"}};
    std::vector<double> e;
    for (int n = 1; n <= stages_; ++n) e.push_back(eps(n));
    j["eps"] = e;
    if (!dyadic_) {
        j["rho"] = rho_;
        j["aux"] = aux_;
    }
    return j;
}

StagePolicy StagePolicy::from_json(const nlohmann::json& j) {
    int stages = j.at("stages").get<int>();
    std::string kind = j.value("kind", std::string("dyadic"));
    if (kind == "dyadic") return dyadic(stages);
    std::vector<double> rho = j.at("rho").get<std::vector<double>>();
    if (!j.contains("aux")) {
        StagePolicy p = from_rho(stages, rho);
        if (j.contains("eps")) p = explicit_radii(stages, j["eps"].get<std::vector<double>>(), p.rho_, p.aux_);
        return p;
    }
    std::vector<double> eps = j.contains("eps") ? j["eps"].get<std::vector<double>>() : std::vector<double>{};
    return explicit_radii(stages, eps, rho, j.at("aux").get<std::vector<double>>());
}

// ---------------------------------------------------------------- TargetEnrollment

TargetEnrollment TargetEnrollment::round_robin(std::vector<Poly> phis, std::vector<Arc> arcs,
                                               std::vector<std::pair<std::size_t, std::size_t>> pairs, int stages) {
    TargetEnrollment e{std::move(phis), std::move(arcs), std::move(pairs), {}};
    for (int n = 0; n < stages && !e.pairs.empty(); ++n) e.schedule.push_back(e.pairs[static_cast<std::size_t>(n) % e.pairs.size()]);
    return e;
}

TargetEnrollment TargetEnrollment::constants(std::vector<cplx> values, std::vector<Arc> arcs, int stages) {
    std::vector<Poly> phis;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < values.size(); ++i) {
        phis.push_back(Poly::constant(values[i], kDefaultBits));
        for (std::size_t a = 0; a < arcs.size(); ++a) pairs.emplace_back(i, a);
    }
    return round_robin(std::move(phis), std::move(arcs), std::move(pairs), stages);
}

void TargetEnrollment::validate(int stages) const {
    for (auto [a, b] : pairs)
        if (a >= phis.size() || b >= arcs.size()) throw std::invalid_argument("enrolled pair refers to a missing target");
    for (auto [a, b] : schedule)
        if (a >= phis.size() || b >= arcs.size()) throw std::invalid_argument("schedule refers to a missing target");
    if (pairs.empty()) return;
    if (static_cast<int>(schedule.size()) < stages) throw std::invalid_argument("schedule shorter than stage count");
    std::set<std::pair<std::size_t, std::size_t>> seen(schedule.begin(), schedule.begin() + stages);
    for (const auto& p : pairs)
        if (!seen.count(p)) throw std::invalid_argument("an enrolled pair never appears in the schedule");
}

std::optional<std::pair<std::size_t, std::size_t>> TargetEnrollment::at_stage(int n) const {
    if (pairs.empty() || n < 1 || static_cast<std::size_t>(n) > schedule.size()) return std::nullopt;
    return schedule[static_cast<std::size_t>(n - 1)];
}

nlohmann::json TargetEnrollment::to_json() const {
    nlohmann::json j;
    j["phis"] = nlohmann::json::array();
    for (const auto& p : phis) j["phis"].push_back(poly_to_json(p));
    j["arcs"] = nlohmann::json::array();
    for (const auto& a : arcs) j["arcs"].push_back({{"center", a.center_angle}, {"halfwidth", a.half_width}});
    j["pairs"] = pairs;
    j["schedule"] = schedule;
    return j;
}

TargetEnrollment TargetEnrollment::from_json(const nlohmann::json& j) {
    TargetEnrollment e;
    for (const auto& p : j.at("phis")) {
        if (p.is_number()) {
            e.phis.push_back(Poly::constant(p.get<double>(), kDefaultBits));
        } else if (p.contains("constant")) {
            const auto& c = p["constant"];
            cplx v = c.is_array() ? cplx(c[0].get<double>(), c[1].get<double>()) : cplx(c.get<double>(), 0.0);
            e.phis.push_back(Poly::constant(v, kDefaultBits));
        } else if (p.contains("precision_bits")) {
            e.phis.push_back(poly_from_json(p));
        } else if (p.contains("coeffs")) {
            std::vector<cplx> cs;
            for (const auto& c : p["coeffs"]) cs.emplace_back(c[0].get<double>(), c[1].get<double>());
            e.phis.push_back(Poly::from_cplx(cs, kDefaultBits));
        } else {
            throw std::invalid_argument("target must be a number, {constant}, or a polynomial");
        }
    }
    for (const auto& a : j.at("arcs")) e.arcs.emplace_back(a.at("center").get<double>(), a.at("halfwidth").get<double>());
    if (j.contains("pairs")) {
        e.pairs = j["pairs"].get<std::vector<std::pair<std::size_t, std::size_t>>>();
    } else {
        for (std::size_t i = 0; i < e.phis.size(); ++i)
            for (std::size_t a = 0; a < e.arcs.size(); ++a) e.pairs.emplace_back(i, a);
    }
    if (j.contains("schedule")) e.schedule = j["schedule"].get<std::vector<std::pair<std::size_t, std::size_t>>>();
    return e;
}

// ---------------------------------------------------------------- GrowthEnvelope

GrowthEnvelope GrowthEnvelope::inverse_sqrt_radius() {
    GrowthEnvelope g;
    g.w = [](double r) { return 1.0 / std::sqrt(1.0 - r); };
    g.description = "(1-r)^(-1/2)";
    g.A.segments.push_back({0.0, 0.0, 1.0});
    return g;
}

void GrowthEnvelope::validate() const {
    if (!w) throw std::invalid_argument("growth envelope needs w");
    if (!A.arcs.empty() || A.disc_r) throw std::invalid_argument("A must consist of radial segments");
    if (A.segments.empty()) throw std::invalid_argument("A must contain a radial segment");
    std::size_t contacts = 0;
    double angle = 0.0;
    for (const auto& s : A.segments) {
        if (s.to_r >= 1.0) {
            if (contacts > 0 && angular_distance(s.angle, angle) > 1e-12)
                throw std::invalid_argument("closure of A must meet the circle in exactly one point");
            angle = s.angle;
            ++contacts;
        }
    }
    if (contacts == 0) throw std::invalid_argument("closure of A must meet the circle");
    for (double r : {0.0, 0.5, 0.9, 0.99})
        if (!(w(r) >= 1.0)) throw std::invalid_argument("w must be >= 1");
}

cplx GrowthEnvelope::contact_point() const {
    for (const auto& s : A.segments)
        if (s.to_r >= 1.0) return std::polar(1.0, s.angle);
    throw std::invalid_argument("A has no contact point");
}

// ---------------------------------------------------------------- reports

nlohmann::json ledger_to_json(const DivergenceLedger& L) {
    nlohmann::json e = nlohmann::json::array();
    for (const auto& x : L.entries)
        e.push_back({{"l", x.l}, {"b", {x.b.real(), x.b.imag()}}, {"candidate_count", x.candidate_count},
                     {"hits", x.hits}, {"measure", x.measure}, {"bound", x.bound}, {"crossings", x.crossings},
                     {"slack", x.slack}, {"route", x.route}});
    return {{"grid", L.grid}, {"entries", e}};
}

nlohmann::json StageReport::to_json() const {
    nlohmann::json st = nlohmann::json::array();
    for (const auto& s : stages) {
        nlohmann::json j{{"n", s.n},
                         {"u", s.u},
                         {"radius", s.radius},
                         {"aux_radius", s.aux_radius},
                         {"eps", s.eps},
                         {"block", {s.block_lo, s.block_hi}},
                         {"p_degree", s.p_degree},
                         {"certificate", certificate_to_json(s.certificate)},
                         {"checks", s.checks}};
        if (s.v >= 0) j["v"] = s.v;
        j["pair"] = s.pair ? nlohmann::json({s.pair->first, s.pair->second}) : nlohmann::json(nullptr);
        st.push_back(j);
    }
    return {{"kind", kind},         {"completed", completed}, {"failed_stage", failed_stage},
            {"failure", failure},   {"bits", bits},           {"stages", st},
            {"checks", checks},     {"policy", policy},       {"enrollment", enrollment}};
}

// ---------------------------------------------------------------- growth-restricted

ConstructionResult construct_growth_restricted(const GrowthEnvelope& env, const TargetEnrollment& enroll,
                                               const StagePolicy& policy, const ConstructionOptions& opts) {
    env.validate();
    policy.validate();
    enroll.validate(policy.stages());
    const cplx zA = env.contact_point();
    for (const auto& a : enroll.arcs)
        if (a.contains_angle(std::arg(zA))) throw std::invalid_argument("an enrolled arc contains the contact point of A");

    ConstructionResult out;
    out.report.kind = "growth";
    out.report.policy = policy.to_json();
    out.report.enrollment = enroll.to_json();
    Poly S(kDefaultBits);

    // radii on A used for the envelope conditions
    std::vector<std::pair<cplx, double>> a_samples;  // (direction, radius)
    for (const auto& s : env.A.segments) {
        cplx dir = std::polar(1.0, s.angle);
        for (int k = 0; k < 4096; ++k) {
            double r = s.from_r + (s.to_r - s.from_r) * k / 4096.0;
            a_samples.emplace_back(dir, r);
        }
        if (s.to_r >= 1.0)
            for (double t = 0.01; t <= 12.0; t += 0.01) a_samples.emplace_back(dir, 1.0 - std::pow(10.0, -t));
    }

    long u_prev = 0, v_prev = 0, end_prev = 0;
    for (int n = 1; n <= policy.stages(); ++n) {
        const double eps = policy.eps(n);
        const double rv = policy.r(v_prev);
        auto pair = enroll.at_stage(n);
        Poly phi = pair ? enroll.phis[pair->first] : Poly(kDefaultBits);
        cplx c = eval(phi, zA) - eval(S, zA);
        const double ac = std::abs(c);

        auto envelope_ok = [&](long u) {
            if (ac == 0.0) return true;
            if (ac * std::pow(rv, static_cast<double>(u)) > eps) return false;
            for (const auto& [dir, r] : a_samples)
                if (ac * std::pow(r, static_cast<double>(u)) > eps * env.w(r)) return false;
            return true;
        };
        long lo = std::max(u_prev + 1, n == 1 ? 1L : end_prev + 1);
        long u = smallest_index(lo, envelope_ok);
        StageRecord st = start_record(n, u, rv, 0.0, eps, pair);
        log_to(opts, "growth stage " + std::to_string(n) + ": c = " + std::to_string(ac) + ", u = " + std::to_string(u));

        CompactTarget K;
        K.disc_r = rv;
        K.segments = env.A.segments;
        std::vector<PieceTarget> targets{PieceTarget::constant(c)};
        for (std::size_t i = 0; i < K.segments.size(); ++i) targets.push_back(PieceTarget::constant(c));
        if (pair) {
            K.arcs.push_back(enroll.arcs[pair->second]);
            // pieces are ordered disc, arcs, segments
            targets.insert(targets.begin() + 1, PieceTarget::modulated(u, phi, S));
        }
        ApproxResult res = approximate(K, targets, eps, opts.max_degree);
        st.certificate = res.certificate;
        if (res.failed) {
            out.report.completed = false;
            out.report.failed_stage = n;
            out.report.failure = "stage " + std::to_string(n) + ": " + res.message;
            st.checks = {{"c", ac}};
            out.report.stages.push_back(st);
            break;
        }
        const Poly& Pstar = res.poly;

        long v = v_prev + 1;
        nlohmann::json vinfo;
        if (pair) {
            const Arc& arc = enroll.arcs[pair->second];
            Poly diff = phi - S;
            auto e = [&](cplx z) {
                return eval(Pstar, z) - std::pow(z, -static_cast<int>(u)) * eval(diff, z);
            };
            long hint = std::max<long>(Pstar.degree(), 0) + u + std::max<long>(diff.degree(), 0);
            DilationResult dr = uniform_dilation_radius(e, arc, eps, rv, hint);
            // smallest policy radius beyond v_{n-1} at or above the returned v, re-verified
            v = v_prev + 1;
            while (policy.r(v) < dr.v) ++v;
            auto zs = arc_points(arc, dr.grid_points);
            std::vector<cplx> ez(zs.size());
            for (std::size_t i = 0; i < zs.size(); ++i) ez[i] = e(zs[i]);
            auto recheck = [&](long j) {
                double rj = policy.r(j), m = 0.0;
                for (std::size_t i = 0; i < zs.size(); ++i) m = std::max(m, std::abs(e(rj * zs[i]) - ez[i]));
                return m * dr.margin_factor;
            };
            double achieved = recheck(v);
            while (achieved > eps) achieved = recheck(++v);
            vinfo = {{"v_continuous", dr.v}, {"unif_certified", achieved}, {"grid_points", dr.grid_points}};
        }
        Poly Pn = shift(Pstar, static_cast<std::size_t>(u));
        S += Pn;
        st.v = v;
        st.radius = policy.r(v);
        finish_block(st, Pn);
        st.checks = {{"c", ac}, {"uniform_continuity", vinfo}};
        out.report.stages.push_back(st);
        u_prev = u;
        v_prev = v;
        end_prev = st.block_hi;
    }
    out.f = S;
    out.report.bits = S.bits();

    // envelope on A and the dilate bounds, measured on the final f
    nlohmann::json env_check;
    double worst = 0.0;
    std::size_t samples = 0;
    for (const auto& s : env.A.segments) {
        cplx dir = std::polar(1.0, s.angle);
        double hi = std::min(s.to_r, 0.999);
        for (int k = 0; k < 500; ++k) {
            double r = s.from_r + (hi - s.from_r) * k / 499.0;
            double val = std::abs(eval(S, r * dir));
            worst = std::max(worst, val - env.w(r));
            ++samples;
        }
    }
    env_check = {{"samples", samples}, {"max_excess", worst}, {"pass", worst <= 1e-6}};
    out.report.checks["envelope"] = env_check;

    nlohmann::json dil = nlohmann::json::array();
    for (auto& st : out.report.stages) {
        if (!st.pair || st.v < 0) continue;
        const Poly& phi = enroll.phis[st.pair->first];
        auto zs = arc_points(enroll.arcs[st.pair->second], opts.check_points);
        double rv = st.radius;
        double e_dil = sup_on(S, zs, [&](cplx z) { return eval(phi, rv * z); }, rv);
        double e_phi = sup_on(S, zs, [&](cplx z) { return eval(phi, z); }, rv);
        double cont = 0.0;
        for (cplx z : zs) cont = std::max(cont, std::abs(eval(phi, rv * z) - eval(phi, z)));
        double budget = 2.0 * st.eps + 2.0 * policy.eps_tail(st.n);
        st.checks["dilate"] = {{"sup_error_dilated_target", e_dil}, {"sup_error_target", e_phi},
                               {"continuity_term", cont},          {"budget", budget},
                               {"points", zs.size()},
                               {"pass", e_dil <= budget && e_phi <= budget + cont}};
        dil.push_back(st.checks["dilate"]);
    }
    out.report.checks["dilate"] = dil;
    return out;
}

// ---------------------------------------------------------------- coefficient floor

ConstructionResult construct_coefficient_floor(const CoefficientFloor& floor, const TargetEnrollment& enroll,
                                               const StagePolicy& policy, const ConstructionOptions& opts) {
    policy.validate();
    enroll.validate(policy.stages());
    const SequenceSpec& g = floor.gamma;
    ConstructionResult out;
    out.report.kind = "floor";
    out.report.policy = policy.to_json();
    out.report.enrollment = enroll.to_json();
    out.report.checks["gamma"] = sequence_to_json(g);
    Poly S(kDefaultBits);
    std::vector<Poly> qs;
    long end_prev = 0;
    for (int n = 1; n <= policy.stages(); ++n) {
        const double eps = policy.eps(n), r = policy.r(n), R = policy.R(n), r_next = policy.r(n + 1),
                     R_next = policy.R(n + 1);
        const double x = r / R_next;
        long u_a1 = smallest_index(end_prev + 1, [&](long u) { return single_tail(g, r_next, u, eps) <= eps; });
        long u_a2 = std::max(end_prev + 1, tail_index(g, r, eps));
        long u_a3 = smallest_index(end_prev + 1, [&](long u) { return std::pow(x, static_cast<double>(u)) / (1.0 - x) <= eps; });
        long u = std::max({u_a1, u_a2, u_a3});
        auto pair = enroll.at_stage(n);
        StageRecord st = start_record(n, u, r, R, eps, pair);
        log_to(opts, "floor stage " + std::to_string(n) + ": u = " + std::to_string(u));

        std::optional<std::pair<Poly, Arc>> tgt;
        if (pair) tgt = std::make_pair(enroll.phis[pair->first], enroll.arcs[pair->second]);
        Poly P;
        ApproxResult res = zeta_step(tgt, S, r, R, eps, u, opts.max_degree, P);
        st.certificate = res.certificate;
        if (res.failed) {
            out.report.completed = false;
            out.report.failed_stage = n;
            out.report.failure = "stage " + std::to_string(n) + ": " + res.message;
            out.report.stages.push_back(st);
            break;
        }
        finish_block(st, P);
        long end = st.block_hi;
        long bits = max_bits(P, S.bits());

        // Q_n on indices end_prev+1 .. end
        std::vector<CNum> qc(static_cast<std::size_t>(end) + 1, CNum(bits));
        long gap_count = 0, doubled = 0;
        for (long i = end_prev + 1; i <= end; ++i) {
            Real gi = g.upper(i, bits);
            if (i < u) {
                qc[static_cast<std::size_t>(i)] = CNum(gi, Real(bits));
                ++gap_count;
            } else {
                CNum a = P.coeff(static_cast<std::size_t>(i));
                if (abs(a.re()) <= gi) {
                    qc[static_cast<std::size_t>(i)] = CNum(gi + gi, Real(bits));
                    ++doubled;
                }
            }
        }
        Poly Q(std::move(qc), bits);
        qs.push_back(Q);
        st.block_lo = end_prev + 1;
        S += P;
        S += Q;
        st.checks = {{"u_conditions", {{"single_tail_next", u_a1}, {"double_tail", u_a2}, {"ratio", u_a3}}},
                     {"gap_coefficients", gap_count},
                     {"doubled_coefficients", doubled},
                     {"convergence", convergence_check(P, Q, st)}};
        st.checks["q_block"] = {end_prev + 1, end};
        out.report.stages.push_back(st);
        end_prev = end;
    }
    out.f = S;
    out.report.bits = S.bits();

    // exact floor scan on stored coefficients
    long violations = 0, covered = 0;
    for (long k = 1; k <= end_prev && k < static_cast<long>(S.size()); ++k) {
        ++covered;
        Real gk = g.upper(k, S.bits());
        if (abs(S[static_cast<std::size_t>(k)]) < gk - ldexp(gk, 6 - S.bits())) ++violations;
    }
    out.report.checks["floor"] = {{"covered_from", 1}, {"covered_to", end_prev}, {"covered", covered},
                                  {"violations", violations}, {"pass", violations == 0}};
    nlohmann::json dil = nlohmann::json::array();
    for (std::size_t i = 0; i < qs.size(); ++i) {
        auto& st = out.report.stages[i];
        if (!st.pair) continue;
        st.checks["dilate"] = dilate_check(S, enroll, st, qs[i], policy, opts.check_points);
        dil.push_back(st.checks["dilate"]);
    }
    out.report.checks["dilate"] = dil;
    return out;
}

// ---------------------------------------------------------------- candidate packing

CandidatePacking::CandidatePacking(long l) : l_(l) {
    if (l < 2) throw std::invalid_argument("candidate packing needs l >= 2");
    // radius 4lJ <= l^4
    long double l4 = static_cast<long double>(l) * l * l * l;
    J_ = static_cast<long>(std::floor(l4 / (4.0L * l)));
    double need = static_cast<double>(l) * static_cast<double>(l);
    double have = 0.0;
    for (long j = 0; j <= J_ && have < need; ++j) have += static_cast<double>(count_on(j));
    if (have < need) throw std::logic_error("candidate packing has fewer than l^2 points");
}

long CandidatePacking::count_on(long j) const {
    if (j == 0) return 1;
    double rho = 4.0 * static_cast<double>(l_) * static_cast<double>(j);
    // adjacent chord 2 rho sin(pi/m) > 2l
    double m = std::ceil(std::numbers::pi / std::asin(static_cast<double>(l_) / rho)) - 1.0;
    return static_cast<long>(m);
}

cplx CandidatePacking::candidate(long j, long i) const {
    if (j == 0) return {0.0, 0.0};
    double rho = 4.0 * static_cast<double>(l_) * static_cast<double>(j);
    return std::polar(rho, kTwoPi * static_cast<double>(i) / static_cast<double>(count_on(j)));
}

double CandidatePacking::total() const {
    // closed-form sum for large packings; exact count for small ones
    if (J_ <= 100000) {
        double s = 0.0;
        for (long j = 0; j <= J_; ++j) s += static_cast<double>(count_on(j));
        return s;
    }
    double s = 0.0;
    for (long j = 0; j <= 100000; ++j) s += static_cast<double>(count_on(j));
    // m_j ~ 4 pi j - 1 for large j
    double a = 100001.0, b = static_cast<double>(J_);
    s += 2.0 * std::numbers::pi * (b * (b + 1) - a * (a - 1)) - (b - a + 1);
    return s;
}

std::optional<std::pair<long, long>> CandidatePacking::lookup(cplx x) const {
    double ax = std::abs(x);
    double lf = static_cast<double>(l_);
    if (!(ax <= 4.0 * lf * static_cast<double>(J_) + lf)) return std::nullopt;
    long j0 = static_cast<long>(std::llround(ax / (4.0 * lf)));
    for (long j = std::max<long>(0, j0 - 1); j <= std::min(J_, j0 + 1); ++j) {
        long m = count_on(j);
        double t = std::arg(x);
        if (t < 0) t += kTwoPi;
        long i0 = static_cast<long>(std::llround(t / kTwoPi * static_cast<double>(m)));
        for (long di = -1; di <= 1; ++di) {
            long i = ((i0 + di) % m + m) % m;
            if (std::abs(candidate(j, i) - x) <= lf) return std::make_pair(j, i);
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- divergence coefficient

namespace {

DivergenceChoice choose_from_centers(const std::vector<std::optional<cplx>>& centers, long l) {
    CandidatePacking pack(l);
    const std::size_t G = centers.size();
    std::map<std::pair<long, long>, std::size_t> hits;
    std::vector<std::optional<std::pair<long, long>>> owner(G);
    for (std::size_t j = 0; j < G; ++j) {
        if (!centers[j]) continue;
        owner[j] = pack.lookup(*centers[j]);
        if (owner[j]) ++hits[*owner[j]];
    }
    // candidates in order of |c|, then argument; the first one with no hits wins,
    // otherwise the smallest count
    std::pair<long, long> best{0, 0};
    std::size_t best_hits = std::numeric_limits<std::size_t>::max();
    bool found = false;
    for (long j = 0; j < pack.annuli() && !found; ++j) {
        long m = pack.count_on(j);
        for (long i = 0; i < m; ++i) {
            auto it = hits.find({j, i});
            std::size_t h = it == hits.end() ? 0 : it->second;
            if (h < best_hits) {
                best_hits = h;
                best = {j, i};
            }
            if (h == 0) {
                found = true;
                break;
            }
        }
    }
    DivergenceChoice out;
    out.b = pack.candidate(best.first, best.second);
    out.candidate_count = pack.total();
    out.hits = best_hits;
    out.measure = static_cast<double>(best_hits) * kTwoPi / static_cast<double>(G);
    for (std::size_t j = 0; j < G; ++j) {
        bool a = owner[j] && *owner[j] == best;
        bool b = owner[(j + 1) % G] && *owner[(j + 1) % G] == best;
        if (a != b) ++out.crossings;
    }
    return out;
}

cplx unit_power(std::size_t j, long l, std::size_t G) {
    std::size_t idx = static_cast<std::size_t>((static_cast<unsigned long long>(j) * static_cast<unsigned long long>(l)) % G);
    return std::polar(1.0, kTwoPi * static_cast<double>(idx) / static_cast<double>(G));
}

}  // namespace

DivergenceChoice choose_divergence_coefficient(std::span<const CNum> partial, long l) {
    const std::size_t G = partial.size();
    if (G == 0) throw std::invalid_argument("choose_divergence_coefficient: empty grid");
    const double limit = std::pow(static_cast<double>(l), 4.0) + 2.0 * static_cast<double>(l);
    std::vector<std::optional<cplx>> centers(G);
    for (std::size_t j = 0; j < G; ++j) {
        const CNum& X = partial[j];
        if (std::max(X.re().exponent(), X.im().exponent()) > 200) continue;
        cplx x = X.to_cplx();
        if (std::abs(x) > limit) continue;
        centers[j] = -x * std::conj(unit_power(j, l, G));
    }
    return choose_from_centers(centers, l);
}

DivergenceChoice choose_divergence_coefficient(std::span<const cplx> partial, long l) {
    const std::size_t G = partial.size();
    if (G == 0) throw std::invalid_argument("choose_divergence_coefficient: empty grid");
    std::vector<std::optional<cplx>> centers(G);
    for (std::size_t j = 0; j < G; ++j) centers[j] = -partial[j] * std::conj(unit_power(j, l, G));
    return choose_from_centers(centers, l);
}

// ---------------------------------------------------------------- lem1

CNum lem1_shift(std::span<const CNum> w, std::span<const CNum> z, double R) {
    if (w.size() != z.size()) throw std::invalid_argument("lem1_shift: length mismatch");
    if (!(R > 0.0)) throw std::invalid_argument("lem1_shift: R must be positive");
    long bits = kDefaultBits;
    for (const auto& x : w) bits = std::max(bits, x.bits());
    const long l = static_cast<long>(w.size());
    Real RR(R, bits);
    std::vector<Real> mod;
    for (const auto& x : w) mod.push_back(abs(x));
    for (long k = 0; k <= l; ++k) {
        Real b = Real(2.0 * static_cast<double>(k), bits) * RR;
        bool ok = true;
        for (const auto& m : mod)
            if (abs(m - b) < RR) {
                ok = false;
                break;
            }
        if (!ok) continue;
        CNum bc(b, Real(bits));
        for (std::size_t m = 0; m < w.size(); ++m)
            if (abs(w[m] + bc * z[m]) < RR) throw std::logic_error("lem1_shift: direct verification failed");
        return bc;
    }
    throw std::logic_error("lem1_shift: no candidate survived");
}

cplx lem1_shift(std::span<const cplx> w, std::span<const cplx> z, double R) {
    std::vector<CNum> W, Z;
    for (cplx x : w) W.emplace_back(x, kDefaultBits);
    for (cplx x : z) Z.emplace_back(x, kDefaultBits);
    return lem1_shift(W, Z, R).to_cplx();
}

// ---------------------------------------------------------------- a.e. and pointwise

namespace {

enum class Route { Measure, Pointwise };

ConstructionResult divergent_loop(Route route, std::span<const cplx> E, const TargetEnrollment& enroll,
                                  const StagePolicy& policy, std::size_t G, const ConstructionOptions& opts) {
    policy.validate();
    enroll.validate(policy.stages());
    const SequenceSpec w = route == Route::Measure ? SequenceSpec::k4() : SequenceSpec::two_k2();
    ConstructionResult out;
    out.report.kind = route == Route::Measure ? "ae" : "points";
    out.report.policy = policy.to_json();
    out.report.enrollment = enroll.to_json();
    DivergenceLedger ledger;
    ledger.grid = G;

    Poly S(kDefaultBits);
    std::vector<Poly> qs;
    long end_prev = 0;
    long bits = kDefaultBits;

    // running partial sums on the circle grid or at the points of E
    std::vector<CNum> roots, part;
    std::vector<CNum> zeta, zpow;
    if (route == Route::Measure) {
        for (std::size_t j = 0; j < G; ++j) {
            Real t = pi(bits) * Real(2.0 * static_cast<double>(j), bits) / Real(static_cast<double>(G), bits);
            roots.push_back(CNum::polar(Real(1.0, bits), t));
        }
        part.assign(G, CNum(bits));
    } else {
        for (cplx z : E) {
            zeta.emplace_back(z, bits);
            zpow.emplace_back(Real(1.0, bits), Real(bits));
            part.emplace_back(bits);
        }
    }
    long part_index = 0;  // part holds S_{part_index}

    for (int n = 1; n <= policy.stages(); ++n) {
        const double eps = policy.eps(n), r = policy.r(n), R = policy.R(n), R_next = policy.R(n + 1);
        const double x = r / R_next;
        long lo = route == Route::Measure ? std::max<long>(2, end_prev + 1) : std::max<long>(1, end_prev + 1);
        long u_b = std::max(lo, tail_index(w, r, eps));
        long u_c = smallest_index(lo, [&](long u) { return std::pow(x, static_cast<double>(u)) <= 1.0 - x; });
        long u = std::max(u_b, u_c);
        auto pair = enroll.at_stage(n);
        StageRecord st = start_record(n, u, r, R, eps, pair);
        log_to(opts, out.report.kind + " stage " + std::to_string(n) + ": u = " + std::to_string(u));

        std::optional<std::pair<Poly, Arc>> tgt;
        if (pair) tgt = std::make_pair(enroll.phis[pair->first], enroll.arcs[pair->second]);
        Poly P;
        ApproxResult res = zeta_step(tgt, S, r, R, eps, u, opts.max_degree, P);
        st.certificate = res.certificate;
        if (res.failed) {
            out.report.completed = false;
            out.report.failed_stage = n;
            out.report.failure = "stage " + std::to_string(n) + ": " + res.message;
            out.report.stages.push_back(st);
            break;
        }
        finish_block(st, P);
        const long end = st.block_hi;
        bits = std::max(bits, P.bits());

        std::vector<CNum> qc(static_cast<std::size_t>(end) + 1, CNum(bits));
        for (long l = u; l <= end; ++l) {
            CNum a = P.coeff(static_cast<std::size_t>(l));
            if (route == Route::Measure) {
                std::vector<CNum> X(G, CNum(bits));
                for (std::size_t j = 0; j < G; ++j) {
                    const CNum& wl = roots[(static_cast<unsigned long long>(j) * static_cast<unsigned long long>(l)) % G];
                    X[j] = part[j] + a * wl;
                }
                DivergenceChoice ch = choose_divergence_coefficient(std::span<const CNum>(X), l);
                CNum b(ch.b, bits);
                for (std::size_t j = 0; j < G; ++j) {
                    const CNum& wl = roots[(static_cast<unsigned long long>(j) * static_cast<unsigned long long>(l)) % G];
                    part[j] = X[j] + b * wl;
                }
                qc[static_cast<std::size_t>(l)] = b;
                double ld = static_cast<double>(l);
                ledger.entries.push_back({l, ch.b, ch.candidate_count, ch.hits, ch.measure, kTwoPi / (ld * ld),
                                          ch.crossings, kTwoPi * static_cast<double>(ch.crossings) / static_cast<double>(G),
                                          "measure"});
            } else {
                // advance the point partial sums through the zero gap up to index l - 1
                for (long k = part_index + 1; k < l; ++k) {
                    CNum ak = S.coeff(static_cast<std::size_t>(k));
                    for (std::size_t m = 0; m < zeta.size(); ++m) {
                        zpow[m] *= zeta[m];
                        if (!ak.is_zero()) part[m] += ak * zpow[m];
                    }
                }
                std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(l), zeta.size());
                std::vector<CNum> wv, zv;
                for (std::size_t m = 0; m < zeta.size(); ++m) {
                    zpow[m] *= zeta[m];
                    part[m] += a * zpow[m];
                }
                for (std::size_t m = 0; m < count; ++m) {
                    wv.push_back(part[m]);
                    zv.push_back(zpow[m]);
                }
                CNum b = lem1_shift(wv, zv, static_cast<double>(l));
                b.set_bits(bits);
                for (std::size_t m = 0; m < zeta.size(); ++m) part[m] += b * zpow[m];
                part_index = l;
                qc[static_cast<std::size_t>(l)] = b;
                ledger.entries.push_back({l, b.to_cplx(), static_cast<double>(l + 1), 0, 0.0, 0.0, 0, 0.0, "lem1"});
            }
        }
        Poly Q(std::move(qc), bits);
        qs.push_back(Q);
        S += P;
        S += Q;
        // the point partial sums are advanced lazily; bring them to the block end
        if (route == Route::Pointwise) part_index = end;
        st.checks = {{"u_conditions", {{"double_tail", u_b}, {"ratio", u_c}}}, {"convergence", convergence_check(P, Q, st)}};
        out.report.stages.push_back(st);
        end_prev = end;
    }
    out.f = S;
    out.report.bits = S.bits();

    nlohmann::json dil = nlohmann::json::array();
    for (std::size_t i = 0; i < qs.size(); ++i) {
        auto& st = out.report.stages[i];
        if (!st.pair) continue;
        st.checks["dilate"] = dilate_check(S, enroll, st, qs[i], policy, opts.check_points);
        dil.push_back(st.checks["dilate"]);
    }
    out.report.checks["dilate"] = dil;

    double max_b_ratio = 0.0;
    long over = 0;
    for (const auto& e : ledger.entries) {
        double l = static_cast<double>(e.l);
        double cap = route == Route::Measure ? l * l * l * l : 2.0 * l * l;
        max_b_ratio = std::max(max_b_ratio, std::abs(e.b) / cap);
        if (route == Route::Measure && e.measure > e.bound + e.slack) ++over;
    }
    out.report.checks["ledger"] = {{"entries", ledger.entries.size()}, {"max_b_over_cap", max_b_ratio},
                                   {"measure_violations", over}, {"pass", max_b_ratio <= 1.0 && over == 0}};
    out.ledger = std::move(ledger);
    return out;
}

}  // namespace

ConstructionResult construct_ae_divergent(const TargetEnrollment& enroll, const StagePolicy& policy,
                                          std::size_t circle_grid, const ConstructionOptions& opts) {
    if (circle_grid < 4096) throw std::invalid_argument("circle grid must have at least 2^12 points");
    return divergent_loop(Route::Measure, {}, enroll, policy, circle_grid, opts);
}

ConstructionResult construct_pointwise_divergent(std::span<const cplx> E, const TargetEnrollment& enroll,
                                                 const StagePolicy& policy, const ConstructionOptions& opts) {
    if (E.empty()) throw std::invalid_argument("E must be nonempty");
    for (std::size_t i = 0; i < E.size(); ++i) {
        if (std::fabs(std::abs(E[i]) - 1.0) > 1e-12) throw std::invalid_argument("points of E must be unimodular");
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(E[i] - E[j]) < 1e-12) throw std::invalid_argument("points of E must be distinct");
    }
    return divergent_loop(Route::Pointwise, E, enroll, policy, 0, opts);
}

}  // namespace abelu
