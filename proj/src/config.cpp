#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "config_detail.hpp"

namespace abelu {

namespace {

const std::set<std::string> kDiagnoseOps{"dilate_density_check",  "growth_metrics",        "gap_witnesses",
                                         "normality_scan",        "bloch_norm_estimate",   "picard_coverage",
                                         "radial_cluster_sample", "two_radii_bound_check", "partial_sum_divergence_profile"};

}  // namespace

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::ConstructGrowth: return "construct-growth";
        case ExperimentKind::ConstructFloor: return "construct-floor";
        case ExperimentKind::ConstructAe: return "construct-ae";
        case ExperimentKind::ConstructPoints: return "construct-points";
        case ExperimentKind::Diagnose: return "diagnose";
        case ExperimentKind::Capacity: return "capacity";
        case ExperimentKind::Approx: return "approx";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (auto k : {ExperimentKind::ConstructGrowth, ExperimentKind::ConstructFloor, ExperimentKind::ConstructAe,
                   ExperimentKind::ConstructPoints, ExperimentKind::Diagnose, ExperimentKind::Capacity, ExperimentKind::Approx})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown experiment kind '" + s + "'");
}

std::string subcommand_for(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Diagnose: return "diagnose";
        case ExperimentKind::Capacity: return "capacity";
        case ExperimentKind::Approx: return "approx";
        default: return "construct";
    }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be an object");
    if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("config needs a string 'kind'");
    ExperimentConfig c;
    c.kind = experiment_kind_from_string(j["kind"].get<std::string>());
    c.params = j;
    c.base_dir = base_dir;
    try {
        if (j.contains("precision_bits")) c.precision_bits = j["precision_bits"].get<long>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.precision_bits != 0 && (c.precision_bits < 53 || c.precision_bits > 1 << 20))
        throw ConfigError("precision_bits must lie in 53 .. 2^20");
    return c;
}

nlohmann::json ExperimentConfig::echo() const {
    nlohmann::json j = params;
    j["kind"] = to_string(kind);
    j["precision_bits"] = precision_bits;
    j["seed"] = seed;
    j.erase("out");
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return ExperimentConfig::from_json(j, path.parent_path());
}

namespace detail {

const nlohmann::json& block(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing block '") + key + "'");
    return j[key];
}

cplx point_from(const nlohmann::json& j) {
    if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
    if (j.is_object() && j.contains("angle")) return std::polar(1.0, j["angle"].get<double>());
    if (j.is_number()) return {j.get<double>(), 0.0};
    throw ConfigError("point must be [re, im], a number, or {angle}");
}

std::vector<cplx> points_from(const nlohmann::json& j) {
    if (!j.is_array()) throw ConfigError("expected a list of points");
    std::vector<cplx> out;
    for (const auto& p : j) out.push_back(point_from(p));
    return out;
}

std::vector<double> grid_from(const nlohmann::json& j) {
    if (j.is_array()) return j.get<std::vector<double>>();
    if (!j.is_object()) throw ConfigError("grid must be a list or an object");
    if (j.contains("log_to_one")) {
        // 1 - r log-spaced between 1 - from and 1 - to
        long n = j["log_to_one"].get<long>();
        double from = j.value("from", 0.0), to = j.value("to", 0.999);
        if (n < 2 || !(from >= 0.0 && from < to && to < 1.0)) throw ConfigError("log_to_one grid needs count >= 2 and 0 <= from < to < 1");
        std::vector<double> g;
        double a = std::log(1.0 - from), b = std::log(1.0 - to);
        for (long i = 0; i < n; ++i) g.push_back(1.0 - std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1)));
        return g;
    }
    long n = j.at("count").get<long>();
    double from = j.at("from").get<double>(), to = j.at("to").get<double>();
    if (n < 1) throw ConfigError("grid count must be positive");
    std::vector<double> g;
    for (long i = 0; i < n; ++i) g.push_back(n == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(n - 1));
    return g;
}

StagePolicy policy_from(const nlohmann::json& j) { return StagePolicy::from_json(j); }

TargetEnrollment enrollment_from(const nlohmann::json& j, long bits) {
    TargetEnrollment e = TargetEnrollment::from_json(j);
    for (auto& p : e.phis) p = p.with_bits(std::max(bits, p.bits()));
    return e;
}

GrowthEnvelope envelope_from(const nlohmann::json& j) {
    std::string kind = j.value("kind", std::string("inverse_sqrt"));
    GrowthEnvelope env = GrowthEnvelope::inverse_sqrt_radius();
    if (kind == "power") {
        double a = j.at("exponent").get<double>();
        if (!(a > 0.0)) throw ConfigError("envelope exponent must be positive");
        env.w = [a](double r) { return std::pow(1.0 - r, -a); };
        env.description = "(1-r)^(-" + std::to_string(a) + ")";
    } else if (kind != "inverse_sqrt") {
        throw ConfigError("envelope kind must be inverse_sqrt or power");
    }
    if (j.contains("angle")) env.A.segments[0].angle = j["angle"].get<double>();
    env.validate();
    return env;
}

ConstructionOptions construction_options_from(const nlohmann::json& j) {
    ConstructionOptions o;
    if (j.contains("max_degree")) o.max_degree = j["max_degree"].get<long>();
    if (j.contains("check_points")) o.check_points = j["check_points"].get<std::size_t>();
    if (o.max_degree < 1) throw ConfigError("max_degree must be positive");
    if (o.check_points < 2) throw ConfigError("check_points must be at least 2");
    return o;
}

long bits_of(const ExperimentConfig& cfg) { return cfg.precision_bits > 0 ? cfg.precision_bits : kDefaultBits; }

Poly poly_source(const ExperimentConfig& cfg, const nlohmann::json& j) {
    long bits = bits_of(cfg);
    if (j.contains("lacunary")) return lacunary(j["lacunary"].get<int>(), bits);
    if (j.contains("poly")) {
        Poly p = poly_from_json(j["poly"]);
        return cfg.precision_bits > 0 ? p.with_bits(bits) : p;
    }
    if (j.contains("input")) {
        std::filesystem::path p = j["input"].get<std::string>();
        if (p.is_relative() && !cfg.base_dir.empty() && !std::filesystem::exists(p)) p = cfg.base_dir / p;
        std::ifstream in(p);
        if (!in) throw ConfigError("cannot read input polynomial " + p.string());
        nlohmann::json doc = nlohmann::json::parse(in);
        Poly f = poly_from_json(doc);
        return cfg.precision_bits > 0 ? f.with_bits(bits) : f;
    }
    throw ConfigError("need one of 'input', 'poly', 'lacunary'");
}

Poly target_poly(const nlohmann::json& j, long bits) {
    if (j.is_number()) return Poly::constant(j.get<double>(), bits);
    if (j.is_array()) return Poly::constant(point_from(j), bits);
    if (j.is_object() && j.contains("constant")) return Poly::constant(point_from(j["constant"]), bits);
    if (j.is_object() && j.contains("precision_bits")) return poly_from_json(j);
    throw ConfigError("target must be a number, [re, im], {constant} or a polynomial");
}

std::vector<PieceTarget> pieces_from(const nlohmann::json& j, long bits) {
    if (!j.is_array()) throw ConfigError("pieces must be a list");
    std::vector<PieceTarget> out;
    for (const auto& p : j) {
        Poly q = target_poly(p, bits);
        if (q.degree() <= 0)
            out.push_back(PieceTarget::constant(q.coeff(0).to_cplx()));
        else
            out.push_back(PieceTarget::polynomial(q));
    }
    return out;
}

ValueWindow window_from(const nlohmann::json& j) {
    ValueWindow w;
    if (j.contains("center")) w.center = point_from(j["center"]);
    if (j.contains("half")) w.half = j["half"].get<double>();
    if (j.contains("cells")) w.cells = j["cells"].get<std::size_t>();
    if (!(w.half > 0.0) || w.cells == 0) throw ConfigError("value window needs half > 0 and cells > 0");
    return w;
}

PointCloud cloud_from(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    double density = j.value("density", 200.0);
    if (kind == "disc")
        return PointCloud::disc(j.contains("center") ? point_from(j["center"]) : cplx(0.0, 0.0), j.at("radius").get<double>(), density);
    if (kind == "segment") return PointCloud::segment(point_from(j.at("a")), point_from(j.at("b")), density);
    if (kind == "annulus") return PointCloud::annulus(j.at("r_in").get<double>(), j.at("r_out").get<double>(), density);
    if (kind == "points") {
        PointCloud c{points_from(j.at("points")), "points"};
        c.validate();
        return c;
    }
    throw ConfigError("cloud kind must be disc, segment, annulus or points");
}

AnnulusRegion annulus_from(const nlohmann::json& j) {
    AnnulusRegion a;
    a.r_in = j.value("r_in", a.r_in);
    a.r_out = j.value("r_out", a.r_out);
    a.density = j.value("density", a.density);
    a.validate();
    return a;
}

}  // namespace detail

namespace {

using namespace detail;

void validate_diagnose_op(const ExperimentConfig& cfg, const nlohmann::json& op) {
    std::string name = op.at("op").get<std::string>();
    if (!kDiagnoseOps.count(name)) throw ConfigError("unknown diagnostics op '" + name + "'");
    auto radii_ok = [](const std::vector<double>& g, const char* what) {
        for (double r : g)
            if (!(r >= 0.0 && r < 1.0)) throw ConfigError(std::string(what) + ": radii must lie in [0,1)");
    };
    if (name == "dilate_density_check") {
        radii_ok(grid_from(op.at("radii")), name.c_str());
        const auto& a = op.at("arc");
        Arc(a.at("center").get<double>(), a.at("halfwidth").get<double>());
        target_poly(op.at("phi"), bits_of(cfg));
    } else if (name == "growth_metrics") {
        radii_ok(grid_from(op.at("r_grid")), name.c_str());
        if (op.contains("A")) target_from_json(op["A"]);
    } else if (name == "gap_witnesses") {
        double theta = op.value("theta", 0.9), sigma = op.value("sigma", 1.1);
        if (!(theta > 0.0 && theta < 1.0) || !(sigma > 1.0)) throw ConfigError("gap_witnesses needs 0 < theta < 1 < sigma");
    } else if (name == "normality_scan") {
        SectorRegion s;
        if (op.contains("region")) {
            const auto& r = op["region"];
            s = {r.value("r_min", 0.0), r.value("r_max", 0.99), r.value("center", 0.0), r.value("half_width", std::numbers::pi)};
        }
        s.validate();
    } else if (name == "picard_coverage") {
        point_from(op.at("zeta"));
        if (!(op.at("r").get<double>() > 0.0) || !(op.at("spacing").get<double>() > 0.0))
            throw ConfigError("picard_coverage needs r > 0 and spacing > 0");
        window_from(op.value("window", nlohmann::json::object()));
    } else if (name == "radial_cluster_sample") {
        if (!op.contains("zeta") && !op.contains("random_points")) throw ConfigError("radial_cluster_sample needs zeta or random_points");
        radii_ok(grid_from(op.at("r_grid")), name.c_str());
        window_from(op.value("box", nlohmann::json::object()));
        if (!(op.value("delta", 0.1) > 0.0)) throw ConfigError("delta must be positive");
    } else if (name == "two_radii_bound_check") {
        if (point_from(op.at("zeta1")) == point_from(op.at("zeta2"))) throw ConfigError("zeta1 and zeta2 must differ");
        if (!(op.at("c").get<double>() > 0.0)) throw ConfigError("c must be positive");
        radii_ok(grid_from(op.at("r_grid")), name.c_str());
    } else if (name == "partial_sum_divergence_profile") {
        if (!op.contains("grid") && !op.contains("points")) throw ConfigError("partial_sum_divergence_profile needs grid or points");
        for (long k : op.at("checkpoints").get<std::vector<long>>())
            if (k < 1) throw ConfigError("checkpoints must be >= 1");
    }
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
    const auto& j = cfg.params;
    const long bits = bits_of(cfg);
    try {
        switch (cfg.kind) {
            case ExperimentKind::ConstructGrowth: {
                StagePolicy p = policy_from(block(j, "policy"));
                enrollment_from(block(j, "enrollment"), bits).validate(p.stages());
                GrowthEnvelope env = envelope_from(j.value("envelope", nlohmann::json::object()));
                construction_options_from(j);
                for (const auto& a : TargetEnrollment::from_json(j["enrollment"]).arcs)
                    if (a.contains_angle(std::arg(env.contact_point())))
                        throw ConfigError("an enrolled arc contains the contact point of A");
                break;
            }
            case ExperimentKind::ConstructFloor: {
                StagePolicy p = policy_from(block(j, "policy"));
                enrollment_from(block(j, "enrollment"), bits).validate(p.stages());
                sequence_from_json(block(j, "gamma"));
                construction_options_from(j);
                break;
            }
            case ExperimentKind::ConstructAe:
            case ExperimentKind::ConstructPoints: {
                StagePolicy p = policy_from(block(j, "policy"));
                enrollment_from(block(j, "enrollment"), bits).validate(p.stages());
                construction_options_from(j);
                if (cfg.kind == ExperimentKind::ConstructAe) {
                    long g = j.value("circle_grid", 16384L);
                    if (g < 4096) throw ConfigError("circle_grid must be at least 2^12");
                } else {
                    auto E = points_from(block(j, "points"));
                    if (E.empty()) throw ConfigError("points must be nonempty");
                    for (std::size_t a = 0; a < E.size(); ++a) {
                        if (std::fabs(std::abs(E[a]) - 1.0) > 1e-12) throw ConfigError("points must be unimodular");
                        for (std::size_t b = 0; b < a; ++b)
                            if (E[a] == E[b]) throw ConfigError("points must be distinct");
                    }
                }
                break;
            }
            case ExperimentKind::Diagnose: {
                poly_source(cfg, j);
                const auto& ops = block(j, "operations");
                if (!ops.is_array() || ops.empty()) throw ConfigError("operations must be a nonempty list");
                for (const auto& op : ops) validate_diagnose_op(cfg, op);
                break;
            }
            case ExperimentKind::Capacity: {
                if (j.contains("cloud")) cloud_from(j["cloud"]);
                if (j.contains("curve")) {
                    const auto& c = j["curve"];
                    poly_source(cfg, c);
                    annulus_from(c.value("region", nlohmann::json::object()));
                    if (!(c.value("M", 10.0) > 0.0)) throw ConfigError("M must be positive");
                    c.at("checkpoints").get<std::vector<long>>();
                }
                if (!j.contains("cloud") && !j.contains("curve")) throw ConfigError("capacity needs 'cloud' or 'curve'");
                if (j.value("m", 48L) < 2) throw ConfigError("m must be at least 2");
                break;
            }
            case ExperimentKind::Approx: {
                CompactTarget K = target_from_json(block(j, "target"));
                auto pieces = pieces_from(block(j, "pieces"), bits);
                if (pieces.size() != K.piece_count()) throw ConfigError("one target per piece of K is required");
                if (!(j.value("tol", 1e-3) > 0.0)) throw ConfigError("tol must be positive");
                if (j.value("max_degree", 512L) < 0) throw ConfigError("max_degree must be nonnegative");
                break;
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(to_string(cfg.kind) + ": " + e.what());
    }
}

}  // namespace abelu
