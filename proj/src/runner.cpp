#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "config_detail.hpp"

namespace abelu {

namespace {

using namespace detail;
using Json = nlohmann::json;

std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

// Every {"pass": bool} inside the report becomes an assertion named by its path.
void collect_passes(const Json& j, const std::string& path, std::vector<Assertion>& out) {
    if (j.is_object()) {
        if (j.contains("pass") && j["pass"].is_boolean()) out.push_back({path.empty() ? "pass" : path, j["pass"].get<bool>()});
        for (auto it = j.begin(); it != j.end(); ++it)
            if (it.key() != "pass") collect_passes(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) collect_passes(j[i], path + "[" + std::to_string(i) + "]", out);
    }
}

// op "expect": {"field": {"min": a, "max": b}} on numeric top-level fields
void apply_expectations(const Json& op, const Json& report, const std::string& prefix, std::vector<Assertion>& out) {
    if (!op.contains("expect")) return;
    for (auto it = op["expect"].begin(); it != op["expect"].end(); ++it) {
        const std::string name = prefix + "." + it.key();
        if (!report.contains(it.key()) || !report[it.key()].is_number()) {
            out.push_back({name + ".present", false});
            continue;
        }
        double v = report[it.key()].get<double>();
        if (it.value().contains("min")) out.push_back({name + ".min", v >= it.value()["min"].get<double>()});
        if (it.value().contains("max")) out.push_back({name + ".max", v <= it.value()["max"].get<double>()});
    }
}

struct Outcome {
    Json result;
    std::optional<Poly> poly;
    std::map<std::string, std::string> csv;
    std::vector<Assertion> assertions;
    bool runtime_failure = false;
    std::string message;
};

std::string stages_csv(const StageReport& r) {
    Series s{"stages", {"n", "u", "v", "radius", "aux_radius", "eps", "block_lo", "block_hi", "p_degree", "certified_error"}, {}};
    for (const auto& st : r.stages)
        s.rows.push_back({static_cast<double>(st.n), static_cast<double>(st.u), static_cast<double>(st.v), st.radius,
                          st.aux_radius, st.eps, static_cast<double>(st.block_lo), static_cast<double>(st.block_hi),
                          static_cast<double>(st.p_degree), st.certificate.certified_sup_error});
    return to_csv(s);
}

std::string ledger_csv(const DivergenceLedger& L) {
    Series s{"ledger", {"l", "b_abs", "candidate_count", "hits", "measure", "bound", "crossings", "slack"}, {}};
    for (const auto& e : L.entries)
        s.rows.push_back({static_cast<double>(e.l), std::abs(e.b), e.candidate_count, static_cast<double>(e.hits), e.measure,
                          e.bound, static_cast<double>(e.crossings), e.slack});
    return to_csv(s);
}

Outcome run_construct(const ExperimentConfig& cfg, const std::function<void(const std::string&)>& log) {
    const Json& j = cfg.params;
    const long bits = bits_of(cfg);
    StagePolicy policy = policy_from(j["policy"]);
    TargetEnrollment enroll = enrollment_from(j["enrollment"], bits);
    ConstructionOptions opts = construction_options_from(j);
    opts.log = log;
    ConstructionResult res;
    switch (cfg.kind) {
        case ExperimentKind::ConstructGrowth:
            res = construct_growth_restricted(envelope_from(j.value("envelope", Json::object())), enroll, policy, opts);
            break;
        case ExperimentKind::ConstructFloor:
            res = construct_coefficient_floor({sequence_from_json(j["gamma"])}, enroll, policy, opts);
            break;
        case ExperimentKind::ConstructAe:
            res = construct_ae_divergent(enroll, policy, static_cast<std::size_t>(j.value("circle_grid", 16384L)), opts);
            break;
        default: {
            auto E = points_from(j["points"]);
            res = construct_pointwise_divergent(E, enroll, policy, opts);
        }
    }
    Outcome o;
    o.result = res.report.to_json();
    if (res.ledger) o.result["ledger"] = ledger_to_json(*res.ledger);
    o.poly = cfg.precision_bits > 0 ? res.f.with_bits(std::max(res.f.bits(), cfg.precision_bits)) : res.f;
    o.result["degree"] = res.f.degree();
    o.csv["stages.csv"] = stages_csv(res.report);
    if (res.ledger) o.csv["ledger.csv"] = ledger_csv(*res.ledger);
    collect_passes(o.result["checks"], "checks", o.assertions);
    if (!res.report.completed) {
        o.runtime_failure = true;
        o.message = res.report.failure;
    }
    return o;
}

std::vector<cplx> random_unimodular(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    std::vector<cplx> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::polar(1.0, u(gen)));
    return out;
}

Outcome run_diagnose(const ExperimentConfig& cfg) {
    const Json& j = cfg.params;
    Poly f = poly_source(cfg, j);
    Outcome o;
    o.result = {{"kind", "diagnostics"}, {"degree", f.degree()}, {"bits", f.bits()}, {"reports", Json::array()}};
    std::size_t idx = 0;
    for (const auto& op : j["operations"]) {
        const std::string name = op["op"].get<std::string>();
        const std::string tag = std::to_string(idx) + "_" + name;
        Json rep;
        if (name == "dilate_density_check") {
            auto radii = grid_from(op["radii"]);
            const auto& a = op["arc"];
            auto r = dilate_density_check(f, radii, Arc(a["center"].get<double>(), a["halfwidth"].get<double>()),
                                          target_poly(op["phi"], bits_of(cfg)), op.value("report_only", false),
                                          op.value("points", std::size_t{2048}));
            rep = r.to_json();
            o.csv[tag + ".csv"] = to_csv(r.series());
        } else if (name == "growth_metrics") {
            auto grid = grid_from(op["r_grid"]);
            std::optional<CompactTarget> A;
            if (op.contains("A")) A = target_from_json(op["A"]);
            auto r = growth_metrics(f, grid, A);
            rep = r.to_json();
            rep["monotone_check"] = {{"pass", r.monotone}};
            o.csv[tag + ".csv"] = to_csv(r.series());
        } else if (name == "gap_witnesses") {
            auto w = gap_witnesses(f, op.value("theta", 0.9), op.value("sigma", 1.1), op.value("k_min", 1L));
            rep = {{"kind", "gap_witnesses"}, {"theta", op.value("theta", 0.9)}, {"sigma", op.value("sigma", 1.1)},
                   {"k_min", op.value("k_min", 1L)}, {"witnesses", Json::array()}, {"ho_count", 0}};
            for (const auto& x : w) {
                rep["witnesses"].push_back(x.to_json());
                if (x.kind == GapWitness::Kind::Hadamard) rep["hadamard_ratio"] = x.ratio;
                if (x.kind == GapWitness::Kind::HadamardOstrowski) rep["ho_count"] = x.intervals.size();
            }
        } else if (name == "normality_scan" || name == "bloch_norm_estimate") {
            RadialGrid g;
            if (op.contains("grid")) {
                g.radial = op["grid"].value("radial", g.radial);
                g.angular = op["grid"].value("angular", g.angular);
            }
            ScanReport r;
            if (name == "normality_scan") {
                SectorRegion s;
                if (op.contains("region")) {
                    const auto& x = op["region"];
                    s = {x.value("r_min", 0.0), x.value("r_max", 0.99), x.value("center", 0.0), x.value("half_width", std::numbers::pi)};
                }
                r = normality_scan(f, s, g);
            } else {
                r = bloch_norm_estimate(f, g);
            }
            rep = r.to_json();
            rep["kind"] = name;
        } else if (name == "picard_coverage") {
            auto r = picard_coverage(f, point_from(op["zeta"]), op["r"].get<double>(),
                                     window_from(op.value("window", Json::object())), op["spacing"].get<double>());
            rep = r.to_json();
        } else if (name == "radial_cluster_sample") {
            auto grid = grid_from(op["r_grid"]);
            auto box = window_from(op.value("box", Json::object()));
            double delta = op.value("delta", 0.1);
            std::vector<cplx> zetas = op.contains("zeta") ? std::vector<cplx>{point_from(op["zeta"])}
                                                          : random_unimodular(cfg.seed, op["random_points"].get<std::size_t>());
            rep = {{"kind", "radial_cluster"}, {"samples", Json::array()}, {"seed", cfg.seed}};
            double min_osc = std::numeric_limits<double>::infinity();
            Series all{"radial_cluster", {"sample", "r", "re", "im"}, {}};
            for (std::size_t i = 0; i < zetas.size(); ++i) {
                auto r = radial_cluster_sample(f, zetas[i], grid, box, delta);
                rep["samples"].push_back(r.to_json());
                min_osc = std::min(min_osc, r.tail_oscillation);
                for (std::size_t k = 0; k < r.r.size(); ++k)
                    all.rows.push_back({static_cast<double>(i), r.r[k], r.values[k].real(), r.values[k].imag()});
            }
            rep["min_tail_oscillation"] = min_osc;
            o.csv[tag + ".csv"] = to_csv(all);
        } else if (name == "two_radii_bound_check") {
            auto r = two_radii_bound_check(f, point_from(op["zeta1"]), point_from(op["zeta2"]), op["c"].get<double>(),
                                           grid_from(op["r_grid"]));
            rep = r.to_json();
            o.csv[tag + ".csv"] = to_csv(r.series());
        } else {
            std::vector<cplx> pts = op.contains("grid") ? circle_grid(op["grid"].get<std::size_t>()) : points_from(op["points"]);
            auto cps = op["checkpoints"].get<std::vector<long>>();
            auto r = partial_sum_divergence_profile(f, pts, cps);
            rep = r.to_json();
            o.csv[tag + ".csv"] = to_csv(r.series());
        }
        rep["op"] = name;
        apply_expectations(op, rep, tag, o.assertions);
        o.result["reports"].push_back(rep);
        ++idx;
    }
    for (std::size_t i = 0; i < o.result["reports"].size(); ++i)
        collect_passes(o.result["reports"][i], "reports[" + std::to_string(i) + "]", o.assertions);
    return o;
}

Outcome run_capacity(const ExperimentConfig& cfg) {
    const Json& j = cfg.params;
    const std::size_t m = j.value("m", std::size_t{48});
    Outcome o;
    o.result = {{"kind", "capacity"}, {"m", m}};
    if (j.contains("cloud")) {
        PointCloud c = cloud_from(j["cloud"]);
        CapacityEstimate e = capacity_estimate(c, m);
        o.result["estimate"] = e.to_json();
        o.result["estimate"]["provenance"] = c.provenance;
        Json op = j["cloud"];
        apply_expectations(op, o.result["estimate"], "cloud", o.assertions);
    }
    if (j.contains("curve")) {
        const Json& c = j["curve"];
        Poly f = poly_source(cfg, c);
        auto cps = c["checkpoints"].get<std::vector<long>>();
        CapacityCurve curve = sublevel_capacity_curve(f, annulus_from(c.value("region", Json::object())), c.value("M", 10.0), cps, m);
        o.result["curve"] = curve.to_json();
        if (curve.points.size() >= 2) {
            std::vector<double> n, v;
            for (const auto& p : curve.points) {
                n.push_back(static_cast<double>(p.n));
                v.push_back(p.estimate.value);
            }
            double rho = spearman(n, v);
            o.result["curve"]["spearman"] = rho;
            o.result["curve"]["trend"] = {{"pass", rho <= 0.0}};
        }
        o.csv["capacity_curve.csv"] = to_csv(curve.series());
        apply_expectations(c, o.result["curve"], "curve", o.assertions);
    }
    collect_passes(o.result, "", o.assertions);
    return o;
}

Outcome run_approx(const ExperimentConfig& cfg) {
    const Json& j = cfg.params;
    CompactTarget K = target_from_json(j["target"]);
    auto pieces = pieces_from(j["pieces"], bits_of(cfg));
    const double tol = j.value("tol", 1e-3);
    ApproxResult res = approximate(K, pieces, tol, j.value("max_degree", 512L));
    Outcome o;
    o.result = {{"kind", "approx"}, {"tol", tol}, {"failed", res.failed}, {"message", res.message},
                {"certificate", certificate_to_json(res.certificate)}};
    std::size_t dense = 10 * res.certificate.validation_points;
    ApproxCertificate d = certify(K, pieces, res.poly, dense / std::max<std::size_t>(K.piece_count(), 1));
    o.result["dense_check"] = {{"points", d.validation_points},
                               {"raw_sup_error", d.raw_sup_error},
                               {"pass", d.raw_sup_error <= res.certificate.certified_sup_error}};
    o.result["certified"] = {{"pass", !res.failed}};
    o.poly = res.poly;
    collect_passes(o.result, "", o.assertions);
    return o;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

}  // namespace

bool RunReport::passed() const {
    if (runtime_failure) return false;
    for (const auto& a : assertions)
        if (!a.pass) return false;
    return true;
}

int RunReport::exit_code() const {
    if (runtime_failure) return 3;
    return passed() ? 0 : 1;
}

Json RunReport::to_json() const {
    Json a = Json::array();
    for (const auto& x : assertions) a.push_back({{"name", x.name}, {"pass", x.pass}});
    return {{"config", config},   {"started", started},         {"finished", finished}, {"artifacts", artifacts},
            {"summary", summary}, {"assertions", a},            {"passed", passed()},   {"runtime_failure", runtime_failure},
            {"message", message}, {"exit_code", exit_code()}};
}

RunReport run(const ExperimentConfig& cfg, const std::function<void(const std::string&)>& log) {
    validate(cfg);
    if (cfg.out_dir.empty()) throw ConfigError("no output directory given");
    RunReport rr;
    rr.config = cfg.echo();
    rr.started = utc_now();
    Outcome o;
    try {
        switch (cfg.kind) {
            case ExperimentKind::Diagnose: o = run_diagnose(cfg); break;
            case ExperimentKind::Capacity: o = run_capacity(cfg); break;
            case ExperimentKind::Approx: o = run_approx(cfg); break;
            default: o = run_construct(cfg, log);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        o = Outcome{};
        o.result = {{"kind", to_string(cfg.kind)}, {"status", "failed"}};
        o.runtime_failure = true;
        o.message = e.what();
    }
    rr.assertions = o.assertions;
    rr.runtime_failure = o.runtime_failure;
    rr.message = o.message;

    std::filesystem::create_directories(cfg.out_dir);
    // report.json holds no timestamps so identical configs give identical bytes
    Json report{{"config", rr.config},
                {"result", o.result},
                {"status", o.runtime_failure ? "partial" : "complete"},
                {"message", o.message},
                {"assertions", Json::array()}};
    for (const auto& a : rr.assertions) report["assertions"].push_back({{"name", a.name}, {"pass", a.pass}});
    report["passed"] = rr.passed();
    if (o.poly) {
        write_file(cfg.out_dir / "f.json", poly_to_json(*o.poly).dump(1) + "\n");
        rr.artifacts.push_back((cfg.out_dir / "f.json").string());
    }
    write_file(cfg.out_dir / "report.json", report.dump(1) + "\n");
    rr.artifacts.push_back((cfg.out_dir / "report.json").string());
    for (const auto& [name, text] : o.csv) {
        write_file(cfg.out_dir / name, text);
        rr.artifacts.push_back((cfg.out_dir / name).string());
    }
    rr.summary = {{"kind", to_string(cfg.kind)}, {"assertions", rr.assertions.size()}};
    if (o.poly) rr.summary["degree"] = o.poly->degree();
    rr.finished = utc_now();
    write_file(cfg.out_dir / "run.json", rr.to_json().dump(1) + "\n");
    return rr;
}

// ---------------------------------------------------------------- describe

namespace {

Json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot read artifact " + p.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw std::runtime_error("artifact " + p.string() + " is not valid JSON: " + e.what());
    }
}

void describe_poly(std::ostream& os, const Json& f) {
    Poly p = poly_from_json(f);
    os << "polynomial: degree " << p.degree() << ", precision " << p.bits() << " bits\n";
}

void describe_construction(std::ostream& os, const Json& r) {
    os << "construction: " << r.value("kind", std::string("?"))
       << (r.value("completed", true) ? ", completed" : ", stopped at stage " + std::to_string(r.value("failed_stage", 0))) << "\n";
    if (r.contains("failure") && !r["failure"].get<std::string>().empty()) os << "  failure: " << r["failure"].get<std::string>() << "\n";
    const auto& st = r["stages"];
    os << "stages: " << st.size() << "\n";
    os << "  " << std::setw(3) << "n" << std::setw(8) << "u" << std::setw(6) << "v" << std::setw(16) << "block"
       << std::setw(10) << "eps" << std::setw(14) << "cert.err" << "\n";
    for (const auto& s : st) {
        std::ostringstream blk;
        blk << "[" << s["block"][0].get<long>() << "," << s["block"][1].get<long>() << "]";
        os << "  " << std::setw(3) << s["n"].get<int>() << std::setw(8) << s["u"].get<long>() << std::setw(6)
           << (s.contains("v") ? std::to_string(s["v"].get<long>()) : "-") << std::setw(16) << blk.str() << std::setw(10)
           << s["eps"].get<double>() << std::setw(14) << s["certificate"].value("certified_sup_error", 0.0) << "\n";
    }
    if (r.contains("enrollment")) {
        const auto& e = r["enrollment"];
        os << "targets: " << e["phis"].size() << " functions, " << e["arcs"].size() << " arcs, " << e["pairs"].size()
           << " enrolled pairs\n";
        for (std::size_t i = 0; i < e["arcs"].size(); ++i)
            os << "  arc " << i << ": center " << e["arcs"][i]["center"].get<double>() << ", half width "
               << e["arcs"][i]["halfwidth"].get<double>() << "\n";
    }
}

}  // namespace

std::string describe(const std::filesystem::path& artifact) {
    if (!std::filesystem::exists(artifact)) throw std::runtime_error("artifact not found: " + artifact.string());
    std::ostringstream os;
    std::filesystem::path report, poly;
    if (std::filesystem::is_directory(artifact)) {
        report = artifact / "report.json";
        poly = artifact / "f.json";
        if (!std::filesystem::exists(report) && !std::filesystem::exists(poly))
            throw std::runtime_error("no report.json or f.json in " + artifact.string());
    } else {
        Json j = read_json(artifact);
        if (j.contains("coeffs")) {
            describe_poly(os, j);
            return os.str();
        }
        report = artifact;
    }
    if (!poly.empty() && std::filesystem::exists(poly)) describe_poly(os, read_json(poly));
    if (report.empty() || !std::filesystem::exists(report)) return os.str();
    Json rep = read_json(report);
    os << "kind: " << rep["config"].value("kind", std::string("?")) << ", status " << rep.value("status", std::string("?"))
       << ", " << (rep.value("passed", false) ? "all assertions pass" : "assertions failing") << "\n";
    const Json& res = rep["result"];
    if (res.contains("stages")) describe_construction(os, res);
    if (res.value("kind", std::string()) == "diagnostics") {
        os << "reports:";
        for (const auto& r : res["reports"]) os << " " << r.value("op", r.value("kind", std::string("?")));
        os << "\n";
    }
    if (res.value("kind", std::string()) == "capacity") {
        if (res.contains("estimate")) os << "capacity estimate: " << res["estimate"]["value"].get<double>() << "\n";
        if (res.contains("curve") && res["curve"].contains("spearman"))
            os << "capacity curve: " << res["curve"]["curve"].size() << " checkpoints, spearman "
               << res["curve"]["spearman"].get<double>() << "\n";
    }
    if (res.value("kind", std::string()) == "approx")
        os << "approximation: degree " << res["certificate"]["degree"].get<long>() << ", certified error "
           << res["certificate"]["certified_sup_error"].get<double>() << "\n";
    std::size_t failing = 0;
    for (const auto& a : rep["assertions"]) failing += a["pass"].get<bool>() ? 0 : 1;
    os << "assertions: " << rep["assertions"].size() << " (" << failing << " failing)\n";
    for (const auto& a : rep["assertions"])
        if (!a["pass"].get<bool>()) os << "  FAIL " << a["name"].get<std::string>() << "\n";
    return os.str();
}

}  // namespace abelu
