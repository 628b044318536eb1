// Command-line front end: solve / sweep / gallery / symmetrize / decay.
//
// Exit codes: 0 success, 2 config or feasibility error, 3 solver
// non-convergence, 4 unresolved tail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "steinerps/analysis.hpp"
#include "steinerps/config.hpp"
#include "steinerps/io.hpp"
#include "steinerps/solver.hpp"
#include "steinerps/version.hpp"

namespace fs = std::filesystem;
using namespace steinerps;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNoConverge = 3;
constexpr int kExitUnresolvedTail = 4;

struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// CLI-level feasibility on top of ProblemConfig::validate: the borderline
/// q = p is accepted only on bounded domains; on translation-invariant
/// ones the constant is not attained and the run is refused.
void cli_feasibility(const ProblemConfig& cfg) {
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw CliError(kExitConfig, e.what());
    }
    if (!std::isinf(cfg.q) && cfg.q == cfg.p && cfg.domain.is_unbounded())
        throw CliError(kExitConfig,
                       "q = p on an unbounded domain: the constant is not attained "
                       "(minimizing sequences escape along the unbounded directions); "
                       "use q > p or a bounded domain");
}

json result_to_json(const SolveResult& r, const ProblemConfig& cfg) {
    json j;
    j["lambda"] = r.lambda_est;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["residual"] = r.residual;
    j["sup"] = r.sup;
    j["ball_floor"] = r.ball_floor;
    j["argmax"] = r.argmax_point;
    j["argmax_index"] = r.argmax_index;
    j["steiner_domain"] = r.steiner_domain;
    j["sup_at_origin"] = r.sup_at_origin;
    j["config"] = problem_to_json(cfg);
    j["files"] = {{"field", "field.csv"}, {"energy", "energy.csv"}};
    return j;
}

std::string energy_csv(const SolveResult& r) {
    std::string out = "iteration,energy,relative_drop\n";
    for (std::size_t i = 0; i < r.energy_history.size(); ++i) {
        const double drop = i == 0 ? 0.0
                                   : (r.energy_history[i - 1] - r.energy_history[i]) /
                                         std::max(std::abs(r.energy_history[i]), 1e-300);
        out += std::to_string(i) + "," + detail::fmt17(r.energy_history[i]) + "," +
               detail::fmt17(drop) + "\n";
    }
    return out;
}

void ensure_outdir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw CliError(kExitConfig, "cannot create output directory: " + out);
}

int cmd_solve(const std::string& config_path, const std::string& out,
              const std::optional<double>& tol_override, std::uint64_t seed) {
    const auto t0 = Clock::now();
    ensure_outdir(out);
    ProblemConfig cfg;
    try {
        cfg = problem_from_json(load_config_file(config_path));
    } catch (const std::exception& e) {
        throw CliError(kExitConfig, e.what());
    }
    if (tol_override) cfg.solver.tolerance = *tol_override;
    cfg.solver.seed = seed;
    cli_feasibility(cfg);

    SolveResult r = std::isinf(cfg.q) ? solve_linfty(cfg) : solve_extremal(cfg);
    json outputs = json::array();
    outputs.push_back(write_output(out, "result.json", json_to_string(result_to_json(r, cfg))));
    outputs.push_back(write_output(out, "field.csv", field_to_csv(*r.u)));
    outputs.push_back(write_output(out, "grid.json", json_to_string(grid_to_json(r.u->grid()))));
    outputs.push_back(write_output(out, "energy.csv", energy_csv(r)));
    write_text_file(out + "/manifest.json",
                    json_to_string(make_manifest("solve", config_path, outputs, elapsed(t0))));
    std::printf("lambda = %.10g  (iterations %lld, %s)\n", r.lambda_est,
                static_cast<long long>(r.iterations), r.converged ? "converged" : "NOT converged");
    if (!r.converged) throw CliError(kExitNoConverge, "solver did not converge within max iterations");
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out, const std::string& kind_arg,
              const std::optional<double>& tol_override) {
    const auto t0 = Clock::now();
    ensure_outdir(out);
    json root;
    ProblemConfig cfg;
    try {
        root = load_config_file(config_path);
        cfg = problem_from_json(root);
    } catch (const std::exception& e) {
        throw CliError(kExitConfig, e.what());
    }
    if (tol_override) cfg.solver.tolerance = *tol_override;
    cli_feasibility(cfg);

    std::string kind = kind_arg;
    if (kind.empty() && root.contains("sweep") && root.at("sweep").contains("kind"))
        kind = root.at("sweep").at("kind").get<std::string>();
    if (kind != "confinement" && kind != "box" && kind != "q")
        throw CliError(kExitConfig, "sweep kind must be one of: confinement, box, q");
    const json sweep = root.contains("sweep") ? root.at("sweep") : json::object();

    std::string csv;
    bool monotone = true;
    try {
        if (kind == "confinement") {
            std::vector<int> ns;
            if (sweep.contains("ns"))
                for (const auto& v : sweep.at("ns")) ns.push_back(v.get<int>());
            if (ns.empty()) throw CliError(kExitConfig, "confinement sweep: missing [sweep] ns");
            auto pts = confinement_sweep(cfg, ns);
            csv = "n,lambda,monotone\n";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const bool ok = i == 0 || pts[i].lambda <= pts[i - 1].lambda * (1.0 + 1e-6);
                monotone = monotone && ok;
                const std::string key = std::isinf(pts[i].key) ? "inf" : std::to_string(int(pts[i].key));
                csv += key + "," + detail::fmt17(pts[i].lambda) + "," + (ok ? "1" : "0") + "\n";
            }
        } else if (kind == "box") {
            std::vector<double> Ls;
            if (sweep.contains("boxes"))
                for (const auto& v : sweep.at("boxes")) Ls.push_back(v.get<double>());
            if (Ls.empty()) throw CliError(kExitConfig, "box sweep: missing [sweep] boxes");
            auto pts = box_sweep(cfg, Ls);
            std::vector<double> lam;
            csv = "L,lambda,monotone\n";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const bool ok = i == 0 || pts[i].lambda <= pts[i - 1].lambda * (1.0 + 1e-6);
                monotone = monotone && ok;
                lam.push_back(pts[i].lambda);
                csv += detail::fmt17(pts[i].key) + "," + detail::fmt17(pts[i].lambda) + "," +
                       (ok ? "1" : "0") + "\n";
            }
            csv += "extrapolated," + detail::fmt17(aitken_limit(lam)) + ",\n";
        } else {
            std::vector<double> qs;
            if (sweep.contains("qs"))
                for (const auto& v : sweep.at("qs")) qs.push_back(v.get<double>());
            if (qs.empty()) throw CliError(kExitConfig, "q sweep: missing [sweep] qs");
            auto pts = q_sweep(cfg, qs);
            csv = "q,lambda,w1p_distance,distance_decreasing\n";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const bool ok = i == 0 || pts[i].w1p_dist < pts[i - 1].w1p_dist;
                monotone = monotone && ok;
                csv += detail::fmt17(pts[i].q) + "," + detail::fmt17(pts[i].lambda) + "," +
                       detail::fmt17(pts[i].w1p_dist) + "," + (ok ? "1" : "0") + "\n";
            }
        }
    } catch (const CliError&) {
        throw;
    } catch (const std::exception& e) {
        // Member failure: flag the partial CSV and abort with the solver code.
        csv += std::string("incomplete,") + e.what() + "\n";
        write_text_file(out + "/sweep.csv", csv);
        throw CliError(kExitNoConverge, e.what());
    }

    json outputs = json::array();
    outputs.push_back(write_output(out, "sweep.csv", csv));
    write_text_file(out + "/manifest.json",
                    json_to_string(make_manifest("sweep " + kind, config_path, outputs, elapsed(t0))));
    std::printf("sweep %s: %s\n", kind.c_str(), monotone ? "monotone" : "monotonicity violated");
    return 0;
}

json gallery_report(const std::string& name, double half_extent, double spacing, double p, double q) {
    const DomainSpec spec = domain_gallery().at(name);
    json rep;
    rep["name"] = name;

    ProblemConfig cfg;
    cfg.dim = 2;
    cfg.p = p;
    cfg.q = q;
    cfg.domain = spec;
    cfg.half_extent = half_extent;
    cfg.spacing = spacing;

    auto mask = validate_steiner(*realize_domain(spec, cfg.grid()));
    rep["steiner"] = mask->steiner == SteinerStatus::validated;
    if (mask->violation) {
        rep["violation"] = {{"axis", mask->violation->axis + 1},  // 1-based in reports
                            {"property", mask->violation->property}};
    }
    rep["inradius"] = inradius(*mask);

    auto prof = classify_infinity(spec, 2, spacing, {half_extent / 2.0, half_extent});
    json axes = json::array();
    for (const auto& ap : prof.axes) {
        json a;
        a["behavior"] = axis_behavior_name(ap.tag);
        if (ap.tag == AxisBehavior::bounded) a["bound_t"] = ap.bound_t;
        if (ap.tag == AxisBehavior::tubular) a["tube_radius"] = ap.tube_radius;
        axes.push_back(a);
    }
    rep["infinity_profile"] = axes;

    if (mask->steiner == SteinerStatus::validated) {
        SolveResult r = solve_extremal(cfg);
        rep["lambda"] = r.lambda_est;
        rep["argmax"] = r.argmax_point;
        rep["converged"] = r.converged;
        const double lam_p = lambda_p_eigensolve(cfg);
        auto con = decay_constants(p, q, lam_p, r.lambda_est);
        try {
            auto tr = tail_report(*r.u, cfg, con);
            rep["decay"] = {{"r0", tr.constants.r0},
                            {"recursion_pass", tr.recursion_pass},
                            {"fitted_rate", tr.fitted_rate},
                            {"rate_bound_a", con.a}};
        } catch (const std::exception& e) {
            rep["decay"] = {{"note", e.what()}};
        }
    } else {
        auto pts = drift_test(cfg, {half_extent / 4.0, half_extent / 2.0, half_extent});
        json drift = json::array();
        bool increasing = true;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            drift.push_back({{"L", pts[i].L}, {"lambda", pts[i].lambda}, {"drift", pts[i].drift}});
            if (i > 0 && pts[i].drift <= pts[i - 1].drift) increasing = false;
        }
        rep["drift_test"] = drift;
        rep["drift_detected"] = increasing;
    }
    return rep;
}

int cmd_gallery(const std::string& name, bool all, const std::string& out, int jobs,
                double half_extent, double spacing, double p, double q) {
    const auto t0 = Clock::now();
    ensure_outdir(out);
    std::vector<std::string> names;
    if (all) {
        for (const auto& [n, s] : domain_gallery()) names.push_back(n);
    } else {
        if (domain_gallery().find(name) == domain_gallery().end())
            throw CliError(kExitConfig, "unknown gallery domain: " + name);
        names.push_back(name);
    }

    std::vector<std::pair<std::string, json>> reports(names.size());
    // Gallery members are independent (no warm starts), so they may run
    // concurrently up to the --jobs limit.
    std::size_t next = 0;
    while (next < names.size()) {
        const std::size_t batch = std::min<std::size_t>(std::max(jobs, 1), names.size() - next);
        std::vector<std::future<json>> futs;
        for (std::size_t k = 0; k < batch; ++k) {
            const std::string nm = names[next + k];
            futs.push_back(std::async(std::launch::async, [=] {
                return gallery_report(nm, half_extent, spacing, p, q);
            }));
        }
        for (std::size_t k = 0; k < batch; ++k)
            reports[next + k] = {names[next + k], futs[k].get()};
        next += batch;
    }

    json outputs = json::array();
    for (auto& [nm, rep] : reports)
        outputs.push_back(write_output(out, "gallery_" + nm + ".json", json_to_string(rep)));
    write_text_file(out + "/manifest.json",
                    json_to_string(make_manifest("gallery", "", outputs, elapsed(t0))));
    for (auto& [nm, rep] : reports)
        std::printf("%-14s steiner=%d inradius=%.4f\n", nm.c_str(), rep["steiner"].get<bool>(),
                    rep["inradius"].get<double>());
    return 0;
}

int cmd_symmetrize(const std::string& field_path, const std::string& grid_path,
                   const std::string& domain_json, const std::string& out, double p,
                   const std::vector<double>& alphas) {
    const auto t0 = Clock::now();
    ensure_outdir(out);
    Grid g = [&] {
        try {
            const json gj = json::parse(read_text_file(grid_path));
            return Grid(gj.at("dim").get<int>(), gj.at("half_extent").get<double>(),
                        gj.at("spacing").get<double>());
        } catch (const std::exception& e) {
            throw CliError(kExitConfig, std::string("grid header: ") + e.what());
        }
    }();
    std::shared_ptr<DomainMask> mask;
    try {
        if (domain_json.empty()) {
            mask = std::make_shared<DomainMask>(g);
            std::fill(mask->inside.begin(), mask->inside.end(), 1);
        } else {
            mask = realize_domain(domain_from_json(json::parse(domain_json)), g);
        }
    } catch (const CliError&) {
        throw;
    } catch (const std::exception& e) {
        throw CliError(kExitConfig, std::string("domain: ") + e.what());
    }
    GridFunction u = field_from_csv(read_text_file(field_path), mask);
    auto rep = rearrangement_report(u, p, alphas);
    GridFunction s = full_symmetrize(u);

    json rj;
    rj["equimeasurable"] = rep.equimeasurable;
    rj["pz_defect"] = rep.pz_defect;
    json pots = json::array();
    for (auto& [a, d] : rep.potential_defects) pots.push_back({{"alpha", a}, {"defect", d}});
    rj["potential_defects"] = pots;

    json outputs = json::array();
    outputs.push_back(write_output(out, "report.json", json_to_string(rj)));
    outputs.push_back(write_output(out, "field_sym.csv", field_to_csv(s)));
    write_text_file(out + "/manifest.json",
                    json_to_string(make_manifest("symmetrize", field_path, outputs, elapsed(t0))));
    std::printf("equimeasurable=%d pz_defect=%.6g\n", (int)rep.equimeasurable, rep.pz_defect);
    return 0;
}

int cmd_decay(const std::string& result_dir, const std::string& out) {
    const auto t0 = Clock::now();
    ensure_outdir(out);
    json result;
    ProblemConfig cfg;
    try {
        result = json::parse(read_text_file(result_dir + "/result.json"));
        cfg = problem_from_json(result.at("config"));
    } catch (const std::exception& e) {
        throw CliError(kExitConfig, std::string("result file: ") + e.what());
    }
    if (std::isinf(cfg.q)) throw CliError(kExitConfig, "decay analysis needs a finite-q extremal");
    auto mask = realize_domain(cfg.domain, cfg.grid());
    GridFunction u = field_from_csv(read_text_file(result_dir + "/field.csv"), mask);

    const double lam = result.at("lambda").get<double>();
    const double lam_p = lambda_p_eigensolve(cfg);
    auto con = decay_constants(cfg.p, cfg.q, lam_p, lam);
    DecayReport rep;
    try {
        rep = tail_report(u, cfg, con);
    } catch (const std::exception& e) {
        throw CliError(kExitUnresolvedTail, e.what());
    }

    json dj;
    dj["lambda"] = lam;
    dj["lambda_p"] = lam_p;
    dj["constants"] = {{"C7", con.c7}, {"K", con.K}, {"a", con.a},
                       {"eps_threshold", con.eps_threshold}, {"r0", rep.constants.r0}};
    dj["recursion_pass"] = rep.recursion_pass;
    json rates = json::array();
    for (double r : rep.axis_rates) rates.push_back(std::isfinite(r) ? json(r) : json());
    dj["axis_rates"] = rates;
    dj["fitted_rate"] = rep.fitted_rate;

    std::string csv = "R,tail_mass,tail_sup\n";
    for (std::size_t i = 0; i < rep.tail_mass.size(); ++i)
        csv += detail::fmt17(rep.tail_mass[i].first) + "," + detail::fmt17(rep.tail_mass[i].second) +
               "," + detail::fmt17(rep.tail_sup[i].second) + "\n";

    json outputs = json::array();
    outputs.push_back(write_output(out, "decay.json", json_to_string(dj)));
    outputs.push_back(write_output(out, "tail.csv", csv));
    write_text_file(out + "/manifest.json",
                    json_to_string(make_manifest("decay", result_dir, outputs, elapsed(t0))));
    std::printf("r0=%g recursion_pass=%d fitted_rate=%.4f (bound a=%.6f)\n", rep.constants.r0,
                (int)rep.recursion_pass, rep.fitted_rate, con.a);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kVersion) + " - sharp Poincare-Sobolev constants on Steiner symmetric domains"};
    app.require_subcommand(1);

    std::string config_path, out = "out";
    std::optional<double> tol_override;
    std::uint64_t seed = 0;
    int jobs = 1;

    auto* solve = app.add_subcommand("solve", "minimize the Rayleigh quotient from a config file");
    solve->add_option("--config", config_path, "TOML or JSON config")->required();
    solve->add_option("--out", out, "output directory");
    solve->add_option("--tolerance", tol_override, "override solver tolerance");
    solve->add_option("--seed", seed, "seed for randomized initializations");

    std::string sweep_kind;
    auto* sweep = app.add_subcommand("sweep", "run a confinement, box or q sweep");
    sweep->add_option("--config", config_path, "TOML or JSON config")->required();
    sweep->add_option("--out", out, "output directory");
    sweep->add_option("--kind", sweep_kind, "confinement | box | q (defaults to [sweep] kind)");
    sweep->add_option("--tolerance", tol_override, "override solver tolerance");

    std::string gallery_name;
    bool gallery_all = false;
    double g_half = 8.0, g_h = 0.125, g_p = 2.0, g_q = 4.0;
    auto* gallery = app.add_subcommand("gallery", "per-domain geometry/attainment report");
    gallery->add_option("name", gallery_name, "domain name");
    gallery->add_flag("--all", gallery_all, "run every registered domain");
    gallery->add_option("--out", out, "output directory");
    gallery->add_option("--jobs", jobs, "parallel gallery members");
    gallery->add_option("--half-extent", g_half, "truncation box half extent");
    gallery->add_option("--spacing", g_h, "grid spacing");
    gallery->add_option("--p", g_p, "exponent p");
    gallery->add_option("--q", g_q, "exponent q");

    std::string field_path, grid_path, domain_json;
    double sym_p = 2.0;
    std::vector<double> alphas = {0.5, 1.0, 2.0};
    auto* symmetrize = app.add_subcommand("symmetrize", "Steiner-symmetrize a stored field");
    symmetrize->add_option("--field", field_path, "field CSV")->required();
    symmetrize->add_option("--grid", grid_path, "grid JSON header")->required();
    symmetrize->add_option("--domain", domain_json, "domain spec JSON (defaults to the full box)");
    symmetrize->add_option("--out", out, "output directory");
    symmetrize->add_option("--p", sym_p, "exponent for the energy defect");
    symmetrize->add_option("--alphas", alphas, "weights for the potential defects");

    std::string result_dir;
    auto* decay = app.add_subcommand("decay", "tail decay report for a stored solve result");
    decay->add_option("--result", result_dir, "directory written by `solve`")->required();
    decay->add_option("--out", out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(config_path, out, tol_override, seed);
        if (sweep->parsed()) return cmd_sweep(config_path, out, sweep_kind, tol_override);
        if (gallery->parsed()) {
            if (!gallery_all && gallery_name.empty())
                throw CliError(kExitConfig, "gallery: give a domain name or --all");
            return cmd_gallery(gallery_name, gallery_all, out, jobs, g_half, g_h, g_p, g_q);
        }
        if (symmetrize->parsed())
            return cmd_symmetrize(field_path, grid_path, domain_json, out, sym_p, alphas);
        if (decay->parsed()) return cmd_decay(result_dir, out);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
