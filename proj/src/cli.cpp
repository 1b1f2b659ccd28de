#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "binormal/error.hpp"
#include "binormal/io.hpp"
#include "binormal/parallel.hpp"
#include "binormal/scattering.hpp"

namespace binormal {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Validation, "cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string outpath(const RunConfig& cfg, const std::string& key, const std::string& def) {
    std::string dir = cfg.get("outdir", ".");
    std::string name = cfg.get(key, def);
    if (name.empty()) return "";
    if (name.find('/') != std::string::npos) return name;
    return dir + "/" + name;
}

CurveTrajectory integrate_from_config(const RunConfig& cfg, SpiralParams* params = nullptr) {
    double a = cfg.get_double("a", 0.0);
    Vec3 G0, T0;
    if (cfg.has("c0") && !cfg.has("g0")) {
        double c0 = cfg.get_double("c0", 1.0);
        G0 = {0.0, 0.0, 2.0 * c0};
        T0 = {1.0, 0.0, 0.0};
    } else {
        G0 = cfg.get_vec3("g0", {0.0, 0.0, 2.0});
        T0 = cfg.get_vec3("t0", {1.0, 0.0, 0.0});
    }
    double smax = cfg.get_double("smax", 40.0);
    double tol = cfg.get_double("tol", 1e-10);
    if (std::abs(dot(apply_I_plus_A(a, G0), T0)) > 1e-10) {
        ShiftResult sh = shift_origin(G0, T0, a);
        G0 = sh.G;
        T0 = sh.T;
    }
    CurveTrajectory traj = integrate(G0, T0, a, smax, tol);
    if (params) *params = traj.params;
    return traj;
}

json drift_json(const CurveTrajectory& traj) {
    return json{{"tangent", traj.drift.tangent_norm},
                {"first_integral", traj.drift.first_integral},
                {"curvature_law", traj.drift.curvature_law},
                {"energy", traj.drift.energy}};
}

int cmd_integrate(const RunConfig& cfg) {
    CurveTrajectory traj = integrate_from_config(cfg);
    write_text_atomic(outpath(cfg, "out", "trajectory.csv"), trajectory_csv(traj, nullptr));
    json j;
    j["a"] = traj.params.a;
    j["alpha"] = traj.params.alpha;
    j["c0"] = traj.params.c0;
    j["E0"] = traj.params.E0;
    j["drift"] = drift_json(traj);
    std::string jp = outpath(cfg, "json", "integrate.json");
    write_text_atomic(jp, j.dump(2) + "\n");
    std::cout << "integrate: wrote trajectory, max drift "
              << format_double(std::max({traj.drift.tangent_norm, traj.drift.first_integral,
                                         traj.drift.curvature_law}))
              << "\n";
    return 0;
}

int cmd_trace(const RunConfig& cfg) {
    CurveTrajectory traj = integrate_from_config(cfg);
    TraceAtInfinity tr = extract_trace(traj, traj.params.a);
    write_text_atomic(outpath(cfg, "json", "trace.json"), trace_json(tr));
    if (cfg.has("out"))
        write_text_atomic(outpath(cfg, "out", "trajectory.csv"), trajectory_csv(traj, &tr));
    std::cout << "trace: B+ = " << format_vec3(tr.plus.B) << ", b+ = "
              << format_double(tr.plus.b_amp) << "\n";
    return 0;
}

int cmd_verify_asymptotics(const RunConfig& cfg) {
    CurveTrajectory traj = integrate_from_config(cfg);
    TraceAtInfinity tr = extract_trace(traj, traj.params.a);
    AsymptoticsReport rep = verify_asymptotics(traj, traj.params.a, tr);
    write_text_atomic(outpath(cfg, "json", "asymptotics.json"), asym_json(rep));
    for (const auto& p : rep.parts)
        std::cout << (p.pass ? "pass" : "FAIL") << "  " << p.name << " claimed O(s^"
                  << p.claimed_order << ") slope+ "
                  << (p.plus.exact ? std::string("exact") : format_double(p.plus.slope))
                  << "\n";
    return 0;
}

int cmd_convergence(const RunConfig& cfg) {
    CurveTrajectory traj = integrate_from_config(cfg);
    TraceAtInfinity tr = extract_trace(traj, traj.params.a);
    std::vector<double> tl = cfg.get_list("tlist", {1e-4, 1e-2, 1.0});
    auto rows = convergence_check(traj, traj.params.a, tr, tl);
    write_text_atomic(outpath(cfg, "json", "convergence.json"), convergence_json(rows));
    for (const auto& r : rows)
        std::cout << "t=" << format_double(r.t) << " sup=" << format_double(r.sup_diff)
                  << " bound=" << format_double(r.bound)
                  << (r.sup_diff <= r.bound ? " ok" : " VIOLATED") << "\n";
    return 0;
}

Complex get_complex(const RunConfig& cfg, const std::string& key, Complex fallback) {
    if (!cfg.has(key)) return fallback;
    auto parts = cfg.get_list(key, {});
    if (parts.size() != 2)
        throw Error(ErrorKind::Validation, "'" + key + "' needs two components re,im");
    return {parts[0], parts[1]};
}

int cmd_nls(const RunConfig& cfg) {
    Complex f0 = get_complex(cfg, "f0", {1.0, 0.0});
    Complex fp0 = get_complex(cfg, "fp0", {0.0, 0.3});
    double alpha = cfg.get_double("alpha", 0.5);
    double smax = cfg.get_double("smax", 40.0);
    double tol = cfg.get_double("tol", 1e-10);
    NlsProfile p = integrate_f(f0, fp0, alpha, smax, tol);
    FLimits lim = extract_f_limits(p);
    FAsymptoticsReport rep = verify_f_asymptotics(p, lim);
    write_text_atomic(outpath(cfg, "out", "profile.csv"), profile_csv(p));
    std::string blob = limits_json(lim);
    blob += f_asym_json(rep);
    write_text_atomic(outpath(cfg, "json", "nls.json"), blob);
    std::cout << "nls: |f|inf+ = " << format_double(lim.plus.mod_f_inf) << ", E0 = "
              << format_double(p.E0) << "\n";
    return 0;
}

int cmd_nls_scatter(const RunConfig& cfg) {
    FScatterResult r = f_scatter_inverse(
        cfg.get_double("modf", 1.0), cfg.get_double("theta1", 0.0),
        cfg.get_double("modfp", 0.5), cfg.get_double("theta2", 0.0),
        cfg.get_double("alpha", 0.0), cfg.get_list("schedule", {20.0, 40.0, 80.0}),
        cfg.get_double("tol", 1e-11));
    json j;
    j["f0"] = {r.f0.real(), r.f0.imag()};
    j["fp0"] = {r.fp0.real(), r.fp0.imag()};
    j["schedule"] = r.schedule;
    j["cauchy"] = r.cauchy;
    j["mod_f_err"] = r.mod_f_err;
    j["mod_fp_err"] = r.mod_fp_err;
    j["theta1_err"] = r.theta1_err;
    j["theta2_err"] = r.theta2_err;
    j["polish_iterations"] = r.polish_iterations;
    write_text_atomic(outpath(cfg, "json", "nls-scatter.json"), j.dump(2) + "\n");
    std::cout << "nls-scatter: f(0) = " << format_double(r.f0.real()) << "+"
              << format_double(r.f0.imag()) << "i, validation errs "
              << format_double(r.mod_f_err) << " / " << format_double(r.theta1_err) << " rad\n";
    return 0;
}

int cmd_scatter(const RunConfig& cfg) {
    ScatterRequest req;
    req.a = cfg.get_double("a", 10.0);
    req.B = cfg.get_vec3("b", {std::sqrt(0.75), 0.0, 0.5}).normalized();
    req.a_phase = cfg.get_double("aphase", 0.0);
    req.b_amp = cfg.get_double("bamp", 1.0);
    req.end = cfg.get("end", "plus") == "minus" ? End::Minus : End::Plus;
    InverseResult r = solve_inverse(req, cfg.get_list("schedule", {20.0, 40.0, 80.0}),
                                    cfg.get_double("tol", 1e-4));
    json j;
    j["T0"] = {r.T0.x, r.T0.y, r.T0.z};
    j["Tp0"] = {r.Tp0.x, r.Tp0.y, r.Tp0.z};
    j["schedule"] = r.diag.schedule;
    j["cauchy"] = r.diag.cauchy;
    j["B_err"] = r.diag.B_err;
    j["b_amp_rel_err"] = r.diag.b_amp_rel_err;
    j["a_phase_err"] = r.diag.a_phase_err;
    j["polish_iterations"] = r.diag.polish_iterations;
    write_text_atomic(outpath(cfg, "json", "scatter.json"), j.dump(2) + "\n");
    std::cout << "scatter: T(0) = " << format_vec3(r.T0) << ", B err "
              << format_double(r.diag.B_err) << "\n";
    return 0;
}

int cmd_odd(const RunConfig& cfg) {
    OddFamilyResult r = odd_family(cfg.get_double("a", 10.0), cfg.get_double("delta", 0.956),
                                   cfg.get_double("smax", 40.0), cfg.get_double("tol", 1e-10));
    write_text_atomic(outpath(cfg, "out", "odd.csv"), trajectory_csv(r.traj, nullptr));
    json j;
    j["a"] = r.point.a;
    j["delta"] = r.point.delta;
    j["A3_plus"] = r.point.A3_plus;
    j["oddness_defect"] = r.point.oddness_defect;
    write_text_atomic(outpath(cfg, "json", "odd.json"), j.dump(2) + "\n");
    std::cout << "odd: A3+ = " << format_double(r.point.A3_plus) << ", defect "
              << format_double(r.point.oddness_defect) << "\n";
    return 0;
}

int cmd_plane_spiral(const RunConfig& cfg) {
    PlaneSpiralResult r =
        find_plane_spiral(cfg.get_double("a", 10.0), cfg.get_double("tol-delta", 1e-8));
    json j;
    j["delta0"] = r.delta0;
    j["A3_at_delta0"] = r.A3_at_delta0;
    j["evaluations"] = r.evaluations;
    write_text_atomic(outpath(cfg, "json", "plane-spiral.json"), j.dump(2) + "\n");
    std::cout << "plane-spiral: delta0 = " << format_double(r.delta0) << ", A3 = "
              << format_double(r.A3_at_delta0) << "\n";
    return 0;
}

int cmd_mixed(const RunConfig& cfg) {
    MixedFamilyResult r = mixed_family(cfg.get_double("a", 3.0), cfg.get_double("c0", 1.8),
                                       cfg.get_int("sign", 1), cfg.get_double("smax", 40.0),
                                       cfg.get_double("tol", 1e-10));
    write_text_atomic(outpath(cfg, "out", "mixed.csv"), trajectory_csv(r.traj, nullptr));
    json j;
    j["a"] = r.point.a;
    j["c0"] = r.point.c0;
    j["sign"] = r.point.sign;
    j["alpha"] = r.point.alpha;
    j["symmetry_defect"] = r.point.symmetry_defect;
    j["sign_relation_defect"] = r.point.sign_relation_defect;
    j["A_plus"] = {r.point.A_plus.x, r.point.A_plus.y, r.point.A_plus.z};
    j["A_minus"] = {r.point.A_minus.x, r.point.A_minus.y, r.point.A_minus.z};
    write_text_atomic(outpath(cfg, "json", "mixed.json"), j.dump(2) + "\n");
    std::cout << "mixed: alpha = " << format_double(r.point.alpha) << ", defect "
              << format_double(r.point.symmetry_defect) << "\n";
    return 0;
}

int cmd_self_intersect(const RunConfig& cfg) {
    MixedFamilyResult r = mixed_family(cfg.get_double("a", 3.0), cfg.get_double("c0", 6.0),
                                       cfg.get_int("sign", 1), cfg.get_double("smax", 40.0),
                                       cfg.get_double("tol", 1e-10));
    std::vector<double> roots = detect_self_intersection(r.traj);
    json j;
    j["alpha"] = r.point.alpha;
    j["crossings"] = roots;
    write_text_atomic(outpath(cfg, "json", "self-intersect.json"), j.dump(2) + "\n");
    std::cout << "self-intersect: " << roots.size() << " crossing(s)\n";
    return 0;
}

int cmd_singular(const RunConfig& cfg) {
    SingularSolution sol = build_singular_solution(cfg.get_double("c0", 0.8),
                                                   cfg.get_double("smax", 40.0),
                                                   cfg.get_double("tol", 1e-10));
    // piecewise curve at t = 1
    std::string csv = "# binormal-lab singular-solution v1\n";
    csv += "# c0 = " + format_double(sol.c0) + "\n";
    csv += "# corner_plus = " + format_vec3(sol.corner_plus) + "\n";
    csv += "# corner_minus = " + format_vec3(sol.corner_minus) + "\n";
    csv += "# columns: s,G1,G2,G3\n";
    double S = sol.base.smax();
    const int N = 4001;
    for (int i = 0; i < N; ++i) {
        double s = -S + 2.0 * S * i / (N - 1.0);
        Vec3 g = sol.G(s);
        csv += format_double(s) + "," + format_vec3(g) + "\n";
    }
    write_text_atomic(outpath(cfg, "out", "singular.csv"), csv);
    json j;
    j["c0"] = sol.c0;
    j["corner_plus"] = {sol.corner_plus.x, sol.corner_plus.y, sol.corner_plus.z};
    j["corner_minus"] = {sol.corner_minus.x, sol.corner_minus.y, sol.corner_minus.z};
    j["continuity_defect"] = sol.continuity_defect;
    j["tangent_jump_defect"] = sol.tangent_jump_defect;
    j["max_residual"] = sol.max_residual;
    write_text_atomic(outpath(cfg, "json", "singular.json"), j.dump(2) + "\n");
    std::cout << "singular: residual " << format_double(sol.max_residual) << "\n";
    return 0;
}

int cmd_nonuniqueness(const RunConfig& cfg) {
    NonUniquenessReport rep = demonstrate_nonuniqueness(cfg.get_double("c0", 0.8));
    json j;
    j["c0"] = rep.c0;
    j["c0_regular"] = rep.c0_regular;
    j["corner_angle"] = rep.corner_angle;
    j["corner_mismatch"] = rep.corner_mismatch;
    j["residual_singular"] = rep.residual_singular;
    j["residual_regular"] = rep.residual_regular;
    j["sup_difference"] = rep.sup_difference;
    write_text_atomic(outpath(cfg, "json", "nonuniqueness.json"), j.dump(2) + "\n");
    std::cout << "nonuniqueness: two solutions, sup difference "
              << format_double(rep.sup_difference) << "\n";
    return 0;
}

int cmd_figures(const RunConfig& cfg) {
    int which = cfg.get_int("which", 1);
    std::string dir = cfg.get("outdir", ".");
    double tol = cfg.get_double("tol", 1e-10);
    auto traj_csv_for = [&](const CurveTrajectory& t, const std::string& name) {
        write_text_atomic(dir + "/" + name, trajectory_csv(t, nullptr));
        return name;
    };
    PlotSpec spec;
    spec.out_png = "figure" + std::to_string(which) + ".png";

    switch (which) {
        case 1: {
            const double pts[3][2] = {{10.0, 1.0}, {15.0, 5.0}, {20.0, 3.0}};
            std::vector<CurveTrajectory> trajs(3);
            parallel_for(3, [&](std::size_t i) {
                trajs[i] = integrate({0.0, 0.0, 2.0 * pts[i][1]}, {1.0, 0.0, 0.0}, pts[i][0],
                                     40.0, tol);
            });
            for (int i = 0; i < 3; ++i) {
                std::ostringstream name;
                name << "fig1_a" << pts[i][0] << "_c" << pts[i][1] << ".csv";
                spec.csv_files.push_back(traj_csv_for(trajs[i], name.str()));
            }
            spec.title = "G(s) for (a,c0) = (10,1), (15,5), (20,3)";
            break;
        }
        case 2:
        case 3:
        case 4: {
            double a = which == 4 ? 50.0 : 10.0;
            double delta = which == 2 ? 0.956 : (which == 3 ? -0.1 : 0.9);
            OddFamilyResult r = odd_family(a, delta, 40.0, tol);
            std::string name = "fig" + std::to_string(which) + "_odd.csv";
            spec.csv_files.push_back(traj_csv_for(r.traj, name));
            spec.zoom_panel = true;
            std::ostringstream t;
            t << "odd family, a = " << a << ", delta = " << delta;
            spec.title = t.str();
            break;
        }
        case 5:
        case 6:
        case 7: {
            double a = which == 7 ? 10.0 : 3.0;
            double c0 = which == 5 ? 1.8 : (which == 6 ? 0.4 : 4.0);
            int sign = which == 7 ? -1 : 1;
            MixedFamilyResult r = mixed_family(a, c0, sign, 40.0, tol);
            std::string name = "fig" + std::to_string(which) + "_mixed.csv";
            spec.csv_files.push_back(traj_csv_for(r.traj, name));
            spec.zoom_panel = true;
            std::ostringstream t;
            t << "mixed family, a = " << a << ", c0 = " << c0 << ", T3(0) = " << sign;
            spec.title = t.str();
            break;
        }
        case 8: {
            double c0 = cfg.get_double("c0", 0.8);
            SingularSolution sol = build_singular_solution(c0, 40.0, tol);
            const std::vector<double> times = {1e-4, 0.1, 1.0, 1.5, 2.0, 2.5};
            for (double t : times) {
                std::ostringstream name;
                name << "fig8_t" << t << ".csv";
                std::string csv = "# binormal-lab singular-evolution v1\n";
                csv += "# t = " + format_double(t) + "\n# columns: s,X1,X2,X3\n";
                double srange = 0.98 * sol.base.smax() * std::sqrt(t);
                const int N = 1501;
                for (int i = 0; i < N; ++i) {
                    double s = -srange + 2.0 * srange * i / (N - 1.0);
                    csv += format_double(s) + "," + format_vec3(sol.X(s, t)) + "\n";
                }
                write_text_atomic(dir + "/" + name.str(), csv);
                spec.csv_files.push_back(name.str());
            }
            spec.overlay = true;
            std::ostringstream t;
            t << "singular vortex evolution, c0 = " << c0;
            spec.title = t.str();
            break;
        }
        default:
            throw Error(ErrorKind::Validation, "--which must be 1..8");
    }
    write_text_atomic(dir + "/figure" + std::to_string(which) + ".gp",
                      emit_plot_script(spec));
    std::cout << "figures: wrote figure" << which << ".gp and " << spec.csv_files.size()
              << " data file(s)\n";
    return 0;
}

struct OptionDef {
    const char* key;
    const char* help;
    const char* def;  // nullptr = no default (omitted unless set)
};

const std::vector<std::pair<std::string, std::vector<OptionDef>>>& command_table() {
    static const std::vector<std::pair<std::string, std::vector<OptionDef>>> table = {
        {"integrate",
         {{"a", "rotation parameter a", "0"},
          {"g0", "initial point G(0) as x,y,z", "0,0,2"},
          {"t0", "initial tangent G'(0) as x,y,z", "1,0,0"},
          {"c0", "shorthand: G0=(0,0,2c0), T0=(1,0,0)", nullptr},
          {"smax", "arclength half-range", "40"},
          {"tol", "integration tolerance", "1e-10"},
          {"out", "trajectory CSV", "trajectory.csv"},
          {"json", "summary JSON", "integrate.json"},
          {"outdir", "output directory", "."}}},
        {"trace",
         {{"a", "rotation parameter a", "0"},
          {"g0", "initial point", "0,0,2"},
          {"t0", "initial tangent", "1,0,0"},
          {"c0", "shorthand seed", nullptr},
          {"smax", "arclength half-range", "40"},
          {"tol", "integration tolerance", "1e-10"},
          {"out", "optional trajectory CSV", nullptr},
          {"json", "trace JSON", "trace.json"},
          {"outdir", "output directory", "."}}},
        {"verify-asymptotics",
         {{"a", "rotation parameter a", "10"},
          {"g0", "initial point", "0,0,2"},
          {"t0", "initial tangent", "1,0,0"},
          {"c0", "shorthand seed", nullptr},
          {"smax", "arclength half-range", "40"},
          {"tol", "integration tolerance", "1e-10"},
          {"json", "report JSON", "asymptotics.json"},
          {"outdir", "output directory", "."}}},
        {"convergence",
         {{"a", "rotation parameter a", "10"},
          {"g0", "initial point", "0,0,2"},
          {"t0", "initial tangent", "1,0,0"},
          {"c0", "shorthand seed", nullptr},
          {"smax", "arclength half-range", "40"},
          {"tol", "integration tolerance", "1e-10"},
          {"tlist", "times to test", "0.0001,0.01,1"},
          {"json", "report JSON", "convergence.json"},
          {"outdir", "output directory", "."}}},
        {"nls",
         {{"f0", "f(0) as re,im", "1,0"},
          {"fp0", "f'(0) as re,im", "0,0.3"},
          {"alpha", "alpha", "0.5"},
          {"smax", "arclength half-range", "40"},
          {"tol", "integration tolerance", "1e-10"},
          {"out", "profile CSV", "profile.csv"},
          {"json", "limits+report JSON", "nls.json"},
          {"outdir", "output directory", "."}}},
        {"nls-scatter",
         {{"modf", "|f| at +inf", "1"},
          {"theta1", "f limit phase", "0"},
          {"modfp", "|f'| at +inf", "0.5"},
          {"theta2", "f' limit phase", "0"},
          {"alpha", "alpha", "0"},
          {"schedule", "seed locations", "20,40,80"},
          {"tol", "integration tolerance", "1e-11"},
          {"json", "result JSON", "nls-scatter.json"},
          {"outdir", "output directory", "."}}},
        {"scatter",
         {{"a", "rotation parameter a (nonzero)", "10"},
          {"b", "unit vector B as x,y,z", "0.86602540378443865,0,0.5"},
          {"aphase", "a_phase in [0,2pi)", "0"},
          {"bamp", "b amplitude >= 0", "1"},
          {"end", "plus or minus", "plus"},
          {"schedule", "seed locations", "20,40,80"},
          {"tol", "validation tolerance", "0.0001"},
          {"json", "result JSON", "scatter.json"},
          {"outdir", "output directory", "."}}},
        {"odd",
         {{"a", "rotation parameter a", "10"},
          {"delta", "third tangent component at 0", "0.956"},
          {"smax", "arclength half-range", "40"},
          {"tol", "integration tolerance", "1e-10"},
          {"out", "trajectory CSV", "odd.csv"},
          {"json", "result JSON", "odd.json"},
          {"outdir", "output directory", "."}}},
        {"plane-spiral",
         {{"a", "rotation parameter a (nonzero)", "10"},
          {"tol-delta", "bisection width", "1e-8"},
          {"json", "result JSON", "plane-spiral.json"},
          {"outdir", "output directory", "."}}},
        {"mixed",
         {{"a", "rotation parameter a", "3"},
          {"c0", "curvature at 0", "1.8"},
          {"sign", "T3(0) = +-1", "1"},
          {"smax", "arclength half-range", "40"},
          {"tol", "integration tolerance", "1e-10"},
          {"out", "trajectory CSV", "mixed.csv"},
          {"json", "result JSON", "mixed.json"},
          {"outdir", "output directory", "."}}},
        {"self-intersect",
         {{"a", "rotation parameter a", "3"},
          {"c0", "curvature at 0", "6"},
          {"sign", "T3(0) = +-1", "1"},
          {"smax", "arclength half-range", "40"},
          {"tol", "integration tolerance", "1e-10"},
          {"json", "result JSON", "self-intersect.json"},
          {"outdir", "output directory", "."}}},
        {"singular",
         {{"c0", "base curvature", "0.8"},
          {"smax", "arclength half-range", "40"},
          {"tol", "integration tolerance", "1e-10"},
          {"out", "piecewise curve CSV", "singular.csv"},
          {"json", "result JSON", "singular.json"},
          {"outdir", "output directory", "."}}},
        {"nonuniqueness",
         {{"c0", "corner parameter", "0.8"},
          {"json", "result JSON", "nonuniqueness.json"},
          {"outdir", "output directory", "."}}},
        {"figures",
         {{"which", "figure number 1..8", "1"},
          {"c0", "override for figure 8", nullptr},
          {"tol", "integration tolerance", "1e-10"},
          {"outdir", "output directory", "."}}},
    };
    return table;
}

} // namespace

int run_command(const RunConfig& cfg) {
    if (cfg.command == "integrate") return cmd_integrate(cfg);
    if (cfg.command == "trace") return cmd_trace(cfg);
    if (cfg.command == "verify-asymptotics") return cmd_verify_asymptotics(cfg);
    if (cfg.command == "convergence") return cmd_convergence(cfg);
    if (cfg.command == "nls") return cmd_nls(cfg);
    if (cfg.command == "nls-scatter") return cmd_nls_scatter(cfg);
    if (cfg.command == "scatter") return cmd_scatter(cfg);
    if (cfg.command == "odd") return cmd_odd(cfg);
    if (cfg.command == "plane-spiral") return cmd_plane_spiral(cfg);
    if (cfg.command == "mixed") return cmd_mixed(cfg);
    if (cfg.command == "self-intersect") return cmd_self_intersect(cfg);
    if (cfg.command == "singular") return cmd_singular(cfg);
    if (cfg.command == "nonuniqueness") return cmd_nonuniqueness(cfg);
    if (cfg.command == "figures") return cmd_figures(cfg);
    throw Error(ErrorKind::Validation, "unknown command '" + cfg.command + "'");
}

int cli_dispatch(const std::vector<std::string>& args) {
    try {
        CLI::App app{"binormal-lab: self-similar binormal-flow laboratory"};
        app.require_subcommand(0, 1);
        std::string config_path, emit_path;
        app.add_option("--config", config_path, "run from a config file");
        app.add_option("--emit-config", emit_path, "write the effective config");

        struct Pending {
            std::string command;
            std::vector<std::string> keys;
            std::vector<std::string> values;  // reserved up front: stable addresses
        };
        std::vector<std::unique_ptr<Pending>> pend;
        std::vector<CLI::App*> subs;
        for (const auto& [name, opts] : command_table()) {
            CLI::App* sub = app.add_subcommand(name, "");
            auto p = std::make_unique<Pending>();
            p->command = name;
            p->keys.reserve(opts.size());
            p->values.reserve(opts.size());
            for (const auto& od : opts) {
                p->keys.emplace_back(od.key);
                p->values.emplace_back(od.def ? od.def : "");
                std::string names = "--" + std::string(od.key);
                // the vector seeds are conventionally written upper-case
                if (std::string(od.key) == "g0") names += ",--G0";
                if (std::string(od.key) == "t0") names += ",--T0";
                if (std::string(od.key) == "b") names += ",--B";
                sub->add_option(names, p->values.back(), od.help);
            }
            pend.push_back(std::move(p));
            subs.push_back(sub);
        }

        std::vector<const char*> argv;
        argv.push_back("binormal_lab");
        for (const auto& a : args) argv.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::ParseError& e) {
            int rc = app.exit(e);
            return rc == 0 ? 0 : 1;
        }

        RunConfig cfg;
        if (!config_path.empty()) {
            cfg = parse_config(read_file(config_path));
        } else {
            bool got = false;
            for (std::size_t i = 0; i < subs.size(); ++i) {
                if (!subs[i]->parsed()) continue;
                cfg.command = pend[i]->command;
                for (std::size_t k = 0; k < pend[i]->keys.size(); ++k)
                    if (!pend[i]->values[k].empty())
                        cfg.set(pend[i]->keys[k], pend[i]->values[k]);
                got = true;
                break;
            }
            if (!got) {
                std::cout << app.help();
                return 0;
            }
        }
        if (!emit_path.empty()) write_text_atomic(emit_path, emit_config(cfg));
        return run_command(cfg);
    } catch (const Error& e) {
        nlohmann::json j;
        j["error"] = e.kind_name();
        j["message"] = e.what();
        std::cerr << j.dump() << std::endl;
        return e.kind() == ErrorKind::Validation ? 1 : 2;
    } catch (const std::exception& e) {
        nlohmann::json j;
        j["error"] = "Internal";
        j["message"] = e.what();
        std::cerr << j.dump() << std::endl;
        return 2;
    }
}

} // namespace binormal
