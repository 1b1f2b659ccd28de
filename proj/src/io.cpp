#include "binormal/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "binormal/error.hpp"

namespace binormal {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
}

double to_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != trim(s).size() && trim(s).substr(pos).find_first_not_of(" ") !=
                                         std::string::npos)
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Validation, "not a number: '" + s + "'");
    }
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_vec3(const Vec3& v) {
    return format_double(v.x) + "," + format_double(v.y) + "," + format_double(v.z);
}

bool RunConfig::has(const std::string& k) const {
    for (const auto& [key, _] : kv)
        if (key == k) return true;
    return false;
}

std::string RunConfig::get(const std::string& k, const std::string& fallback) const {
    for (const auto& [key, val] : kv)
        if (key == k) return val;
    return fallback;
}

double RunConfig::get_double(const std::string& k, double fallback) const {
    return has(k) ? to_double(get(k)) : fallback;
}

int RunConfig::get_int(const std::string& k, int fallback) const {
    return has(k) ? static_cast<int>(to_double(get(k))) : fallback;
}

Vec3 RunConfig::get_vec3(const std::string& k, const Vec3& fallback) const {
    if (!has(k)) return fallback;
    auto parts = split(get(k), ',');
    if (parts.size() != 3)
        throw Error(ErrorKind::Validation, "vector '" + k + "' needs three components");
    return {to_double(parts[0]), to_double(parts[1]), to_double(parts[2])};
}

std::vector<double> RunConfig::get_list(const std::string& k,
                                        const std::vector<double>& fallback) const {
    if (!has(k)) return fallback;
    std::vector<double> out;
    for (const auto& p : split(get(k), ',')) out.push_back(to_double(p));
    return out;
}

void RunConfig::set(const std::string& k, const std::string& v) {
    for (auto& [key, val] : kv)
        if (key == k) { val = v; return; }
    kv.emplace_back(k, v);
}

std::string emit_config(const RunConfig& cfg) {
    std::string out = "[binormal-lab v1]\ncommand = " + cfg.command + "\n\n[params]\n";
    for (const auto& [k, v] : cfg.kv) out += k + " = " + v + "\n";
    return out;
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::string section;
    bool versioned = false;
    for (const std::string& raw : split(text, '\n')) {
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            if (section == "binormal-lab v1") versioned = true;
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::Validation, "bad config line: " + line);
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (section == "binormal-lab v1" && k == "command") cfg.command = v;
        else cfg.kv.emplace_back(k, v);
    }
    if (!versioned)
        throw Error(ErrorKind::Validation, "missing [binormal-lab v1] header");
    if (cfg.command.empty())
        throw Error(ErrorKind::Validation, "config does not name a command");
    return cfg;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorKind::Validation, "cannot open " + tmp + " for writing");
        f << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error(ErrorKind::Validation, "cannot rename " + tmp);
}

namespace {

void header_line(std::string& out, const std::string& k, const std::string& v) {
    out += "# " + k + " = " + v + "\n";
}

std::vector<double> row_points(const CurveTrajectory& traj) {
    std::vector<double> s;
    for (const auto& st : traj.bwd.steps) s.push_back(st.lo());
    s.push_back(0.0);
    for (const auto& st : traj.fwd.steps) s.push_back(st.h > 0 ? st.s0 + st.h : st.s0);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

} // namespace

std::string trajectory_csv(const CurveTrajectory& traj, const TraceAtInfinity* trace) {
    std::string out = "# binormal-lab trajectory v1\n";
    header_line(out, "a", format_double(traj.params.a));
    header_line(out, "alpha", format_double(traj.params.alpha));
    header_line(out, "c0", format_double(traj.params.c0));
    header_line(out, "E0", format_double(traj.params.E0));
    header_line(out, "smin", format_double(traj.smin()));
    header_line(out, "smax", format_double(traj.smax()));
    header_line(out, "tol", format_double(traj.tol));
    header_line(out, "drift_tangent", format_double(traj.drift.tangent_norm));
    header_line(out, "drift_first_integral", format_double(traj.drift.first_integral));
    header_line(out, "drift_curvature_law", format_double(traj.drift.curvature_law));
    header_line(out, "drift_energy", format_double(traj.drift.energy));
    if (trace) {
        header_line(out, "trace_A_plus", format_vec3(trace->plus.A));
        header_line(out, "trace_A_minus", format_vec3(trace->minus.A));
        header_line(out, "trace_B_plus", format_vec3(trace->plus.B));
        header_line(out, "trace_B_minus", format_vec3(trace->minus.B));
        header_line(out, "trace_c_inf_plus", format_double(trace->plus.c_inf));
        header_line(out, "trace_c_inf_minus", format_double(trace->minus.c_inf));
        header_line(out, "trace_b_plus", format_double(trace->plus.b_amp));
        header_line(out, "trace_b_minus", format_double(trace->minus.b_amp));
    }
    out += "# columns: s,G1,G2,G3,T1,T2,T3,c,h,y\n";
    for (double s : row_points(traj)) {
        Vec3 G = traj.G(s), T = traj.T(s);
        out += format_double(s);
        for (double v : {G.x, G.y, G.z, T.x, T.y, T.z, traj.curvature(s), traj.h(s),
                         traj.y(s)}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

TrajectoryFileData parse_trajectory_csv(const std::string& text) {
    TrajectoryFileData data;
    for (const std::string& raw : split(text, '\n')) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq != std::string::npos)
                data.header.emplace_back(trim(line.substr(1, eq - 1)),
                                         trim(line.substr(eq + 1)));
            continue;
        }
        auto parts = split(line, ',');
        if (parts.size() != 10)
            throw Error(ErrorKind::Validation, "trajectory row must have 10 columns");
        std::array<double, 10> row{};
        for (int i = 0; i < 10; ++i) row[i] = to_double(parts[i]);
        if (!data.rows.empty() && row[0] <= data.rows.back()[0])
            throw Error(ErrorKind::Validation, "rows must be strictly increasing in s");
        data.rows.push_back(row);
    }
    return data;
}

std::string TrajectoryFileData::header_value(const std::string& key) const {
    for (const auto& [k, v] : header)
        if (k == key) return v;
    return "";
}

std::string profile_csv(const NlsProfile& p) {
    std::string out = "# binormal-lab nls-profile v1\n";
    header_line(out, "alpha", format_double(p.alpha));
    header_line(out, "E0", format_double(p.E0));
    header_line(out, "smin", format_double(p.smin()));
    header_line(out, "smax", format_double(p.smax()));
    header_line(out, "tol", format_double(p.tol));
    header_line(out, "energy_drift", format_double(p.energy_drift));
    out += "# columns: s,f_re,f_im,fp_re,fp_im,mod2,y,h\n";
    const int N = 2001;
    for (int i = 0; i < N; ++i) {
        double s = p.smin() + (p.smax() - p.smin()) * i / (N - 1.0);
        NlsState st = p.state(s);
        out += format_double(s);
        for (double v : {st.f.real(), st.f.imag(), st.fp.real(), st.fp.imag(),
                         std::norm(st.f), p.y(s), p.h(s)}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

namespace {

json end_json(const TraceEnd& e) {
    json j;
    j["A"] = {e.A.x, e.A.y, e.A.z};
    j["B"] = {e.B.x, e.B.y, e.B.z};
    j["B_defect"] = e.B_defect;
    j["c_inf"] = e.c_inf;
    j["c_inf_closed"] = e.c_inf_closed;
    j["gamma"] = e.gamma;
    j["gamma_tilde"] = e.gamma_tilde;
    j["b_amp"] = e.b_amp;
    j["b_closed"] = e.b_closed;
    if (e.a_phase) j["a_phase"] = *e.a_phase;
    else j["a_phase"] = nullptr;
    j["fit_residual"] = e.fit_residual;
    return j;
}

} // namespace

std::string trace_json(const TraceAtInfinity& tr) {
    json j;
    j["a"] = tr.a;
    j["alpha"] = tr.alpha;
    j["E0"] = tr.E0;
    j["sup_c"] = tr.sup_c;
    j["S_used"] = tr.S_used;
    j["tail_bound"] = tr.tail_bound;
    j["plus"] = end_json(tr.plus);
    j["minus"] = end_json(tr.minus);
    return j.dump(2) + "\n";
}

namespace {

json f_end_json(const FLimitEnd& e) {
    json j;
    j["mod_f_inf"] = e.mod_f_inf;
    j["mod_fp_inf"] = e.mod_fp_inf;
    j["gamma"] = e.gamma;
    j["gamma_tilde"] = e.gamma_tilde;
    j["b_amp"] = e.b_amp;
    j["a_phase"] = e.a_phase ? json(*e.a_phase) : json(nullptr);
    j["c_phase"] = e.c_phase ? json(*e.c_phase) : json(nullptr);
    j["d_phase"] = e.d_phase ? json(*e.d_phase) : json(nullptr);
    j["decay_constant"] = e.decay_constant;
    j["decay_bound"] = e.decay_bound;
    return j;
}

} // namespace

std::string limits_json(const FLimits& lim) {
    json j;
    j["alpha"] = lim.alpha;
    j["E0"] = lim.E0;
    j["plus"] = f_end_json(lim.plus);
    j["minus"] = f_end_json(lim.minus);
    // phase gauge: f(0) fixed by the integration seed (see README)
    j["phase_gauge"] = "anchored at the integration seed";
    return j.dump(2) + "\n";
}

std::string asym_json(const AsymptoticsReport& rep) {
    json j;
    j["margin"] = rep.margin;
    json parts = json::array();
    for (const auto& p : rep.parts) {
        json q;
        q["name"] = p.name;
        q["claimed_order"] = p.claimed_order;
        q["slope_plus"] = p.plus.exact ? json("exact") : json(p.plus.slope);
        q["slope_minus"] = p.minus.exact ? json("exact") : json(p.minus.slope);
        q["pass"] = p.pass;
        parts.push_back(q);
    }
    j["parts"] = parts;
    j["all_pass"] = rep.all_pass();
    return j.dump(2) + "\n";
}

std::string f_asym_json(const FAsymptoticsReport& rep) {
    json j;
    j["margin"] = rep.margin;
    json parts = json::array();
    for (const auto& p : rep.parts) {
        json q;
        q["name"] = p.name;
        q["claimed_order"] = p.claimed_order;
        q["slope_plus"] = p.plus.exact ? json("exact") : json(p.plus.slope);
        q["slope_minus"] = p.minus.exact ? json("exact") : json(p.minus.slope);
        q["pass"] = p.pass;
        parts.push_back(q);
    }
    j["parts"] = parts;
    j["amp_rel_err_plus"] = rep.amp_rel_err_plus;
    j["amp_rel_err_minus"] = rep.amp_rel_err_minus;
    j["all_pass"] = rep.all_pass();
    return j.dump(2) + "\n";
}

std::string convergence_json(const std::vector<ConvergenceRow>& rows) {
    json arr = json::array();
    bool ok = true;
    for (const auto& r : rows) {
        arr.push_back({{"t", r.t}, {"sup_diff", r.sup_diff}, {"bound", r.bound}});
        ok = ok && r.sup_diff <= r.bound;
    }
    json j;
    j["rows"] = arr;
    j["all_within_bound"] = ok;
    return j.dump(2) + "\n";
}

std::string emit_plot_script(const PlotSpec& spec) {
    std::string s;
    s += "# binormal-lab gnuplot script v1\n";
    s += "set datafile separator ','\n";
    s += "set terminal pngcairo size 1280,640\n";
    s += "set output '" + spec.out_png + "'\n";
    s += "set ticslevel 0\n";
    int panels = spec.zoom_panel ? 2 : 1;
    if (spec.csv_files.size() > 1 && !spec.overlay)
        panels = static_cast<int>(spec.csv_files.size());
    s += "set multiplot layout 1," + std::to_string(panels) + " title '" + spec.title + "'\n";
    std::string cols = "using " + std::to_string(spec.x_col) + ":"
                       + std::to_string(spec.y_col) + ":" + std::to_string(spec.z_col);
    if (spec.overlay && spec.csv_files.size() > 1) {
        s += "splot ";
        for (std::size_t i = 0; i < spec.csv_files.size(); ++i) {
            if (i) s += ", ";
            s += "'" + spec.csv_files[i] + "' " + cols + " with lines notitle";
        }
        s += "\n";
    } else if (spec.csv_files.size() > 1) {
        for (const auto& f : spec.csv_files)
            s += "splot '" + f + "' " + cols + " with lines lc rgb 'black' notitle\n";
    } else {
        const std::string& f = spec.csv_files.front();
        s += "splot '" + f + "' " + cols + " with lines lc rgb 'black' notitle\n";
        if (spec.zoom_panel) {
            std::string sc = "$" + std::to_string(spec.s_col);
            std::string cond = "(abs(" + sc + ") <= " + format_double(spec.zoom) + " ? $"
                               + std::to_string(spec.x_col) + " : 1/0)";
            s += "splot '" + f + "' using " + cond + ":" + std::to_string(spec.y_col) + ":"
                 + std::to_string(spec.z_col) + " with lines lc rgb 'black' notitle\n";
        }
    }
    s += "unset multiplot\n";
    return s;
}

} // namespace binormal
