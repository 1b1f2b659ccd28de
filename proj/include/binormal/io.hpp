#pragma once

// Config files, CSV/JSON artifacts, gnuplot emission, and the CLI dispatcher.
// Everything emitted here is deterministic: fixed key order, %.17g numbers,
// no timestamps in data files.

#include <string>
#include <utility>
#include <vector>

#include "binormal/curve.hpp"
#include "binormal/families.hpp"
#include "binormal/nls.hpp"
#include "binormal/trace.hpp"

namespace binormal {

struct RunConfig {
    std::string command;
    std::vector<std::pair<std::string, std::string>> kv;  // ordered

    bool has(const std::string& k) const;
    std::string get(const std::string& k, const std::string& fallback = "") const;
    double get_double(const std::string& k, double fallback) const;
    int get_int(const std::string& k, int fallback) const;
    Vec3 get_vec3(const std::string& k, const Vec3& fallback) const;
    std::vector<double> get_list(const std::string& k,
                                 const std::vector<double>& fallback) const;
    void set(const std::string& k, const std::string& v);

    bool operator==(const RunConfig& o) const { return command == o.command && kv == o.kv; }
};

// flat key-value format with a versioned header section
std::string emit_config(const RunConfig& cfg);
RunConfig parse_config(const std::string& text);

std::string format_double(double v);  // %.17g
std::string format_vec3(const Vec3& v);

void write_text_atomic(const std::string& path, const std::string& content);

// TrajectoryFile: '#' header lines then rows s,G1,G2,G3,T1,T2,T3,c,h,y at the
// accepted-step points.
std::string trajectory_csv(const CurveTrajectory& traj, const TraceAtInfinity* trace);

struct TrajectoryFileData {
    std::vector<std::pair<std::string, std::string>> header;
    std::vector<std::array<double, 10>> rows;
    std::string header_value(const std::string& key) const;
};
TrajectoryFileData parse_trajectory_csv(const std::string& text);

std::string profile_csv(const NlsProfile& p);

// JSON blocks (nlohmann, alphabetically ordered keys)
std::string trace_json(const TraceAtInfinity& tr);
std::string limits_json(const FLimits& lim);
std::string asym_json(const AsymptoticsReport& rep);
std::string f_asym_json(const FAsymptoticsReport& rep);
std::string convergence_json(const std::vector<ConvergenceRow>& rows);

struct PlotSpec {
    std::string out_png;
    std::string title;
    std::vector<std::string> csv_files;
    bool zoom_panel = false;     //  right-hand panel restricted to |s| <= zoom
    double zoom = 2.0;
    bool overlay = false;        //  all files in one panel (evolution snapshots)
    int s_col = 1, x_col = 2, y_col = 3, z_col = 4;  // 1-based gnuplot columns
};
std::string emit_plot_script(const PlotSpec& spec);

// CLI entry point; returns the process exit code (0 ok, 1 validation, 2
// numerical); errors are reported as one-line JSON on stderr.
int cli_dispatch(const std::vector<std::string>& args);
int run_command(const RunConfig& cfg);

} // namespace binormal
