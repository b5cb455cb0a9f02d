#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "frontlab/birth.hpp"
#include "frontlab/charroots.hpp"
#include "frontlab/pdecheck.hpp"
#include "frontlab/profile.hpp"
#include "frontlab/wavefront.hpp"

namespace frontlab {

/// 17 significant digits: enough to round-trip IEEE doubles bit-exactly.
inline std::string format_double17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
}

inline std::string profile_csv_text(const Profile& x) {
    std::string s = "t,x\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += format_double17(x.t(i));
        s += ',';
        s += format_double17(x.values[i]);
        s += '\n';
    }
    return s;
}

inline void write_profile_csv(const std::filesystem::path& path, const Profile& x) {
    write_text_file(path, profile_csv_text(x));
}

inline nlohmann::json profile_sidecar_json(const Profile& x) {
    return {{"t0", x.t0}, {"dt", x.dt}, {"left_limit", x.left_limit}, {"right_limit", x.right_limit}};
}

inline void write_profile_sidecar(const std::filesystem::path& path, const Profile& x) {
    write_text_file(path, profile_sidecar_json(x).dump(2) + "\n");
}

/// Read a profile back from its CSV plus JSON sidecar.
inline Profile read_profile_csv(const std::filesystem::path& csv_path,
                                const std::filesystem::path& sidecar_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open profile csv: " + csv_path.string());
    std::string line;
    std::getline(in, line);  // header
    Profile x;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("malformed profile csv row");
        x.values.push_back(std::stod(line.substr(comma + 1)));
    }
    std::ifstream side(sidecar_path);
    if (!side) throw std::runtime_error("cannot open profile sidecar: " + sidecar_path.string());
    nlohmann::json j;
    side >> j;
    x.t0 = j.at("t0").get<double>();
    x.dt = j.at("dt").get<double>();
    x.left_limit = j.at("left_limit").get<double>();
    x.right_limit = j.at("right_limit").get<double>();
    x.validate();
    return x;
}

inline std::string roots_csv_text(const CharRootSet& set) {
    std::string s = "re,im,abs_chi,abs_dchi\n";
    for (const auto& r : set.roots) {
        s += format_double17(r.z.real());
        s += ',';
        s += format_double17(r.z.imag());
        s += ',';
        s += format_double17(r.abs_chi);
        s += ',';
        s += format_double17(r.abs_dchi);
        s += '\n';
    }
    return s;
}

inline void write_roots_csv(const std::filesystem::path& path, const CharRootSet& set) {
    write_text_file(path, roots_csv_text(set));
}

inline nlohmann::json hypothesis_report_json(const HypothesisReport& rep) {
    return {{"G_ok", rep.G_ok},
            {"H_ok", rep.H_ok},
            {"branch", to_string(rep.branch)},
            {"constants",
             {{"p", rep.constants.p},
              {"kappa", rep.constants.kappa},
              {"Gamma", rep.constants.gamma},
              {"A", rep.constants.A},
              {"zeta1", rep.constants.zeta1},
              {"zeta2", rep.constants.zeta2}}},
            {"messages", rep.messages}};
}

inline nlohmann::json front_report_json(const FrontReport& rep) {
    nlohmann::json tail = {{"B", rep.tail.fit.B},
                           {"exponent", rep.tail.fit.exponent},
                           {"lambda1_ref", rep.tail.lambda1_ref},
                           {"ok", rep.tail.ok}};
    nlohmann::json j = {{"c", rep.c},
                        {"eps", rep.eps},
                        {"converged", rep.converged},
                        {"iterations", rep.iterations},
                        {"residual_fix", rep.residual_fix},
                        {"residual_ode", rep.residual_ode},
                        {"positivity_ok", rep.positivity_ok},
                        {"tau", nullptr},
                        {"tail", tail}};
    if (rep.tau) j["tau"] = *rep.tau;
    return j;
}

inline void write_field_run(const std::filesystem::path& dir, const FieldRun& run) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest = {{"L", run.L},
                               {"dx", run.dx},
                               {"dt", run.dt},
                               {"h", run.h},
                               {"T", run.T},
                               {"history_mode", run.history_mode},
                               {"c_init", run.c_init},
                               {"x_offset", run.x_offset},
                               {"snapshot_times", run.snapshot_times}};
    std::vector<std::string> files;
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
        std::ostringstream name;
        name << "snapshot_" << k << ".csv";
        std::string s = "x,u\n";
        for (std::size_t j = 0; j < run.snapshots[k].size(); ++j) {
            s += format_double17(run.x(j));
            s += ',';
            s += format_double17(run.snapshots[k][j]);
            s += '\n';
        }
        write_text_file(dir / name.str(), s);
        files.push_back(name.str());
    }
    manifest["snapshots"] = files;
    write_text_file(dir / "run_manifest.json", manifest.dump(2) + "\n");
}

}  // namespace frontlab
