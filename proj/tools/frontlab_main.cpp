// frontlab: command-line front end for the travelling-wavefront laboratory.
//
// Subcommands: check, roots, backbone, front, simulate, validate, sweep.
// Exit codes: 0 success, 1 domain failure, 2 usage/config error.

#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "frontlab/frontlab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::string seed_profile;
    int jobs = 1;
};

json manifest_base(const std::string& command, const frontlab::ConfigFile& cfg,
                   const frontlab::RunConfig& rc) {
    json j;
    j["tool"] = "frontlab";
    j["version"] = frontlab::version;
    j["command"] = command;
    json c = json::object();
    for (const auto& [k, v] : cfg.values) c[k] = v;
    j["config"] = c;
    j["resolved"] = {{"model", rc.model_kind},
                     {"h", rc.h},
                     {"c", rc.c},
                     {"eps", rc.eps},
                     {"grid", {{"t_min", rc.t_min}, {"t_max", rc.t_max}, {"dt", rc.dt}}},
                     {"solver",
                      {{"tol", rc.tol},
                       {"max_iter", rc.max_iter},
                       {"damping", rc.damping},
                       {"grid_density", rc.grid_density},
                       {"force", rc.force}}},
                     {"pde",
                      {{"L", rc.pde_L},
                       {"dx", rc.pde_dx},
                       {"T", rc.pde_T},
                       {"snap_every", rc.pde_snap_every},
                       {"x_offset", rc.pde_x_offset}}}};
    return j;
}

void write_json(const fs::path& path, const json& j) {
    frontlab::write_text_file(path, j.dump(2) + "\n");
}

void write_error(const fs::path& out_dir, const std::string& command, const std::string& what) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!ec) write_json(out_dir / "error.json", {{"command", command}, {"error", what}});
    std::cerr << "frontlab " << command << ": " << what << "\n";
}

frontlab::Profile load_seed(const CliArgs& args) {
    fs::path csv = args.seed_profile.empty() ? fs::path(args.out_dir) / "psi.csv"
                                             : fs::path(args.seed_profile);
    fs::path side = csv;
    side.replace_extension(".json");
    if (!fs::exists(csv) || !fs::exists(side))
        throw CLI::ValidationError("seed profile not found (run `backbone` first or pass "
                                   "--seed-profile): " +
                                   csv.string());
    return frontlab::read_profile_csv(csv, side);
}

int cmd_check(const CliArgs& args, const frontlab::ConfigFile& cfg,
              const frontlab::RunConfig& rc) {
    const auto rep = frontlab::certify_H(rc.g, rc.h, rc.grid_density);
    fs::create_directories(args.out_dir);
    write_json(fs::path(args.out_dir) / "hypothesis.json", frontlab::hypothesis_report_json(rep));
    write_json(fs::path(args.out_dir) / "manifest_check.json", manifest_base("check", cfg, rc));
    for (const auto& m : rep.messages) std::cout << m << "\n";
    std::cout << (rep.H_ok ? "H certified" : "H not certified") << "\n";
    return rep.H_ok ? 0 : 1;
}

int cmd_roots(const CliArgs& args, const frontlab::ConfigFile& cfg,
              const frontlab::RunConfig& rc) {
    const double p = rc.g.p0();
    const double lambda = frontlab::real_root_lambda(p, rc.h);
    json summary;
    summary["p"] = p;
    summary["h"] = rc.h;
    summary["lambda"] = lambda;
    double eps = 0.0;
    if (rc.has_speed && rc.eps > 0.0) {
        eps = rc.eps;
        const auto rr = frontlab::real_roots_eps(p, rc.h, eps);
        summary["eps"] = eps;
        summary["lambda1"] = rr.lambda1;
        summary["lambda_inf"] = rr.lambda_inf;
    }
    const double re_min = cfg.get_double("roots.re_min", -2.0);
    const double re_max =
        cfg.get_double("roots.re_max", std::max(2.0 * (p - 1.0), lambda) + 0.5);
    const frontlab::QuasiPolynomial qp{p, rc.h, eps};
    const auto set = frontlab::roots_in_strip(qp, re_min, re_max);
    summary["strip"] = {{"re_min", set.re_min}, {"re_max", set.re_max}, {"im_max", set.im_max}};
    summary["count"] = set.count_by_argument_principle;
    fs::create_directories(args.out_dir);
    frontlab::write_roots_csv(fs::path(args.out_dir) / "roots.csv", set);
    write_json(fs::path(args.out_dir) / "roots_summary.json", summary);
    write_json(fs::path(args.out_dir) / "manifest_roots.json", manifest_base("roots", cfg, rc));
    std::cout << "lambda = " << frontlab::format_double17(lambda) << ", " << set.roots.size()
              << " roots in strip [" << re_min << ", " << re_max << "]\n";
    return 0;
}

int cmd_backbone(const CliArgs& args, const frontlab::ConfigFile& cfg,
                 const frontlab::RunConfig& rc) {
    frontlab::BackboneOptions opts;
    opts.dt = cfg.get_double("backbone.dt", 0.0);
    opts.seed_amplitude = cfg.get_double("backbone.seed_amplitude", 1e-8);
    opts.force = rc.force;
    opts.grid_density = rc.grid_density;
    const auto res = frontlab::solve_heteroclinic(rc.g, rc.h, opts);
    fs::create_directories(args.out_dir);
    frontlab::write_profile_csv(fs::path(args.out_dir) / "psi.csv", res.psi);
    frontlab::write_profile_sidecar(fs::path(args.out_dir) / "psi.json", res.psi);
    json rep = {{"lambda", res.lambda},
                {"tail_amplitude", res.tail_amplitude},
                {"align_shift", res.align_shift},
                {"step", res.step},
                {"seed_amplitude", opts.seed_amplitude},
                {"monotone_below_A", res.monotone_below_A},
                {"kappa", res.constants.kappa},
                {"zeta1", res.constants.zeta1},
                {"zeta2", res.constants.zeta2}};
    write_json(fs::path(args.out_dir) / "backbone_report.json", rep);
    write_json(fs::path(args.out_dir) / "manifest_backbone.json", manifest_base("backbone", cfg, rc));
    std::cout << "backbone: psi(+inf) - kappa settled within tolerance, lambda = "
              << frontlab::format_double17(res.lambda) << "\n";
    return 0;
}

frontlab::FrontOptions front_options(const frontlab::RunConfig& rc) {
    frontlab::FrontOptions fo;
    fo.t_min = rc.t_min;
    fo.t_max = rc.t_max;
    fo.dt = rc.dt;
    fo.tol = rc.tol;
    fo.max_iter = rc.max_iter;
    fo.damping = rc.damping;
    fo.force = rc.force;
    fo.grid_density = rc.grid_density;
    return fo;
}

int cmd_front(const CliArgs& args, const frontlab::ConfigFile& cfg,
              const frontlab::RunConfig& rc) {
    if (!rc.has_speed || rc.c <= 0.0)
        throw CLI::ValidationError("cmd_front needs run.c (or run.eps > 0) in the config");
    const frontlab::Profile seed = load_seed(args);
    const auto rep = frontlab::solve_front(rc.g, rc.h, rc.c, seed, front_options(rc));
    fs::create_directories(args.out_dir);
    frontlab::write_profile_csv(fs::path(args.out_dir) / "front.csv", rep.profile);
    frontlab::write_profile_sidecar(fs::path(args.out_dir) / "front.json", rep.profile);
    write_json(fs::path(args.out_dir) / "front_report.json", frontlab::front_report_json(rep));
    write_json(fs::path(args.out_dir) / "manifest_front.json", manifest_base("front", cfg, rc));
    if (!rep.converged || rep.degenerate) {
        write_error(args.out_dir, "front",
                    rep.degenerate ? "degenerate: no crossing" : "not converged (try larger c)");
        return 1;
    }
    std::cout << "front: converged in " << rep.iterations
              << " iterations, residual_fix = " << frontlab::format_double17(rep.residual_fix)
              << "\n";
    return 0;
}

int cmd_simulate(const CliArgs& args, const frontlab::ConfigFile& cfg,
                 const frontlab::RunConfig& rc) {
    const auto gc = frontlab::certify_G(rc.g, rc.grid_density);
    const double kappa = gc.constants.kappa;
    frontlab::PdeOptions po;
    po.snap_every = rc.pde_snap_every;
    const double width = cfg.get_double("pde.width", 5.0);
    const std::size_t nx = static_cast<std::size_t>(std::llround(rc.pde_L / rc.pde_dx)) + 1;
    std::vector<double> init(nx);
    for (std::size_t j = 0; j < nx; ++j) {
        const double x = rc.pde_dx * static_cast<double>(j);
        init[j] = kappa / (1.0 + std::exp((x - rc.pde_x_offset) / width));
    }
    const auto run = frontlab::simulate_pde(rc.g, rc.h, rc.pde_L, rc.pde_dx, rc.pde_T, init, po);
    const auto speed = frontlab::measure_front_speed(run, 0.5 * kappa);
    fs::create_directories(args.out_dir);
    frontlab::write_field_run(fs::path(args.out_dir) / "pde_run", run);
    // the measured value is an empirical spreading speed, not a certified front speed
    write_json(fs::path(args.out_dir) / "simulate_report.json",
               {{"c_est", speed.c_est},
                {"residual_rms", speed.residual_rms},
                {"snapshots_used", speed.snapshots_used},
                {"kappa", kappa}});
    write_json(fs::path(args.out_dir) / "manifest_simulate.json", manifest_base("simulate", cfg, rc));
    std::cout << "simulate: empirical spreading speed " << frontlab::format_double17(speed.c_est)
              << "\n";
    return 0;
}

int cmd_validate(const CliArgs& args, const frontlab::ConfigFile& cfg,
                 const frontlab::RunConfig& rc) {
    const fs::path front_csv = fs::path(args.out_dir) / "front.csv";
    const fs::path front_side = fs::path(args.out_dir) / "front.json";
    const fs::path front_rep = fs::path(args.out_dir) / "front_report.json";
    if (!fs::exists(front_csv) || !fs::exists(front_rep))
        throw CLI::ValidationError("cmd_validate needs front artifacts (run `front` first)");
    const frontlab::Profile front = frontlab::read_profile_csv(front_csv, front_side);
    json frep;
    {
        std::ifstream in(front_rep);
        in >> frep;
    }
    const double c = frep.at("c").get<double>();
    const auto gc = frontlab::certify_G(rc.g, rc.grid_density);
    const double kappa = gc.constants.kappa;
    const double level = gc.constants.zeta1 / 2.0;
    frontlab::PdeOptions po;
    po.snap_every = rc.pde_snap_every;
    const auto run = frontlab::simulate_pde_travelling(rc.g, rc.h, rc.pde_L, rc.pde_dx, rc.pde_T,
                                                       front, c, rc.pde_x_offset, po);
    const auto speed = frontlab::measure_front_speed(run, 0.5 * kappa);
    const double sup_err = frontlab::compare_profile(run, front, c, level, kappa);
    const bool pass = sup_err <= 5e-2 * kappa;
    fs::create_directories(args.out_dir);
    write_json(fs::path(args.out_dir) / "validate_report.json",
               {{"c", c},
                {"c_est", speed.c_est},
                {"speed_rel_err", std::abs(speed.c_est - c) / c},
                {"sup_error", sup_err},
                {"kappa", kappa},
                {"pass", pass}});
    write_json(fs::path(args.out_dir) / "manifest_validate.json", manifest_base("validate", cfg, rc));
    std::cout << "validate: measured speed " << frontlab::format_double17(speed.c_est)
              << ", sup error " << frontlab::format_double17(sup_err) << (pass ? " (ok)" : " (fail)")
              << "\n";
    return pass ? 0 : 1;
}

int cmd_sweep(const CliArgs& args, const frontlab::ConfigFile& cfg,
              const frontlab::RunConfig& rc) {
    if (rc.sweep_c.empty())
        throw CLI::ValidationError("cmd_sweep needs sweep.c_list in the config");
    const frontlab::Profile seed = load_seed(args);
    fs::create_directories(args.out_dir);
    const auto entries = rc.sweep_c;
    std::vector<json> reports(entries.size());
    std::vector<std::string> failures(entries.size());
    const int jobs = std::max(1, args.jobs);

    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t k = begin; k < entries.size(); k += stride) {
            try {
                const auto rep = frontlab::solve_front(rc.g, rc.h, entries[k], seed,
                                                       front_options(rc));
                std::ostringstream tag;
                tag << "front_c" << entries[k];
                frontlab::write_profile_csv(fs::path(args.out_dir) / (tag.str() + ".csv"),
                                            rep.profile);
                frontlab::write_profile_sidecar(fs::path(args.out_dir) / (tag.str() + ".json"),
                                                rep.profile);
                reports[k] = frontlab::front_report_json(rep);
            } catch (const std::exception& e) {
                failures[k] = e.what();
            }
        }
    };
    if (jobs == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(work, static_cast<std::size_t>(t), jobs);
        for (auto& th : pool) th.join();
    }
    json sweep = json::array();
    bool any_fail = false;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        if (!failures[k].empty()) {
            sweep.push_back({{"c", entries[k]}, {"error", failures[k]}});
            any_fail = true;
        } else {
            sweep.push_back(reports[k]);
            if (!reports[k].value("converged", false)) any_fail = true;
        }
    }
    write_json(fs::path(args.out_dir) / "sweep_report.json", sweep);
    write_json(fs::path(args.out_dir) / "manifest_sweep.json", manifest_base("sweep", cfg, rc));
    std::cout << "sweep: " << entries.size() << " entries written\n";
    return any_fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"travelling-wavefront laboratory for the delayed monostable "
                 "reaction-diffusion equation"};
    app.require_subcommand(1);
    CliArgs args;
    app.add_option("--config", args.config_path, "path to the run configuration file");
    app.add_option("--out", args.out_dir, "output directory (default: out)");
    app.add_option("--jobs", args.jobs, "parallel workers for sweep entries");
    app.add_option("--seed-profile", args.seed_profile,
                   "seed profile CSV (sidecar JSON expected next to it)");

    std::string subname;
    for (const char* name : {"check", "roots", "backbone", "front", "simulate", "validate", "sweep"}) {
        auto* sub = app.add_subcommand(name, "");
        sub->fallthrough();  // global flags may follow the subcommand
        sub->callback([&subname, name] { subname = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    frontlab::ConfigFile cfg;
    frontlab::RunConfig rc;
    try {
        if (args.config_path.empty()) throw std::runtime_error("missing --config PATH");
        cfg = frontlab::parse_config_file(args.config_path);
        rc = frontlab::resolve_run_config(cfg);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (subname == "check") return cmd_check(args, cfg, rc);
        if (subname == "roots") return cmd_roots(args, cfg, rc);
        if (subname == "backbone") return cmd_backbone(args, cfg, rc);
        if (subname == "front") return cmd_front(args, cfg, rc);
        if (subname == "simulate") return cmd_simulate(args, cfg, rc);
        if (subname == "validate") return cmd_validate(args, cfg, rc);
        if (subname == "sweep") return cmd_sweep(args, cfg, rc);
        std::cerr << "unknown subcommand\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        write_error(args.out_dir, subname, e.what());
        return 1;
    }
}
