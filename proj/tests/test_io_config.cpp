#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "frontlab/config.hpp"
#include "frontlab/io.hpp"

using namespace frontlab;
namespace fs = std::filesystem;

namespace {
fs::path scratch_dir() {
    const auto dir = fs::temp_directory_path() / "frontlab_io_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace

TEST_CASE("profile csv round-trips bit-exactly") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Profile x;
    x.t0 = -12.25;
    x.dt = 0.125;
    x.values.resize(64);
    for (auto& v : x.values) v = u(rng) * std::pow(10.0, u(rng) * 8.0);
    x.left_limit = x.values.front();
    x.right_limit = x.values.back();

    const auto dir = scratch_dir();
    write_profile_csv(dir / "p.csv", x);
    write_profile_sidecar(dir / "p.json", x);
    const auto y = read_profile_csv(dir / "p.csv", dir / "p.json");
    REQUIRE(y.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.values[i] == x.values[i]);
    CHECK(y.t0 == x.t0);
    CHECK(y.dt == x.dt);
    CHECK(y.left_limit == x.left_limit);
    CHECK(y.right_limit == x.right_limit);

    // byte-identical on re-write
    const std::string first = slurp(dir / "p.csv");
    write_profile_csv(dir / "p2.csv", x);
    CHECK(first == slurp(dir / "p2.csv"));
    CHECK(first.rfind("t,x\n", 0) == 0);
}

TEST_CASE("roots csv carries the documented columns") {
    const QuasiPolynomial qp{2.0, 1.0, 0.0};
    const auto set = roots_in_strip(qp, 0.1, 2.0);
    const std::string text = roots_csv_text(set);
    CHECK(text.rfind("re,im,abs_chi,abs_dchi\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + static_cast<long>(set.roots.size()));
}

TEST_CASE("hypothesis report json schema") {
    const auto rep = certify_H(make_nicholson(2.0), 1.0);
    const auto j = hypothesis_report_json(rep);
    CHECK(j.at("G_ok").is_boolean());
    CHECK(j.at("H_ok").get<bool>());
    CHECK(j.at("branch").get<std::string>() == "gamma01");
    for (const char* key : {"p", "kappa", "Gamma", "A", "zeta1", "zeta2"})
        CHECK(j.at("constants").contains(key));
    CHECK(j.at("messages").is_array());
}

TEST_CASE("front report json schema") {
    FrontReport rep;
    rep.c = 16.0;
    rep.eps = 1.0 / 16.0;
    rep.converged = true;
    rep.iterations = 42;
    rep.residual_fix = 1e-9;
    rep.residual_ode = 2e-7;
    rep.positivity_ok = true;
    rep.tail.fit.B = 0.2;
    rep.tail.fit.exponent = 0.375;
    rep.tail.lambda1_ref = 0.3750539;
    rep.tail.ok = true;
    auto j = front_report_json(rep);
    CHECK(j.at("tau").is_null());
    rep.tau = -1.87;
    j = front_report_json(rep);
    CHECK(j.at("tau").get<double>() == -1.87);
    for (const char* key : {"c", "eps", "converged", "iterations", "residual_fix", "residual_ode",
                            "positivity_ok", "tau", "tail"})
        CHECK(j.contains(key));
    for (const char* key : {"B", "exponent", "lambda1_ref", "ok"}) CHECK(j.at("tail").contains(key));
}

TEST_CASE("config parsing") {
    const std::string text = R"(
# comment line
[model]
kind = nicholson
p = 2.0        ; inline comment

[run]
h = 1.0
c = 16

[sweep]
c_list = 8, 16, 32
)";
    const auto cfg = parse_config_text(text);
    CHECK(cfg.get_string("model.kind") == "nicholson");
    CHECK(cfg.get_double("model.p") == 2.0);
    CHECK(cfg.get_double("run.h") == 1.0);
    CHECK(cfg.get_int("run.c") == 16);
    CHECK(cfg.get_double("missing.key", 7.5) == 7.5);
    CHECK_THROWS_WITH(cfg.get_double("missing.key"), Catch::Matchers::ContainsSubstring("missing"));
    const auto list = cfg.get_double_list("sweep.c_list");
    REQUIRE(list.size() == 3);
    CHECK(list[1] == 16.0);

    CHECK_THROWS(parse_config_text("[unterminated\nx = 1"));
    CHECK_THROWS(parse_config_text("just a line without equals"));
    CHECK_THROWS_WITH(parse_config_text("[a]\nv = not_a_number").get_double("a.v"),
                      Catch::Matchers::ContainsSubstring("not a number"));
}

TEST_CASE("run config resolution") {
    auto base = parse_config_text("[model]\nkind = nicholson\np = 2\n[run]\nh = 1\nc = 16\n");
    const auto rc = resolve_run_config(base);
    CHECK(rc.has_speed);
    CHECK(rc.c == 16.0);
    CHECK(rc.eps == 1.0 / 16.0);
    CHECK(rc.g.p0() == 2.0);
    CHECK(rc.tol == 1e-9);

    // c and eps are mutually exclusive
    auto both = parse_config_text(
        "[model]\nkind = nicholson\np = 2\n[run]\nh = 1\nc = 16\neps = 0.0625\n");
    CHECK_THROWS_WITH(resolve_run_config(both), Catch::Matchers::ContainsSubstring("exclusive"));

    auto eps_only = parse_config_text("[model]\nkind = nicholson\np = 2\n[run]\nh = 1\neps = 0.1\n");
    const auto rc2 = resolve_run_config(eps_only);
    CHECK(rc2.c == 10.0);

    auto bad_kind = parse_config_text("[model]\nkind = cosine\n[run]\nh = 1\n");
    CHECK_THROWS_WITH(resolve_run_config(bad_kind), Catch::Matchers::ContainsSubstring("kind"));

    auto mg = parse_config_text("[model]\nkind = mackey_glass\np = 2\nn = 1\n[run]\nh = 1\n");
    CHECK(resolve_run_config(mg).g(1.0) == 1.0);

    auto bad_tol = parse_config_text(
        "[model]\nkind = nicholson\np = 2\n[run]\nh = 1\n[solver]\ntol = -1\n");
    CHECK_THROWS(resolve_run_config(bad_tol));
}

TEST_CASE("field run artifacts") {
    const auto g = make_nicholson(2.0);
    PdeOptions po;
    po.snap_every = 1.0;
    std::vector<double> init(static_cast<std::size_t>(std::llround(20.0 / 0.2)) + 1, 0.3);
    const auto run = simulate_pde(g, 1.0, 20.0, 0.2, 2.0, init, po);
    const auto dir = scratch_dir() / "pde";
    write_field_run(dir, run);
    CHECK(fs::exists(dir / "run_manifest.json"));
    nlohmann::json manifest;
    std::ifstream(dir / "run_manifest.json") >> manifest;
    CHECK(manifest.at("L") == 20.0);
    const auto files = manifest.at("snapshots").get<std::vector<std::string>>();
    REQUIRE(files.size() == run.snapshots.size());
    for (const auto& f : files) CHECK(fs::exists(dir / f));
    CHECK(slurp(dir / files[0]).rfind("x,u\n", 0) == 0);
}
