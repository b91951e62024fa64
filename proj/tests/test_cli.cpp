#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "polaron/run.hpp"

using namespace polaron;
namespace fs = std::filesystem;

namespace {

json minimal_sweep_config() {
    return json{{"command", "sweep"},
                {"grid", {{"dims", 1}, {"n", 32}, {"box", 8.0}}},
                {"alphas", {4.0, 6.0, 8.0}},
                {"t_final", 0.5}};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string strip_timestamp(const std::string& csv) {
    std::string out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("# generated=", 0) != 0) out += line + "\n";
    return out;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("polaron_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("minimal config gets defaults") {
    RunConfig cfg = parse_config_json(minimal_sweep_config());
    CHECK(cfg.dt == 1e-3);
    CHECK(cfg.frame_cadence == 100);
    CHECK(cfg.command == Command::sweep);
    CHECK(cfg.alphas == std::vector<double>{4.0, 6.0, 8.0});
    CHECK(cfg.warnings.empty());
}

TEST_CASE("negative dt is rejected naming the field") {
    json doc = minimal_sweep_config();
    doc["dt"] = -1e-3;
    try {
        parse_config_json(doc);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("dt") != std::string::npos);
    }
}

TEST_CASE("unsorted alphas are sorted with a warning") {
    json doc = minimal_sweep_config();
    doc["alphas"] = {8.0, 4.0, 6.0};
    RunConfig cfg = parse_config_json(doc);
    CHECK(cfg.alphas == std::vector<double>{4.0, 6.0, 8.0});
    REQUIRE(cfg.warnings.size() == 1);
    CHECK(cfg.warnings[0].find("sorted") != std::string::npos);
}

TEST_CASE("unknown keys are rejected") {
    json doc = minimal_sweep_config();
    doc["dt_max"] = 0.1;
    CHECK_THROWS_AS(parse_config_json(doc), ConfigError);
    json doc2 = minimal_sweep_config();
    doc2["grid"]["nn"] = 4;
    CHECK_THROWS_AS(parse_config_json(doc2), ConfigError);
}

TEST_CASE("alpha and alphas are mutually exclusive") {
    json doc = minimal_sweep_config();
    doc["alpha"] = 4.0;
    CHECK_THROWS_AS(parse_config_json(doc), ConfigError);
}

TEST_CASE("all validation errors are reported together") {
    json doc = minimal_sweep_config();
    doc["dt"] = -1.0;
    doc["frame_cadence"] = 0;
    doc["grid"]["box"] = -2.0;
    try {
        parse_config_json(doc);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("dt") != std::string::npos);
        CHECK(msg.find("frame_cadence") != std::string::npos);
        CHECK(msg.find("box") != std::string::npos);
    }
}

TEST_CASE("config hash is stable and key-order independent") {
    json a = minimal_sweep_config();
    json b;
    b["t_final"] = 0.5;
    b["alphas"] = {4.0, 6.0, 8.0};
    b["grid"] = {{"box", 8.0}, {"n", 32}, {"dims", 1}};
    b["command"] = "sweep";
    RunConfig ca = parse_config_json(a);
    RunConfig cb = parse_config_json(b);
    CHECK(config_hash(ca) == config_hash(cb));
}

TEST_CASE("checkpoint round trip is bit exact") {
    SpectralGrid g = make_grid(32, 8.0, 1);
    std::mt19937_64 rng(21);
    LPState s;
    s.psi = normalized(transform(random_mode_field(g, rng())));
    s.phi = PhononField{random_mode_field(g, rng()), 4.0};
    s.alpha = 4.0;
    s.t = 0.325;
    s.phase_e = -1.25;
    s.phase_omega = 0.75;

    TempDir tmp;
    fs::path p = tmp.path / "state.ckpt";
    save_checkpoint(p.string(), make_checkpoint(s, 0xdeadbeefull));
    Checkpoint c = load_checkpoint(p.string());
    CHECK(c.config_hash == 0xdeadbeefull);
    CHECK(c.t == s.t);
    CHECK(c.alpha == s.alpha);
    LPState r = restore_state(c);
    REQUIRE(r.psi.psi.values.size() == s.psi.psi.values.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(r.psi.psi.values[i] == s.psi.psi.values[i]);
        CHECK(r.phi.amp.values[i] == s.phi.amp.values[i]);
    }
    CHECK(r.phase_e == s.phase_e);
    CHECK(r.phase_omega == s.phase_omega);
}

TEST_CASE("checkpointed two-step run equals the straight-through run") {
    SpectralGrid g = make_grid(32, 8.0, 1);
    std::mt19937_64 rng(22);
    LPState s;
    s.psi = normalized(transform(random_mode_field(g, rng())));
    s.phi = PhononField{random_mode_field(g, rng()), 4.0};
    s.alpha = 4.0;

    const double dt = 1e-3;
    LPState direct = lp_step(lp_step(s, dt), dt);

    LPState first = lp_step(s, dt);
    TempDir tmp;
    fs::path p = tmp.path / "mid.ckpt";
    save_checkpoint(p.string(), make_checkpoint(first, 1));
    LPState resumed = lp_step(restore_state(load_checkpoint(p.string())), dt);

    double worst = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        worst = std::max(worst, std::abs(resumed.psi.psi.values[i] - direct.psi.psi.values[i]));
        worst = std::max(worst, std::abs(resumed.phi.amp.values[i] - direct.phi.amp.values[i]));
    }
    CHECK(worst <= 1e-13);
}

TEST_CASE("malformed checkpoint files are rejected") {
    TempDir tmp;
    fs::path p = tmp.path / "junk.ckpt";
    std::ofstream(p) << "not a checkpoint";
    CHECK_THROWS(load_checkpoint(p.string()));
}

TEST_CASE("execute run: deterministic artifacts for a fixed seed") {
    json doc{{"command", "run"},
             {"grid", {{"dims", 1}, {"n", 32}, {"box", 8.0}}},
             {"alpha", 4.0},
             {"dt", 1e-3},
             {"t_final", 0.05},
             {"frame_cadence", 10},
             {"seed", 7},
             {"phi0_spec",
              {{"kind", "gaussian"}, {"amplitude", 1.5}, {"width", 0.8}, {"phase", 0.3}}}};

    TempDir t1, t2;
    RunConfig c1 = parse_config_json(doc);
    c1.output_dir = t1.path.string();
    REQUIRE(execute(c1) == ExitCode::ok);
    RunConfig c2 = parse_config_json(doc);
    c2.output_dir = t2.path.string();
    REQUIRE(execute(c2) == ExitCode::ok);

    for (const char* name : {"trajectory.csv", "conservation.json"}) {
        std::string a = strip_timestamp(read_file(t1.path / name));
        std::string b = strip_timestamp(read_file(t2.path / name));
        CHECK(a == b);
        CHECK(!a.empty());
    }
    CHECK(fs::exists(t1.path / "final.ckpt"));
    CHECK(fs::exists(t1.path / "MANIFEST"));
    CHECK(read_file(t1.path / "MANIFEST").find("status=complete") != std::string::npos);
}

TEST_CASE("execute check: invariant battery passes") {
    json doc{{"command", "check"}, {"seed", 11}, {"check", {{"samples", 10}}}};
    TempDir tmp;
    RunConfig cfg = parse_config_json(doc);
    cfg.output_dir = tmp.path.string();
    CHECK(execute(cfg) == ExitCode::ok);
    CHECK(fs::exists(tmp.path / "check_summary.json"));
}

TEST_CASE("trajectory csv carries the schema header and hash") {
    SpectralGrid g = make_grid(32, 8.0, 1);
    std::mt19937_64 rng(23);
    TrajectoryFrame f;
    f.t = 0.5;
    f.norm_psi = 1.0;
    TempDir tmp;
    fs::path p = tmp.path / "t.csv";
    write_trajectory_csv(p.string(), {f}, 0xabcdef1234567890ull);
    std::string body = read_file(p);
    CHECK(body.find("t,norm_psi,energy,e_phi,gap,err2,omega,phase_e,phase_omega,h1_psi,l2_phi") !=
          std::string::npos);
    CHECK(body.find("abcdef1234567890") != std::string::npos);
}
