#include "nimcav/config.hpp"
#include "nimcav/hash.hpp"
#include "nimcav/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace nimcav;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("nimcav-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

CouplingDatabase small_db(double rc = 28e-6)
{
    CavityGeometry cav;
    cav.mirror_curvature = rc;
    NanowireSpec s;
    s.radius = 65e-9;
    return CouplingDatabase(s, cav, Polarization::perpendicular, CouplingMethod::approx, {},
                            CouplingDatabase::default_x_grid(cav, 0.5e-6, 0.5e-6),
                            CouplingDatabase::default_z_grid(cav, 48.125e-9));
}

} // namespace

TEST_CASE("sha256 of known strings")
{
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config parsing")
{
    const auto cfg = parse_config("# comment\ncavity.length_um = 12.5\nnanowire.radius_nm = 170\n"
                                  "light.polarization = par\n\ncoupling.method = exact\n");
    CHECK(cfg.cavity.length == doctest::Approx(12.5e-6));
    CHECK(cfg.nanowire.radius == doctest::Approx(170e-9));
    CHECK(cfg.polarization == Polarization::parallel);
    CHECK(cfg.method == CouplingMethod::exact);

    CHECK_THROWS_AS(parse_config("cavity.lenght_um = 12\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("cavity.length_um = 12\ncavity.length_um = 13\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("cavity.length_um 12\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("cavity.reflectivity_left = 1.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("cavity.eta_left = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("nanowire.index = 0.8\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("cavity.length_um = 60\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("nanowire.radius_nm = abc\n"), ConfigError);
}

TEST_CASE("canonical config round trips and feeds the hash")
{
    RunConfig cfg;
    set_config_value(cfg, "nanowire.radius_nm", "170");
    set_config_value(cfg, "mech.temperatures_K", "0.02, 4, 300");
    const auto text = canonical_config(cfg);
    const auto back = parse_config(text);
    CHECK(canonical_config(back) == text);
    CHECK(config_hash(back) == config_hash(cfg));

    RunConfig other = cfg;
    set_config_value(other, "cavity.mirror_curvature_um", "30");
    CHECK(config_hash(other) != config_hash(cfg));

    // output location does not change results
    RunConfig moved = cfg;
    set_config_value(moved, "output.dir", "/tmp/elsewhere");
    CHECK(config_hash(moved) == config_hash(cfg));
    CHECK(get_config_value(moved, "output.dir") == "/tmp/elsewhere");
}

TEST_CASE("finesse override sets both reflectivities")
{
    RunConfig cfg;
    set_config_value(cfg, "cavity.finesse", "50000");
    const auto cav = cfg.effective_cavity();
    CHECK(mirror_finesse(cav) == doctest::Approx(50000.0).epsilon(1e-10));
    CHECK(cav.reflectivity_left == cav.reflectivity_right);
}

TEST_CASE("grid specs")
{
    GridSpec g{-1e-6, 1e-6, 0.5e-6};
    CHECK(g.values().size() == 5);
    CHECK(g.values().back() == doctest::Approx(1e-6));
}

TEST_CASE("map files round trip")
{
    MapGrid m;
    m.rows = {"z0", "nm", 1e9, {-10e-9, 0.0, 10e-9}};
    m.cols = {"L", "um", 1e6, {12.4e-6, 12.5e-6}};
    auto& p = m.add("C_T", "1", 1.0);
    p.data = {0.1, 0.2, 0.3, std::numeric_limits<double>::quiet_NaN(), 0.5, 0.6};
    m.ok = {1, 1, 1, 0, 1, 1};
    m.notes.push_back("synthetic");
    RunConfig cfg;
    const auto header = make_header("lz-map", cfg);
    const auto text = format_map_csv(m, header);
    const auto f = parse_map_csv(text);
    CHECK(f.rows.size() == 6);
    CHECK(f.header.at("subcommand").front() == "lz-map");
    CHECK(f.header.at("config_hash").front() == config_hash(cfg));
    const auto ci = f.column("C_T"), zi = f.column("z0"), oki = f.column("ok");
    CHECK(f.units[zi] == "nm");
    CHECK(f.rows[0][zi] == doctest::Approx(-10.0));
    CHECK(std::isnan(f.rows[3][ci]));
    CHECK(f.rows[3][oki] == 0.0);
    CHECK(f.rows[5][ci] == 0.6);
    CHECK_THROWS(f.column("missing"));
    // identical input, identical bytes
    CHECK(format_map_csv(m, header) == text);

    const auto dir = scratch_dir("map");
    write_map_csv((dir / "sub" / "m.csv").string(), m, header);
    CHECK(read_map_csv((dir / "sub" / "m.csv").string()).rows.size() == 6);
}

TEST_CASE("coefficient cache")
{
    const auto dir = scratch_dir("cache");
    auto db = small_db();
    db.populate();
    const auto path = cache_path(dir.string(), db);
    CHECK(path.find(db.key_hash().substr(0, 24)) != std::string::npos);

    std::string why;
    auto fresh = small_db();
    CHECK_FALSE(load_database(path, fresh, &why));
    CHECK(why == "no cache file");

    save_database(path, db);
    CHECK(load_database(path, fresh, &why));
    REQUIRE(fresh.populated());
    REQUIRE(fresh.entries().size() == db.entries().size());
    for (std::size_t i = 0; i < db.entries().size(); ++i) {
        CHECK(fresh.entries()[i][0] == db.entries()[i][0]);
        CHECK(fresh.entries()[i][1] == db.entries()[i][1]);
    }
    CHECK(fresh.query(0.2e-6, 31e-9).cr_plus == db.query(0.2e-6, 31e-9).cr_plus);

    // a different key reading the same file is stale
    auto other = small_db(30e-6);
    CHECK(cache_path(dir.string(), other) != path);
    CHECK_FALSE(load_database(path, other, &why));
    CHECK(why.find("stale") != std::string::npos);

    // corrupted file
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << "garbage";
    }
    CHECK_FALSE(load_database(path, fresh, &why));
    CHECK(why == "bad magic");
}
