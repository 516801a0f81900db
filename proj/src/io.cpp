#include "nimcav/io.hpp"
#include "nimcav/hash.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

namespace nimcav {

namespace fs = std::filesystem;

namespace {

constexpr char cache_magic[8] = {'N', 'I', 'M', 'C', 'D', 'B', '0', '1'};

std::string num(double v)
{
    if (std::isnan(v)) return "nan";
    return fmt::format("{:.12g}", v);
}

std::string axis_label(const MapAxis& a) { return fmt::format("{} [{}]", a.name, a.unit); }

// RAII flock on a sidecar lock file
class FileLock {
public:
    FileLock(const std::string& path, int op)
    {
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ < 0) throw std::runtime_error(fmt::format("cannot open lock file {}", path));
        if (::flock(fd_, op) != 0) {
            ::close(fd_);
            throw std::runtime_error(fmt::format("cannot lock {}", path));
        }
    }
    ~FileLock()
    {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

void put_u64(std::string& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint64_t get_u64(const char* p)
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

} // namespace

std::string format_map_csv(const MapGrid& map, const MapHeader& h)
{
    const bool profile = map.cols.values.empty();
    std::string out;
    out += "# nimcav map file\n";
    out += "# format: csv-long-1\n";
    out += fmt::format("# code_version: {}\n", code_version);
    out += fmt::format("# subcommand: {}\n", h.subcommand);
    out += fmt::format("# config_hash: {}\n", h.config_hash);
    out += fmt::format("# rows: {} n={}\n", axis_label(map.rows), map.n_rows());
    out += profile ? "# cols: none\n" : fmt::format("# cols: {} n={}\n", axis_label(map.cols), map.cols.values.size());
    std::string schema = fmt::format("{}:{}", map.rows.name, map.rows.unit);
    if (!profile) schema += fmt::format(",{}:{}", map.cols.name, map.cols.unit);
    for (const auto& p : map.payloads) schema += fmt::format(",{}:{}", p.name, p.unit);
    schema += ",ok:flag";
    out += "# columns: " + schema + "\n";
    for (const auto& [k, v] : h.fields) out += fmt::format("# {}: {}\n", k, v);
    for (const auto& n : h.notes) out += "# note: " + n + "\n";
    for (const auto& n : map.notes) out += "# note: " + n + "\n";
    std::istringstream cfg(h.config_text);
    for (std::string line; std::getline(cfg, line);)
        if (!line.empty()) out += "# config: " + line + "\n";

    std::string names = map.rows.name;
    if (!profile) names += "," + map.cols.name;
    for (const auto& p : map.payloads) names += "," + p.name;
    out += names + ",ok\n";
    const std::size_t nc = map.n_cols();
    for (std::size_t i = 0; i < map.n_rows(); ++i)
        for (std::size_t j = 0; j < nc; ++j) {
            const std::size_t k = i * nc + j;
            std::string line = num(map.rows.values[i] * map.rows.scale);
            if (!profile) line += "," + num(map.cols.values[j] * map.cols.scale);
            for (const auto& p : map.payloads) line += "," + num(p.data[k] * p.scale);
            line += map.ok.empty() || map.ok[k] ? ",1\n" : ",0\n";
            out += line;
        }
    return out;
}

void write_text_file(const std::string& path, const std::string& text)
{
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}", path));
    f << text;
    if (!f) throw std::runtime_error(fmt::format("write failed for {}", path));
}

void write_map_csv(const std::string& path, const MapGrid& map, const MapHeader& header)
{
    write_text_file(path, format_map_csv(map, header));
}

std::size_t MapFile::column(const std::string& name) const
{
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw std::out_of_range(fmt::format("map file has no column '{}'", name));
}

MapFile parse_map_csv(const std::string& text)
{
    MapFile m;
    std::istringstream in(text);
    std::string line;
    bool have_names = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            const auto key = line.substr(2, colon - 2);
            const auto val = colon + 2 <= line.size() ? line.substr(colon + 2) : std::string{};
            m.header[key].push_back(val);
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (!have_names) {
            m.columns = cells;
            have_names = true;
            continue;
        }
        if (cells.size() != m.columns.size()) throw std::runtime_error("map file: ragged row");
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(c == "nan" ? std::nan("") : std::stod(c));
        m.rows.push_back(std::move(row));
    }
    if (!have_names) throw std::runtime_error("map file: no column row");
    // units from the schema line
    if (m.header.count("columns")) {
        std::stringstream ss(m.header["columns"].front());
        for (std::string c; std::getline(ss, c, ',');) m.units.push_back(c.substr(c.find(':') + 1));
    }
    return m;
}

MapFile read_map_csv(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot read {}", path));
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_map_csv(ss.str());
}

MapHeader make_header(const std::string& subcommand, const RunConfig& cfg)
{
    MapHeader h;
    h.subcommand = subcommand;
    h.config_hash = config_hash(cfg);
    const auto& s = cfg.coupling;
    h.fields.push_back({"truncation", fmt::format("l_max={} expansion_terms={} expansion_dk_per_um={} force_terms=9 force_l_max=5",
                                                  s.l_max, s.expansion_terms, num(s.expansion_delta_k * 1e-6))});
    const auto& r = resonance_defaults();
    h.fields.push_back({"tolerance", fmt::format("quadrature_tol={} max_refinements={} lorentz_max_residual={} coarse_step_nm={}",
                                                 num(s.quadrature_tol), s.max_refinements, num(r.max_fit_residual),
                                                 r.coarse_step > 0.0 ? num(r.coarse_step * 1e9) : "auto")});
    h.config_text = canonical_config(cfg);
    return h;
}

std::string cache_root(const std::string& explicit_dir, const RunConfig& cfg)
{
    if (!explicit_dir.empty()) return explicit_dir;
    if (!cfg.cache_dir.empty()) return cfg.cache_dir;
    if (const char* env = std::getenv("NIMCAV_CACHE_DIR"); env && *env) return env;
    return ".nimcav-cache";
}

std::string cache_path(const std::string& root, const CouplingDatabase& db)
{
    return (fs::path(root) / fmt::format("coupling-{}.bin", db.key_hash().substr(0, 24))).string();
}

void save_database(const std::string& path, const CouplingDatabase& db)
{
    if (!db.populated()) throw std::logic_error("save_database: database not populated");
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    FileLock lock(path + ".lock", LOCK_EX);

    nlohmann::json h;
    h["key_hash"] = db.key_hash();
    h["key"] = nlohmann::json::parse(db.key_json());
    h["n_x"] = db.x_nodes().size();
    h["n_z"] = db.z_nodes().size();
    h["layout"] = "row-major (x, z); Re/Im of C_r+, C_t+; little-endian float64";
    const std::string hs = h.dump();

    std::string blob(cache_magic, cache_magic + 8);
    put_u64(blob, hs.size());
    blob += hs;
    for (const auto& e : db.entries())
        for (const cplx& c : e)
            for (double d : {c.real(), c.imag()}) put_u64(blob, std::bit_cast<std::uint64_t>(d));

    const std::string tmp = path + ".tmp";
    write_text_file(tmp, blob);
    fs::rename(tmp, path);
}

bool load_database(const std::string& path, CouplingDatabase& db, std::string* reason)
{
    auto fail = [&](const std::string& why) {
        if (reason) *reason = why;
        return false;
    };
    if (!fs::exists(path)) return fail("no cache file");
    std::string blob;
    {
        FileLock lock(path + ".lock", LOCK_SH);
        std::ifstream f(path, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        blob = ss.str();
    }
    if (blob.size() < 16 || std::memcmp(blob.data(), cache_magic, 8) != 0) return fail("bad magic");
    const std::uint64_t hl = get_u64(blob.data() + 8);
    if (16 + hl > blob.size()) return fail("truncated header");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(blob.substr(16, hl));
    } catch (const nlohmann::json::exception&) {
        return fail("unreadable header");
    }
    if (h.value("key_hash", std::string{}) != db.key_hash()) return fail("stale entry (key hash differs)");
    const std::size_t n = db.x_nodes().size() * db.z_nodes().size();
    if (blob.size() != 16 + hl + n * 32) return fail("payload size mismatch");
    std::vector<std::array<cplx, 2>> e(n);
    const char* p = blob.data() + 16 + hl;
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < 2; ++k) {
            const double re = std::bit_cast<double>(get_u64(p));
            const double im = std::bit_cast<double>(get_u64(p + 8));
            e[i][k] = {re, im};
            p += 16;
        }
    db.set_entries(std::move(e));
    return true;
}

} // namespace nimcav
