#pragma once

#include "nimcav/config.hpp"
#include "nimcav/database.hpp"
#include "nimcav/optomech.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nimcav {

// Header block of a map file; written as "# key: value" lines before the column row.
struct MapHeader {
    std::string subcommand;
    std::string config_hash;
    std::vector<std::pair<std::string, std::string>> fields;   // truncations, tolerances, ...
    std::vector<std::string> notes;
    std::string config_text;                                  // canonical config, one "# config:" line each
};

// Long format: one line per cell with the row (and column) coordinate, every payload
// in its display unit and the ok flag. Numbers use 12 significant digits.
std::string format_map_csv(const MapGrid& map, const MapHeader& header);
void write_text_file(const std::string& path, const std::string& text);
void write_map_csv(const std::string& path, const MapGrid& map, const MapHeader& header);

struct MapFile {
    std::map<std::string, std::vector<std::string>> header;   // "# key: value", repeated keys kept in order
    std::vector<std::string> columns, units;
    std::vector<std::vector<double>> rows;
    std::size_t column(const std::string& name) const;
};
MapFile read_map_csv(const std::string& path);
MapFile parse_map_csv(const std::string& text);

// Header for a run: hash, code version, truncations and tolerances of the config.
MapHeader make_header(const std::string& subcommand, const RunConfig& cfg);

// Cache directory: explicit > config cache.dir > $NIMCAV_CACHE_DIR > ./.nimcav-cache
std::string cache_root(const std::string& explicit_dir, const RunConfig& cfg);
std::string cache_path(const std::string& root, const CouplingDatabase& db);

// Binary cache: magic, header length, JSON header (key hash and key), then
// (Re, Im) of C_r^+, C_t^+ per node as little-endian doubles. Writers hold an
// exclusive flock on "<path>.lock" and rename a temporary file into place; readers
// take a shared lock for the snapshot.
void save_database(const std::string& path, const CouplingDatabase& db);
// false when absent or when the stored hash differs from db.key_hash() (stale).
bool load_database(const std::string& path, CouplingDatabase& db, std::string* reason = nullptr);

} // namespace nimcav
