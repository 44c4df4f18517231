#include "octvf/sectors.hpp"

#include <map>

#include "octvf/bytes.hpp"
#include "octvf/csv.hpp"

namespace octvf {

namespace {

const std::array<std::string, kSectorCount> kSectorNames = {
    "Central", "Temporal", "Inferior", "InferiorNasal", "Superior", "SuperiorNasal",
};

}  // namespace

const std::string& sector_name(Sector s) {
    return kSectorNames[static_cast<int>(s)];
}

Sector parse_sector(const std::string& name) {
    for (int i = 0; i < kSectorCount; ++i) {
        if (kSectorNames[i] == name) return static_cast<Sector>(i);
    }
    throw Error("unknown sector '" + name + "'");
}

SectorMap::SectorMap(std::vector<Sector> assignment) : assignment_(std::move(assignment)) {
    if (assignment_.size() != kActivePoints) {
        throw Error("sector map: expected " + std::to_string(kActivePoints) +
                    " assignments, got " + std::to_string(assignment_.size()));
    }
    for (Sector s : assignment_) counts_[static_cast<int>(s)]++;
    for (int i = 0; i < kSectorCount; ++i) {
        if (counts_[i] == 0) throw Error("sector map: empty sector " + kSectorNames[i]);
    }
}

SectorMap load_sector_map(const std::string& csv_text, const VFGrid& grid) {
    const Csv csv = Csv::parse(csv_text);
    const int idx_col = csv.column("point_index");
    const int sec_col = csv.column("sector");
    if (idx_col < 0 || sec_col < 0) {
        throw Error("sector map: header must contain point_index and sector");
    }
    std::vector<int> seen(grid.active_count(), 0);
    std::vector<Sector> assignment(grid.active_count(), Sector::Central);
    for (size_t r = 0; r < csv.rows.size(); ++r) {
        const std::string where = "sector map row " + std::to_string(r + 2);
        const long long idx = parse_int(csv.rows[r][idx_col], where);
        if (idx < 0 || idx >= grid.active_count()) {
            throw Error(where + ": point_index " + std::to_string(idx) + " out of range");
        }
        if (seen[idx]++) throw Error(where + ": duplicate point_index " + std::to_string(idx));
        try {
            assignment[idx] = parse_sector(csv.rows[r][sec_col]);
        } catch (const Error& e) {
            throw Error(where + ": " + e.what());
        }
    }
    for (int i = 0; i < grid.active_count(); ++i) {
        if (!seen[i]) {
            throw Error("sector map: unassigned point " + std::to_string(i));
        }
    }
    return SectorMap(std::move(assignment));
}

SectorMap load_sector_map_file(const std::string& path, const VFGrid& grid) {
    return load_sector_map(read_file_bytes(path), grid);
}

// Reconstruction of the Garway-Heath partition on the 24-2 pattern (OD),
// keyed by field coordinates. The original figure is not machine-readable;
// this follows its regional structure: a pericentral zone for the
// papillomacular bundle, a temporal wedge, superior/inferior arcuate zones,
// and nasal-step zones that reach further on the superior side.
namespace {

struct SectorEntry {
    int x, y;
    Sector s;
};

constexpr Sector C = Sector::Central;
constexpr Sector T = Sector::Temporal;
constexpr Sector I = Sector::Inferior;
constexpr Sector IN = Sector::InferiorNasal;
constexpr Sector S = Sector::Superior;
constexpr Sector SN = Sector::SuperiorNasal;

const SectorEntry kGarwayHeath[] = {
    {-9, 21, S},    {-3, 21, S},   {3, 21, S},    {9, 21, S},
    {-15, 15, SN},  {-9, 15, SN},  {-3, 15, S},   {3, 15, S},   {9, 15, S},   {15, 15, S},
    {-21, 9, SN},   {-15, 9, SN},  {-9, 9, SN},   {-3, 9, S},   {3, 9, S},    {9, 9, S},
    {15, 9, S},     {21, 9, T},
    {-27, 3, SN},   {-21, 3, SN},  {-15, 3, SN},  {-9, 3, SN},  {-3, 3, C},   {3, 3, C},
    {9, 3, C},      {21, 3, T},
    {-27, -3, IN},  {-21, -3, IN}, {-15, -3, IN}, {-9, -3, IN}, {-3, -3, C},  {3, -3, C},
    {9, -3, C},     {21, -3, T},
    {-21, -9, IN},  {-15, -9, IN}, {-9, -9, IN},  {-3, -9, I},  {3, -9, I},   {9, -9, I},
    {15, -9, I},    {21, -9, T},
    {-15, -15, I},  {-9, -15, I},  {-3, -15, I},  {3, -15, I},  {9, -15, I},  {15, -15, I},
    {-9, -21, I},   {-3, -21, I},  {3, -21, I},   {9, -21, I},
};

}  // namespace

std::string default_sector_map_csv() {
    const VFGrid& grid = grid_24_2();
    std::map<int, Sector> by_active;
    for (const auto& e : kGarwayHeath) {
        const int full = grid.find(e.x, e.y);
        if (full < 0 || grid.active_index(full) < 0) {
            throw Error("default sector map references a non-active point");
        }
        by_active[grid.active_index(full)] = e.s;
    }
    std::string out = "point_index,sector\n";
    for (const auto& [idx, s] : by_active) {
        out += std::to_string(idx) + "," + sector_name(s) + "\n";
    }
    return out;
}

const SectorMap& default_sector_map() {
    static const SectorMap map = load_sector_map(default_sector_map_csv());
    return map;
}

}  // namespace octvf
