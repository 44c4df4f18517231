#pragma once

#include <array>
#include <string>
#include <vector>

#include "octvf/vf_grid.hpp"

namespace octvf {

/// Garway-Heath visual field sectors.
enum class Sector : int {
    Central = 0,
    Temporal = 1,
    Inferior = 2,
    InferiorNasal = 3,
    Superior = 4,
    SuperiorNasal = 5,
};

inline constexpr int kSectorCount = 6;

const std::string& sector_name(Sector s);
Sector parse_sector(const std::string& name);  // throws on unknown label

/// Total assignment of the 52 active grid indices to the six sectors.
class SectorMap {
public:
    explicit SectorMap(std::vector<Sector> assignment);

    Sector sector(int active_index) const { return assignment_[active_index]; }
    const std::vector<Sector>& assignment() const { return assignment_; }
    int count(Sector s) const { return counts_[static_cast<int>(s)]; }

private:
    std::vector<Sector> assignment_;
    std::array<int, kSectorCount> counts_{};
};

/// Reads `point_index,sector` rows (0-based active index). Every active index
/// must appear exactly once and every sector must be non-empty.
SectorMap load_sector_map(const std::string& csv_text, const VFGrid& grid = grid_24_2());
SectorMap load_sector_map_file(const std::string& path, const VFGrid& grid = grid_24_2());

/// Bundled default assignment, reconstructed from the Garway-Heath map
/// (see data/sectors.csv for provenance notes).
const SectorMap& default_sector_map();

/// CSV text of the bundled default, `point_index,sector`.
std::string default_sector_map_csv();

}  // namespace octvf
