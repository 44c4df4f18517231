#pragma once

#include <array>
#include <string>
#include <vector>

#include "octvf/common.hpp"

namespace octvf {

/// One 24-2 test location in right-eye (OD) field coordinates:
/// x > 0 temporal, x < 0 nasal, y > 0 superior. Degrees of eccentricity.
struct VFPoint {
    int x_deg = 0;
    int y_deg = 0;
    bool blind_spot = false;
};

inline constexpr int kGridPoints = 54;
inline constexpr int kActivePoints = 52;

/// The 24-2 test pattern. Canonical index order is row-major: rows from
/// y=+21 down to y=-21, x ascending within a row (nasal to temporal for OD).
/// Indices 25 (+15,+3) and 34 (+15,-3) straddle the blind spot and are
/// excluded from all metrics; the remaining 52 points carry active indices
/// 0..51 in the same order with the two blind slots skipped.
class VFGrid {
public:
    explicit VFGrid(std::vector<VFPoint> points);

    const std::vector<VFPoint>& points() const { return points_; }
    const VFPoint& point(int index) const { return points_[index]; }
    int size() const { return static_cast<int>(points_.size()); }

    int active_count() const { return static_cast<int>(active_to_full_.size()); }
    /// Full 54-slot index of active point a.
    int full_index(int active) const { return active_to_full_[active]; }
    /// Active index of full slot f, or -1 for blind-spot slots.
    int active_index(int full) const { return full_to_active_[full]; }

    /// Index of the point at (x, y), or -1.
    int find(int x_deg, int y_deg) const;

    /// Self-inverse permutation of active indices realizing (x,y) -> (-x,y).
    /// Slots whose geometric mirror is absent from the pattern (the nasal
    /// 27-degree column) or falls on a blind-spot slot (the x=-15, y=+-3
    /// neighbours) map to themselves; under laterality mirroring those
    /// locations are anatomically self-corresponding.
    const std::vector<int>& mirror_permutation() const { return mirror_active_; }

    /// `point_index,x_deg,y_deg,blind_spot` in canonical order.
    std::string to_csv() const;

private:
    std::vector<VFPoint> points_;
    std::vector<int> active_to_full_;
    std::vector<int> full_to_active_;
    std::vector<int> mirror_active_;
};

/// Canonical 24-2 SITA Standard pattern: 54 points, 2 blind-spot slots.
const VFGrid& grid_24_2();

}  // namespace octvf
