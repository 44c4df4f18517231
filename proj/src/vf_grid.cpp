#include "octvf/vf_grid.hpp"

#include <algorithm>
#include <set>

namespace octvf {

VFGrid::VFGrid(std::vector<VFPoint> points) : points_(std::move(points)) {
    std::set<std::pair<int, int>> seen;
    for (const auto& p : points_) {
        if (!seen.insert({p.x_deg, p.y_deg}).second) {
            throw Error("grid: duplicate point (" + std::to_string(p.x_deg) + "," +
                        std::to_string(p.y_deg) + ")");
        }
    }
    full_to_active_.assign(points_.size(), -1);
    for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
        if (!points_[i].blind_spot) {
            full_to_active_[i] = static_cast<int>(active_to_full_.size());
            active_to_full_.push_back(i);
        }
    }

    mirror_active_.assign(active_to_full_.size(), -1);
    for (int a = 0; a < static_cast<int>(active_to_full_.size()); ++a) {
        const VFPoint& p = points_[active_to_full_[a]];
        const int j = find(-p.x_deg, p.y_deg);
        if (j >= 0 && !points_[j].blind_spot) {
            mirror_active_[a] = full_to_active_[j];
        } else {
            mirror_active_[a] = a;
        }
    }
    for (int a = 0; a < static_cast<int>(mirror_active_.size()); ++a) {
        if (mirror_active_[mirror_active_[a]] != a) {
            throw Error("grid: not mirror-symmetric about the vertical axis "
                        "after blind-spot relocation");
        }
    }
}

int VFGrid::find(int x_deg, int y_deg) const {
    for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
        if (points_[i].x_deg == x_deg && points_[i].y_deg == y_deg) return i;
    }
    return -1;
}

std::string VFGrid::to_csv() const {
    std::string out = "point_index,x_deg,y_deg,blind_spot\n";
    for (int i = 0; i < size(); ++i) {
        out += std::to_string(i) + "," + std::to_string(points_[i].x_deg) + "," +
               std::to_string(points_[i].y_deg) + "," + (points_[i].blind_spot ? "1" : "0") +
               "\n";
    }
    return out;
}

const VFGrid& grid_24_2() {
    static const VFGrid grid = [] {
        std::vector<VFPoint> pts;
        pts.reserve(kGridPoints);
        auto row = [&pts](int y, std::initializer_list<int> xs) {
            for (int x : xs) pts.push_back({x, y, false});
        };
        row(21, {-9, -3, 3, 9});
        row(15, {-15, -9, -3, 3, 9, 15});
        row(9, {-21, -15, -9, -3, 3, 9, 15, 21});
        row(3, {-27, -21, -15, -9, -3, 3, 9, 15, 21});
        row(-3, {-27, -21, -15, -9, -3, 3, 9, 15, 21});
        row(-9, {-21, -15, -9, -3, 3, 9, 15, 21});
        row(-15, {-15, -9, -3, 3, 9, 15});
        row(-21, {-9, -3, 3, 9});
        // (+15,+3) and (+15,-3) overlie the anatomical blind spot.
        for (auto& p : pts) {
            if (p.x_deg == 15 && (p.y_deg == 3 || p.y_deg == -3)) p.blind_spot = true;
        }
        return VFGrid(std::move(pts));
    }();
    return grid;
}

}  // namespace octvf
