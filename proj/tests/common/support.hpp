#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <queue>
#include <set>
#include <string>
#include <tuple>

#include <unistd.h>

#include "vesselfuse/volume.hpp"

namespace testing {

using vfuse::BinaryMask;
using vfuse::Geometry;

inline Geometry grid(std::size_t nx, std::size_t ny, std::size_t nz, double s = 1.0) {
    Geometry g;
    g.dims = {nx, ny, nz};
    g.spacing = {s, s, s};
    return g;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("vfuse_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void fill_box(BinaryMask& m, std::size_t x0, std::size_t x1, std::size_t y0, std::size_t y1,
                     std::size_t z0, std::size_t z1) {
    for (std::size_t z = z0; z <= z1; ++z)
        for (std::size_t y = y0; y <= y1; ++y)
            for (std::size_t x = x0; x <= x1; ++x) m.at(x, y, z) = 1;
}

inline void fill_ball(BinaryMask& m, double cx, double cy, double cz, double r) {
    const auto& d = m.dims();
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                const double dx = x - cx, dy = y - cy, dz = z - cz;
                if (dx * dx + dy * dy + dz * dz <= r * r) m.at(x, y, z) = 1;
            }
}

/// Euler characteristic of the union of closed unit cubes on foreground voxels
/// (matches 26-connectivity of the foreground), counted cell by cell.
inline long euler_characteristic(const BinaryMask& m) {
    using Cell = std::tuple<long, long, long>;  // doubled coordinates
    std::set<Cell> cells[4];
    const auto& d = m.dims();
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                if (!m.at(x, y, z)) continue;
                for (int a = 0; a <= 2; ++a)
                    for (int b = 0; b <= 2; ++b)
                        for (int c = 0; c <= 2; ++c) {
                            const int dim = (a == 1) + (b == 1) + (c == 1);
                            cells[dim].insert({2L * x + a, 2L * y + b, 2L * z + c});
                        }
            }
    return static_cast<long>(cells[0].size()) - static_cast<long>(cells[1].size()) +
           static_cast<long>(cells[2].size()) - static_cast<long>(cells[3].size());
}

/// Background 6-components that do not reach the grid border.
inline std::size_t count_cavities(const BinaryMask& m) {
    const auto& d = m.dims();
    std::vector<int> seen(m.size(), 0);
    std::size_t cavities = 0;
    for (std::size_t s = 0; s < m.size(); ++s) {
        if (m[s] || seen[s]) continue;
        bool border = false;
        std::queue<std::size_t> q;
        q.push(s);
        seen[s] = 1;
        while (!q.empty()) {
            const auto i = q.front();
            q.pop();
            const auto c = m.geometry().coords(i);
            if (c[0] == 0 || c[1] == 0 || c[2] == 0 || c[0] + 1 == d.nx || c[1] + 1 == d.ny || c[2] + 1 == d.nz)
                border = true;
            const long off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
            for (const auto& o : off) {
                const long x = static_cast<long>(c[0]) + o[0], y = static_cast<long>(c[1]) + o[1],
                           z = static_cast<long>(c[2]) + o[2];
                if (!m.geometry().inside(x, y, z)) continue;
                const auto j = m.geometry().index(x, y, z);
                if (m[j] || seen[j]) continue;
                seen[j] = 1;
                q.push(j);
            }
        }
        if (!border) ++cavities;
    }
    return cavities;
}

}  // namespace testing
