#include "vesselfuse/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <tuple>

#include "vesselfuse/parallel.hpp"

namespace vfuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) on one line.
// f holds squared distances, s is the sample pitch.
void edt_line(const double* f, double* out, std::size_t n, double s, std::vector<std::size_t>& v,
              std::vector<double>& z) {
    v.resize(n);
    z.resize(n + 1);
    std::size_t k = 0;
    bool any = false;
    for (std::size_t q = 0; q < n; ++q) {
        if (!std::isfinite(f[q])) continue;
        if (!any) {
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            any = true;
            continue;
        }
        const double pq = q * s;
        double sv;
        while (true) {
            const double pv = v[k] * s;
            sv = ((f[q] + pq * pq) - (f[v[k]] + pv * pv)) / (2.0 * (pq - pv));
            if (sv <= z[k] && k > 0) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = sv;
        z[k + 1] = kInf;
    }
    if (!any) {
        for (std::size_t q = 0; q < n; ++q) out[q] = kInf;
        return;
    }
    k = 0;
    for (std::size_t q = 0; q < n; ++q) {
        const double pq = q * s;
        while (z[k + 1] < pq) ++k;
        const double d = pq - v[k] * s;
        out[q] = d * d + f[v[k]];
    }
}

struct Offsets {
    std::array<std::array<int, 3>, 26> d;
};

const Offsets& offsets26() {
    static const Offsets o = [] {
        Offsets r{};
        int n = 0;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if (dx || dy || dz) r.d[n++] = {dx, dy, dz};
        return r;
    }();
    return o;
}

// Cube adjacency tables for the simple-point test.
struct CubeTables {
    std::array<std::vector<int>, 27> adj26;
    std::array<std::vector<int>, 27> adj6;
    std::array<bool, 27> in18{};
    std::array<int, 6> face{};
};

const CubeTables& cube_tables() {
    static const CubeTables t = [] {
        CubeTables r;
        auto xyz = [](int i) { return std::array<int, 3>{i % 3 - 1, (i / 3) % 3 - 1, i / 9 - 1}; };
        int nf = 0;
        for (int i = 0; i < 27; ++i) {
            const auto a = xyz(i);
            const int l1 = std::abs(a[0]) + std::abs(a[1]) + std::abs(a[2]);
            r.in18[i] = i != 13 && l1 <= 2;
            if (l1 == 1) r.face[nf++] = i;
            for (int j = 0; j < 27; ++j) {
                if (j == i || j == 13 || i == 13) continue;
                const auto b = xyz(j);
                const int dx = std::abs(a[0] - b[0]), dy = std::abs(a[1] - b[1]), dz = std::abs(a[2] - b[2]);
                if (std::max({dx, dy, dz}) == 1) r.adj26[i].push_back(j);
                if (dx + dy + dz == 1) r.adj6[i].push_back(j);
            }
        }
        return r;
    }();
    return t;
}

class Grid {
public:
    explicit Grid(const Geometry& g) : g_(g) {}

    std::size_t neighbour(std::size_t idx, const std::array<int, 3>& d) const {
        const auto c = g_.coords(idx);
        const std::int64_t x = static_cast<std::int64_t>(c[0]) + d[0];
        const std::int64_t y = static_cast<std::int64_t>(c[1]) + d[1];
        const std::int64_t z = static_cast<std::int64_t>(c[2]) + d[2];
        if (!g_.inside(x, y, z)) return kNone;
        return g_.index(x, y, z);
    }

    double step(const std::array<int, 3>& d) const {
        const double a = d[0] * g_.spacing[0], b = d[1] * g_.spacing[1], c = d[2] * g_.spacing[2];
        return std::sqrt(a * a + b * b + c * c);
    }

    double distance(std::size_t i, std::size_t j) const {
        const auto a = g_.coords(i), b = g_.coords(j);
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double d = (static_cast<double>(a[k]) - static_cast<double>(b[k])) * g_.spacing[k];
            s += d * d;
        }
        return std::sqrt(s);
    }

    std::array<bool, 27> cube(const BinaryMask& m, std::size_t idx) const {
        std::array<bool, 27> c{};
        const auto p = g_.coords(idx);
        for (int i = 0; i < 27; ++i) {
            const std::int64_t x = static_cast<std::int64_t>(p[0]) + i % 3 - 1;
            const std::int64_t y = static_cast<std::int64_t>(p[1]) + (i / 3) % 3 - 1;
            const std::int64_t z = static_cast<std::int64_t>(p[2]) + i / 9 - 1;
            c[i] = g_.inside(x, y, z) && m[g_.index(x, y, z)] != 0;
        }
        return c;
    }

private:
    const Geometry& g_;
};

int cube_count(const std::array<bool, 27>& c) {
    int n = 0;
    for (int i = 0; i < 27; ++i) n += (i != 13 && c[i]) ? 1 : 0;
    return n;
}

bool removable(const Grid& grid, const BinaryMask& x, std::size_t idx) {
    const auto c = grid.cube(x, idx);
    return cube_count(c) > 1 && is_simple_point(c);
}

// Sequential sweeps deleting simple non-end voxels until none remain.
void rethin(const Grid& grid, BinaryMask& x) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] && removable(grid, x, i)) {
                x[i] = 0;
                changed = true;
            }
        }
    }
}

std::vector<std::size_t> foreground(const BinaryMask& m) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i]) out.push_back(i);
    return out;
}

int degree(const Grid& grid, const BinaryMask& m, std::size_t idx) {
    int n = 0;
    for (const auto& d : offsets26().d) {
        const std::size_t j = grid.neighbour(idx, d);
        if (j != kNone && m[j]) ++n;
    }
    return n;
}

// Removes the shortest terminal spur below the threshold; false when none qualifies.
bool prune_one(const Grid& grid, BinaryMask& x, const DistanceField& dist, double factor) {
    const auto voxels = foreground(x);
    double best_len = kInf;
    std::vector<std::size_t> best_path;
    for (std::size_t e : voxels) {
        if (degree(grid, x, e) != 1) continue;
        std::vector<std::size_t> path{e};
        std::size_t prev = kNone, cur = e;
        double len = 0.0;
        std::size_t junction = kNone;
        while (true) {
            std::size_t next = kNone;
            double next_step = 0.0;
            for (const auto& d : offsets26().d) {
                const std::size_t j = grid.neighbour(cur, d);
                if (j == kNone || !x[j] || j == prev) continue;
                if (std::find(path.begin(), path.end(), j) != path.end()) continue;
                const double s = grid.step(d);
                if (next == kNone || s < next_step) {
                    next = j;
                    next_step = s;
                }
            }
            if (next == kNone) break;
            len += next_step;
            if (degree(grid, x, next) >= 3) {
                junction = next;
                break;
            }
            path.push_back(next);
            prev = cur;
            cur = next;
            if (len > best_len) break;
        }
        if (junction == kNone) continue;
        if (len < factor * dist[junction] && len < best_len) {
            best_len = len;
            best_path = path;
        }
    }
    if (best_path.empty()) return false;
    for (std::size_t v : best_path) x[v] = 0;
    return true;
}

struct UnionFind {
    std::vector<std::size_t> p;
    explicit UnionFind(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    std::size_t find(std::size_t a) {
        while (p[a] != a) a = p[a] = p[p[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a < b) std::swap(a, b);
        p[a] = b;
    }
};

}  // namespace

DistanceField distance_transform(const BinaryMask& mask) {
    require_binary(mask);
    if (count_nonzero(mask) == 0) throw DataError("distance transform of an empty mask");
    const Geometry& g = mask.geometry();
    // Pad by one background voxel on every side.
    const Dims pd{g.dims.nx + 2, g.dims.ny + 2, g.dims.nz + 2};
    std::vector<double> f(pd.size(), 0.0);
    for (std::size_t z = 0; z < g.dims.nz; ++z)
        for (std::size_t y = 0; y < g.dims.ny; ++y)
            for (std::size_t x = 0; x < g.dims.nx; ++x)
                if (mask.at(x, y, z)) f[(x + 1) + pd.nx * ((y + 1) + pd.ny * (z + 1))] = kInf;

    for (int axis = 0; axis < 3; ++axis) {
        const std::size_t n = pd[axis];
        const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? pd.nx : pd.nx * pd.ny);
        const std::size_t lines = pd.size() / n;
        const double s = g.spacing[axis];
        parallel_ranges(0, lines, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> in(n), out(n), z;
            std::vector<std::size_t> v;
            for (std::size_t l = lo; l < hi; ++l) {
                std::size_t base;
                if (axis == 0) {
                    base = l * pd.nx;
                } else if (axis == 1) {
                    base = (l % pd.nx) + pd.nx * pd.ny * (l / pd.nx);
                } else {
                    base = l;
                }
                for (std::size_t i = 0; i < n; ++i) in[i] = f[base + i * stride];
                edt_line(in.data(), out.data(), n, s, v, z);
                for (std::size_t i = 0; i < n; ++i) f[base + i * stride] = out[i];
            }
        });
    }

    DistanceField out(g, 0.0);
    for (std::size_t z = 0; z < g.dims.nz; ++z)
        for (std::size_t y = 0; y < g.dims.ny; ++y)
            for (std::size_t x = 0; x < g.dims.nx; ++x)
                out.at(x, y, z) = std::sqrt(f[(x + 1) + pd.nx * ((y + 1) + pd.ny * (z + 1))]);
    return out;
}

bool is_simple_point(const std::array<bool, 27>& c) {
    const CubeTables& t = cube_tables();
    // Foreground: exactly one 26-component in the punctured cube.
    int fg_components = 0;
    std::array<bool, 27> seen{};
    std::array<int, 27> stack{};
    for (int i = 0; i < 27; ++i) {
        if (i == 13 || !c[i] || seen[i]) continue;
        if (++fg_components > 1) return false;
        int top = 0;
        stack[top++] = i;
        seen[i] = true;
        while (top) {
            const int a = stack[--top];
            for (int b : t.adj26[a]) {
                if (c[b] && !seen[b]) {
                    seen[b] = true;
                    stack[top++] = b;
                }
            }
        }
    }
    if (fg_components != 1) return false;

    // Background: exactly one 6-component in N18 touching a face neighbour.
    seen.fill(false);
    int bg_components = 0;
    for (int f : t.face) {
        if (c[f] || seen[f]) continue;
        if (++bg_components > 1) return false;
        int top = 0;
        stack[top++] = f;
        seen[f] = true;
        while (top) {
            const int a = stack[--top];
            for (int b : t.adj6[a]) {
                if (t.in18[b] && !c[b] && !seen[b]) {
                    seen[b] = true;
                    stack[top++] = b;
                }
            }
        }
    }
    return bg_components == 1;
}

BinaryMask skeletonize(const BinaryMask& mask, double spur_factor) {
    return skeletonize(mask, distance_transform(mask), spur_factor);
}

BinaryMask skeletonize(const BinaryMask& mask, const DistanceField& dist, double spur_factor) {
    require_binary(mask);
    require_same_grid(mask.geometry(), dist.geometry(), "distance field");
    if (count_nonzero(mask) == 0) throw DataError("cannot skeletonize an empty mask");
    if (!(spur_factor >= 0.0)) throw UsageError("spur factor must be >= 0");
    const Grid grid(mask.geometry());
    BinaryMask x = mask;

    // Erosion proceeds in distance levels of half the finest pitch. Within a
    // level, six directional subiterations mark candidates in parallel and
    // then re-check them sequentially in index order.
    const double h = 0.5 * mask.geometry().min_spacing();
    std::vector<std::size_t> order = foreground(x);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    const auto& t = cube_tables();
    std::vector<std::size_t> active;
    std::vector<std::uint8_t> candidate;
    std::size_t next = 0;
    while (next < order.size()) {
        const double level = std::floor(dist[order[next]] / h);
        while (next < order.size() && std::floor(dist[order[next]] / h) <= level) active.push_back(order[next++]);
        std::sort(active.begin(), active.end());
        bool changed = true;
        while (changed) {
            changed = false;
            for (int f : t.face) {
                candidate.assign(active.size(), 0);
                parallel_ranges(0, active.size(), [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t k = lo; k < hi; ++k) {
                        const std::size_t i = active[k];
                        if (!x[i]) continue;
                        const auto c = grid.cube(x, i);
                        if (c[f]) continue;
                        candidate[k] = cube_count(c) > 1 && is_simple_point(c);
                    }
                });
                for (std::size_t k = 0; k < active.size(); ++k) {
                    if (candidate[k] && removable(grid, x, active[k])) {
                        x[active[k]] = 0;
                        changed = true;
                    }
                }
            }
            std::erase_if(active, [&](std::size_t i) { return !x[i]; });
        }
    }
    rethin(grid, x);
    if (spur_factor > 0.0) {
        while (prune_one(grid, x, dist, spur_factor)) rethin(grid, x);
    }
    return x;
}

std::size_t VesselGraph::skeleton_position(std::size_t voxel) const {
    const auto it = std::lower_bound(skeleton.begin(), skeleton.end(), voxel);
    if (it == skeleton.end() || *it != voxel) return kNone;
    return static_cast<std::size_t>(it - skeleton.begin());
}

VesselGraph build_graph(const BinaryMask& skel, const DistanceField& dist) {
    require_binary(skel);
    require_same_grid(skel.geometry(), dist.geometry(), "distance field");
    const Grid grid(skel.geometry());
    VesselGraph g;
    g.geometry = skel.geometry();
    g.skeleton = foreground(skel);
    const std::size_t n = g.skeleton.size();

    std::vector<std::vector<std::size_t>> nb(n);  // neighbour positions
    for (std::size_t p = 0; p < n; ++p) {
        for (const auto& d : offsets26().d) {
            const std::size_t j = grid.neighbour(g.skeleton[p], d);
            if (j != kNone && skel[j]) nb[p].push_back(g.skeleton_position(j));
        }
        std::sort(nb[p].begin(), nb[p].end());
    }
    g.voxel_degree.resize(n);
    g.voxel_dist.resize(n);
    for (std::size_t p = 0; p < n; ++p) g.voxel_dist[p] = dist[g.skeleton[p]];
    for (std::size_t p = 0; p < n; ++p) {
        g.voxel_degree[p] = static_cast<int>(nb[p].size());
        if (nb[p].size() == 1) g.endpoints.push_back(g.skeleton[p]);
    }

    std::vector<std::uint8_t> junction(n);
    for (std::size_t p = 0; p < n; ++p) junction[p] = g.voxel_degree[p] >= 3;

    // Components among voxels with the same junction flag.
    auto components = [&](bool want) {
        UnionFind uf(n);
        for (std::size_t p = 0; p < n; ++p) {
            if (static_cast<bool>(junction[p]) != want) continue;
            for (std::size_t q : nb[p])
                if (static_cast<bool>(junction[q]) == want) uf.unite(p, q);
        }
        std::vector<std::vector<std::size_t>> comps;
        std::vector<std::size_t> slot(n, kNone);
        for (std::size_t p = 0; p < n; ++p) {  // root is the smallest member, so order is by min voxel
            if (static_cast<bool>(junction[p]) != want) continue;
            const std::size_t r = uf.find(p);
            if (slot[r] == kNone) {
                slot[r] = comps.size();
                comps.emplace_back();
            }
            comps[slot[r]].push_back(p);
        }
        return comps;
    };

    auto path_ends = [&](const std::vector<std::size_t>& comp, std::vector<std::size_t>& comp_of, std::size_t id) {
        std::vector<std::size_t> ends;
        for (std::size_t p : comp) {
            int inner = 0;
            for (std::size_t q : nb[p]) inner += comp_of[q] == id ? 1 : 0;
            if (inner <= 1) ends.push_back(p);
        }
        return ends;
    };

    std::vector<std::vector<std::size_t>> clusters, branches;
    std::vector<std::vector<int>> ends_per_cluster;
    while (true) {
        clusters = components(true);
        branches = components(false);
        std::vector<std::size_t> cluster_of(n, kNone), branch_of(n, kNone);
        for (std::size_t c = 0; c < clusters.size(); ++c)
            for (std::size_t p : clusters[c]) cluster_of[p] = c;
        for (std::size_t b = 0; b < branches.size(); ++b)
            for (std::size_t p : branches[b]) branch_of[p] = b;
        std::vector<int> ends(clusters.size(), 0);
        for (std::size_t b = 0; b < branches.size(); ++b) {
            for (std::size_t e : path_ends(branches[b], branch_of, b)) {
                std::vector<std::size_t> touched;
                for (std::size_t q : nb[e])
                    if (cluster_of[q] != kNone) touched.push_back(cluster_of[q]);
                std::sort(touched.begin(), touched.end());
                touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
                for (std::size_t c : touched) ++ends[c];
            }
        }
        bool dissolved = false;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            if (ends[c] < 3) {
                for (std::size_t p : clusters[c]) junction[p] = 0;
                dissolved = true;
            }
        }
        if (!dissolved) {
            g.bifurcations.resize(clusters.size());
            for (std::size_t c = 0; c < clusters.size(); ++c) g.bifurcations[c].degree = ends[c];
            break;
        }
    }

    std::vector<std::size_t> cluster_of(n, kNone), branch_of(n, kNone);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        Bifurcation& bif = g.bifurcations[c];
        double best = -1.0;
        for (std::size_t p : clusters[c]) {
            cluster_of[p] = c;
            const std::size_t v = g.skeleton[p];
            bif.voxels.push_back(v);
            if (dist[v] > best) {
                best = dist[v];
                bif.center = v;
            }
        }
        bif.radius_mm = best;
    }

    g.voxel_label.assign(n, 0);
    for (std::size_t b = 0; b < branches.size(); ++b) {
        const auto& comp = branches[b];
        for (std::size_t p : comp) branch_of[p] = b;
        Branch br;
        br.label = static_cast<int>(b) + 1;

        // Walk from the smallest path end, preferring the shortest step.
        const auto ends = path_ends(comp, branch_of, b);
        std::size_t cur = ends.empty() ? comp.front() : ends.front();
        std::vector<std::uint8_t> visited(comp.size(), 0);
        auto local = [&](std::size_t p) {
            return static_cast<std::size_t>(std::lower_bound(comp.begin(), comp.end(), p) - comp.begin());
        };
        std::vector<std::size_t> order;
        while (cur != kNone) {
            visited[local(cur)] = 1;
            order.push_back(cur);
            std::size_t next = kNone;
            double next_step = kInf;
            for (std::size_t q : nb[cur]) {
                if (branch_of[q] != b || visited[local(q)]) continue;
                const double s = grid.distance(g.skeleton[cur], g.skeleton[q]);
                if (s < next_step) {
                    next = q;
                    next_step = s;
                }
            }
            if (next != kNone) br.length_mm += next_step;
            cur = next;
        }
        for (std::size_t i = 0; i < comp.size(); ++i)
            if (!visited[i]) order.push_back(comp[i]);
        for (std::size_t p : order) {
            br.voxels.push_back(g.skeleton[p]);
            g.voxel_label[p] = br.label;
        }

        std::vector<int> bifs;
        for (std::size_t p : comp)
            for (std::size_t q : nb[p])
                if (cluster_of[q] != kNone) bifs.push_back(static_cast<int>(cluster_of[q]));
        std::sort(bifs.begin(), bifs.end());
        bifs.erase(std::unique(bifs.begin(), bifs.end()), bifs.end());
        br.bifurcations = bifs;

        double size_all = 0.0, size_outside = -1.0;
        for (std::size_t v : br.voxels) {
            const double diam = 2.0 * dist[v];
            size_all = std::max(size_all, diam);
            bool inside_ball = false;
            for (int c : bifs) {
                for (std::size_t jv : g.bifurcations[c].voxels) {
                    if (grid.distance(v, jv) < dist[jv]) {
                        inside_ball = true;
                        break;
                    }
                }
                if (inside_ball) break;
            }
            if (!inside_ball) size_outside = std::max(size_outside, diam);
        }
        br.size_mm = size_outside >= 0.0 ? size_outside : size_all;
        g.branches.push_back(std::move(br));
    }

    // Nodes: plain voxels and merged clusters, ordered by smallest voxel.
    std::vector<std::size_t> node_of(n, kNone);
    std::vector<std::pair<std::size_t, int>> keys;  // (min position, cluster or -1 - position)
    for (std::size_t p = 0; p < n; ++p) {
        if (cluster_of[p] == kNone) {
            keys.emplace_back(p, -1);
        } else if (clusters[cluster_of[p]].front() == p) {
            keys.emplace_back(p, static_cast<int>(cluster_of[p]));
        }
    }
    std::sort(keys.begin(), keys.end());
    g.nodes.resize(keys.size());
    for (std::size_t k = 0; k < keys.size(); ++k) {
        GraphNode& node = g.nodes[k];
        if (keys[k].second < 0) {
            node.voxels.push_back(g.skeleton[keys[k].first]);
            node_of[keys[k].first] = k;
        } else {
            node.bifurcation = keys[k].second;
            for (std::size_t p : clusters[keys[k].second]) {
                node.voxels.push_back(g.skeleton[p]);
                node_of[p] = k;
            }
        }
    }
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        std::vector<std::size_t> adj;
        for (std::size_t v : g.nodes[k].voxels)
            for (std::size_t q : nb[g.skeleton_position(v)])
                if (node_of[q] != k) adj.push_back(node_of[q]);
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
        g.nodes[k].degree = static_cast<int>(adj.size());
    }
    return g;
}

bool SparseBoolMatrix::at(std::size_t i, std::size_t j) const {
    return std::binary_search(entries.begin(), entries.end(), std::make_pair(i, j));
}

std::size_t SparseBoolMatrix::row_count(std::size_t i) const {
    const auto lo = std::lower_bound(entries.begin(), entries.end(), std::make_pair(i, std::size_t{0}));
    const auto hi = std::lower_bound(entries.begin(), entries.end(), std::make_pair(i + 1, std::size_t{0}));
    return static_cast<std::size_t>(hi - lo);
}

SparseBoolMatrix adjacency_matrix(const VesselGraph& graph) {
    const Grid grid(graph.geometry);
    SparseBoolMatrix m;
    m.n = graph.nodes.size();
    std::vector<std::size_t> node_of(graph.skeleton.size(), kNone);
    for (std::size_t k = 0; k < graph.nodes.size(); ++k)
        for (std::size_t v : graph.nodes[k].voxels) node_of[graph.skeleton_position(v)] = k;
    for (std::size_t k = 0; k < graph.nodes.size(); ++k) {
        for (std::size_t v : graph.nodes[k].voxels) {
            for (const auto& d : offsets26().d) {
                const std::size_t j = grid.neighbour(v, d);
                if (j == kNone) continue;
                const std::size_t p = graph.skeleton_position(j);
                if (p == kNone || node_of[p] == k) continue;
                m.entries.emplace_back(k, node_of[p]);
            }
        }
    }
    std::sort(m.entries.begin(), m.entries.end());
    m.entries.erase(std::unique(m.entries.begin(), m.entries.end()), m.entries.end());
    return m;
}

nlohmann::json graph_to_json(const VesselGraph& graph) {
    using nlohmann::json;
    const Geometry& g = graph.geometry;
    auto voxel = [&](std::size_t v) {
        const auto c = g.coords(v);
        return json::array({c[0], c[1], c[2]});
    };
    json nodes = json::array();
    for (const auto& node : graph.nodes) {
        json vox = json::array(), mm = json::array();
        for (std::size_t v : node.voxels) {
            const auto c = g.coords(v);
            vox.push_back(voxel(v));
            const Vec3 w = g.world(c[0], c[1], c[2]);
            mm.push_back(json::array({w[0], w[1], w[2]}));
        }
        nodes.push_back({{"voxels", vox}, {"mm", mm}, {"degree", node.degree}, {"bifurcation", node.bifurcation}});
    }
    json branches = json::array();
    for (const auto& b : graph.branches) {
        json vox = json::array();
        for (std::size_t v : b.voxels) vox.push_back(voxel(v));
        branches.push_back({{"label", b.label},
                            {"size_mm", b.size_mm},
                            {"length_mm", b.length_mm},
                            {"bifurcations", b.bifurcations},
                            {"voxels", vox}});
    }
    json bifs = json::array();
    for (const auto& b : graph.bifurcations) {
        json vox = json::array();
        for (std::size_t v : b.voxels) vox.push_back(voxel(v));
        const auto c = g.coords(b.center);
        const Vec3 w = g.world(c[0], c[1], c[2]);
        bifs.push_back({{"center", voxel(b.center)},
                        {"center_mm", {w[0], w[1], w[2]}},
                        {"radius_mm", b.radius_mm},
                        {"degree", b.degree},
                        {"voxels", vox}});
    }
    json endpoints = json::array();
    for (std::size_t v : graph.endpoints) endpoints.push_back(voxel(v));
    return {{"schema_version", 1},
            {"dims", {g.dims.nx, g.dims.ny, g.dims.nz}},
            {"spacing", g.spacing},
            {"origin", g.origin},
            {"skeleton_voxels", graph.skeleton.size()},
            {"nodes", nodes},
            {"branches", branches},
            {"bifurcations", bifs},
            {"endpoints", endpoints}};
}

std::size_t count_components26(const BinaryMask& mask) {
    const Grid grid(mask.geometry());
    std::vector<std::uint8_t> seen(mask.size(), 0);
    std::vector<std::size_t> stack;
    std::size_t count = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i] || seen[i]) continue;
        ++count;
        seen[i] = 1;
        stack.push_back(i);
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            for (const auto& d : offsets26().d) {
                const std::size_t b = grid.neighbour(a, d);
                if (b != kNone && mask[b] && !seen[b]) {
                    seen[b] = 1;
                    stack.push_back(b);
                }
            }
        }
    }
    return count;
}

}  // namespace vfuse
