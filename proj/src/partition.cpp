#include "vesselfuse/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <sstream>
#include <tuple>

#include "vesselfuse/parallel.hpp"

namespace vfuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string number_text(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
}

// Sets every gt voxel within radius_mm of voxel `centre` in `out`.
void paint_ball(BinaryMask& out, const BinaryMask& gt, std::size_t centre, double radius_mm) {
    const Geometry& g = gt.geometry();
    const auto c = g.coords(centre);
    std::array<std::int64_t, 3> lo{}, hi{};
    for (int k = 0; k < 3; ++k) {
        const auto r = static_cast<std::int64_t>(std::floor(radius_mm / g.spacing[k]));
        lo[k] = std::max<std::int64_t>(0, static_cast<std::int64_t>(c[k]) - r);
        hi[k] = std::min<std::int64_t>(static_cast<std::int64_t>(g.dims[k]) - 1, static_cast<std::int64_t>(c[k]) + r);
    }
    const double r2 = radius_mm * radius_mm;
    for (std::int64_t z = lo[2]; z <= hi[2]; ++z) {
        const double dz = (z - static_cast<std::int64_t>(c[2])) * g.spacing[2];
        for (std::int64_t y = lo[1]; y <= hi[1]; ++y) {
            const double dy = (y - static_cast<std::int64_t>(c[1])) * g.spacing[1];
            for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
                const double dx = (x - static_cast<std::int64_t>(c[0])) * g.spacing[0];
                if (dx * dx + dy * dy + dz * dz > r2) continue;
                const std::size_t i = g.index(x, y, z);
                if (gt[i]) out[i] = 1;
            }
        }
    }
}

}  // namespace

void SizeIntervals::validate() const {
    if (classes.empty()) throw UsageError("size intervals need at least one class");
    double prev = 0.0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto& c = classes[i];
        if (c.name.empty()) throw UsageError("size class without a name");
        for (std::size_t j = 0; j < i; ++j)
            if (classes[j].name == c.name) throw UsageError("duplicate size class '" + c.name + "'");
        const bool last = i + 1 == classes.size();
        if (last != std::isinf(c.upper_mm)) throw UsageError("only the last size class may be unbounded");
        if (!last && !(c.upper_mm > prev)) throw UsageError("size class bounds must increase from 0");
        if (!last) prev = c.upper_mm;
    }
}

std::size_t SizeIntervals::classify(double size_mm) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
        if (size_mm <= classes[i].upper_mm) return i;
    return classes.size() - 1;
}

std::optional<std::size_t> SizeIntervals::find(const std::string& name) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
        if (classes[i].name == name) return i;
    return std::nullopt;
}

SizeIntervals SizeIntervals::ircad() {
    return {"ircad", {{"small", 3.0, "[0,3]"}, {"medium", 6.0, "]3,6]"}, {"large", kInf, "]6,+∞["}}};
}

SizeIntervals SizeIntervals::bullitt() {
    return {"bullitt", {{"small", 0.513, "[0,0.513]"}, {"medium", kInf, "]0.513, +∞["}}};
}

SizeIntervals SizeIntervals::custom(const std::vector<std::string>& names, const std::vector<double>& uppers) {
    if (names.size() != uppers.size() + 1)
        throw UsageError("custom intervals need exactly one more class name than upper bounds");
    SizeIntervals s;
    s.preset = "custom";
    double prev = 0.0;
    for (std::size_t i = 0; i < names.size(); ++i) {
        SizeClass c;
        c.name = names[i];
        if (i < uppers.size()) {
            if (!std::isfinite(uppers[i])) throw UsageError("custom interval bounds must be finite");
            c.upper_mm = uppers[i];
            c.label = (i == 0 ? "[" : "]") + number_text(prev) + "," + number_text(c.upper_mm) + "]";
            prev = c.upper_mm;
        } else {
            c.upper_mm = kInf;
            c.label = (i == 0 ? "[" : "]") + number_text(prev) + ",+∞[";
        }
        s.classes.push_back(c);
    }
    s.validate();
    return s;
}

SizeIntervals SizeIntervals::by_preset(const std::string& name) {
    if (name == "ircad") return ircad();
    if (name == "bullitt") return bullitt();
    throw UsageError("unknown preset '" + name + "' (ircad, bullitt)");
}

std::vector<std::size_t> classify_branches(const VesselGraph& graph, const SizeIntervals& intervals) {
    intervals.validate();
    std::vector<std::size_t> out;
    out.reserve(graph.branches.size());
    for (const auto& b : graph.branches) out.push_back(intervals.classify(b.size_mm));
    return out;
}

const BinaryMask* PartitionMasks::by_name(const std::string& name) const {
    const auto i = intervals.find(name);
    return i ? &classes[*i] : nullptr;
}

PartitionMasks build_class_masks(const VesselGraph& graph, const std::vector<std::size_t>& classes,
                                 const BinaryMask& gt, const SizeIntervals& intervals) {
    intervals.validate();
    require_binary(gt);
    require_same_grid(graph.geometry, gt.geometry(), "ground truth");
    if (classes.size() != graph.branches.size()) throw UsageError("one class per branch required");
    const Geometry& g = gt.geometry();
    const std::size_t nc = intervals.classes.size();
    const double margin = std::max({g.spacing[0], g.spacing[1], g.spacing[2]});

    // Skeleton positions owned by each class.
    std::vector<std::vector<std::size_t>> seeds(nc);
    for (std::size_t p = 0; p < graph.skeleton.size(); ++p) {
        const int label = graph.voxel_label[p];
        if (label > 0) seeds[classes[label - 1]].push_back(p);
    }
    for (std::size_t b = 0; b < graph.bifurcations.size(); ++b) {
        std::vector<std::size_t> owners;
        for (const auto& br : graph.branches)
            if (std::find(br.bifurcations.begin(), br.bifurcations.end(), static_cast<int>(b)) != br.bifurcations.end())
                owners.push_back(classes[br.label - 1]);
        for (std::size_t c : owners)
            for (std::size_t v : graph.bifurcations[b].voxels) seeds[c].push_back(graph.skeleton_position(v));
    }
    for (auto& s : seeds) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }

    PartitionMasks out;
    out.intervals = intervals;
    out.classes.assign(nc, BinaryMask(g, 0));
    out.m_bif = BinaryMask(g, 0);
    parallel_for(0, nc, [&](std::size_t c) {
        for (std::size_t p : seeds[c]) paint_ball(out.classes[c], gt, graph.skeleton[p], graph.voxel_dist[p] + margin);
    });

    // Nearest-class fill for gt voxels no ball reached.
    std::vector<std::uint8_t> covered(gt.size(), 0);
    std::size_t gaps = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!gt[i]) continue;
        for (std::size_t c = 0; c < nc; ++c) covered[i] = covered[i] || out.classes[c][i];
        gaps += covered[i] ? 0 : 1;
    }
    out.gap_voxels = gaps;
    if (gaps > 0) {
        using Item = std::tuple<double, std::size_t, std::size_t>;  // distance, class, voxel
        std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
        std::vector<double> best(gt.size(), kInf);
        std::vector<std::size_t> owner(gt.size(), nc);
        for (std::size_t c = 0; c < nc; ++c) {
            for (std::size_t p : seeds[c]) {
                const std::size_t v = graph.skeleton[p];
                if (!gt[v]) continue;
                if (best[v] > 0.0 || owner[v] > c) {
                    best[v] = 0.0;
                    owner[v] = c;
                    queue.emplace(0.0, c, v);
                }
            }
        }
        while (!queue.empty()) {
            const auto [d, c, v] = queue.top();
            queue.pop();
            if (d > best[v] || c != owner[v]) continue;
            const auto xyz = g.coords(v);
            for (int dz = -1; dz <= 1; ++dz) {
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (!dx && !dy && !dz) continue;
                        const std::int64_t x = static_cast<std::int64_t>(xyz[0]) + dx;
                        const std::int64_t y = static_cast<std::int64_t>(xyz[1]) + dy;
                        const std::int64_t z = static_cast<std::int64_t>(xyz[2]) + dz;
                        if (!g.inside(x, y, z)) continue;
                        const std::size_t w = g.index(x, y, z);
                        if (!gt[w]) continue;
                        const double step = std::sqrt(dx * dx * g.spacing[0] * g.spacing[0] +
                                                      dy * dy * g.spacing[1] * g.spacing[1] +
                                                      dz * dz * g.spacing[2] * g.spacing[2]);
                        const double nd = d + step;
                        if (nd < best[w] || (nd == best[w] && c < owner[w])) {
                            best[w] = nd;
                            owner[w] = c;
                            queue.emplace(nd, c, w);
                        }
                    }
                }
            }
        }
        for (std::size_t i = 0; i < gt.size(); ++i)
            if (gt[i] && !covered[i] && owner[i] < nc) out.classes[owner[i]][i] = 1;
    }
    return out;
}

BinaryMask bifurcation_mask(const VesselGraph& graph, const BinaryMask& gt, std::optional<double> radius_mm,
                            std::vector<double>* radii_used) {
    require_binary(gt);
    require_same_grid(graph.geometry, gt.geometry(), "ground truth");
    if (radius_mm && !(*radius_mm >= 0.0)) throw UsageError("bifurcation radius must be >= 0");
    BinaryMask out(gt.geometry(), 0);
    if (radii_used) radii_used->clear();
    for (const auto& b : graph.bifurcations) {
        const double r = radius_mm ? *radius_mm : 4.0 * b.radius_mm;
        if (radii_used) radii_used->push_back(r);
        for (std::size_t v : b.voxels) paint_ball(out, gt, v, r);
    }
    return out;
}

PartitionResult partition_ground_truth(const BinaryMask& gt, const SizeIntervals& intervals,
                                       std::optional<double> bif_radius_mm) {
    intervals.validate();
    require_binary(gt);
    if (count_nonzero(gt) == 0) throw DataError("ground truth mask is empty");
    const DistanceField dist = distance_transform(gt);
    PartitionResult r;
    r.graph = build_graph(skeletonize(gt, dist), dist);
    r.branch_classes = classify_branches(r.graph, intervals);
    r.masks = build_class_masks(r.graph, r.branch_classes, gt, intervals);
    r.masks.m_bif = bifurcation_mask(r.graph, gt, bif_radius_mm, &r.masks.bif_radii_mm);
    return r;
}

nlohmann::json intervals_to_json(const SizeIntervals& intervals) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : intervals.classes) {
        nlohmann::json upper = std::isinf(c.upper_mm) ? nlohmann::json(nullptr) : nlohmann::json(c.upper_mm);
        classes.push_back({{"name", c.name}, {"upper_mm", upper}, {"interval", c.label}});
    }
    return {{"preset", intervals.preset}, {"classes", classes}};
}

SizeIntervals intervals_from_json(const nlohmann::json& j) {
    if (j.is_string()) return SizeIntervals::by_preset(j.get<std::string>());
    if (!j.is_object()) throw UsageError("intervals must be a preset name or an object");
    if (j.contains("classes")) {
        // The form written by intervals_to_json.
        for (const auto& [key, _] : j.items())
            if (key != "preset" && key != "classes") throw UsageError("unknown intervals key '" + key + "'");
        const std::string preset = j.value("preset", "custom");
        if (preset != "custom") return SizeIntervals::by_preset(preset);
        std::vector<std::string> names;
        std::vector<double> uppers;
        for (const auto& c : j.at("classes")) {
            names.push_back(c.at("name").get<std::string>());
            if (!c.at("upper_mm").is_null()) uppers.push_back(c.at("upper_mm").get<double>());
        }
        return SizeIntervals::custom(names, uppers);
    }
    for (const auto& [key, _] : j.items())
        if (key != "names" && key != "upper_mm") throw UsageError("unknown intervals key '" + key + "'");
    if (!j.contains("names") || !j.contains("upper_mm"))
        throw UsageError("custom intervals need 'names' and 'upper_mm'");
    return SizeIntervals::custom(j.at("names").get<std::vector<std::string>>(),
                                 j.at("upper_mm").get<std::vector<double>>());
}

nlohmann::json partition_summary(const PartitionResult& r) {
    using nlohmann::json;
    const auto& iv = r.masks.intervals;
    json histogram = json::object();
    for (const auto& c : iv.classes) histogram[c.name] = 0;
    for (std::size_t c : r.branch_classes) histogram[iv.classes[c].name] = histogram[iv.classes[c].name].get<int>() + 1;
    json masks = json::object();
    for (std::size_t c = 0; c < iv.classes.size(); ++c) masks[iv.classes[c].name] = count_nonzero(r.masks.classes[c]);
    masks["bifurcations"] = count_nonzero(r.masks.m_bif);
    json branches = json::array();
    for (std::size_t b = 0; b < r.graph.branches.size(); ++b)
        branches.push_back({{"label", r.graph.branches[b].label},
                            {"size_mm", r.graph.branches[b].size_mm},
                            {"class", iv.classes[r.branch_classes[b]].name}});
    return {{"schema_version", 1},
            {"intervals", intervals_to_json(iv)},
            {"size_definition", "diameter = 2 x distance transform (mm)"},
            {"dilation_rule", "ball radius = distance value + one voxel (largest spacing)"},
            {"bifurcation_radii_mm", r.masks.bif_radii_mm},
            {"branch_count", r.graph.branches.size()},
            {"bifurcation_count", r.graph.bifurcations.size()},
            {"skeleton_voxels", r.graph.skeleton.size()},
            {"size_histogram", histogram},
            {"mask_voxels", masks},
            {"gap_voxels", r.masks.gap_voxels},
            {"branches", branches}};
}

}  // namespace vfuse
