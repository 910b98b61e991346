// Acceptance suite: one PASS/FAIL line per criterion.
//   vesselfuse_acceptance            run everything
//   vesselfuse_acceptance <name>...  run the named criteria
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eig_oracle.hpp"
#include "support.hpp"
#include "vesselfuse/hypervolume.hpp"
#include "vesselfuse/metrics.hpp"
#include "vesselfuse/parallel.hpp"
#include "vesselfuse/partition.hpp"
#include "vesselfuse/phantom.hpp"
#include "vesselfuse/resample.hpp"
#include "vesselfuse/scale_space.hpp"
#include "vesselfuse/skeleton.hpp"
#include "vesselfuse/vesselness.hpp"

#ifndef VESSELFUSE_CLI
#error "VESSELFUSE_CLI must name the CLI binary"
#endif

using namespace vfuse;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome eigensolver() {
    Outcome o;
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<SymMat3> mats;
    for (int i = 0; i < 1000; ++i) {
        const double s = std::pow(10.0, 3.0 * u(rng));
        if (i % 10 == 0) {
            // Repeated eigenvalue, random rotation.
            const double d[3] = {s * u(rng), 0.0, s * u(rng)};
            const double lam[3] = {d[0], d[0], d[2]};
            double q[3][3];
            double a = u(rng) * M_PI, b = u(rng) * M_PI, c = u(rng) * M_PI;
            const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b), cc = std::cos(c),
                         sc = std::sin(c);
            const double rz1[3][3] = {{ca, -sa, 0}, {sa, ca, 0}, {0, 0, 1}};
            const double ry[3][3] = {{cb, 0, sb}, {0, 1, 0}, {-sb, 0, cb}};
            const double rz2[3][3] = {{cc, -sc, 0}, {sc, cc, 0}, {0, 0, 1}};
            double t[3][3] = {};
            for (int r = 0; r < 3; ++r)
                for (int k = 0; k < 3; ++k)
                    for (int m = 0; m < 3; ++m) t[r][k] += rz1[r][m] * ry[m][k];
            for (int r = 0; r < 3; ++r)
                for (int k = 0; k < 3; ++k) {
                    q[r][k] = 0.0;
                    for (int m = 0; m < 3; ++m) q[r][k] += t[r][m] * rz2[m][k];
                }
            double mtx[3][3] = {};
            for (int r = 0; r < 3; ++r)
                for (int k = 0; k < 3; ++k)
                    for (int m = 0; m < 3; ++m) mtx[r][k] += q[r][m] * lam[m] * q[k][m];
            mats.push_back({mtx[0][0], mtx[1][1], mtx[2][2], mtx[0][1], mtx[0][2], mtx[1][2]});
        } else {
            mats.push_back({s * u(rng), s * u(rng), s * u(rng), s * u(rng), s * u(rng), s * u(rng)});
        }
    }

    std::vector<EigenTriple> got(mats.size());
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i < mats.size(); ++i) got[i] = eig_sym3(mats[i]);
    const double solve_s = seconds_since(t0);

    double worst = 0.0;
    for (std::size_t i = 0; i < mats.size(); ++i) {
        const auto ref = testing::eig_oracle(mats[i]);
        const double norm = std::max({std::abs(ref[0]), std::abs(ref[1]), std::abs(ref[2]), 1e-300});
        worst = std::max({worst, std::abs(got[i].l1 - ref[0]) / norm, std::abs(got[i].l2 - ref[1]) / norm,
                          std::abs(got[i].l3 - ref[2]) / norm});
    }
    o.detail << "1000 matrices (100 with a repeated root), max error " << fmt(worst, 3)
             << " relative to the spectral norm, solve time " << fmt(solve_s * 1e3, 3) << " ms";
    o.require(worst <= 1e-9, "max error <= 1e-9");
    o.require(solve_s < 1.0, "runtime < 1 s");
    return o;
}

// ---------------------------------------------------------------------------

Outcome bspline() {
    Outcome o;
    Geometry g;
    g.dims = {128, 128, 128};
    g.spacing = {1.0, 1.0, 1.5};
    const double cx = 64.0, cy = 64.0, cz = 96.0;  // mm, volume centre
    auto poly = [&](double x, double y, double z) {
        const double u = (x - cx) / 64.0, v = (y - cy) / 64.0, w = (z - cz) / 96.0;
        return 1.0 + 0.5 * u - 2.0 * v + 0.25 * w + 1.5 * u * v - 0.75 * w * w + u * v * w + 2.0 * u * u * u -
               1.25 * v * v * w + 0.8 * w * w * w - 0.6 * u * w * w;
    };
    Volume3D vol(g);
    for (std::size_t z = 0; z < 128; ++z)
        for (std::size_t y = 0; y < 128; ++y)
            for (std::size_t x = 0; x < 128; ++x) vol.at(x, y, z) = poly(x * 1.0, y * 1.0, z * 1.5);
    const auto [lo, hi] = std::minmax_element(vol.data().begin(), vol.data().end());
    const double range = *hi - *lo;

    const auto t0 = Clock::now();
    const Volume3D out = resample(vol, Vec3{0.65, 0.65, 0.65});
    const double secs = seconds_since(t0);

    // Interior: at least 12 source voxels from every face.
    const double margin = 12.0;
    double worst = 0.0;
    std::size_t checked = 0;
    const Dims& d = out.dims();
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                const double px = x * 0.65, py = y * 0.65, pz = z * 0.65;
                const double sx = px / 1.0, sy = py / 1.0, sz = pz / 1.5;
                if (sx < margin || sy < margin || sz < margin || sx > 127 - margin || sy > 127 - margin ||
                    sz > 127 - margin)
                    continue;
                worst = std::max(worst, std::abs(out.at(x, y, z) - poly(px, py, pz)));
                ++checked;
            }
    o.detail << "128^3 (1,1,1.5) -> " << d.nx << "x" << d.ny << "x" << d.nz << " at 0.65 mm, interior max error "
             << fmt(worst / range, 3) << " of range over " << checked << " voxels, " << fmt(secs, 3) << " s";
    o.require(worst <= 1e-5 * range, "interior error <= 1e-5 of range");
    o.require(secs < 10.0, "runtime < 10 s");
    return o;
}

// ---------------------------------------------------------------------------

const Geometry kFilterGrid = cube_geometry(65, 0.5);

FilterParams suite_params() { return FilterParams::defaults_for(kFilterGrid, 3.0); }

Phantom noisy(PhantomSpec spec, std::uint64_t seed) {
    spec.noise_sigma = 0.1;
    spec.seed = seed;
    return render_phantom(spec);
}

Outcome filter_suite() {
    Outcome o;
    const Geometry& g = kFilterGrid;
    const FilterParams p = suite_params();
    const double extent = g.dims.nz * g.spacing[2];
    const Phantom tube = noisy(tube_spec(g, 2.0, 2.0 * extent), 1);
    const auto channels = all_filters(tube.intensity, p);

    // Centreline: the axis voxels (x = y = 32). Background: farther than r + 2 mm from the axis.
    const double c = 32.0;
    o.detail << "tube r=2 mm, noise 0.1:";
    for (std::size_t k = 0; k < 6; ++k) {
        const Volume3D& ch = channels[k];
        double line = 0.0, bg = 0.0;
        std::size_t nl = 0, nb = 0;
        for (std::size_t z = 0; z < g.dims.nz; ++z)
            for (std::size_t y = 0; y < g.dims.ny; ++y)
                for (std::size_t x = 0; x < g.dims.nx; ++x) {
                    const double r = std::hypot((x - c) * g.spacing[0], (y - c) * g.spacing[1]);
                    if (x == 32 && y == 32) {
                        line += ch.at(x, y, z);
                        ++nl;
                    } else if (r > 4.0) {
                        bg += ch.at(x, y, z);
                        ++nb;
                    }
                }
        line /= nl;
        bg /= nb;
        const std::string name(filter_name(kFilterOrder[k]));
        o.detail << " " << name << " " << fmt(line, 3) << "/" << fmt(bg, 3);
        o.require(line > 0.5, name + " centreline mean > 0.5");
        o.require(bg < 0.1, name + " background mean < 0.1");
    }

    // Selectivity on unnormalised multiscale responses: tube axis mean, blob centre voxel,
    // plate mid-plane mean. Blob radius 2 mm, plate thickness 4 mm.
    const Phantom blob = noisy(blob_spec(g, 2.0), 2);
    const Phantom plate = noisy(plate_spec(g, 4.0), 3);
    o.detail << "; selectivity tube/blob/plate:";
    for (FilterId id : {FilterId::frangi, FilterId::sato, FilterId::jerman, FilterId::zhang}) {
        const Volume3D rt = multiscale_raw(tube.intensity, id, p);
        const Volume3D rb = multiscale_raw(blob.intensity, id, p);
        const Volume3D rp = multiscale_raw(plate.intensity, id, p);
        double st = 0.0, sp = 0.0;
        for (std::size_t z = 0; z < g.dims.nz; ++z) st += rt.at(32, 32, z);
        st /= g.dims.nz;
        for (std::size_t y = 0; y < g.dims.ny; ++y)
            for (std::size_t x = 0; x < g.dims.nx; ++x) sp += rp.at(x, y, 32);
        sp /= g.dims.nx * g.dims.ny;
        const double sb = rb.at(32, 32, 32);
        const std::string name(filter_name(id));
        o.detail << " " << name << " " << fmt(st, 3) << "/" << fmt(sb, 3) << "/" << fmt(sp, 3);
        o.require(sb < st, name + " blob < tube");
        o.require(sp < st, name + " plate < tube");
    }
    return o;
}

// ---------------------------------------------------------------------------

Outcome scale_selection() {
    Outcome o;
    const Geometry& g = kFilterGrid;
    const Phantom tube = render_phantom(tube_spec(g, 2.0, 2.0 * g.dims.nz * g.spacing[2]));
    FilterParams p = suite_params();
    p.scales = {1.0, 2.0, 4.0};
    const EigenStack stack = compute_eigen_stack(tube.intensity, p);
    const auto per_scale = per_scale_responses(stack, FilterId::frangi, p);
    std::vector<double> line(per_scale.size(), 0.0);
    for (std::size_t s = 0; s < per_scale.size(); ++s) {
        for (std::size_t z = 0; z < g.dims.nz; ++z) line[s] += per_scale[s].at(32, 32, z);
        line[s] /= g.dims.nz;
    }
    const auto best = static_cast<std::size_t>(std::max_element(line.begin(), line.end()) - line.begin());
    o.detail << "tube r=2 mm, Frangi centreline means at sigma 1/2/4 mm: " << fmt(line[0]) << "/" << fmt(line[1])
             << "/" << fmt(line[2]) << ", argmax sigma = " << p.scales[best] << " mm";
    const std::size_t steps = best > 1 ? best - 1 : 1 - best;
    o.require(steps <= 1, "argmax within one step of sigma = 2");
    return o;
}

// ---------------------------------------------------------------------------

Outcome graph_partition() {
    Outcome o;
    const auto t0 = Clock::now();
    const Geometry g = cube_geometry(160, 0.5);
    const Phantom ph = render_phantom(y_spec(g, 4.0, 1.0));
    const PartitionResult r = partition_ground_truth(ph.mask, SizeIntervals::ircad());
    const double secs = seconds_since(t0);

    const auto& graph = r.graph;
    o.detail << "Y 160^3 @ 0.5 mm: " << graph.bifurcations.size() << " bifurcation(s), " << graph.branches.size()
             << " branches";
    o.require(graph.bifurcations.size() == 1, "exactly 1 bifurcation");
    o.require(graph.branches.size() == 3, "exactly 3 branches");

    // The trunk runs below the junction (smaller z), the twigs above it.
    if (graph.branches.size() == 3 && !ph.spec.junctions.empty()) {
        const double jz = ph.spec.junctions[0][2];
        std::size_t trunks = 0, twigs = 0;
        for (std::size_t b = 0; b < graph.branches.size(); ++b) {
            double mz = 0.0;
            for (auto v : graph.branches[b].voxels) mz += g.coords(v)[2] * g.spacing[2];
            mz /= graph.branches[b].voxels.size();
            const std::string cls = r.masks.intervals.classes[r.branch_classes[b]].name;
            o.detail << "; branch " << graph.branches[b].label << " size " << fmt(graph.branches[b].size_mm, 3)
                     << " mm -> " << cls;
            if (mz < jz) {
                ++trunks;
                o.require(cls == "large", "trunk classified large");
            } else {
                ++twigs;
                o.require(cls == "small", "twig classified small");
            }
        }
        o.require(trunks == 1 && twigs == 2, "one trunk and two twigs");
    }

    std::size_t uncovered = 0, gt_voxels = 0, bif_outside = 0;
    for (std::size_t i = 0; i < ph.mask.size(); ++i) {
        if (r.masks.m_bif[i] && !ph.mask[i]) ++bif_outside;
        if (!ph.mask[i]) continue;
        ++gt_voxels;
        bool hit = false;
        for (const auto& m : r.masks.classes) hit = hit || m[i];
        uncovered += !hit;
    }
    const std::size_t bif = count_nonzero(r.masks.m_bif);
    o.detail << "; coverage " << fmt(100.0 * (gt_voxels - uncovered) / gt_voxels, 6) << "%, m_bif " << bif
             << " voxels (" << bif_outside << " outside gt), " << fmt(secs, 3) << " s";
    o.require(uncovered == 0, "union of class masks covers gt");
    o.require(bif > 0, "m_bif nonempty");
    o.require(bif_outside == 0, "m_bif inside gt");
    o.require(secs < 30.0, "runtime < 30 s");
    return o;
}

// ---------------------------------------------------------------------------

std::size_t overlap(const BinaryMask& a, const BinaryMask& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += a[i] && b[i];
    return n;
}

// gt with the slices z0..z0+thickness-1 removed.
BinaryMask delete_slab(const BinaryMask& gt, std::size_t z0, std::size_t thickness) {
    BinaryMask out = gt;
    const Dims& d = gt.dims();
    for (std::size_t z = z0; z < z0 + thickness; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) out.at(x, y, z) = 0;
    return out;
}

Outcome metric_identities() {
    Outcome o;
    const Geometry g = cube_geometry(64, 0.5);
    const Phantom y = render_phantom(y_spec(g, 3.0, 1.0));
    const Phantom tubes = render_phantom(two_tubes_spec(g, 1.0, 3.0));
    PhantomSpec a_spec = two_tubes_spec(g, 1.0, 3.0), b_spec = a_spec;
    a_spec.segments.resize(1);
    b_spec.segments.erase(b_spec.segments.begin());
    const BinaryMask a = render_phantom(a_spec).mask, b = render_phantom(b_spec).mask;

    const double d_same = dice(y.mask, y.mask), cl_same = cl_dice(y.mask, y.mask);
    const double d_disjoint = dice(a, b);
    o.require(d_same == 1.0 && cl_same == 1.0, "dice = cl_dice = 1 on pred = gt");
    o.require(d_disjoint == 0.0, "dice = 0 on disjoint masks");

    // Full-region masked metric equals the global one bit for bit.
    const BinaryMask pred = delete_slab(y.mask, 20, 4);
    const BinaryMask all(g, 1);
    const bool masked_eq = masked_metric(pred, y.mask, all, Metric::dice) == dice(pred, y.mask) &&
                           masked_metric(pred, y.mask, all, Metric::cl_dice) == cl_dice(pred, y.mask);
    o.require(masked_eq, "masked metric with full region equals global");

    // Deletion phantoms scored by counting.
    double worst = 0.0;
    struct Del {
        const BinaryMask* gt;
        std::size_t z0, t;
    };
    for (const Del& del : {Del{&y.mask, 20, 4}, Del{&y.mask, 40, 2}, Del{&tubes.mask, 30, 3}, Del{&a, 10, 12}}) {
        const BinaryMask& gt = *del.gt;
        const BinaryMask p = delete_slab(gt, del.z0, del.t);
        const double np = static_cast<double>(count_nonzero(p)), ng = static_cast<double>(count_nonzero(gt));
        const double dice_oracle = 2.0 * static_cast<double>(overlap(p, gt)) / (np + ng);
        const BinaryMask sp = skeletonize(p), sg = skeletonize(gt);
        const double tprec = static_cast<double>(overlap(sp, gt)) / static_cast<double>(count_nonzero(sp));
        const double tsens = static_cast<double>(overlap(sg, p)) / static_cast<double>(count_nonzero(sg));
        const double cl_oracle = 2.0 * tprec * tsens / (tprec + tsens);
        worst = std::max({worst, std::abs(dice(p, gt) - dice_oracle), std::abs(cl_dice(p, gt) - cl_oracle)});
    }
    o.detail << "dice/cl_dice on pred=gt " << d_same << "/" << cl_same << ", dice disjoint " << d_disjoint
             << ", masked==global " << (masked_eq ? "yes" : "no") << ", deletion phantoms max |score - counting oracle| "
             << fmt(worst, 3);
    o.require(worst <= 1e-12, "deletion scores match counting oracle to 1e-12");
    return o;
}

// ---------------------------------------------------------------------------

Outcome cldice_topology() {
    Outcome o;
    const Geometry g = cube_geometry(64, 0.5);
    const Phantom tube = render_phantom(tube_spec(g, 2.0, 24.0));
    const BinaryMask pred = delete_slab(tube.mask, 31, 3);
    const double d = dice(pred, tube.mask), cl = cl_dice(pred, tube.mask);
    const double rel_d = 1.0 - d, rel_cl = 1.0 - cl;
    o.detail << "tube r=2 mm, 3-voxel slab removed mid-tube: dice " << fmt(d, 6) << " (-" << fmt(100 * rel_d, 3)
             << "%), cl_dice " << fmt(cl, 6) << " (-" << fmt(100 * rel_cl, 3) << "%)";
    o.require(rel_cl > rel_d, "relative cl_dice drop > relative dice drop");
    return o;
}

// ---------------------------------------------------------------------------

Outcome psnr_gain() {
    Outcome o;
    const Geometry& g = kFilterGrid;
    const Phantom tube = noisy(tube_spec(g, 2.0, 2.0 * g.dims.nz * g.spacing[2]), 4);
    const FilterParams p = suite_params();
    const Volume3D frangi = multiscale(tube.intensity, FilterId::frangi, p);
    const PsnrGain gain = psnr_gain_report(tube.intensity, frangi, tube.mask);
    const double delta = gain.after.db - gain.before.db;
    o.detail << "noisy tube (sigma 0.1): raw " << fmt(gain.before.db) << " dB, Frangi channel "
             << fmt(gain.after.db) << " dB, gain " << fmt(delta) << " dB";
    o.require(gain.after.clean || delta >= 3.0, "gain >= 3 dB");
    return o;
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream f(e.path(), std::ios::binary);
        files[std::filesystem::relative(e.path(), root).string()] =
            std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
    return files;
}

int run(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

Outcome determinism() {
    Outcome o;
    testing::TempDir tmp;
    const std::string cli = VESSELFUSE_CLI;
    const unsigned n = 4;
    int failures = 0;
    for (unsigned threads : {1u, n}) {
        const auto dir = tmp / ("t" + std::to_string(threads));
        const std::string d = dir.string();
        const std::string t = cli + " --log-level error --threads " + std::to_string(threads) + " ";
        std::filesystem::create_directories(dir / "batch");
        // Phantom corpus.
        failures += run(t + "phantom --kind y --size 48 --spacing 0.8 --out " + d + "/corpus") != 0;
        failures += run(t + "phantom --kind noisy-tube --size 48 --spacing 0.8 --noise 0.1 --seed 5 --out " + d +
                        "/corpus") != 0;
        failures += run(t + "phantom --kind two-tubes --size 48 --spacing 0.8 --out " + d + "/corpus") != 0;
        // Every subcommand on it.
        failures += run(t + "resample " + d + "/corpus/y_img.nii.gz --spacing 1.1,0.9,1.3 --out " + d +
                        "/y_img_rs.nii.gz") != 0;
        failures += run(t + "resample " + d + "/corpus/y_gt.nii.gz --spacing 0.6 --out " + d + "/y_gt_rs.nii.gz") !=
                    0;
        failures += run(t + "enhance " + d + "/corpus/noisy-tube_img.nii.gz --out " + d + "/enh") != 0;
        failures += run(t + "partition " + d + "/corpus/y_gt.nii.gz --out " + d + "/part") != 0;
        failures += run(t + "evaluate " + d + "/corpus/two-tubes_gt.nii.gz " + d + "/corpus/y_gt.nii.gz --masks " +
                        d + "/part --intensity " + d + "/corpus/y_img.nii.gz --out " + d + "/eval") != 0;
        std::filesystem::copy_file(dir / "corpus/y_gt.nii.gz", dir / "batch/a_gt.nii.gz");
        std::filesystem::copy_file(dir / "corpus/y_gt.nii.gz", dir / "batch/a_pred.nii.gz");
        std::filesystem::copy_file(dir / "corpus/two-tubes_gt.nii.gz", dir / "batch/b_gt.nii.gz");
        std::filesystem::copy_file(dir / "corpus/two-tubes_gt.nii.gz", dir / "batch/b_pred.nii.gz");
        failures += run(t + "evaluate --batch " + d + "/batch --out " + d + "/batch_eval") != 0;
    }
    const auto a = read_tree(tmp / "t1"), b = read_tree(tmp / ("t" + std::to_string(n)));
    std::size_t differing = 0, bytes = 0;
    for (const auto& [name, content] : a) {
        bytes += content.size();
        const auto it = b.find(name);
        if (it == b.end() || it->second != content) ++differing;
    }
    o.detail << "phantom/resample/enhance/partition/evaluate(+batch) with --threads 1 vs " << n << ": " << a.size()
             << " files, " << bytes << " bytes, " << differing << " differing, " << failures << " failed commands";
    o.require(failures == 0, "all CLI commands succeed");
    o.require(a.size() == b.size() && a.size() >= 20, "same output file set");
    o.require(differing == 0, "bit-identical outputs");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    set_log_level(LogLevel::error);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"eigensolver", eigensolver},         {"bspline", bspline},
        {"filter-suite", filter_suite},       {"scale-selection", scale_selection},
        {"graph-partition", graph_partition}, {"metric-identities", metric_identities},
        {"cldice-topology", cldice_topology}, {"psnr-gain", psnr_gain},
        {"determinism", determinism},
    };
    std::vector<std::string> wanted(argv + 1, argv + argc);
    for (const auto& w : wanted) {
        const bool known = std::any_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == w; });
        if (!known) {
            std::fprintf(stderr, "unknown criterion '%s'\n", w.c_str());
            return 64;
        }
    }
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
        Outcome out;
        try {
            out = fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << "exception: " << e.what();
        }
        std::printf("%s %s: %s\n", out.pass ? "PASS" : "FAIL", name.c_str(), out.detail.str().c_str());
        std::fflush(stdout);
        failed += !out.pass;
    }
    return failed;
}
