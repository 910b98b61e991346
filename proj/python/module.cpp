#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>
#include <string>

#include "vesselfuse/config.hpp"
#include "vesselfuse/hypervolume.hpp"
#include "vesselfuse/metrics.hpp"
#include "vesselfuse/nifti_io.hpp"
#include "vesselfuse/parallel.hpp"
#include "vesselfuse/partition.hpp"
#include "vesselfuse/phantom.hpp"
#include "vesselfuse/resample.hpp"
#include "vesselfuse/skeleton.hpp"
#include "vesselfuse/vesselness.hpp"

namespace py = pybind11;
using namespace vfuse;

namespace {

// Arrays cross the boundary as C-ordered (nz, ny, nx), which is the library's
// x-fastest storage order.
using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U8 = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Geometry geometry_of(const py::array& a, const Vec3& spacing, const Vec3& origin) {
    if (a.ndim() != 3) throw py::value_error("expected a 3D array shaped (nz, ny, nx)");
    Geometry g;
    g.dims = {static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(1)),
              static_cast<std::size_t>(a.shape(0))};
    g.spacing = spacing;
    g.origin = origin;
    return g;
}

Volume3D to_volume(const F64& a, const Vec3& spacing, const Vec3& origin = {0, 0, 0}) {
    Volume3D v(geometry_of(a, spacing, origin));
    std::memcpy(v.data().data(), a.data(), v.size() * sizeof(double));
    return v;
}

BinaryMask to_mask(const U8& a, const Vec3& spacing, const Vec3& origin = {0, 0, 0}) {
    BinaryMask m(geometry_of(a, spacing, origin));
    const std::uint8_t* src = a.data();
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = src[i] != 0;
    return m;
}

std::vector<py::ssize_t> shape_of(const Geometry& g) {
    return {static_cast<py::ssize_t>(g.dims.nz), static_cast<py::ssize_t>(g.dims.ny),
            static_cast<py::ssize_t>(g.dims.nx)};
}

F64 from_volume(const Volume3D& v) {
    F64 out(shape_of(v.geometry()));
    std::memcpy(out.mutable_data(), v.data().data(), v.size() * sizeof(double));
    return out;
}

U8 from_mask(const BinaryMask& m) {
    U8 out(shape_of(m.geometry()));
    std::memcpy(out.mutable_data(), m.data().data(), m.size());
    return out;
}

py::dict geometry_dict(const Geometry& g) {
    py::dict d;
    d["spacing"] = py::make_tuple(g.spacing[0], g.spacing[1], g.spacing[2]);
    d["origin"] = py::make_tuple(g.origin[0], g.origin[1], g.origin[2]);
    return d;
}

FilterParams params_for(const Geometry& g, std::optional<std::vector<double>> scales,
                        std::optional<std::vector<int>> rorpo_lengths, const std::string& polarity) {
    FilterParams p = FilterParams::defaults_for(g);
    if (scales) p.scales = *scales;
    if (rorpo_lengths) p.rorpo_lengths = *rorpo_lengths;
    if (polarity == "dark") {
        p.polarity = Polarity::dark_on_bright;
    } else if (polarity != "bright") {
        throw py::value_error("polarity must be 'bright' or 'dark'");
    }
    p.validate();
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Vessel enhancement fusion and topology-aware evaluation";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);

    m.attr("CHANNEL_NAMES") = py::cast(std::vector<std::string>(kChannelNames.begin(), kChannelNames.end()));
    m.attr("__version__") = kToolVersion;

    m.def("set_threads", &set_thread_count, py::arg("n"));

    // volume-io
    m.def(
        "read_volume",
        [](const std::string& path) {
            const Volume3D v = read_volume(path);
            return py::make_tuple(from_volume(v), geometry_dict(v.geometry()));
        },
        py::arg("path"), "Returns (array, {spacing, origin}).");
    m.def(
        "read_mask",
        [](const std::string& path) {
            const BinaryMask mk = read_mask(path);
            return py::make_tuple(from_mask(mk), geometry_dict(mk.geometry()));
        },
        py::arg("path"));
    m.def(
        "write_volume",
        [](const std::string& path, const F64& a, Vec3 spacing, Vec3 origin) {
            write_volume(to_volume(a, spacing, origin), path);
        },
        py::arg("path"), py::arg("array"), py::arg("spacing"), py::arg("origin") = Vec3{0, 0, 0});
    m.def(
        "write_mask",
        [](const std::string& path, const U8& a, Vec3 spacing, Vec3 origin) {
            write_mask(to_mask(a, spacing, origin), path);
        },
        py::arg("path"), py::arg("array"), py::arg("spacing"), py::arg("origin") = Vec3{0, 0, 0});

    // resample
    m.def(
        "resample",
        [](const F64& a, Vec3 spacing, Vec3 target) {
            const Volume3D v = to_volume(a, spacing);
            Volume3D out;
            {
                py::gil_scoped_release release;
                out = resample(v, target);
            }
            return from_volume(out);
        },
        py::arg("array"), py::arg("spacing"), py::arg("target"), "Cubic B-spline resampling.");
    m.def(
        "resample_mask",
        [](const U8& a, Vec3 spacing, Vec3 target, const std::string& mode) {
            const BinaryMask out = resample(to_mask(a, spacing), target, parse_interpolation(mode));
            return from_mask(out);
        },
        py::arg("array"), py::arg("spacing"), py::arg("target"), py::arg("mode") = "nearest");

    // scale-space
    m.def(
        "eigvalsh3",
        [](double xx, double yy, double zz, double xy, double xz, double yz) {
            const EigenTriple e = eig_sym3({xx, yy, zz, xy, xz, yz});
            return py::make_tuple(e.l1, e.l2, e.l3);
        },
        py::arg("xx"), py::arg("yy"), py::arg("zz"), py::arg("xy"), py::arg("xz"), py::arg("yz"),
        "Eigenvalues ordered by magnitude.");

    // vesselness / hypervolume
    m.def(
        "vesselness",
        [](const F64& a, Vec3 spacing, const std::string& filter, std::optional<std::vector<double>> scales,
           std::optional<std::vector<int>> rorpo_lengths, const std::string& polarity) {
            const Volume3D v = to_volume(a, spacing);
            const FilterParams p = params_for(v.geometry(), scales, rorpo_lengths, polarity);
            const FilterId id = parse_filter(filter);
            Volume3D out;
            {
                py::gil_scoped_release release;
                out = multiscale(v, id, p);
            }
            return from_volume(out);
        },
        py::arg("array"), py::arg("spacing"), py::arg("filter"), py::arg("scales") = py::none(),
        py::arg("rorpo_lengths") = py::none(), py::arg("polarity") = "bright",
        "One normalised filter channel (Frangi, Jerman, Sato, Zhang, Meijering, RORPO).");
    m.def(
        "hypervolume",
        [](const F64& a, Vec3 spacing, std::optional<std::vector<double>> scales,
           std::optional<std::vector<int>> rorpo_lengths, const std::string& polarity) {
            const Volume3D v = to_volume(a, spacing);
            const FilterParams p = params_for(v.geometry(), scales, rorpo_lengths, polarity);
            FusedVolume fused;
            {
                py::gil_scoped_release release;
                fused = build_hypervolume(v, p);
            }
            const Geometry& g = v.geometry();
            py::array_t<double> out({static_cast<py::ssize_t>(7), static_cast<py::ssize_t>(g.dims.nz),
                                     static_cast<py::ssize_t>(g.dims.ny), static_cast<py::ssize_t>(g.dims.nx)});
            double* dst = out.mutable_data();
            for (const auto& ch : fused.hv.channels) {
                std::memcpy(dst, ch.data().data(), ch.size() * sizeof(double));
                dst += ch.size();
            }
            return py::make_tuple(out, py::str(hypervolume_sidecar(fused).dump()));
        },
        py::arg("array"), py::arg("spacing"), py::arg("scales") = py::none(), py::arg("rorpo_lengths") = py::none(),
        py::arg("polarity") = "bright", "Returns ((7, nz, ny, nx) array, sidecar JSON text).");

    // skeleton-graph
    m.def(
        "distance_transform", [](const U8& a, Vec3 spacing) { return from_volume(distance_transform(to_mask(a, spacing))); },
        py::arg("mask"), py::arg("spacing") = Vec3{1, 1, 1});
    m.def(
        "skeletonize", [](const U8& a, Vec3 spacing) { return from_mask(skeletonize(to_mask(a, spacing))); },
        py::arg("mask"), py::arg("spacing") = Vec3{1, 1, 1});
    m.def(
        "vessel_graph",
        [](const U8& a, Vec3 spacing) {
            const BinaryMask mk = to_mask(a, spacing);
            const DistanceField d = distance_transform(mk);
            return graph_to_json(build_graph(skeletonize(mk, d), d)).dump();
        },
        py::arg("mask"), py::arg("spacing") = Vec3{1, 1, 1}, "Graph of the mask skeleton as JSON text.");

    // partition-masks
    m.def(
        "partition",
        [](const U8& a, Vec3 spacing, const std::string& preset, std::optional<double> bif_radius_mm) {
            const BinaryMask gt = to_mask(a, spacing);
            const PartitionResult r = partition_ground_truth(gt, SizeIntervals::by_preset(preset), bif_radius_mm);
            py::dict masks;
            for (std::size_t c = 0; c < r.masks.classes.size(); ++c)
                masks[py::str(r.masks.intervals.classes[c].name)] = from_mask(r.masks.classes[c]);
            masks["bifurcations"] = from_mask(r.masks.m_bif);
            return py::make_tuple(masks, py::str(partition_summary(r).dump()));
        },
        py::arg("gt"), py::arg("spacing") = Vec3{1, 1, 1}, py::arg("preset") = "ircad",
        py::arg("bif_radius_mm") = py::none(), "Returns ({region: mask}, summary JSON text).");

    // metrics
    m.def(
        "dice", [](const U8& p, const U8& g) { return dice(to_mask(p, {1, 1, 1}), to_mask(g, {1, 1, 1})); },
        py::arg("pred"), py::arg("gt"));
    m.def(
        "cl_dice",
        [](const U8& p, const U8& g, Vec3 spacing) { return cl_dice(to_mask(p, spacing), to_mask(g, spacing)); },
        py::arg("pred"), py::arg("gt"), py::arg("spacing") = Vec3{1, 1, 1});
    m.def(
        "masked_metric",
        [](const U8& p, const U8& g, const U8& region, const std::string& which, Vec3 spacing) {
            Metric mt;
            if (which == "dice") {
                mt = Metric::dice;
            } else if (which == "cl_dice") {
                mt = Metric::cl_dice;
            } else {
                throw py::value_error("metric must be 'dice' or 'cl_dice'");
            }
            return masked_metric(to_mask(p, spacing), to_mask(g, spacing), to_mask(region, spacing), mt);
        },
        py::arg("pred"), py::arg("gt"), py::arg("region"), py::arg("metric") = "dice",
        py::arg("spacing") = Vec3{1, 1, 1}, "None when the region misses both masks.");
    m.def(
        "psnr",
        [](const F64& v, const U8& g) {
            const PsnrValue r = psnr(to_volume(v, {1, 1, 1}), to_mask(g, {1, 1, 1}));
            return r.db;
        },
        py::arg("volume"), py::arg("gt"), "dB; inf for a noise-free background.");
    m.def(
        "evaluate",
        [](const U8& p, const U8& g, Vec3 spacing, const std::string& preset, std::optional<F64> intensity) {
            const BinaryMask pred = to_mask(p, spacing), gt = to_mask(g, spacing);
            const PartitionResult r = partition_ground_truth(gt, SizeIntervals::by_preset(preset));
            std::optional<Volume3D> img;
            if (intensity) img = to_volume(*intensity, spacing);
            const MetricsReport rep = evaluate_case(pred, gt, &r.masks, img ? &*img : nullptr);
            return report_to_json(rep).dump();
        },
        py::arg("pred"), py::arg("gt"), py::arg("spacing") = Vec3{1, 1, 1}, py::arg("preset") = "ircad",
        py::arg("intensity") = py::none(), "Per-region report as JSON text.");

    // phantoms
    m.def(
        "phantom",
        [](const std::string& kind, std::size_t size, double spacing, double radius, double length, double noise,
           std::uint64_t seed) {
            const Phantom ph =
                render_phantom(phantom_by_kind(kind, cube_geometry(size, spacing), radius, length, noise, seed));
            return py::make_tuple(from_volume(ph.intensity), from_mask(ph.mask));
        },
        py::arg("kind"), py::arg("size") = 64, py::arg("spacing") = 0.5, py::arg("radius") = 0.0,
        py::arg("length") = 0.0, py::arg("noise") = 0.0, py::arg("seed") = 0,
        "Synthetic (intensity, mask); kinds: tube, y, two-tubes, noisy-tube, blob, plate.");
}
