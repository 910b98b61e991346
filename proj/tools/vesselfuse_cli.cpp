#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vesselfuse/config.hpp"
#include "vesselfuse/hypervolume.hpp"
#include "vesselfuse/metrics.hpp"
#include "vesselfuse/nifti_io.hpp"
#include "vesselfuse/parallel.hpp"
#include "vesselfuse/partition.hpp"
#include "vesselfuse/phantom.hpp"
#include "vesselfuse/resample.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vfuse;

namespace {

struct Globals {
    std::string config;
    unsigned threads = 0;
    bool threads_set = false;
    std::string log_level = "info";
};

std::string stem(const fs::path& p) {
    std::string name = p.filename().string();
    for (const std::string ext : {".nii.gz", ".nii"}) {
        if (name.size() > ext.size() && name.compare(name.size() - ext.size(), ext.size(), ext) == 0)
            return name.substr(0, name.size() - ext.size());
    }
    return p.stem().string();
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    os << j.dump(2) << '\n';
}

void write_text(const std::string& text, const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    os << text;
}

PipelineConfig load(const Globals& g) {
    PipelineConfig cfg;
    if (g.config.empty()) {
        log_info("no config given; using built-in defaults");
    } else {
        cfg = load_config(g.config);
    }
    // --threads overrides the config file.
    set_thread_count(g.threads_set ? g.threads : cfg.threads);
    return cfg;
}

// Thread count and output location do not change results, so they stay out of the hash.
json hashable(const PipelineConfig& cfg) {
    json j = config_to_json(cfg);
    j.erase("threads");
    j.erase("output_dir");
    return j;
}

fs::path out_dir(const std::string& flag, const PipelineConfig& cfg) {
    fs::path dir = flag.empty() ? fs::path(cfg.output_dir) : fs::path(flag);
    fs::create_directories(dir);
    return dir;
}

Vec3 parse_spacing(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("bad spacing '" + text + "' (auto, s or x,y,z)");
        }
    }
    if (v.size() == 1) v = {v[0], v[0], v[0]};
    if (v.size() != 3) throw UsageError("bad spacing '" + text + "' (auto, s or x,y,z)");
    for (double s : v)
        if (!(s > 0.0) || !std::isfinite(s)) throw UsageError("spacing must be > 0");
    return {v[0], v[1], v[2]};
}

json vec(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json geometry_json(const Geometry& g) {
    return {{"dims", {g.dims.nx, g.dims.ny, g.dims.nz}}, {"spacing", vec(g.spacing)}, {"origin", vec(g.origin)}};
}

// ---- resample

struct ResampleArgs {
    std::string input, spacing = "auto", mask_mode, out, kind = "auto";
};

int cmd_resample(const Globals& g, const ResampleArgs& a) {
    const PipelineConfig cfg = load(g);
    const Volume3D vol = read_volume(a.input);
    const Vec3 target = a.spacing == "auto" ? finest_isotropic_spacing(vol) : parse_spacing(a.spacing);
    bool is_mask = a.kind == "mask" || (a.kind == "auto" && looks_binary(vol));
    if (a.kind != "auto" && a.kind != "mask" && a.kind != "volume") throw UsageError("--kind must be auto, mask or volume");
    log_info("resampling " + a.input + " to spacing (" + std::to_string(target[0]) + ", " + std::to_string(target[1]) +
             ", " + std::to_string(target[2]) + ") mm" + (is_mask ? " as mask" : ""));
    fs::path out = a.out.empty() ? out_dir("", cfg) / (stem(a.input) + "_resampled.nii.gz") : fs::path(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    json meta = {{"command", "resample"}, {"target_spacing", vec(target)}};
    if (is_mask) {
        const Interpolation mode = a.mask_mode.empty() ? cfg.mask_interpolation : parse_interpolation(a.mask_mode);
        BinaryMask m(vol.geometry(), 0);
        for (std::size_t i = 0; i < vol.size(); ++i) m[i] = vol[i] != 0.0 ? 1 : 0;
        const BinaryMask r = resample(m, target, mode);
        write_mask(r, out);
        meta["kind"] = "mask";
        meta["interpolation"] = interpolation_name(mode);
        meta["geometry"] = geometry_json(r.geometry());
    } else {
        const Volume3D r = resample(vol, target, cfg.volume_interpolation);
        write_volume(r, out);
        meta["kind"] = "volume";
        meta["interpolation"] = interpolation_name(cfg.volume_interpolation);
        meta["geometry"] = geometry_json(r.geometry());
    }
    meta["provenance"] = provenance(hashable(cfg), {{"input", a.input}});
    write_json(meta, sidecar_path(out));
    return 0;
}

// ---- enhance

struct EnhanceArgs {
    std::string input, out, channels;
};

int cmd_enhance(const Globals& g, const EnhanceArgs& a) {
    if (!a.channels.empty())
        throw UsageError("--channels is not supported: the hyper-volume has a fixed 7-channel contract");
    const PipelineConfig cfg = load(g);
    const Volume3D vol = read_volume(a.input);
    const FilterParams p = cfg.filters_for(vol.geometry());
    log_info("filter parameters: " + filter_params_to_json(p).dump());
    const FusedVolume fused = build_hypervolume(vol, p);
    const fs::path dir = out_dir(a.out, cfg);
    const fs::path out = dir / (stem(a.input) + "_hv.nii.gz");
    json extra = {{"filters", filter_params_to_json(p)},
                  {"provenance", provenance(hashable(cfg), {{"input", a.input}})}};
    write_fused(fused, out, extra);
    log_info("wrote " + out.string());
    return 0;
}

// ---- partition

struct PartitionArgs {
    std::string gt, preset, out;
    double bif_radius = -1.0;
};

void write_partition(const PartitionResult& r, const fs::path& dir, const json& prov) {
    for (std::size_t c = 0; c < r.masks.intervals.classes.size(); ++c)
        write_mask(r.masks.classes[c], dir / ("M_" + r.masks.intervals.classes[c].name + ".nii.gz"));
    write_mask(r.masks.m_bif, dir / "M_bif.nii.gz");
    write_json(graph_to_json(r.graph), dir / "graph.json");
    json summary = partition_summary(r);
    summary["provenance"] = prov;
    write_json(summary, dir / "partition.json");
}

int cmd_partition(const Globals& g, const PartitionArgs& a) {
    PipelineConfig cfg = load(g);
    if (!a.preset.empty()) cfg.intervals = SizeIntervals::by_preset(a.preset);
    if (a.bif_radius >= 0.0) cfg.bifurcation_radius_mm = a.bif_radius;
    const BinaryMask gt = read_mask(a.gt);
    if (count_nonzero(gt) == 0) throw DataError("ground truth " + a.gt + " is empty");
    const PartitionResult r = partition_ground_truth(gt, cfg.intervals, cfg.bifurcation_radius_mm);
    const fs::path dir = out_dir(a.out, cfg);
    write_partition(r, dir, provenance(hashable(cfg), {{"gt", a.gt}}));
    log_info(std::to_string(r.graph.branches.size()) + " branches, " + std::to_string(r.graph.bifurcations.size()) +
             " bifurcations");
    return 0;
}

// ---- evaluate

struct EvaluateArgs {
    std::string pred, gt, masks, preset, intensity, out = "report", batch;
};

PartitionMasks read_masks(const fs::path& dir, const PipelineConfig& cfg) {
    PartitionMasks m;
    m.intervals = cfg.intervals;
    const fs::path summary = dir / "partition.json";
    if (fs::exists(summary)) {
        std::ifstream is(summary);
        const json j = json::parse(is);
        const json& iv = j.at("intervals");
        if (iv.at("preset") == "custom") {
            std::vector<std::string> names;
            std::vector<double> uppers;
            for (const auto& c : iv.at("classes")) {
                names.push_back(c.at("name"));
                if (!c.at("upper_mm").is_null()) uppers.push_back(c.at("upper_mm"));
            }
            m.intervals = SizeIntervals::custom(names, uppers);
        } else {
            m.intervals = SizeIntervals::by_preset(iv.at("preset"));
        }
    }
    for (const auto& c : m.intervals.classes) {
        const fs::path p = dir / ("M_" + c.name + ".nii.gz");
        if (!fs::exists(p)) throw DataError("missing mask " + p.string());
        m.classes.push_back(read_mask(p));
    }
    const fs::path bif = dir / "M_bif.nii.gz";
    if (!fs::exists(bif)) throw DataError("missing mask " + bif.string());
    m.m_bif = read_mask(bif);
    return m;
}

MetricsReport evaluate_one(const PipelineConfig& cfg, const EvaluateArgs& a, const fs::path& pred_path,
                           const fs::path& gt_path, const fs::path& intensity_path, const std::string& case_id) {
    const BinaryMask pred = read_mask(pred_path);
    const BinaryMask gt = read_mask(gt_path);
    require_same_grid(pred.geometry(), gt.geometry(), "prediction " + pred_path.string() + " vs ground truth");
    PartitionMasks masks;
    if (!a.masks.empty()) {
        masks = read_masks(a.masks, cfg);
    } else {
        if (count_nonzero(gt) == 0) throw DataError("ground truth " + gt_path.string() + " is empty");
        masks = partition_ground_truth(gt, cfg.intervals, cfg.bifurcation_radius_mm).masks;
    }
    std::optional<Volume3D> intensity;
    std::map<std::string, fs::path> inputs{{"pred", pred_path}, {"gt", gt_path}};
    if (!intensity_path.empty()) {
        intensity = read_volume(intensity_path);
        inputs["intensity"] = intensity_path;
    }
    MetricsReport rep = evaluate_case(pred, gt, &masks, intensity ? &*intensity : nullptr, case_id);
    rep.provenance = provenance(hashable(cfg), inputs);
    rep.provenance["intervals"] = intervals_to_json(masks.intervals);
    return rep;
}

int cmd_evaluate(const Globals& g, const EvaluateArgs& a) {
    PipelineConfig cfg = load(g);
    if (!a.preset.empty()) cfg.intervals = SizeIntervals::by_preset(a.preset);
    fs::path out = a.out;
    if (out.extension() == ".json" || out.extension() == ".csv") out.replace_extension();
    if (out.has_parent_path()) fs::create_directories(out.parent_path());

    std::vector<MetricsReport> reports;
    if (!a.batch.empty()) {
        if (!a.masks.empty()) throw UsageError("--masks cannot be combined with --batch");
        std::vector<std::pair<std::string, fs::path>> cases;
        for (const auto& e : fs::directory_iterator(a.batch)) {
            const std::string s = stem(e.path());
            if (s.size() > 5 && s.compare(s.size() - 5, 5, "_pred") == 0) cases.emplace_back(s.substr(0, s.size() - 5), e.path());
        }
        std::sort(cases.begin(), cases.end());
        if (cases.empty()) throw DataError("no <case>_pred.nii[.gz] files in " + a.batch);
        for (const auto& [id, pred] : cases) {
            fs::path gt, img;
            for (const char* ext : {".nii.gz", ".nii"}) {
                if (gt.empty() && fs::exists(fs::path(a.batch) / (id + "_gt" + ext))) gt = fs::path(a.batch) / (id + "_gt" + ext);
                if (img.empty() && fs::exists(fs::path(a.batch) / (id + "_img" + ext))) img = fs::path(a.batch) / (id + "_img" + ext);
            }
            if (gt.empty()) throw DataError("case " + id + " has no ground truth " + id + "_gt.nii[.gz]");
            log_info("evaluating case " + id);
            reports.push_back(evaluate_one(cfg, a, pred, gt, img, id));
        }
        const AggregateReport agg = aggregate_report(reports);
        json cases_json = json::array();
        for (const auto& r : reports) cases_json.push_back(report_to_json(r));
        write_json({{"schema_version", 1}, {"cases", cases_json}, {"aggregate", aggregate_to_json(agg)}},
                   out.string() + ".json");
        write_text(reports_to_csv(reports, &agg), out.string() + ".csv");
    } else {
        if (a.pred.empty() || a.gt.empty()) throw UsageError("evaluate needs PRED and GT, or --batch DIR");
        reports.push_back(evaluate_one(cfg, a, a.pred, a.gt, a.intensity, stem(a.pred)));
        write_json(report_to_json(reports.front()), out.string() + ".json");
        write_text(reports_to_csv(reports), out.string() + ".csv");
    }
    const auto& global = reports.front().region("global");
    if (reports.size() == 1 && global.dice)
        log_info("global dice " + std::to_string(*global.dice) + ", cl_dice " + std::to_string(*global.cl_dice));
    return 0;
}

// ---- phantom

struct PhantomArgs {
    std::string kind = "tube", out;
    std::size_t size = 64;
    double spacing = 0.5, radius = -1.0, length = -1.0, noise = 0.0;
    std::uint64_t seed = 0;
};

json phantom_metadata(const Phantom& ph) {
    const PhantomSpec& s = ph.spec;
    json segs = json::array();
    double analytic = 0.0;
    for (const auto& seg : s.segments) {
        const double len = std::sqrt((seg.b[0] - seg.a[0]) * (seg.b[0] - seg.a[0]) + (seg.b[1] - seg.a[1]) * (seg.b[1] - seg.a[1]) +
                                     (seg.b[2] - seg.a[2]) * (seg.b[2] - seg.a[2]));
        segs.push_back({{"start_mm", vec(seg.a)}, {"end_mm", vec(seg.b)}, {"radius_mm", seg.radius}, {"capped", seg.capped},
                        {"length_mm", len}});
        analytic += std::numbers::pi * seg.radius * seg.radius * len;
    }
    json spheres = json::array(), slabs = json::array(), junctions = json::array();
    for (const auto& sp : s.spheres) spheres.push_back({{"center_mm", vec(sp.center)}, {"radius_mm", sp.radius}});
    for (const auto& sl : s.slabs)
        slabs.push_back({{"point_mm", vec(sl.point)}, {"normal", vec(sl.normal)}, {"half_thickness_mm", sl.half_thickness}});
    for (const auto& j : s.junctions) junctions.push_back(vec(j));
    json meta = {{"schema_version", 1},
                 {"kind", s.kind},
                 {"geometry", geometry_json(s.geometry)},
                 {"seed", s.seed},
                 {"noise_sigma", s.noise_sigma},
                 {"contrast", s.contrast},
                 {"background", s.background},
                 {"segments", segs},
                 {"spheres", spheres},
                 {"slabs", slabs},
                 {"junctions", junctions},
                 {"mask_voxels", count_nonzero(ph.mask)}};
    if (s.kind == "tube" || s.kind == "noisy-tube") meta["analytic_volume_mm3"] = analytic;
    return meta;
}

int cmd_phantom(const Globals& g, const PhantomArgs& a) {
    const PipelineConfig cfg = load(g);
    if (a.size < 4) throw UsageError("--size must be >= 4");
    if (!(a.spacing > 0.0)) throw UsageError("--spacing must be > 0");
    const Geometry geom = cube_geometry(a.size, a.spacing);
    const Phantom ph = render_phantom(phantom_by_kind(a.kind, geom, a.radius, a.length, a.noise, a.seed));
    const fs::path dir = out_dir(a.out, cfg);
    write_volume(ph.intensity, dir / (a.kind + "_img.nii.gz"));
    write_mask(ph.mask, dir / (a.kind + "_gt.nii.gz"));
    json meta = phantom_metadata(ph);
    meta["provenance"] = {{"tool", "vesselfuse"}, {"version", kToolVersion}};
    write_json(meta, dir / (a.kind + ".json"));
    log_info("wrote " + a.kind + " phantom with " + std::to_string(count_nonzero(ph.mask)) + " foreground voxels");
    return 0;
}

LogLevel parse_level(const std::string& s) {
    if (s == "debug") return LogLevel::debug;
    if (s == "info") return LogLevel::info;
    if (s == "warn") return LogLevel::warn;
    if (s == "error") return LogLevel::error;
    if (s == "off") return LogLevel::off;
    throw UsageError("unknown log level '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vessel-enhancement fusion and topology-aware evaluation"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "JSON pipeline config")->check(CLI::ExistingFile);
    auto* threads = app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
    app.add_option("--log-level", g.log_level, "debug|info|warn|error|off");
    app.set_version_flag("--version", kToolVersion);

    ResampleArgs ra;
    auto* rs = app.add_subcommand("resample", "resample a volume or mask");
    rs->add_option("input", ra.input)->required();
    rs->add_option("--spacing", ra.spacing, "auto | s | x,y,z (mm)");
    rs->add_option("--mask-mode", ra.mask_mode, "nn|bspline for mask inputs");
    rs->add_option("--kind", ra.kind, "auto|mask|volume");
    rs->add_option("--out", ra.out, "output file");

    EnhanceArgs ea;
    auto* en = app.add_subcommand("enhance", "build the 7-channel hyper-volume");
    en->add_option("input", ea.input)->required();
    en->add_option("--out", ea.out, "output directory");
    en->add_option("--channels", ea.channels, "not supported");

    PartitionArgs pa;
    auto* pt = app.add_subcommand("partition", "size-class and bifurcation masks from a ground truth");
    pt->add_option("gt", pa.gt)->required();
    pt->add_option("--preset", pa.preset, "ircad|bullitt");
    pt->add_option("--bif-radius", pa.bif_radius, "bifurcation ball radius in mm");
    pt->add_option("--out", pa.out, "output directory");

    EvaluateArgs va;
    auto* ev = app.add_subcommand("evaluate", "dice / clDice per region, optional PSNR");
    ev->add_option("pred", va.pred);
    ev->add_option("gt", va.gt);
    ev->add_option("--masks", va.masks, "directory written by partition");
    ev->add_option("--preset", va.preset, "ircad|bullitt");
    ev->add_option("--intensity", va.intensity, "intensity volume for PSNR");
    ev->add_option("--batch", va.batch, "directory of <case>_pred / <case>_gt [/ <case>_img] files");
    ev->add_option("--out", va.out, "report prefix (.json and .csv)");

    PhantomArgs ph;
    auto* pm = app.add_subcommand("phantom", "synthetic volume + ground truth");
    pm->add_option("--kind", ph.kind, "tube|y|two-tubes|noisy-tube|blob|plate");
    pm->add_option("--size", ph.size, "voxels per side");
    pm->add_option("--spacing", ph.spacing, "isotropic spacing (mm)");
    pm->add_option("--radius", ph.radius, "tube/blob radius or plate thickness (mm)");
    pm->add_option("--length", ph.length, "tube length (mm)");
    pm->add_option("--noise", ph.noise, "gaussian noise sigma");
    pm->add_option("--seed", ph.seed, "noise seed");
    pm->add_option("--out", ph.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        set_log_level(parse_level(g.log_level));
        g.threads_set = threads->count() > 0;
        if (*rs) return cmd_resample(g, ra);
        if (*en) return cmd_enhance(g, ea);
        if (*pt) return cmd_partition(g, pa);
        if (*ev) return cmd_evaluate(g, va);
        if (*pm) return cmd_phantom(g, ph);
    } catch (const UsageError& e) {
        log(LogLevel::error, e.what());
        return 1;
    } catch (const DataError& e) {
        log(LogLevel::error, e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        log(LogLevel::error, std::string("malformed JSON: ") + e.what());
        return 2;
    } catch (const fs::filesystem_error& e) {
        log(LogLevel::error, e.what());
        return 2;
    } catch (const std::exception& e) {
        log(LogLevel::error, std::string("internal error: ") + e.what());
        return 3;
    }
    return 3;
}
