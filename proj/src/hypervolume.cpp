#include "vesselfuse/hypervolume.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "vesselfuse/parallel.hpp"

namespace vfuse {

Volume3D zscore_nonzero(const Volume3D& vol, Standardization* stats) {
    Standardization s;
    double sum = 0.0;
    for (double v : vol.data()) {
        if (v != 0.0) {
            sum += v;
            ++s.voxels;
        }
    }
    if (s.voxels > 0) {
        s.mean = sum / s.voxels;
        double ss = 0.0;
        for (double v : vol.data())
            if (v != 0.0) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / s.voxels);
    }
    const double scale = s.std > 0.0 ? 1.0 / s.std : 1.0;
    Volume3D out(vol.geometry(), 0.0);
    for (std::size_t i = 0; i < vol.size(); ++i) out[i] = (vol[i] - s.mean) * scale;
    if (stats) *stats = s;
    return out;
}

FusedVolume build_hypervolume(const Volume3D& original, const FilterParams& p) {
    require_finite(original, "original volume");
    p.validate();
    const Vec3& sp = original.spacing();
    if (std::abs(sp[0] - sp[1]) > 1e-6 * sp[0] || std::abs(sp[0] - sp[2]) > 1e-6 * sp[0])
        log_warn("hyper-volume input is not isotropic; resample it first for comparable filter scales");
    FusedVolume f;
    f.hv.channels.push_back(zscore_nonzero(original, &f.standardization));
    auto responses = all_filters(original, p);
    for (auto& r : responses) f.hv.channels.push_back(std::move(r));
    f.hv.channel_names.assign(kChannelNames.begin(), kChannelNames.end());
    f.hv.validate();
    return f;
}

Volume3D enhanced_channel(const HyperVolume& hv) {
    hv.validate();
    if (hv.channel_count() != kChannelNames.size())
        throw DataError("expected a 7-channel hyper-volume, got " + std::to_string(hv.channel_count()));
    Volume3D out = hv.channels[1];
    for (std::size_t c = 2; c < hv.channel_count(); ++c)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], hv.channels[c][i]);
    return out;
}

PsnrGain psnr_gain_report(const Volume3D& original, const Volume3D& enhanced, const BinaryMask& gt) {
    require_same_grid(original.geometry(), enhanced.geometry(), "enhanced channel");
    return {psnr(original, gt), psnr(enhanced, gt)};
}

nlohmann::json hypervolume_sidecar(const FusedVolume& f) {
    const auto& s = f.standardization;
    return {{"schema_version", 1},
            {"channels", f.hv.channel_names},
            {"standardization",
             {{"channel", "Original"}, {"method", s.method}, {"region", s.region}, {"mean", s.mean}, {"std", s.std},
              {"voxels", s.voxels}}}};
}

std::filesystem::path sidecar_path(const std::filesystem::path& nifti) {
    std::string name = nifti.filename().string();
    for (const char* ext : {".nii.gz", ".nii"}) {
        const std::string e = ext;
        if (name.size() > e.size() && name.compare(name.size() - e.size(), e.size(), e) == 0) {
            name.resize(name.size() - e.size());
            break;
        }
    }
    return nifti.parent_path() / (name + ".json");
}

void write_fused(const FusedVolume& fused, const std::filesystem::path& path, const nlohmann::json& extra) {
    write_hypervolume(fused.hv, path);
    nlohmann::json j = hypervolume_sidecar(fused);
    for (const auto& [k, v] : extra.items()) j[k] = v;
    std::ofstream os(sidecar_path(path));
    if (!os) throw DataError("cannot write sidecar for " + path.string());
    os << j.dump(2) << '\n';
}

FusedVolume read_fused(const std::filesystem::path& path) {
    FusedVolume f;
    f.hv = read_hypervolume(path);
    const auto side = sidecar_path(path);
    std::ifstream is(side);
    if (!is) return f;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
        f.hv.channel_names = j.at("channels").get<std::vector<std::string>>();
        const auto& s = j.at("standardization");
        f.standardization.method = s.at("method").get<std::string>();
        f.standardization.region = s.at("region").get<std::string>();
        f.standardization.mean = s.at("mean").get<double>();
        f.standardization.std = s.at("std").get<double>();
        f.standardization.voxels = s.at("voxels").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed sidecar " + side.string() + ": " + e.what());
    }
    f.hv.validate();
    return f;
}

}  // namespace vfuse
