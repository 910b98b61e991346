#include "vesselfuse/nifti_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <sstream>

namespace vfuse {

namespace {

struct NiftiHeader {
    std::int32_t sizeof_hdr;
    char data_type[10];
    char db_name[18];
    std::int32_t extents;
    std::int16_t session_error;
    char regular;
    char dim_info;
    std::int16_t dim[8];
    float intent_p1;
    float intent_p2;
    float intent_p3;
    std::int16_t intent_code;
    std::int16_t datatype;
    std::int16_t bitpix;
    std::int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    std::int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max;
    float cal_min;
    float slice_duration;
    float toffset;
    std::int32_t glmax;
    std::int32_t glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code;
    std::int16_t sform_code;
    float quatern_b;
    float quatern_c;
    float quatern_d;
    float qoffset_x;
    float qoffset_y;
    float qoffset_z;
    float srow_x[4];
    float srow_y[4];
    float srow_z[4];
    char intent_name[16];
    char magic[4];
};
static_assert(sizeof(NiftiHeader) == 348, "NIfTI-1 header must be 348 bytes");

enum DataType : std::int16_t {
    DT_UINT8 = 2,
    DT_INT16 = 4,
    DT_INT32 = 8,
    DT_FLOAT32 = 16,
    DT_FLOAT64 = 64,
    DT_INT8 = 256,
    DT_UINT16 = 512,
    DT_UINT32 = 768,
    DT_INT64 = 1024,
    DT_UINT64 = 1280,
};

constexpr const char* kChannelTag = "channels=";

template <class T>
void swap_bytes(T& v) {
    auto* p = reinterpret_cast<unsigned char*>(&v);
    std::reverse(p, p + sizeof(T));
}

void swap_header(NiftiHeader& h) {
    swap_bytes(h.sizeof_hdr);
    swap_bytes(h.extents);
    swap_bytes(h.session_error);
    for (auto& d : h.dim) swap_bytes(d);
    swap_bytes(h.intent_p1);
    swap_bytes(h.intent_p2);
    swap_bytes(h.intent_p3);
    swap_bytes(h.intent_code);
    swap_bytes(h.datatype);
    swap_bytes(h.bitpix);
    swap_bytes(h.slice_start);
    for (auto& p : h.pixdim) swap_bytes(p);
    swap_bytes(h.vox_offset);
    swap_bytes(h.scl_slope);
    swap_bytes(h.scl_inter);
    swap_bytes(h.slice_end);
    swap_bytes(h.cal_max);
    swap_bytes(h.cal_min);
    swap_bytes(h.slice_duration);
    swap_bytes(h.toffset);
    swap_bytes(h.glmax);
    swap_bytes(h.glmin);
    swap_bytes(h.qform_code);
    swap_bytes(h.sform_code);
    swap_bytes(h.quatern_b);
    swap_bytes(h.quatern_c);
    swap_bytes(h.quatern_d);
    swap_bytes(h.qoffset_x);
    swap_bytes(h.qoffset_y);
    swap_bytes(h.qoffset_z);
    for (auto& v : h.srow_x) swap_bytes(v);
    for (auto& v : h.srow_y) swap_bytes(v);
    for (auto& v : h.srow_z) swap_bytes(v);
}

std::size_t bytes_per_voxel(std::int16_t datatype) {
    switch (datatype) {
        case DT_UINT8:
        case DT_INT8: return 1;
        case DT_INT16:
        case DT_UINT16: return 2;
        case DT_INT32:
        case DT_UINT32:
        case DT_FLOAT32: return 4;
        case DT_FLOAT64:
        case DT_INT64:
        case DT_UINT64: return 8;
        default: return 0;
    }
}

struct GzCloser {
    void operator()(gzFile_s* f) const {
        if (f) gzclose(f);
    }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

bool is_gz_path(const std::filesystem::path& path) { return path.extension() == ".gz"; }

struct RawNifti {
    NiftiHeader header{};
    bool swapped = false;
    std::vector<unsigned char> payload;
    std::string path;
};

RawNifti read_raw(const std::filesystem::path& path) {
    RawNifti raw;
    raw.path = path.string();
    if (!std::filesystem::exists(path)) throw DataError("no such file: " + raw.path);
    GzHandle f(gzopen(raw.path.c_str(), "rb"));
    if (!f) throw DataError("cannot open " + raw.path);
    if (gzread(f.get(), &raw.header, sizeof(NiftiHeader)) != static_cast<int>(sizeof(NiftiHeader)))
        throw DataError(raw.path + ": truncated NIfTI header");
    NiftiHeader& h = raw.header;
    if (h.sizeof_hdr != 348) {
        swap_header(h);
        if (h.sizeof_hdr != 348) throw DataError(raw.path + ": not a NIfTI-1 file (sizeof_hdr)");
        raw.swapped = true;
    }
    if (std::strncmp(h.magic, "n+1", 3) != 0)
        throw DataError(raw.path + ": unsupported NIfTI magic (only single-file n+1 is supported)");
    if (h.dim[0] < 1 || h.dim[0] > 7) throw DataError(raw.path + ": malformed dim[0]");
    for (int i = 1; i <= h.dim[0]; ++i)
        if (h.dim[i] < 1) throw DataError(raw.path + ": malformed dim[" + std::to_string(i) + "]");
    for (int i = 5; i <= h.dim[0]; ++i)
        if (h.dim[i] > 1) throw DataError(raw.path + ": volumes beyond 4 dimensions are not supported");
    const std::size_t bpv = bytes_per_voxel(h.datatype);
    if (bpv == 0) throw DataError(raw.path + ": unsupported datatype " + std::to_string(h.datatype));
    if (!(h.vox_offset >= 348.0f)) throw DataError(raw.path + ": malformed vox_offset");

    std::size_t count = 1;
    for (int i = 1; i <= std::min<int>(h.dim[0], 4); ++i) count *= static_cast<std::size_t>(h.dim[i]);

    const auto skip = static_cast<std::size_t>(h.vox_offset) - sizeof(NiftiHeader);
    std::vector<unsigned char> ext(skip);
    if (skip > 0 && gzread(f.get(), ext.data(), static_cast<unsigned>(skip)) != static_cast<int>(skip))
        throw DataError(raw.path + ": truncated before voxel data");

    raw.payload.resize(count * bpv);
    std::size_t done = 0;
    while (done < raw.payload.size()) {
        const auto want = static_cast<unsigned>(std::min<std::size_t>(raw.payload.size() - done, 1u << 30));
        const int got = gzread(f.get(), raw.payload.data() + done, want);
        if (got <= 0) throw DataError(raw.path + ": truncated voxel data");
        done += static_cast<std::size_t>(got);
    }
    return raw;
}

template <class T>
double load_scalar(const unsigned char* p, bool swapped) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    if (swapped) swap_bytes(v);
    return static_cast<double>(v);
}

double decode(const unsigned char* p, std::int16_t datatype, bool swapped) {
    switch (datatype) {
        case DT_UINT8: return load_scalar<std::uint8_t>(p, swapped);
        case DT_INT8: return load_scalar<std::int8_t>(p, swapped);
        case DT_INT16: return load_scalar<std::int16_t>(p, swapped);
        case DT_UINT16: return load_scalar<std::uint16_t>(p, swapped);
        case DT_INT32: return load_scalar<std::int32_t>(p, swapped);
        case DT_UINT32: return load_scalar<std::uint32_t>(p, swapped);
        case DT_FLOAT32: return load_scalar<float>(p, swapped);
        case DT_FLOAT64: return load_scalar<double>(p, swapped);
        case DT_INT64: return load_scalar<std::int64_t>(p, swapped);
        case DT_UINT64: return load_scalar<std::uint64_t>(p, swapped);
        default: throw DataError("unsupported datatype");
    }
}

Geometry header_geometry(const RawNifti& raw) {
    const NiftiHeader& h = raw.header;
    Geometry g;
    g.dims = {static_cast<std::size_t>(h.dim[1]), static_cast<std::size_t>(h.dim[0] >= 2 ? h.dim[2] : 1),
              static_cast<std::size_t>(h.dim[0] >= 3 ? h.dim[3] : 1)};
    for (int a = 0; a < 3; ++a) {
        const float pd = h.pixdim[a + 1];
        g.spacing[a] = static_cast<double>(std::abs(pd));
    }
    if (h.sform_code > 0) {
        g.origin = {h.srow_x[3], h.srow_y[3], h.srow_z[3]};
    } else if (h.qform_code > 0) {
        g.origin = {h.qoffset_x, h.qoffset_y, h.qoffset_z};
    }
    try {
        g.validate();
    } catch (const DataError& e) {
        throw DataError(raw.path + ": " + e.what());
    }
    return g;
}

std::vector<double> decode_channel(const RawNifti& raw, std::size_t channel, std::size_t voxels) {
    const NiftiHeader& h = raw.header;
    const std::size_t bpv = bytes_per_voxel(h.datatype);
    const bool scaled = h.scl_slope != 0.0f && std::isfinite(h.scl_slope) && std::isfinite(h.scl_inter);
    const double slope = scaled ? h.scl_slope : 1.0;
    const double inter = scaled ? h.scl_inter : 0.0;
    std::vector<double> out(voxels);
    const unsigned char* base = raw.payload.data() + channel * voxels * bpv;
    for (std::size_t i = 0; i < voxels; ++i) {
        const double v = decode(base + i * bpv, h.datatype, raw.swapped);
        out[i] = scaled ? v * slope + inter : v;
    }
    return out;
}

NiftiHeader make_header(const Geometry& g, std::size_t channels, std::int16_t datatype) {
    NiftiHeader h{};
    h.sizeof_hdr = 348;
    h.regular = 'r';
    h.dim[0] = channels > 1 ? 4 : 3;
    const std::size_t limit = 32767;
    if (g.dims.nx > limit || g.dims.ny > limit || g.dims.nz > limit || channels > limit)
        throw DataError("volume too large for NIfTI-1 dims");
    h.dim[1] = static_cast<std::int16_t>(g.dims.nx);
    h.dim[2] = static_cast<std::int16_t>(g.dims.ny);
    h.dim[3] = static_cast<std::int16_t>(g.dims.nz);
    h.dim[4] = static_cast<std::int16_t>(channels);
    for (int i = 5; i < 8; ++i) h.dim[i] = 1;
    h.datatype = datatype;
    h.bitpix = static_cast<std::int16_t>(8 * bytes_per_voxel(datatype));
    h.pixdim[0] = 1.0f;
    for (int a = 0; a < 3; ++a) h.pixdim[a + 1] = static_cast<float>(g.spacing[a]);
    h.pixdim[4] = 1.0f;
    h.vox_offset = 352.0f;
    h.scl_slope = 1.0f;
    h.scl_inter = 0.0f;
    h.xyzt_units = 2;  // mm
    h.qform_code = 1;
    h.sform_code = 1;
    h.qoffset_x = static_cast<float>(g.origin[0]);
    h.qoffset_y = static_cast<float>(g.origin[1]);
    h.qoffset_z = static_cast<float>(g.origin[2]);
    h.srow_x[0] = static_cast<float>(g.spacing[0]);
    h.srow_y[1] = static_cast<float>(g.spacing[1]);
    h.srow_z[2] = static_cast<float>(g.spacing[2]);
    h.srow_x[3] = static_cast<float>(g.origin[0]);
    h.srow_y[3] = static_cast<float>(g.origin[1]);
    h.srow_z[3] = static_cast<float>(g.origin[2]);
    std::memcpy(h.magic, "n+1\0", 4);
    return h;
}

void write_raw(const std::filesystem::path& path, const NiftiHeader& header,
               const std::vector<unsigned char>& payload) {
    const std::string p = path.string();
    // "T" writes without compression; both paths go through zlib for one code path.
    GzHandle f(gzopen(p.c_str(), is_gz_path(path) ? "wb6" : "wbT"));
    if (!f) throw DataError("cannot write " + p);
    const char ext[4] = {0, 0, 0, 0};
    bool ok = gzwrite(f.get(), &header, sizeof(NiftiHeader)) == static_cast<int>(sizeof(NiftiHeader));
    ok = ok && gzwrite(f.get(), ext, 4) == 4;
    std::size_t done = 0;
    while (ok && done < payload.size()) {
        const auto chunk = static_cast<unsigned>(std::min<std::size_t>(payload.size() - done, 1u << 30));
        ok = gzwrite(f.get(), payload.data() + done, chunk) == static_cast<int>(chunk);
        done += chunk;
    }
    if (!ok) throw DataError("write failed: " + p);
    if (gzclose(f.release()) != Z_OK) throw DataError("write failed: " + p);
}

template <class T, class Src>
void append_as(std::vector<unsigned char>& out, const Src& values) {
    const std::size_t base = out.size();
    out.resize(base + values.size() * sizeof(T));
    for (std::size_t i = 0; i < values.size(); ++i) {
        const T v = static_cast<T>(values[i]);
        std::memcpy(out.data() + base + i * sizeof(T), &v, sizeof(T));
    }
}

}  // namespace

void HyperVolume::validate() const {
    if (channels.empty()) throw DataError("hyper-volume has no channels");
    if (channel_names.size() != channels.size())
        throw DataError("hyper-volume channel names do not match channel count");
    for (std::size_t c = 1; c < channels.size(); ++c)
        require_same_grid(channels[0].geometry(), channels[c].geometry(),
                          "hyper-volume channel " + std::to_string(c) + " (" + channel_names[c] + ")");
}

Volume3D read_volume(const std::filesystem::path& path) {
    RawNifti raw = read_raw(path);
    if (raw.header.dim[0] >= 4 && raw.header.dim[4] > 1)
        throw DataError(raw.path + ": 4D volume with " + std::to_string(raw.header.dim[4]) +
                        " channels; use read_hypervolume");
    Geometry g = header_geometry(raw);
    Volume3D vol(g, decode_channel(raw, 0, g.dims.size()));
    require_finite(vol, raw.path);
    return vol;
}

void write_volume(const Volume3D& vol, const std::filesystem::path& path) {
    std::vector<unsigned char> payload;
    append_as<float>(payload, vol.data());
    write_raw(path, make_header(vol.geometry(), 1, DT_FLOAT32), payload);
}

BinaryMask read_mask(const std::filesystem::path& path) {
    const Volume3D vol = read_volume(path);
    BinaryMask mask(vol.geometry());
    for (std::size_t i = 0; i < vol.size(); ++i) mask[i] = vol[i] != 0.0 ? 1 : 0;
    return mask;
}

void write_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    require_binary(mask);
    write_raw(path, make_header(mask.geometry(), 1, DT_UINT8), mask.data());
}

HyperVolume read_hypervolume(const std::filesystem::path& path) {
    RawNifti raw = read_raw(path);
    if (raw.header.dim[0] < 4)
        throw DataError(raw.path + ": expected a 4D hyper-volume, found " +
                        std::to_string(raw.header.dim[0]) + "D");
    Geometry g = header_geometry(raw);
    const auto nch = static_cast<std::size_t>(raw.header.dim[4]);
    HyperVolume hv;
    for (std::size_t c = 0; c < nch; ++c) {
        hv.channels.emplace_back(g, decode_channel(raw, c, g.dims.size()));
        require_finite(hv.channels.back(), raw.path + " channel " + std::to_string(c));
    }

    std::string descrip(raw.header.descrip, strnlen(raw.header.descrip, sizeof(raw.header.descrip)));
    if (descrip.rfind(kChannelTag, 0) == 0) {
        std::stringstream ss(descrip.substr(std::strlen(kChannelTag)));
        std::string name;
        while (std::getline(ss, name, ',')) hv.channel_names.push_back(name);
    }
    if (hv.channel_names.size() != nch) {
        hv.channel_names.clear();
        for (std::size_t c = 0; c < nch; ++c) hv.channel_names.push_back("channel" + std::to_string(c));
    }
    return hv;
}

void write_hypervolume(const HyperVolume& hv, const std::filesystem::path& path) {
    hv.validate();
    NiftiHeader h = make_header(hv.geometry(), hv.channel_count(), DT_FLOAT32);
    h.dim[0] = 4;
    std::string joined = kChannelTag;
    for (std::size_t c = 0; c < hv.channel_names.size(); ++c) {
        if (hv.channel_names[c].find(',') != std::string::npos)
            throw DataError("channel names may not contain ','");
        joined += (c ? "," : "") + hv.channel_names[c];
    }
    if (joined.size() < sizeof(h.descrip)) std::memcpy(h.descrip, joined.data(), joined.size());
    std::vector<unsigned char> payload;
    payload.reserve(hv.channel_count() * hv.geometry().dims.size() * sizeof(float));
    for (const auto& ch : hv.channels) append_as<float>(payload, ch.data());
    write_raw(path, h, payload);
}

}  // namespace vfuse
