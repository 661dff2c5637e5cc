#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lims/metric.hpp"
#include "lims/serial.hpp"

namespace lims {

struct Record {
    std::uint64_t id = 0;
    Payload payload;
};

/// A set of records over one metric. `dim` is the vector dimensionality and
/// is 0 for string data.
struct MetricDataset {
    Metric metric = Metric::L2;
    std::uint32_t dim = 0;
    std::vector<Record> records;

    std::size_t size() const { return records.size(); }

    double dist(const Payload& a, const Payload& b) const { return distance(metric, a, b); }
};

// Fixed-size string slot: 1 length byte + up to 71 characters.
inline constexpr std::size_t kStringSlotBytes = 72;

/// Bytes one serialized record occupies: 8-byte identifier plus the payload
/// (d x 8 for vectors, a 72-byte slot for strings).
inline std::size_t record_size(Metric metric, std::uint32_t dim) {
    switch (metric) {
        case Metric::L2:
        case Metric::L1:
            if (dim == 0)
                throw std::invalid_argument("record_size: vector metric needs dim >= 1");
            return 8 + std::size_t{dim} * 8;
        case Metric::Edit:
            return 8 + kStringSlotBytes;
    }
    throw std::invalid_argument("record_size: unknown metric tag");
}

inline void serialize_record(const Record& rec, Metric metric, std::uint32_t dim,
                             std::vector<std::byte>& out) {
    put_u64(out, rec.id);
    if (metric == Metric::Edit) {
        const auto& s = std::get<std::string>(rec.payload);
        if (s.empty() || s.size() > kStringSlotBytes - 1)
            throw std::invalid_argument("serialize_record: string length out of range");
        std::byte slot[kStringSlotBytes] = {};
        slot[0] = static_cast<std::byte>(s.size());
        std::memcpy(slot + 1, s.data(), s.size());
        out.insert(out.end(), slot, slot + kStringSlotBytes);
    } else {
        const auto& v = std::get<std::vector<double>>(rec.payload);
        if (v.size() != dim)
            throw std::invalid_argument("serialize_record: vector dimension mismatch");
        for (double x : v)
            put_f64(out, x);
    }
}

inline Record deserialize_record(std::span<const std::byte> in, Metric metric, std::uint32_t dim) {
    Record rec;
    std::size_t off = 0;
    rec.id = get_u64(in, off);
    if (metric == Metric::Edit) {
        if (in.size() < off + kStringSlotBytes)
            throw std::runtime_error("deserialize_record: truncated string slot");
        const auto len = static_cast<std::size_t>(in[off]);
        std::string s(len, '\0');
        std::memcpy(s.data(), in.data() + off + 1, len);
        rec.payload = std::move(s);
    } else {
        std::vector<double> v(dim);
        for (std::uint32_t j = 0; j < dim; ++j)
            v[j] = get_f64(in, off);
        rec.payload = std::move(v);
    }
    return rec;
}

// Dataset file: "LMSD" magic, metric tag, n, d, then packed records.
inline constexpr char kDatasetMagic[4] = {'L', 'M', 'S', 'D'};

inline void save_dataset(const MetricDataset& ds, const std::filesystem::path& path) {
    std::vector<std::byte> buf;
    buf.reserve(17 + ds.records.size() * record_size(ds.metric, ds.dim));
    buf.insert(buf.end(), reinterpret_cast<const std::byte*>(kDatasetMagic),
               reinterpret_cast<const std::byte*>(kDatasetMagic) + 4);
    put_u8(buf, static_cast<std::uint8_t>(ds.metric));
    put_u64(buf, ds.records.size());
    put_u32(buf, ds.dim);
    for (const auto& rec : ds.records)
        serialize_record(rec, ds.metric, ds.dim, buf);
    write_file_bytes(path, buf, "save_dataset");
}

inline MetricDataset load_dataset(const std::filesystem::path& path) {
    const auto buf = read_file_bytes(path, "load_dataset");
    if (buf.size() < 17 || std::memcmp(buf.data(), kDatasetMagic, 4) != 0)
        throw std::runtime_error("load_dataset: bad magic in " + path.string());
    std::size_t off = 4;
    MetricDataset ds;
    ds.metric = static_cast<Metric>(get_u8(buf, off));
    const std::uint64_t n = get_u64(buf, off);
    ds.dim = get_u32(buf, off);

    const std::size_t rec_bytes = record_size(ds.metric, ds.metric == Metric::Edit ? 1 : ds.dim);
    if (buf.size() - off != n * rec_bytes)
        throw std::runtime_error("load_dataset: size mismatch in " + path.string());
    ds.records.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        ds.records.push_back(deserialize_record(
            std::span<const std::byte>(buf).subspan(off, rec_bytes), ds.metric, ds.dim));
        off += rec_bytes;
    }
    return ds;
}

} // namespace lims
