#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lims {

// Little-endian codec for every multi-byte field in the dataset and index
// files. The build targets little-endian hosts; byte order is asserted so a
// port fails loudly instead of writing a foreign format.
static_assert(std::endian::native == std::endian::little,
              "on-disk format is little-endian; big-endian hosts need swaps");

inline void put_u8(std::vector<std::byte>& out, std::uint8_t v) {
    out.push_back(static_cast<std::byte>(v));
}

inline void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    out.insert(out.end(), p, p + 4);
}

inline void put_u64(std::vector<std::byte>& out, std::uint64_t v) {
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    out.insert(out.end(), p, p + 8);
}

inline void put_f64(std::vector<std::byte>& out, double v) {
    static_assert(sizeof(double) == 8);
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    out.insert(out.end(), p, p + 8);
}

inline void check_room(std::span<const std::byte> in, std::size_t off, std::size_t need) {
    if (in.size() < off + need)
        throw std::runtime_error("deserialize: truncated input");
}

inline std::uint8_t get_u8(std::span<const std::byte> in, std::size_t& off) {
    check_room(in, off, 1);
    return static_cast<std::uint8_t>(in[off++]);
}

inline std::uint32_t get_u32(std::span<const std::byte> in, std::size_t& off) {
    check_room(in, off, 4);
    std::uint32_t v;
    std::memcpy(&v, in.data() + off, 4);
    off += 4;
    return v;
}

inline std::uint64_t get_u64(std::span<const std::byte> in, std::size_t& off) {
    check_room(in, off, 8);
    std::uint64_t v;
    std::memcpy(&v, in.data() + off, 8);
    off += 8;
    return v;
}

inline double get_f64(std::span<const std::byte> in, std::size_t& off) {
    check_room(in, off, 8);
    double v;
    std::memcpy(&v, in.data() + off, 8);
    off += 8;
    return v;
}

inline std::vector<std::byte> read_file_bytes(const std::filesystem::path& path,
                                              const std::string& what) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in)
        throw std::runtime_error(what + ": cannot open " + path.string());
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    std::vector<std::byte> buf(size);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(size));
    if (!in)
        throw std::runtime_error(what + ": read failed for " + path.string());
    return buf;
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes,
                             const std::string& what) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error(what + ": cannot open " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error(what + ": write failed for " + path.string());
}

} // namespace lims
