#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "motiontok/common.hpp"
#include "motiontok/numerics/params.hpp"

namespace motiontok::num {

// MTCK v1 checkpoints: magic "MTCK", u32 version, u32 record count, then per
// record: u32 name length, name bytes, u32 rank, u32 dims, f32 little-endian
// payload. Records named "meta.<key>=<value>" carry provenance strings as
// zero-length metadata. Round-trips are bit-exact for float stores.

namespace detail {

inline void write_u32(std::ofstream& out, std::uint32_t v) {
    char b[4];
    b[0] = static_cast<char>(v & 0xFF);
    b[1] = static_cast<char>((v >> 8) & 0xFF);
    b[2] = static_cast<char>((v >> 16) & 0xFF);
    b[3] = static_cast<char>((v >> 24) & 0xFF);
    out.write(b, 4);
}

inline std::uint32_t read_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw DataError("mtck: truncated file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace detail

template <typename T>
void save_checkpoint(const std::string& path, const ParamStore<T>& store,
                     const std::map<std::string, std::string>& meta = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("mtck: cannot open for writing: " + path);
    out.write("MTCK", 4);
    detail::write_u32(out, 1);
    detail::write_u32(out, static_cast<std::uint32_t>(store.all().size() + meta.size()));
    for (const auto& [key, value] : meta) {
        const std::string name = "meta." + key + "=" + value;
        detail::write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::write_u32(out, 0);  // rank 0, no dims, no payload
    }
    for (const auto& [name, p] : store.all()) {
        detail::write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::write_u32(out, static_cast<std::uint32_t>(p.shape.size()));
        for (int d : p.shape) detail::write_u32(out, static_cast<std::uint32_t>(d));
        std::vector<float> payload(p.value.size());
        for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<float>(p.value[i]);
        out.write(reinterpret_cast<const char*>(payload.data()),
                  static_cast<std::streamsize>(payload.size() * sizeof(float)));
    }
    if (!out) throw DataError("mtck: write failed: " + path);
}

struct Checkpoint {
    ParamStore<float> params;
    std::map<std::string, std::string> meta;
};

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("mtck: cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "MTCK", 4) != 0) throw DataError("mtck: bad magic");
    const std::uint32_t version = detail::read_u32(in);
    if (version != 1) throw DataError("mtck: unsupported version");
    const std::uint32_t count = detail::read_u32(in);

    Checkpoint ck;
    for (std::uint32_t r = 0; r < count; ++r) {
        const std::uint32_t name_len = detail::read_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in) throw DataError("mtck: truncated name");
        const std::uint32_t rank = detail::read_u32(in);
        if (rank == 0 && name.rfind("meta.", 0) == 0) {
            const std::size_t eq = name.find('=');
            if (eq == std::string::npos) throw DataError("mtck: malformed meta record");
            ck.meta[name.substr(5, eq - 5)] = name.substr(eq + 1);
            continue;
        }
        Shape shape;
        std::size_t n = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            shape.push_back(static_cast<int>(detail::read_u32(in)));
            n *= static_cast<std::size_t>(shape.back());
        }
        auto& p = ck.params.create(name, shape);
        in.read(reinterpret_cast<char*>(p.value.data()), static_cast<std::streamsize>(n * sizeof(float)));
        if (!in) throw DataError("mtck: truncated payload for " + name);
    }
    return ck;
}

// Copies checkpoint values into an already-shaped store, by name.
template <typename T>
void restore_into(ParamStore<T>& store, const Checkpoint& ck) {
    for (auto& [name, p] : store.all()) {
        const auto& src = ck.params.at(name);
        if (src.shape != p.shape) throw DataError("mtck: shape mismatch for " + name);
        for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] = static_cast<T>(src.value[i]);
    }
}

}  // namespace motiontok::num
