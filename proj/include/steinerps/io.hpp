#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "steinerps/config.hpp"
#include "steinerps/grid.hpp"
#include "steinerps/version.hpp"

namespace steinerps {

namespace detail {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void json_escape(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += '"';
}

/// Serialize with every floating-point number at 17 significant digits so
/// byte-for-byte determinism is checkable across runs.
inline void dump_json17(const json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string pad1(static_cast<std::size_t>(indent + 1) * 2, ' ');
    if (j.is_object()) {
        if (j.empty()) { out += "{}"; return; }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad1;
            json_escape(it.key(), out);
            out += ": ";
            dump_json17(it.value(), out, indent + 1);
        }
        out += "\n" + pad + "}";
    } else if (j.is_array()) {
        if (j.empty()) { out += "[]"; return; }
        out += "[";
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += ", ";
            first = false;
            dump_json17(v, out, indent + 1);
        }
        out += "]";
    } else if (j.is_string()) {
        json_escape(j.get<std::string>(), out);
    } else if (j.is_boolean()) {
        out += j.get<bool>() ? "true" : "false";
    } else if (j.is_number_float()) {
        const double v = j.get<double>();
        out += std::isfinite(v) ? fmt17(v) : "null";  // JSON has no nan/inf
    } else if (j.is_number_integer()) {
        out += std::to_string(j.get<std::int64_t>());
    } else if (j.is_number_unsigned()) {
        out += std::to_string(j.get<std::uint64_t>());
    } else {
        out += "null";
    }
}

}  // namespace detail

inline std::string json_to_string(const json& j) {
    std::string out;
    detail::dump_json17(j, out, 0);
    out += "\n";
    return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Field serialization: CSV rows of (multi-index..., value) for every
/// inside cell; grid metadata travels as a JSON header next to it.
inline std::string field_to_csv(const GridFunction& u) {
    const Grid& g = u.grid();
    std::string out;
    for (int d = 0; d < g.dim(); ++d) out += "i" + std::to_string(d) + ",";
    out += "value\n";
    for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        if (!u.mask().is_inside(c)) continue;
        const auto mi = g.to_multi(c);
        for (int d = 0; d < g.dim(); ++d) out += std::to_string(mi[d]) + ",";
        out += detail::fmt17(u[c]) + "\n";
    }
    return out;
}

inline json grid_to_json(const Grid& g) {
    return json{{"dim", g.dim()},
                {"half_extent", g.half_extent()},
                {"spacing", g.spacing()},
                {"cells_per_axis", g.cells_per_axis()}};
}

/// Rebuild a field from its CSV rows on the mask the caller reconstructed
/// from the result's domain spec.
inline GridFunction field_from_csv(const std::string& csv, std::shared_ptr<const DomainMask> mask) {
    const Grid& g = mask->grid;
    std::vector<double> vals(static_cast<std::size_t>(g.total_cells()), 0.0);
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);  // header
    std::vector<int> mi(static_cast<std::size_t>(g.dim()));
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string tok;
        for (int d = 0; d < g.dim(); ++d) {
            if (!std::getline(ls, tok, ',')) throw std::runtime_error("field csv: short row");
            mi[static_cast<std::size_t>(d)] = std::stoi(tok);
        }
        if (!std::getline(ls, tok, ',')) throw std::runtime_error("field csv: missing value");
        vals[static_cast<std::size_t>(g.to_flat(mi))] = std::strtod(tok.c_str(), nullptr);
    }
    return GridFunction(std::move(mask), std::move(vals));
}

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-2), used for the run manifest checksums.

namespace detail {

struct Sha256 {
    std::uint32_t h[8] = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                          0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
    std::uint64_t total = 0;
    unsigned char buf[64];
    std::size_t fill = 0;

    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void block(const unsigned char* p) {
        static const std::uint32_t k[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
            0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
            0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
            0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
            0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
            0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
            0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
            0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
            0xc67178f2};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = hh + S1 + ch + k[i] + w[i];
            const std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = S0 + maj;
            hh = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d;
        h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
    }

    void update(const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        total += len;
        while (len > 0) {
            const std::size_t take = std::min(len, std::size_t(64) - fill);
            std::memcpy(buf + fill, p, take);
            fill += take;
            p += take;
            len -= take;
            if (fill == 64) {
                block(buf);
                fill = 0;
            }
        }
    }

    std::string hex_digest() {
        const std::uint64_t bits = total * 8;
        unsigned char pad[72] = {0x80};
        const std::size_t padlen = (fill < 56) ? 56 - fill : 120 - fill;
        update(pad, padlen);
        unsigned char lenb[8];
        for (int i = 0; i < 8; ++i) lenb[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
        update(lenb, 8);
        char out[65];
        for (int i = 0; i < 8; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
        return std::string(out, 64);
    }
};

}  // namespace detail

inline std::string sha256_hex(const std::string& data) {
    detail::Sha256 s;
    s.update(data.data(), data.size());
    return s.hex_digest();
}

/// Write a file and return its manifest entry.
inline json write_output(const std::string& dir, const std::string& name, const std::string& text) {
    const std::string path = dir + "/" + name;
    write_text_file(path, text);
    return json{{"path", name}, {"sha256", sha256_hex(text)}};
}

inline json make_manifest(const std::string& command, const std::string& config_path,
                          const json& outputs, double wall_time_s) {
    return json{{"command", command},
                {"config_path", config_path},
                {"outputs", outputs},
                {"versions", kVersion},
                {"wall_time_s", wall_time_s}};
}

}  // namespace steinerps
