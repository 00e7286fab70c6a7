#include "topoadv/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "topoadv/errors.hpp"

namespace topoadv {

namespace {

std::uint32_t read_u32_le(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xff),
                                    static_cast<unsigned char>((v >> 8) & 0xff),
                                    static_cast<unsigned char>((v >> 16) & 0xff),
                                    static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

} // namespace

PointCloud read_emb(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open embedding file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "EMB1", 4) != 0)
        throw InputError("bad magic in embedding file: " + path);
    const std::uint32_t version = read_u32_le(in);
    if (version != 1)
        throw InputError("unsupported EMB1 version " + std::to_string(version) + " in " + path);
    const std::uint32_t n = read_u32_le(in);
    const std::uint32_t d = read_u32_le(in);
    if (!in) throw InputError("truncated EMB1 header in " + path);

    PointCloud cloud(n, d);
    std::vector<unsigned char> raw(static_cast<std::size_t>(n) * d * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw InputError("truncated EMB1 payload in " + path);
    for (std::size_t idx = 0; idx < cloud.data.size(); ++idx) {
        std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * idx]) |
                             (static_cast<std::uint32_t>(raw[4 * idx + 1]) << 8) |
                             (static_cast<std::uint32_t>(raw[4 * idx + 2]) << 16) |
                             (static_cast<std::uint32_t>(raw[4 * idx + 3]) << 24);
        float f;
        std::memcpy(&f, &bits, 4);
        cloud.data[idx] = static_cast<double>(f);
    }
    validate_cloud(cloud);
    return cloud;
}

void write_emb(const std::string& path, const PointCloud& cloud) {
    validate_cloud(cloud);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write embedding file: " + path);
    out.write("EMB1", 4);
    write_u32_le(out, 1);
    write_u32_le(out, static_cast<std::uint32_t>(cloud.n));
    write_u32_le(out, static_cast<std::uint32_t>(cloud.d));
    for (double v : cloud.data) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        write_u32_le(out, bits);
    }
    if (!out) throw InputError("failed writing embedding file: " + path);
}

PointCloud read_csv_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open CSV file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw InputError("bad numeric cell '" + cell + "' in " + path);
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError("ragged CSV rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError("empty CSV file: " + path);
    PointCloud cloud(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < cloud.n; ++i)
        for (std::size_t j = 0; j < cloud.d; ++j) cloud.at(i, j) = rows[i][j];
    validate_cloud(cloud);
    return cloud;
}

PointCloud load_cloud(const std::string& path, bool l2_normalize) {
    const bool is_emb = path.size() >= 4 && path.compare(path.size() - 4, 4, ".emb") == 0;
    PointCloud cloud = is_emb ? read_emb(path) : read_csv_cloud(path);
    return l2_normalize ? l2_normalize_rows(cloud) : cloud;
}

void write_diagram_csv(const std::string& path, const PersistenceDiagram& diagram) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write diagram CSV: " + path);
    out << "dim,birth,death,birth_i,birth_j,death_i,death_j\n";
    for (const PersistencePair& p : diagram.pairs) {
        out << p.dim << ',' << format_double(p.birth) << ','
            << (p.essential() ? std::string("inf") : format_double(p.death)) << ',' << p.birth_i
            << ',' << p.birth_j << ',' << p.death_i << ',' << p.death_j << '\n';
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace topoadv
