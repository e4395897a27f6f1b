#include "mfgce/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>

#include "mfgce/error.hpp"

namespace mfgce {

std::string version_string() { return "mfgce 0.1.0"; }

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[std::size_t(i)] = digits[v & 0xf];
    return s;
}

nlohmann::ordered_json OutputMeta::to_json() const {
    return {{"version", version_string()},
            {"command", command},
            {"config_hash", config_hash},
            {"seed", seed}};
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw Error("io", "cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const OutputMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    auto out = open_out(path);
    out << "# version: " << version_string() << "\n";
    out << "# command: " << meta.command << "\n";
    out << "# config_hash: " << meta.config_hash << "\n";
    out << "# seed: " << meta.seed << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, const OutputMeta& meta)
    : out_(open_out(path)) {
    out_ << nlohmann::ordered_json{{"meta", meta.to_json()}}.dump() << "\n";
}

void JsonlWriter::write(const nlohmann::ordered_json& record) {
    out_ << record.dump() << "\n";
    out_.flush();
}

void write_json(const std::filesystem::path& path, const OutputMeta& meta,
                nlohmann::ordered_json body) {
    nlohmann::ordered_json doc;
    doc["meta"] = meta.to_json();
    for (auto& [k, v] : body.items()) doc[k] = v;
    auto out = open_out(path);
    out << doc.dump(2) << "\n";
}

namespace {

template <typename T>
void put(std::ofstream& out, T v) {
    static_assert(std::endian::native == std::endian::little, "little-endian host expected");
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw Error("io", "truncated tensor file");
    return v;
}

constexpr char kMagic[8] = {'M', 'F', 'G', 'C', 'E', 'B', 'I', 'N'};

}  // namespace

void write_tensor(const std::filesystem::path& path, const OutputMeta& meta,
                  const std::vector<std::uint64_t>& dims, const std::vector<double>& data) {
    std::uint64_t count = 1;
    for (auto d : dims) count *= d;
    if (count != data.size()) throw Error("io", "tensor dims do not match data length");
    auto out = open_out(path, true);
    out.write(kMagic, 8);
    put<std::uint32_t>(out, 1);
    put<std::uint32_t>(out, std::uint32_t(dims.size()));
    for (auto d : dims) put<std::uint64_t>(out, d);
    const std::string m = meta.to_json().dump();
    put<std::uint64_t>(out, m.size());
    out.write(m.data(), std::streamsize(m.size()));
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size() * sizeof(double)));
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open '" + path.string() + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw Error("io", "not an mfgce tensor file");
    if (get<std::uint32_t>(in) != 1) throw Error("io", "unsupported tensor format version");
    Tensor t;
    t.dims.resize(get<std::uint32_t>(in));
    std::uint64_t count = 1;
    for (auto& d : t.dims) {
        d = get<std::uint64_t>(in);
        count *= d;
    }
    t.meta.resize(get<std::uint64_t>(in));
    in.read(t.meta.data(), std::streamsize(t.meta.size()));
    t.data.resize(count);
    in.read(reinterpret_cast<char*>(t.data.data()), std::streamsize(count * sizeof(double)));
    if (!in) throw Error("io", "truncated tensor file");
    return t;
}

void write_value_surface(const std::filesystem::path& dir, const OutputMeta& meta,
                         const ValueSurface& u) {
    const Grid& g = u.grid();
    write_tensor(dir / "value_surface.bin", meta, {g.n_t(), g.n_x(), g.n_y()}, u.values());
    std::vector<std::vector<double>> rows;
    rows.reserve(u.values().size());
    for (std::size_t n = 0; n < g.n_t(); ++n)
        for (std::size_t i = 0; i < g.n_x(); ++i)
            for (std::size_t j = 0; j < g.n_y(); ++j)
                rows.push_back({g.t()[n], g.x()[i], g.y()[j], u.at(n, i, j)});
    write_csv(dir / "value_surface.csv", meta, {"t", "x", "y", "u"}, rows);
}

void write_boundary(const std::filesystem::path& dir, const OutputMeta& meta, const Boundary& c) {
    const Grid& g = c.grid();
    write_tensor(dir / "boundary.bin", meta, {g.n_t(), g.n_x()}, c.values());
    std::vector<std::vector<double>> rows;
    for (std::size_t n = 0; n < g.n_t(); ++n)
        for (std::size_t i = 0; i < g.n_x(); ++i) rows.push_back({g.t()[n], g.x()[i], c.at(n, i)});
    write_csv(dir / "boundary.csv", meta, {"t", "x", "c"}, rows);
}

void write_path_csv(const std::filesystem::path& path, const OutputMeta& meta,
                    const ControlledPath& p) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < p.time_grid.size(); ++k)
        rows.push_back({p.time_grid[k], p.x_path[k], p.xi_path[k], p.y_path[k]});
    write_csv(path, meta, {"t", "x", "xi", "y"}, rows);
}

}  // namespace mfgce
