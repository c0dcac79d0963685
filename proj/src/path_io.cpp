#include "pathwise/path_io.hpp"

#include "pathwise/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace pathwise {

namespace {

static_assert(std::endian::native == std::endian::little, "path files are written in host byte order");

constexpr char kMagic[4] = {'P', 'W', 'P', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::string& filename) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw ParameterError("truncated path file header: " + filename);
    return v;
}

}  // namespace

void write_path_binary(const SamplePath& path, const std::string& filename) {
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw ParameterError("cannot open " + filename + " for writing");
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(path.dimension()));
    put<std::uint64_t>(out, path.steps());
    put<double>(out, path.horizon());
    put<std::uint64_t>(out, path.seed());
    const auto inc = path.increments();
    out.write(reinterpret_cast<const char*>(inc.data()), static_cast<std::streamsize>(inc.size() * sizeof(double)));
    if (!out) throw ParameterError("failed writing " + filename);
}

SamplePath read_path_binary(const std::string& filename) {
    std::ifstream in(filename, std::ios::binary);
    if (!in) throw ParameterError("cannot open path file " + filename);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw ParameterError("not a path file (bad magic): " + filename);
    const auto version = get<std::uint32_t>(in, filename);
    if (version != kVersion) throw ParameterError("unsupported path file version " + std::to_string(version));
    const auto d = get<std::uint32_t>(in, filename);
    const auto n = get<std::uint64_t>(in, filename);
    const auto horizon = get<double>(in, filename);
    const auto seed = get<std::uint64_t>(in, filename);
    if (d == 0 || d > static_cast<std::uint32_t>(kMaxDim) || n == 0 || n > (std::uint64_t{1} << 32))
        throw ParameterError("implausible path file dimensions in " + filename);
    std::vector<double> inc(static_cast<std::size_t>(n) * d);
    if (!in.read(reinterpret_cast<char*>(inc.data()), static_cast<std::streamsize>(inc.size() * sizeof(double))))
        throw ParameterError("truncated path file body: " + filename);
    return SamplePath::from_increments(d, horizon, std::move(inc), seed);
}

void write_path_csv(const SamplePath& path, std::ostream& out) {
    out << "k,t";
    for (std::size_t i = 0; i < path.dimension(); ++i) out << ",B_" << (i + 1);
    out << '\n' << std::setprecision(17);
    for (std::size_t k = 0; k <= path.steps(); ++k) {
        out << k << ',' << path.time(k);
        for (std::size_t i = 0; i < path.dimension(); ++i) out << ',' << path.value(k, i);
        out << '\n';
    }
}

void write_path_csv(const SamplePath& path, const std::string& filename) {
    std::ofstream out(filename);
    if (!out) throw ParameterError("cannot open " + filename + " for writing");
    write_path_csv(path, out);
}

}  // namespace pathwise
