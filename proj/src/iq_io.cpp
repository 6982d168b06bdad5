#include "ringsig/iq_io.hpp"

#include "ringsig/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ringsig {

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_f32le(char* dst, double v)
{
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b)
        dst[b] = static_cast<char>((bits >> (8 * b)) & 0xFFU);
}

double get_f32le(const char* src)
{
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(src[b])) << (8 * b);
    return std::bit_cast<float>(bits);
}

void write_samples(std::ofstream& os, const std::filesystem::path& path,
                   std::span<const IqSample> samples)
{
    if (!os)
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    std::vector<char> buf(samples.size() * 8);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        put_f32le(&buf[8 * k], samples[k].real());
        put_f32le(&buf[8 * k + 4], samples[k].imag());
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os)
        throw Error(ErrorCode::IoError, "write to " + path.string() + " failed");
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

void write_iq_file(const std::filesystem::path& path, std::span<const IqSample> samples)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    write_samples(os, path, samples);
}

void append_iq_file(const std::filesystem::path& path, std::span<const IqSample> samples)
{
    std::ofstream os(path, std::ios::binary | std::ios::app);
    write_samples(os, path, samples);
}

std::vector<IqSample> read_iq_file(const std::filesystem::path& path)
{
    std::error_code ec;
    const auto bytes = std::filesystem::file_size(path, ec);
    if (ec)
        throw Error(ErrorCode::IoError, "cannot stat " + path.string());
    if (bytes % 8 != 0)
        throw Error(ErrorCode::IoError, path.string() + " is not a whole number of float32 I/Q pairs");
    return read_iq_file(path, 0, bytes / 8);
}

std::vector<IqSample> read_iq_file(const std::filesystem::path& path, std::size_t offset,
                                   std::size_t count)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    is.seekg(static_cast<std::streamoff>(offset * 8));
    std::vector<char> buf(count * 8);
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(is.gcount()) != buf.size())
        throw Error(ErrorCode::IoError, path.string() + " is shorter than the requested range");
    std::vector<IqSample> out(count);
    for (std::size_t k = 0; k < count; ++k)
        out[k] = IqSample(get_f32le(&buf[8 * k]), get_f32le(&buf[8 * k + 4]));
    return out;
}

void IqMetadata::set(const std::string& key, double value)
{
    std::ostringstream ss;
    ss.imbue(std::locale::classic());
    ss << std::setprecision(17) << value;
    entries[key] = ss.str();
}

void IqMetadata::set(const std::string& key, std::uint64_t value) { entries[key] = std::to_string(value); }

const std::string& IqMetadata::get(const std::string& key) const
{
    const auto it = entries.find(key);
    if (it == entries.end())
        throw Error(ErrorCode::IoError, "metadata has no '" + key + "' entry");
    return it->second;
}

std::filesystem::path metadata_path(const std::filesystem::path& iq_path)
{
    auto p = iq_path;
    p += ".meta";
    return p;
}

void write_metadata(const std::filesystem::path& iq_path, const IqMetadata& meta)
{
    const auto path = metadata_path(iq_path);
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    for (const auto& [k, v] : meta.entries)
        os << k << " = " << v << '\n';
}

IqMetadata read_metadata(const std::filesystem::path& iq_path)
{
    const auto path = metadata_path(iq_path);
    std::ifstream is(path);
    if (!is)
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    IqMetadata meta;
    std::string line;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::IoError, "bad metadata line: " + line);
        meta.entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return meta;
}

} // namespace ringsig
