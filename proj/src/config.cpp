#include "ringsig/config.hpp"

#include "ringsig/error.hpp"
#include "ringsig/random.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <sstream>

namespace ringsig {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, std::string_view want)
{
    throw Error(ErrorCode::ConfigError,
                "key '" + key + "': cannot parse '" + value + "' as " + std::string(want));
}

double parse_double(const std::string& key, const std::string& v)
{
    if (v == "inf" || v == "+inf")
        return std::numeric_limits<double>::infinity();
    std::istringstream ss(v);
    ss.imbue(std::locale::classic());
    double out = 0.0;
    if (!(ss >> out) || !(ss >> std::ws).eof())
        bad_value(key, v, "a real number");
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v)
{
    std::uint64_t out = 0;
    int base = 10;
    std::string_view digits = v;
    if (digits.starts_with("0x") || digits.starts_with("0X")) {
        base = 16;
        digits.remove_prefix(2);
    }
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out, base);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty())
        bad_value(key, v, "an unsigned integer");
    return out;
}

int parse_int(const std::string& key, const std::string& v)
{
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        bad_value(key, v, "an integer");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "on" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "off" || v == "no")
        return false;
    bad_value(key, v, "a boolean");
}

Scheme parse_scheme_value(const std::string& key, const std::string& v)
{
    const auto s = parse_scheme(v);
    if (!s)
        bad_value(key, v, "a modulation scheme");
    return *s;
}

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

std::string fmt(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string quote(const std::string& v)
{
    std::string out = "\"";
    for (char c : v) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + '"';
}

// Value text after '=': either a double-quoted string (backslash escapes,
// '#' kept) or bare text up to an optional '#' comment.
std::string parse_value(std::string_view text, std::size_t lineno)
{
    const auto start = text.find_first_not_of(" \t");
    if (start == std::string_view::npos || text[start] != '"') {
        const auto hash = text.find('#');
        return trim(text.substr(0, hash));
    }
    std::string out;
    std::size_t i = start + 1;
    for (; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\' && i + 1 < text.size())
            ++i;
        out += text[i];
    }
    if (i >= text.size())
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": unterminated quoted value");
    const auto rest = trim(text.substr(i + 1));
    if (!rest.empty() && rest.front() != '#')
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": text after quoted value");
    return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& format)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i)
        out += (i ? "," : "") + format(items[i]);
    return out;
}

struct Entry {
    std::string_view key;
    std::string_view type;
    std::string_view description;
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define RINGSIG_REAL(field) \
    [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.field = parse_double(k, v); }, \
        [](const ExperimentConfig& c) { return fmt(c.field); }
#define RINGSIG_SIZE(field) \
    [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.field = parse_u64(k, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }
#define RINGSIG_U64(field) RINGSIG_SIZE(field)
#define RINGSIG_INT(field) \
    [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.field = parse_int(k, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }
#define RINGSIG_BOOL(field) \
    [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.field = parse_bool(k, v); }, \
        [](const ExperimentConfig& c) { return std::string(c.field ? "true" : "false"); }
#define RINGSIG_PATH(field) \
    [](ExperimentConfig& c, const std::string&, const std::string& v) { c.field = v; }, \
        [](const ExperimentConfig& c) { return c.field.string(); }
#define RINGSIG_REALS(field) \
    [](ExperimentConfig& c, const std::string& k, const std::string& v) { \
        c.field.clear(); \
        for (const auto& item : split_list(v)) \
            c.field.push_back(parse_double(k, item)); \
    }, \
        [](const ExperimentConfig& c) { return join(c.field, fmt); }
#define RINGSIG_INTS(field) \
    [](ExperimentConfig& c, const std::string& k, const std::string& v) { \
        c.field.clear(); \
        for (const auto& item : split_list(v)) \
            c.field.push_back(parse_int(k, item)); \
    }, \
        [](const ExperimentConfig& c) { return join(c.field, [](int i) { return std::to_string(i); }); }

const std::vector<Entry>& entries()
{
    static const std::vector<Entry> table = {
        {"seed", "u64", "master seed for every derived trial seed", RINGSIG_U64(seed)},
        {"out", "path", "output directory", RINGSIG_PATH(out)},
        {"trials", "size", "override of the experiment's trial count (0 keeps the default)", RINGSIG_SIZE(trials)},
        {"modulation.scheme", "scheme", "transmit PSK scheme", 
         [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.scheme = parse_scheme_value(k, v); },
         [](const ExperimentConfig& c) { return std::string(to_string(c.scheme)); }},
        {"modulation.schemes", "scheme list", "PSK schemes swept by `ber`",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.schemes.clear();
             for (const auto& item : split_list(v))
                 c.schemes.push_back(parse_scheme_value(k, item));
         },
         [](const ExperimentConfig& c) {
             return join(c.schemes, [](Scheme s) { return std::string(to_string(s)); });
         }},
        {"modulation.amplitude", "real", "base symbol magnitude A", RINGSIG_REAL(amplitude)},
        {"shaping.seed", "u64", "shared shaping secret", RINGSIG_U64(shaping_seed)},
        {"shaping.ip", "int", "phase intensity I_p", RINGSIG_INT(phase_intensity)},
        {"shaping.im", "real", "magnitude intensity I_m", RINGSIG_REAL(magnitude_intensity)},
        {"shaping.ip_grid", "int list", "I_p values swept by `ber-factors`", RINGSIG_INTS(ip_grid)},
        {"shaping.im_grid", "real list", "I_m values swept by `ber-factors`", RINGSIG_REALS(im_grid)},
        {"channel.es_n0_db", "real list", "Es/N0 grid in dB (measured block power)", RINGSIG_REALS(es_n0_db)},
        {"channel.cfo", "real", "carrier frequency offset, cycles/symbol", RINGSIG_REAL(cfo)},
        {"channel.phase_offset", "real", "static carrier phase, radians", RINGSIG_REAL(phase_offset)},
        {"sync.loop_bandwidth", "real", "PLL loop bandwidth", RINGSIG_REAL(loop_bandwidth)},
        {"sync.threshold", "real", "header detection threshold", RINGSIG_REAL(detect_threshold)},
        {"sync.carrier", "auto|on|off", "frequency estimator and PLL; auto enables them when channel.cfo != 0",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             if (v == "auto")
                 c.carrier = CarrierMode::Auto;
             else
                 c.carrier = parse_bool(k, v) ? CarrierMode::On : CarrierMode::Off;
         },
         [](const ExperimentConfig& c) {
             return std::string(c.carrier == CarrierMode::Auto ? "auto" : c.carrier == CarrierMode::On ? "on" : "off");
         }},
        {"frame.header_symbols", "size", "header length in symbols", RINGSIG_SIZE(header_symbols)},
        {"frame.data_bits", "size", "data bits per frame", RINGSIG_SIZE(data_bits)},
        {"frame.message", "string", "payload message, repeated to fill the data field",
         [](ExperimentConfig& c, const std::string&, const std::string& v) { c.message = v; },
         [](const ExperimentConfig& c) { return c.message; }},
        {"frame.random_payload", "bool", "use random bits instead of the message", RINGSIG_BOOL(random_payload)},
        {"ber.bits", "size", "minimum compared bits per BER point", RINGSIG_SIZE(ber_bits)},
        {"ber.attacker_seed", "u64", "secret guessed by the wrong-seed receiver", RINGSIG_U64(attacker_seed)},
        {"dump.symbols", "size", "symbols per constellation dump", RINGSIG_SIZE(dump_symbols)},
        {"dump.es_n0_db", "real", "Es/N0 of the dumps (inf: noiseless)", RINGSIG_REAL(dump_es_n0_db)},
        {"pmi.trials", "size", "classification trials per grid point", RINGSIG_SIZE(pmi_trials)},
        {"pmi.es_n0_db", "real", "Es/N0 seen by the eavesdropper", RINGSIG_REAL(pmi_es_n0_db)},
        {"pmi.block_length", "size", "symbols per classification trial", RINGSIG_SIZE(pmi_block_length)},
        {"pmi.im_grid", "real list", "I_m values of the PMI sweep", RINGSIG_REALS(pmi_im_grid)},
        {"pmi.ip_grid", "int list", "I_p values of the PMI sweep", RINGSIG_INTS(pmi_ip_grid)},
        {"pmi.model", "path", "classifier model file (relative paths resolve against out)", RINGSIG_PATH(pmi_model)},
        {"pmi.dump_blocks", "bool", "also write every trial block as raw I/Q", RINGSIG_BOOL(pmi_dump_blocks)},
        {"pmi.snr_aware", "bool", "classify with the model components near pmi.es_n0_db", RINGSIG_BOOL(pmi_snr_aware)},
        {"dataset.blocks_per_class", "size", "blocks per modulation class", RINGSIG_SIZE(dataset_blocks_per_class)},
        {"dataset.block_length", "size", "symbols per block", RINGSIG_SIZE(dataset_block_length)},
        {"dataset.snr_grid_db", "real list", "SNR grid blocks are drawn from", RINGSIG_REALS(dataset_snr_grid_db)},
        {"dataset.dir", "path", "dataset directory read by train-clf (empty: synthesize)", RINGSIG_PATH(dataset_dir)},
    };
    return table;
}

#undef RINGSIG_REAL
#undef RINGSIG_SIZE
#undef RINGSIG_U64
#undef RINGSIG_INT
#undef RINGSIG_BOOL
#undef RINGSIG_PATH
#undef RINGSIG_REALS
#undef RINGSIG_INTS

} // namespace

std::string_view to_string(ExperimentKind k) noexcept
{
    switch (k) {
    case ExperimentKind::BerCurve: return "ber";
    case ExperimentKind::BerVsFactors: return "ber-factors";
    case ExperimentKind::ConstellationDump: return "dump-iq";
    case ExperimentKind::PmiSweep: return "pmi";
    case ExperimentKind::DatasetGen: return "gen-dataset";
    case ExperimentKind::TrainClassifier: return "train-clf";
    }
    return "ber";
}

const std::vector<ExperimentConfig::KeyInfo>& ExperimentConfig::schema()
{
    static const std::vector<KeyInfo> info = [] {
        std::vector<KeyInfo> out;
        for (const auto& e : entries())
            out.push_back({e.key, e.type, e.description});
        return out;
    }();
    return info;
}

void ExperimentConfig::apply(const std::string& key, const std::string& value)
{
    for (const auto& e : entries())
        if (e.key == key) {
            e.set(*this, key, value);
            return;
        }
    throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
}

void ExperimentConfig::apply_text(std::istream& is)
{
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
        apply(trim(std::string_view(body).substr(0, eq)), parse_value(std::string_view(body).substr(eq + 1), lineno));
    }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw Error(ErrorCode::ConfigError, "cannot open config file " + path.string());
    ExperimentConfig cfg;
    cfg.apply_text(is);
    return cfg;
}

std::string ExperimentConfig::canonical() const
{
    std::map<std::string_view, std::string> sorted;
    for (const auto& e : entries())
        if (e.key != "out")
            sorted[e.key] = (e.type == "string" || e.type == "path") ? quote(e.get(*this)) : e.get(*this);
    std::string out;
    for (const auto& [k, v] : sorted)
        out += std::string(k) + " = " + v + "\n";
    return out;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

std::string ExperimentConfig::provenance() const
{
    std::ostringstream ss;
    ss << "config_hash=" << std::hex << std::setw(16) << std::setfill('0') << hash() << std::dec
       << " seed=" << seed;
    return ss.str();
}

} // namespace ringsig
