#include "ringsig/experiments.hpp"

#include "ringsig/channel.hpp"
#include "ringsig/error.hpp"
#include "ringsig/framing.hpp"
#include "ringsig/iq_io.hpp"
#include "ringsig/random.hpp"
#include "ringsig/shaping.hpp"
#include "ringsig/sync.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ringsig {

namespace {

std::string num(double v)
{
    std::ostringstream ss;
    ss.imbue(std::locale::classic());
    ss << std::setprecision(10) << v;
    return ss.str();
}

std::uint64_t dbits(double v) { return std::bit_cast<std::uint64_t>(v); }

void write_csv(std::ostream& os, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows, const std::string& comment)
{
    if (!comment.empty())
        os << "# " << comment << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i)
        os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << row[i];
        os << '\n';
    }
}

std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    return os;
}

Bits payload_for(const ExperimentConfig& cfg, std::uint64_t frame_seed)
{
    if (!cfg.random_payload)
        return expand_message_to_bits(cfg.message, cfg.data_bits);
    const CounterStream stream(frame_seed, "payload");
    Bits bits(cfg.data_bits);
    for (std::size_t k = 0; k < bits.size(); ++k)
        bits[k] = static_cast<std::uint8_t>(stream.bits(k) >> 63);
    return bits;
}

bool carrier_enabled(const ExperimentConfig& cfg)
{
    switch (cfg.carrier) {
    case CarrierMode::On: return true;
    case CarrierMode::Off: return false;
    case CarrierMode::Auto: return cfg.cfo != 0.0;
    }
    return false;
}

} // namespace

std::string csv_comment(const ExperimentConfig& cfg, ExperimentKind kind)
{
    return "experiment=" + std::string(to_string(kind)) + " " + cfg.provenance();
}

double theoretical_ber_shaped_mpsk(Scheme scheme, double e0_n0, double magnitude_intensity)
{
    ShapingConfig{0, 0, magnitude_intensity}.validate();
    if (magnitude_intensity == 1.0)
        return theoretical_ber_mpsk(scheme, e0_n0);
    constexpr int kNodes = 4096;
    double acc = 0.0;
    for (int i = 0; i < kNodes; ++i) {
        const double m = magnitude_intensity + (1.0 - magnitude_intensity) * (i + 0.5) / kNodes;
        acc += theoretical_ber_mpsk(scheme, m * m * e0_n0);
    }
    return acc / kNodes;
}

LinkStats simulate_link(const ExperimentConfig& cfg, Scheme scheme, double es_n0_db, int phase_intensity,
                        double magnitude_intensity, std::size_t min_bits, bool with_attacker)
{
    const ModConfig mod{scheme, cfg.amplitude};
    FrameSpec spec;
    spec.header_symbols = cfg.header_symbols;
    spec.data_bits = cfg.data_bits;
    spec.message = cfg.message;

    SyncConfig sync;
    sync.effective_order = effective_order(scheme, phase_intensity);
    sync.pll_loop_bandwidth = cfg.loop_bandwidth;
    sync.detect_threshold = cfg.detect_threshold;
    sync.estimate_cfo = sync.track_phase = carrier_enabled(cfg);

    const std::uint64_t point = hash_words({scheme_slot(scheme), dbits(es_n0_db),
                                            static_cast<std::uint64_t>(phase_intensity),
                                            dbits(magnitude_intensity)});
    const std::size_t fixed_frames = cfg.trials;
    const std::size_t bits_per_frame = std::max<std::size_t>(1, cfg.data_bits);
    const std::size_t max_frames =
        fixed_frames ? fixed_frames : 10 * ((min_bits + bits_per_frame - 1) / bits_per_frame) + 10;

    LinkStats st;
    double n0_sum = 0.0;
    for (std::size_t t = 0; t < max_frames; ++t) {
        if (!fixed_frames && st.bits >= min_bits)
            break;
        const std::uint64_t frame_seed = hash_words({cfg.seed, point, t});
        const auto payload = payload_for(cfg, frame_seed);
        const ShapingConfig secret{hash_words({cfg.shaping_seed, t}), phase_intensity, magnitude_intensity};
        const Frame frame = build_frame(payload, spec, mod, secret);
        const auto tx = frame.symbols();

        ChannelConfig ch;
        ch.es_n0_db = es_n0_db;
        ch.cfo = cfg.cfo;
        ch.phase_offset = cfg.phase_offset;
        ch.noise_seed = mix64(frame_seed);
        const auto rx = apply_channel(tx, ch);
        n0_sum += awgn_noise_variance(tx, es_n0_db);
        ++st.frames;

        try {
            const auto got = receive_frame(rx, mod, secret, spec, sync, frame.payload_bits);
            st.bits += got.stats.bits_compared;
            st.bit_errors += got.stats.bit_errors;
            st.symbols += got.stats.symbols_compared;
            st.symbol_errors += got.stats.symbol_errors;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoFrame)
                throw;
            ++st.frames_lost;
            continue;
        }
        if (with_attacker) {
            const ShapingConfig guess{hash_words({cfg.attacker_seed, t}), phase_intensity, magnitude_intensity};
            try {
                const auto got = receive_frame(rx, mod, guess, spec, sync, frame.payload_bits);
                st.attacker_bits += got.stats.bits_compared;
                st.attacker_errors += got.stats.bit_errors;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoFrame)
                    throw;
            }
        }
    }
    const double n0 = n0_sum / static_cast<double>(std::max<std::size_t>(1, st.frames));
    st.e0_n0 = n0 > 0.0 ? cfg.amplitude * cfg.amplitude / n0 : std::numeric_limits<double>::infinity();
    return st;
}

std::vector<BerCurveRow> run_ber_curve(const ExperimentConfig& cfg)
{
    std::vector<BerCurveRow> rows;
    for (auto scheme : cfg.schemes)
        for (double es : cfg.es_n0_db) {
            BerCurveRow row;
            row.scheme = scheme;
            row.es_n0_db = es;
            row.link = simulate_link(cfg, scheme, es, cfg.phase_intensity, cfg.magnitude_intensity, cfg.ber_bits);
            row.ber_theory = theoretical_ber_shaped_mpsk(scheme, row.link.e0_n0, cfg.magnitude_intensity);
            row.ring_literal = theoretical_ber_ring(row.link.e0_n0, cfg.magnitude_intensity, RingBerMode::Literal);
            row.ring_averaged = theoretical_ber_ring(row.link.e0_n0, cfg.magnitude_intensity, RingBerMode::Averaged);
            rows.push_back(row);
        }
    return rows;
}

void write_ber_curve_csv(std::ostream& os, const std::vector<BerCurveRow>& rows, const std::string& comment)
{
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows)
        cells.push_back({std::string(to_string(r.scheme)), num(r.es_n0_db), num(r.link.ber()), num(r.ber_theory),
                         std::to_string(r.link.bits), std::to_string(r.link.bit_errors), num(r.link.ser()),
                         std::to_string(r.link.symbol_errors), num(r.ring_literal), num(r.ring_averaged),
                         std::to_string(r.link.frames_lost)});
    write_csv(os,
              {"scheme", "es_n0_db", "ber_measured", "ber_theory", "bits", "errors", "ser_measured",
               "symbol_errors", "ring_literal", "ring_averaged", "frames_lost"},
              cells, comment);
}

std::vector<BerFactorsRow> run_ber_vs_factors(const ExperimentConfig& cfg)
{
    std::vector<BerFactorsRow> rows;
    for (double es : cfg.es_n0_db)
        for (int ip : cfg.ip_grid)
            for (double im : cfg.im_grid) {
                BerFactorsRow row;
                row.magnitude_intensity = im;
                row.phase_intensity = ip;
                row.es_n0_db = es;
                row.link = simulate_link(cfg, cfg.scheme, es, ip, im, cfg.ber_bits, true);
                row.ring_literal = theoretical_ber_ring(row.link.e0_n0, im, RingBerMode::Literal);
                row.ring_averaged = theoretical_ber_ring(row.link.e0_n0, im, RingBerMode::Averaged);
                rows.push_back(row);
            }
    return rows;
}

void write_ber_factors_csv(std::ostream& os, const std::vector<BerFactorsRow>& rows,
                           const std::string& comment)
{
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows)
        cells.push_back({num(r.magnitude_intensity), std::to_string(r.phase_intensity), num(r.es_n0_db),
                         num(r.link.ber()), num(r.link.attacker_ber()), std::to_string(r.link.bits),
                         std::to_string(r.link.bit_errors), std::to_string(r.link.attacker_bits),
                         std::to_string(r.link.attacker_errors), num(r.link.ser()), num(r.ring_literal),
                         num(r.ring_averaged), std::to_string(r.link.frames_lost)});
    write_csv(os,
              {"I_m", "I_p", "es_n0_db", "ber_measured", "ber_attacker", "bits", "errors", "attacker_bits",
               "attacker_errors", "ser_measured", "ring_literal", "ring_averaged", "frames_lost"},
              cells, comment);
}

std::vector<ConstellationDump> dump_constellation(const ExperimentConfig& cfg)
{
    if (!is_psk(cfg.scheme))
        throw Error(ErrorCode::NotPsk, "constellation dumps shape a PSK scheme");
    const CounterStream stream(hash_words({cfg.seed, 0x44554D50ULL}), "symbols");
    std::vector<SymbolIndex> idx(cfg.dump_symbols);
    for (std::size_t k = 0; k < idx.size(); ++k)
        idx[k] = static_cast<SymbolIndex>(stream.bits(k) % order(cfg.scheme));
    const auto clean = modulate(idx, ModConfig{cfg.scheme, cfg.amplitude});

    std::vector<ConstellationDump> dumps = {
        {"unshaped", 0, 1.0, {}, {}},
        {"phase_only", cfg.phase_intensity, 1.0, {}, {}},
        {"magnitude_only", 0, cfg.magnitude_intensity, {}, {}},
        {"shaped", cfg.phase_intensity, cfg.magnitude_intensity, {}, {}},
    };
    std::filesystem::create_directories(cfg.out);
    for (auto& d : dumps) {
        const ShapingConfig secret{cfg.shaping_seed, d.phase_intensity, d.magnitude_intensity};
        ChannelConfig ch;
        ch.es_n0_db = cfg.dump_es_n0_db;
        ch.noise_seed = hash_words({cfg.seed, fnv1a64(d.name)});
        d.samples = apply_awgn(apply_shaping(clean, make_factor_stream(secret, clean.size())), ch);
        d.file = cfg.out / (d.name + ".iq");
        write_iq_file(d.file, d.samples);

        IqMetadata meta;
        meta.set("sample_count", static_cast<std::uint64_t>(d.samples.size()));
        meta.set("scheme", std::string(to_string(cfg.scheme)));
        meta.set("I_m", d.magnitude_intensity);
        meta.set("I_p", static_cast<std::uint64_t>(d.phase_intensity));
        meta.set("es_n0_db", cfg.dump_es_n0_db);
        meta.set("seed", cfg.seed);
        meta.set("amplitude", cfg.amplitude);
        meta.set("variant", d.name);
        write_metadata(d.file, meta);
    }
    return dumps;
}

ClassifierModel load_model_for(const ExperimentConfig& cfg)
{
    auto path = cfg.pmi_model;
    if (path.is_relative() && !std::filesystem::exists(path))
        path = cfg.out / path;
    if (!std::filesystem::exists(path))
        throw Error(ErrorCode::ModelMissing, "classifier model not found: " + cfg.pmi_model.string() +
                                                 " (run train-clf first)");
    return ClassifierModel::load(path);
}

PmiSweepConfig pmi_config_from(const ExperimentConfig& cfg)
{
    PmiSweepConfig p;
    p.base = cfg.scheme;
    p.magnitude_grid = cfg.pmi_im_grid;
    p.phase_grid = cfg.pmi_ip_grid;
    p.es_n0_db = cfg.pmi_es_n0_db;
    p.trials = cfg.trials ? cfg.trials : cfg.pmi_trials;
    p.block_length = cfg.pmi_block_length;
    p.seed = cfg.seed;
    p.snr_aware = cfg.pmi_snr_aware;
    return p;
}

std::vector<PmiReport> run_pmi_sweep(const ExperimentConfig& cfg, const ClassifierModel& model)
{
    const auto pcfg = pmi_config_from(cfg);
    const auto reports = pmi_sweep(pcfg, model);
    auto os = open_output(cfg.out / "pmi.csv");
    write_pmi_csv(os, reports, csv_comment(cfg, ExperimentKind::PmiSweep));

    if (cfg.pmi_dump_blocks) {
        const auto dir = cfg.out / "pmi_blocks";
        std::filesystem::create_directories(dir);
        for (int ip : pcfg.phase_grid)
            for (double im : pcfg.magnitude_grid) {
                const auto file = dir / ("ip" + std::to_string(ip) + "_im" + num(im) + ".iq");
                std::filesystem::remove(file);
                for (std::size_t t = 0; t < pcfg.trials; ++t)
                    append_iq_file(file, pmi_trial_block(pcfg, im, ip, t));
                IqMetadata meta;
                meta.set("sample_count", static_cast<std::uint64_t>(pcfg.trials * pcfg.block_length));
                meta.set("block_length", static_cast<std::uint64_t>(pcfg.block_length));
                meta.set("trials", static_cast<std::uint64_t>(pcfg.trials));
                meta.set("scheme", std::string(to_string(pcfg.base)));
                meta.set("I_m", im);
                meta.set("I_p", static_cast<std::uint64_t>(ip));
                meta.set("es_n0_db", pcfg.es_n0_db);
                meta.set("seed", pcfg.seed);
                write_metadata(file, meta);
            }
    }
    return reports;
}

DatasetConfig dataset_config_from(const ExperimentConfig& cfg)
{
    DatasetConfig d;
    d.blocks_per_class = cfg.trials ? cfg.trials : cfg.dataset_blocks_per_class;
    d.block_length = cfg.dataset_block_length;
    d.snr_grid_db = cfg.dataset_snr_grid_db;
    d.seed = cfg.seed;
    d.validate();
    return d;
}

std::vector<ManifestRow> generate_dataset(const ExperimentConfig& cfg, const std::filesystem::path& dir)
{
    const auto dcfg = dataset_config_from(cfg);
    std::filesystem::create_directories(dir);
    std::vector<ManifestRow> rows;
    rows.reserve(dcfg.blocks_per_class * kSchemeCount);
    for (auto label : kAllSchemes) {
        const std::string name = std::string(to_string(label)) + ".iq";
        const auto file = dir / name;
        std::ofstream(file, std::ios::binary | std::ios::trunc);
        for (std::size_t i = 0; i < dcfg.blocks_per_class; ++i) {
            const auto info = block_info(dcfg, label, i);
            append_iq_file(file, synthesize_block(info, dcfg.block_length));
            rows.push_back({name, i, i * dcfg.block_length, dcfg.block_length, label, info.snr_db, info.seed,
                            info.split});
        }
        IqMetadata meta;
        meta.set("sample_count", static_cast<std::uint64_t>(dcfg.blocks_per_class * dcfg.block_length));
        meta.set("block_length", static_cast<std::uint64_t>(dcfg.block_length));
        meta.set("blocks", static_cast<std::uint64_t>(dcfg.blocks_per_class));
        meta.set("scheme", std::string(to_string(label)));
        meta.set("seed", dcfg.seed);
        write_metadata(file, meta);
    }
    auto os = open_output(dir / "manifest.csv");
    write_manifest_csv(os, rows, csv_comment(cfg, ExperimentKind::DatasetGen));
    return rows;
}

void write_manifest_csv(std::ostream& os, const std::vector<ManifestRow>& rows, const std::string& comment)
{
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const auto& r : rows)
        cells.push_back({r.file, std::to_string(r.block), std::to_string(r.offset), std::to_string(r.length),
                         std::string(to_string(r.label)), num(r.snr_db), std::to_string(r.seed),
                         std::string(to_string(r.split))});
    write_csv(os, {"file", "block", "offset", "length", "label", "snr_db", "seed", "split"}, cells, comment);
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& dir)
{
    std::ifstream is(dir / "manifest.csv");
    if (!is)
        throw Error(ErrorCode::IoError, "no manifest.csv in " + dir.string());
    std::string line;
    bool header_seen = false;
    std::vector<ManifestRow> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line.front() == '#')
            continue;
        if (!header_seen) {
            if (line != "file,block,offset,length,label,snr_db,seed,split")
                throw Error(ErrorCode::IoError, "unexpected manifest header: " + line);
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            cells.push_back(cell);
        if (cells.size() != 8)
            throw Error(ErrorCode::IoError, "malformed manifest row: " + line);
        ManifestRow r;
        try {
            r.file = cells[0];
            r.block = std::stoul(cells[1]);
            r.offset = std::stoul(cells[2]);
            r.length = std::stoul(cells[3]);
            r.snr_db = std::stod(cells[5]);
            r.seed = std::stoull(cells[6]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::IoError, "malformed manifest row: " + line);
        }
        const auto label = parse_scheme(cells[4]);
        if (!label)
            throw Error(ErrorCode::IoError, "unknown label in manifest: " + cells[4]);
        r.label = *label;
        if (cells[7] == "train")
            r.split = Split::Train;
        else if (cells[7] == "validation")
            r.split = Split::Validation;
        else if (cells[7] == "test")
            r.split = Split::Test;
        else
            throw Error(ErrorCode::IoError, "unknown split in manifest: " + cells[7]);
        rows.push_back(r);
    }
    return rows;
}

std::vector<LabeledFeatures> load_dataset_features(const std::filesystem::path& dir)
{
    std::vector<LabeledFeatures> out;
    for (const auto& r : read_manifest(dir))
        out.push_back({r.label, r.snr_db, r.split, extract_features(read_iq_file(dir / r.file, r.offset, r.length))});
    return out;
}

ClassifierModel run_train_classifier(const ExperimentConfig& cfg)
{
    const auto features =
        cfg.dataset_dir.empty() ? synthesize_features(dataset_config_from(cfg)) : load_dataset_features(cfg.dataset_dir);
    const auto model = train(features);
    std::filesystem::create_directories(cfg.out);
    model.save(cfg.out / "classifier.model");
    auto os = open_output(cfg.out / "confusion.csv");
    write_confusion_csv(os, model.test_confusion(), csv_comment(cfg, ExperimentKind::TrainClassifier));
    return model;
}

} // namespace ringsig
