#pragma once

#include "ringsig/modem.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ringsig {

enum class ExperimentKind { BerCurve, BerVsFactors, ConstellationDump, PmiSweep, DatasetGen, TrainClassifier };

std::string_view to_string(ExperimentKind k) noexcept;

enum class CarrierMode { Auto, On, Off };

/// Everything a harness run depends on. Loaded from a flat `key = value`
/// file ('#' starts a comment); unknown keys are rejected. The keys and their
/// defaults are listed by `ExperimentConfig::schema()`.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::filesystem::path out = "out";
    std::size_t trials = 0; // 0: experiment default

    Scheme scheme = Scheme::Qpsk;
    std::vector<Scheme> schemes = {Scheme::Qpsk};
    double amplitude = 1.0;

    std::uint64_t shaping_seed = 0x5EC2E7ULL;
    int phase_intensity = 0;
    double magnitude_intensity = 1.0;
    std::vector<int> ip_grid = {0, 1, 3, 4};
    std::vector<double> im_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

    std::vector<double> es_n0_db = {0, 2, 4, 6, 8, 10, 12};
    double cfo = 0.0;
    double phase_offset = 0.0;

    double loop_bandwidth = 0.01;
    double detect_threshold = 0.6;
    CarrierMode carrier = CarrierMode::Auto;

    std::size_t header_symbols = 12;
    std::size_t data_bits = 10000;
    std::string message = "hello world ###";
    bool random_payload = false;

    std::size_t ber_bits = 1000000;
    std::uint64_t attacker_seed = 0xBAD5EEDULL;

    std::size_t dump_symbols = 10000;
    double dump_es_n0_db = std::numeric_limits<double>::infinity();

    std::size_t pmi_trials = 500;
    double pmi_es_n0_db = 20.0;
    std::size_t pmi_block_length = 1024;
    std::vector<double> pmi_im_grid = {1.0, 0.8, 0.6, 0.4, 0.3, 0.2, 0.1};
    std::vector<int> pmi_ip_grid = {1, 4};
    std::filesystem::path pmi_model = "classifier.model";
    bool pmi_dump_blocks = false;
    bool pmi_snr_aware = true;

    std::size_t dataset_blocks_per_class = 20000;
    std::size_t dataset_block_length = 1024;
    std::vector<double> dataset_snr_grid_db = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30};
    std::filesystem::path dataset_dir; // empty: train-clf synthesizes in memory

    struct KeyInfo {
        std::string_view key;
        std::string_view type;
        std::string_view description;
    };
    static const std::vector<KeyInfo>& schema();

    /// Applies `key = value` lines on top of the current values.
    void apply_text(std::istream& is);
    void apply(const std::string& key, const std::string& value);

    static ExperimentConfig load(const std::filesystem::path& path);

    /// Every key except `out` with its effective value, one per line, sorted.
    std::string canonical() const;
    std::uint64_t hash() const;
    /// "config_hash=<16 hex digits> seed=<seed>"
    std::string provenance() const;
};

} // namespace ringsig
