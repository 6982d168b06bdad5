#pragma once

#include "ringsig/classifier.hpp"
#include "ringsig/config.hpp"
#include "ringsig/modem.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ringsig {

/// Counts accumulated over the frames of one link-level grid point.
struct LinkStats {
    std::size_t frames = 0;
    std::size_t frames_lost = 0; // NoFrame at the legitimate receiver; excluded from the counts
    std::size_t bits = 0;
    std::size_t bit_errors = 0;
    std::size_t symbols = 0;
    std::size_t symbol_errors = 0;
    std::size_t attacker_bits = 0;
    std::size_t attacker_errors = 0;
    double e0_n0 = 0.0; // unshaped symbol energy over the N0 actually applied

    double ber() const { return bits ? static_cast<double>(bit_errors) / bits : 0.0; }
    double ser() const { return symbols ? static_cast<double>(symbol_errors) / symbols : 0.0; }
    double attacker_ber() const
    {
        return attacker_bits ? static_cast<double>(attacker_errors) / attacker_bits : 0.0;
    }
};

/// Transmits frames through the configured channel until `min_bits` payload
/// bits were compared (or `cfg.trials` frames, when set). Each frame draws
/// its own shaping secret and noise seed from (cfg.seed, point, frame).
LinkStats simulate_link(const ExperimentConfig& cfg, Scheme scheme, double es_n0_db, int phase_intensity,
                        double magnitude_intensity, std::size_t min_bits, bool with_attacker = false);

/// Gray MPSK bit error rate averaged over M ~ Uniform[I_m, 1] at E0/N0.
double theoretical_ber_shaped_mpsk(Scheme scheme, double e0_n0, double magnitude_intensity);

struct BerCurveRow {
    Scheme scheme = Scheme::Qpsk;
    double es_n0_db = 0.0;
    LinkStats link;
    double ber_theory = 0.0;
    double ring_literal = 0.0;
    double ring_averaged = 0.0;
};

std::vector<BerCurveRow> run_ber_curve(const ExperimentConfig& cfg);
void write_ber_curve_csv(std::ostream& os, const std::vector<BerCurveRow>& rows, const std::string& comment);

struct BerFactorsRow {
    double magnitude_intensity = 1.0;
    int phase_intensity = 0;
    double es_n0_db = 0.0;
    LinkStats link;
    double ring_literal = 0.0;
    double ring_averaged = 0.0;
};

std::vector<BerFactorsRow> run_ber_vs_factors(const ExperimentConfig& cfg);
void write_ber_factors_csv(std::ostream& os, const std::vector<BerFactorsRow>& rows,
                           const std::string& comment);

struct ConstellationDump {
    std::string name; // unshaped, phase_only, magnitude_only, shaped
    int phase_intensity = 0;
    double magnitude_intensity = 1.0;
    std::vector<IqSample> samples;
    std::filesystem::path file;
};

/// Writes <out>/<name>.iq plus sidecar metadata for the four shaping variants.
std::vector<ConstellationDump> dump_constellation(const ExperimentConfig& cfg);

/// Resolves cfg.pmi_model (trying <out>/<model> for relative paths) and loads it.
ClassifierModel load_model_for(const ExperimentConfig& cfg);

PmiSweepConfig pmi_config_from(const ExperimentConfig& cfg);

/// Runs the sweep, writes <out>/pmi.csv and, when pmi.dump_blocks is set,
/// <out>/pmi_blocks/ip<I_p>_im<I_m>.iq with every trial block.
std::vector<PmiReport> run_pmi_sweep(const ExperimentConfig& cfg, const ClassifierModel& model);

struct ManifestRow {
    std::string file; // relative to the dataset directory
    std::size_t block = 0;
    std::size_t offset = 0; // in samples
    std::size_t length = 0;
    Scheme label = Scheme::Bpsk;
    double snr_db = 0.0;
    std::uint64_t seed = 0;
    Split split = Split::Train;
};

DatasetConfig dataset_config_from(const ExperimentConfig& cfg);

/// Writes <dir>/<CLASS>.iq (blocks back to back) with sidecars and
/// <dir>/manifest.csv, one row per block.
std::vector<ManifestRow> generate_dataset(const ExperimentConfig& cfg, const std::filesystem::path& dir);

void write_manifest_csv(std::ostream& os, const std::vector<ManifestRow>& rows, const std::string& comment);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& dir);

/// Feature vectors of every block listed in <dir>/manifest.csv.
std::vector<LabeledFeatures> load_dataset_features(const std::filesystem::path& dir);

/// Trains on cfg.dataset_dir when set, otherwise on an in-memory synthetic
/// dataset, and writes <out>/classifier.model and <out>/confusion.csv.
ClassifierModel run_train_classifier(const ExperimentConfig& cfg);

/// "# <provenance>" comment text shared by every CSV the harness writes.
std::string csv_comment(const ExperimentConfig& cfg, ExperimentKind kind);

} // namespace ringsig
