#pragma once

#include "ringsig/features.hpp"
#include "ringsig/modem.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ringsig {

enum class Split : std::uint8_t { Train, Validation, Test };

std::string_view to_string(Split s) noexcept;

/// 80/10/10 assignment by block index within a class.
constexpr Split split_of(std::size_t block_index) noexcept
{
    const auto r = block_index % 10;
    return r < 8 ? Split::Train : (r == 8 ? Split::Validation : Split::Test);
}

struct DatasetConfig {
    std::size_t blocks_per_class = 20000;
    std::size_t block_length = 1024;
    std::vector<double> snr_grid_db = default_snr_grid();
    std::uint64_t seed = 1;

    static std::vector<double> default_snr_grid(); // 0, 2, ..., 30 dB
    void validate() const;
};

struct BlockInfo {
    Scheme label = Scheme::Bpsk;
    std::size_t index = 0;
    double snr_db = 0.0;
    std::uint64_t seed = 0;
    Split split = Split::Train;
};

/// Label, SNR, seed and split of block `index` of class `label`.
BlockInfo block_info(const DatasetConfig& cfg, Scheme label, std::size_t index);

/// Uniform random symbols of the block's class, a uniform random carrier
/// phase and AWGN at the block's SNR.
std::vector<IqSample> synthesize_block(const BlockInfo& info, std::size_t length);

struct LabeledFeatures {
    Scheme label = Scheme::Bpsk;
    double snr_db = 0.0;
    Split split = Split::Train;
    FeatureVector features{};
};

/// Feature vectors for every block of every class, without keeping the samples.
std::vector<LabeledFeatures> synthesize_features(const DatasetConfig& cfg);

inline constexpr double kSnrHintWindowDb = 2.0;

using ConfusionMatrix = std::array<std::array<std::size_t, kSchemeCount>, kSchemeCount>;

struct Classification {
    Scheme scheme = Scheme::Bpsk;
    std::array<double, kSchemeCount> scores{}; // posterior under a uniform prior
};

/// One full-covariance Gaussian per (class, training SNR); a class likelihood
/// is the equal-weight mixture of its components.
class ClassifierModel
{
public:
    struct Component {
        Scheme label = Scheme::Bpsk;
        double snr_db = 0.0;
        std::size_t count = 0;
        Eigen::VectorXd mean;
        Eigen::MatrixXd covariance;
    };

    static constexpr int kFormatVersion = 1;

    ClassifierModel() = default;
    ClassifierModel(std::vector<Component> components, double shrinkage);

    const std::vector<Component>& components() const noexcept { return components_; }
    double shrinkage() const noexcept { return shrinkage_; }

    /// Per-class log-likelihood. With `snr_db`, only components trained within
    /// kSnrHintWindowDb of it take part (the nearest ones when none are that close).
    std::array<double, kSchemeCount> log_likelihoods(const FeatureVector& f,
                                                     std::optional<double> snr_db = std::nullopt) const;
    Classification classify_features(const FeatureVector& f, std::optional<double> snr_db = std::nullopt) const;

    const ConfusionMatrix& test_confusion() const noexcept { return confusion_; }
    void set_test_confusion(const ConfusionMatrix& m) { confusion_ = m; }
    /// Row-normalized diagonal of the test confusion matrix.
    std::array<double, kSchemeCount> test_accuracy() const;

    void save(std::ostream& os) const;
    void save(const std::filesystem::path& path) const;
    static ClassifierModel load(std::istream& is);
    static ClassifierModel load(const std::filesystem::path& path);

private:
    struct Cached {
        Eigen::MatrixXd inv_chol; // L^{-1} where covariance = L L^T
        double log_norm = 0.0;    // -0.5 * (d log 2pi + log det)
    };

    void prepare();

    std::vector<Component> components_;
    std::vector<Cached> cached_;
    double shrinkage_ = 0.0;
    ConfusionMatrix confusion_{};
};

struct TrainOptions {
    std::vector<double> shrinkage_candidates = {1e-6, 1e-4, 1e-3, 1e-2, 1e-1};
};

/// Fits the components on the Train split, picks the covariance shrinkage
/// with the best Validation accuracy and records the Test confusion matrix.
ClassifierModel train(std::span<const LabeledFeatures> dataset, const TrainOptions& options = {});

Classification classify(std::span<const IqSample> samples, const ClassifierModel& model,
                        std::optional<double> snr_db = std::nullopt);

ConfusionMatrix evaluate(const ClassifierModel& model, std::span<const LabeledFeatures> dataset,
                         Split split);

/// Identification probabilities for one point of the shaping grid.
struct PmiReport {
    double magnitude_intensity = 1.0;
    int phase_intensity = 0;
    double es_n0_db = 20.0;
    std::array<double, kSchemeCount> probability{};
    std::size_t trials = 0;

    Scheme top() const;
};

inline constexpr std::size_t kMinPmiTrials = 200;

struct PmiSweepConfig {
    Scheme base = Scheme::Qpsk;
    std::vector<double> magnitude_grid = {1.0, 0.8, 0.6, 0.4, 0.3, 0.2, 0.1};
    std::vector<int> phase_grid = {1, 4};
    double es_n0_db = 20.0;
    std::size_t trials = 500;
    std::size_t block_length = 1024;
    std::uint64_t seed = 1;
    bool snr_aware = true; // the eavesdropper knows the channel SNR

    void validate() const;
};

/// Shaped block seen by the eavesdropper for one sweep trial: random base
/// symbols, shaping with a per-trial secret, random carrier phase and AWGN.
std::vector<IqSample> pmi_trial_block(const PmiSweepConfig& cfg, double magnitude_intensity,
                                      int phase_intensity, std::size_t trial);

std::vector<PmiReport> pmi_sweep(const PmiSweepConfig& cfg, const ClassifierModel& model);

/// Columns: I_m, I_p, es_n0_db, one per class, trials. An optional comment
/// line (without the leading '#') precedes the header row.
void write_pmi_csv(std::ostream& os, std::span<const PmiReport> reports, const std::string& comment = {});
std::vector<PmiReport> read_pmi_csv(std::istream& is);

void write_confusion_csv(std::ostream& os, const ConfusionMatrix& m, const std::string& comment = {});

} // namespace ringsig
