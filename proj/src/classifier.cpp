#include "ringsig/classifier.hpp"

#include "ringsig/channel.hpp"
#include "ringsig/error.hpp"
#include "ringsig/random.hpp"
#include "ringsig/shaping.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

namespace ringsig {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::VectorXd to_vector(const FeatureVector& f)
{
    return Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

// Shrinks toward the diagonal and adds a floor scaled to the average variance.
Eigen::MatrixXd regularize(const Eigen::MatrixXd& cov, double lambda)
{
    const auto d = cov.rows();
    const double avg_var = cov.trace() / static_cast<double>(d);
    Eigen::MatrixXd diag = cov.diagonal().asDiagonal();
    Eigen::MatrixXd out = (1.0 - lambda) * cov + lambda * diag;
    out.diagonal().array() += lambda * avg_var + 1e-12;
    return out;
}

struct Moments {
    std::size_t count = 0;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(kFeatureCount);
    Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(kFeatureCount, kFeatureCount);
};

std::string comment_line(const std::string& comment)
{
    return comment.empty() ? std::string() : "# " + comment + "\n";
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

} // namespace

std::string_view to_string(Split s) noexcept
{
    switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
    }
    return "train";
}

std::vector<double> DatasetConfig::default_snr_grid()
{
    std::vector<double> grid;
    for (int db = 0; db <= 30; db += 2)
        grid.push_back(db);
    return grid;
}

void DatasetConfig::validate() const
{
    if (blocks_per_class == 0)
        throw Error(ErrorCode::DomainError, "dataset needs at least one block per class");
    if (block_length < kMinFeatureSamples)
        throw Error(ErrorCode::TooFewSamples, "dataset blocks must hold at least 1024 symbols");
    if (snr_grid_db.empty())
        throw Error(ErrorCode::DomainError, "SNR grid is empty");
}

BlockInfo block_info(const DatasetConfig& cfg, Scheme label, std::size_t index)
{
    BlockInfo info;
    info.label = label;
    info.index = index;
    info.seed = hash_words({cfg.seed, scheme_slot(label), index});
    info.snr_db = cfg.snr_grid_db[mix64(info.seed ^ 0x534E52ULL) % cfg.snr_grid_db.size()];
    info.split = split_of(index);
    return info;
}

std::vector<IqSample> synthesize_block(const BlockInfo& info, std::size_t length)
{
    const CounterStream stream(info.seed, "symbols");
    const unsigned m = order(info.label);
    std::vector<SymbolIndex> idx(length);
    for (std::size_t k = 0; k < length; ++k)
        idx[k] = static_cast<SymbolIndex>(stream.bits(k) % m);
    const auto clean = modulate(idx, ModConfig{info.label, 1.0});

    ChannelConfig ch;
    ch.es_n0_db = info.snr_db;
    ch.phase_offset = kTwoPi * CounterStream(info.seed, "carrier").uniform(0);
    ch.noise_seed = mix64(info.seed ^ 0x4E4F495345ULL);
    return apply_channel(clean, ch);
}

std::vector<LabeledFeatures> synthesize_features(const DatasetConfig& cfg)
{
    cfg.validate();
    std::vector<LabeledFeatures> out;
    out.reserve(cfg.blocks_per_class * kSchemeCount);
    for (auto label : kAllSchemes)
        for (std::size_t i = 0; i < cfg.blocks_per_class; ++i) {
            const auto info = block_info(cfg, label, i);
            out.push_back({label, info.snr_db, info.split,
                           extract_features(synthesize_block(info, cfg.block_length))});
        }
    return out;
}

ClassifierModel::ClassifierModel(std::vector<Component> components, double shrinkage)
    : components_(std::move(components)), shrinkage_(shrinkage)
{
    prepare();
}

void ClassifierModel::prepare()
{
    std::array<bool, kSchemeCount> present{};
    cached_.clear();
    cached_.reserve(components_.size());
    for (const auto& c : components_) {
        if (c.mean.size() != static_cast<Eigen::Index>(kFeatureCount) ||
            c.covariance.rows() != c.mean.size() || c.covariance.cols() != c.mean.size())
            throw Error(ErrorCode::DomainError, "classifier component has the wrong dimension");
        Eigen::LLT<Eigen::MatrixXd> llt(c.covariance);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorCode::DomainError, "classifier covariance is not positive definite");
        Cached cache;
        const Eigen::MatrixXd l = llt.matrixL();
        cache.inv_chol = l.triangularView<Eigen::Lower>().solve(
            Eigen::MatrixXd::Identity(l.rows(), l.cols()));
        const double log_det = 2.0 * l.diagonal().array().log().sum();
        cache.log_norm = -0.5 * (static_cast<double>(kFeatureCount) * std::log(kTwoPi) + log_det);
        cached_.push_back(std::move(cache));
        present[scheme_slot(c.label)] = true;
    }
    for (auto s : kAllSchemes)
        if (!present[scheme_slot(s)])
            throw Error(ErrorCode::MissingClass, std::string(to_string(s)) + " has no model component");
}

std::array<double, kSchemeCount> ClassifierModel::log_likelihoods(const FeatureVector& f,
                                                                  std::optional<double> snr_db) const
{
    // With a hint, each class keeps its components within the window, or its
    // nearest ones when none fall inside.
    std::array<double, kSchemeCount> nearest;
    nearest.fill(std::numeric_limits<double>::infinity());
    if (snr_db)
        for (const auto& c : components_) {
            auto& d = nearest[scheme_slot(c.label)];
            d = std::min(d, std::abs(c.snr_db - *snr_db));
        }
    const Eigen::VectorXd x = to_vector(f);
    std::array<std::vector<double>, kSchemeCount> terms;
    for (std::size_t i = 0; i < components_.size(); ++i) {
        if (snr_db) {
            const double d = std::abs(components_[i].snr_db - *snr_db);
            if (d > std::max(kSnrHintWindowDb, nearest[scheme_slot(components_[i].label)]))
                continue;
        }
        const Eigen::VectorXd z = cached_[i].inv_chol * (x - components_[i].mean);
        terms[scheme_slot(components_[i].label)].push_back(cached_[i].log_norm - 0.5 * z.squaredNorm());
    }
    std::array<double, kSchemeCount> out{};
    for (std::size_t c = 0; c < kSchemeCount; ++c) {
        const double peak = *std::max_element(terms[c].begin(), terms[c].end());
        double acc = 0.0;
        for (double t : terms[c])
            acc += std::exp(t - peak);
        out[c] = peak + std::log(acc / static_cast<double>(terms[c].size()));
    }
    return out;
}

Classification ClassifierModel::classify_features(const FeatureVector& f, std::optional<double> snr_db) const
{
    const auto ll = log_likelihoods(f, snr_db);
    Classification out;
    std::size_t best = 0;
    for (std::size_t c = 1; c < kSchemeCount; ++c)
        if (ll[c] > ll[best])
            best = c;
    out.scheme = kAllSchemes[best];
    double total = 0.0;
    for (std::size_t c = 0; c < kSchemeCount; ++c) {
        out.scores[c] = std::isfinite(ll[c]) ? std::exp(ll[c] - ll[best]) : 0.0;
        total += out.scores[c];
    }
    for (auto& s : out.scores)
        s /= total;
    return out;
}

std::array<double, kSchemeCount> ClassifierModel::test_accuracy() const
{
    std::array<double, kSchemeCount> acc{};
    for (std::size_t r = 0; r < kSchemeCount; ++r) {
        std::size_t total = 0;
        for (auto v : confusion_[r])
            total += v;
        acc[r] = total ? static_cast<double>(confusion_[r][r]) / static_cast<double>(total) : 0.0;
    }
    return acc;
}

void ClassifierModel::save(std::ostream& os) const
{
    os << "ringsig-classifier " << kFormatVersion << '\n';
    os << "features " << kFeatureCount;
    for (auto name : feature_names())
        os << ' ' << name;
    os << "\nclasses " << kSchemeCount;
    for (auto s : kAllSchemes)
        os << ' ' << to_string(s);
    os << '\n' << std::setprecision(17);
    os << "shrinkage " << shrinkage_ << '\n';
    os << "components " << components_.size() << '\n';
    for (const auto& c : components_) {
        os << "component " << to_string(c.label) << ' ' << c.snr_db << ' ' << c.count << '\n';
        os << "mean";
        for (Eigen::Index i = 0; i < c.mean.size(); ++i)
            os << ' ' << c.mean(i);
        os << '\n';
        for (Eigen::Index r = 0; r < c.covariance.rows(); ++r) {
            os << "cov";
            for (Eigen::Index k = 0; k < c.covariance.cols(); ++k)
                os << ' ' << c.covariance(r, k);
            os << '\n';
        }
    }
    os << "test_confusion\n";
    for (const auto& row : confusion_) {
        for (std::size_t k = 0; k < row.size(); ++k)
            os << (k ? " " : "") << row[k];
        os << '\n';
    }
    os << "end\n";
}

void ClassifierModel::save(const std::filesystem::path& path) const
{
    std::ofstream os(path);
    if (!os)
        throw Error(ErrorCode::IoError, "cannot write model file " + path.string());
    save(os);
    if (!os)
        throw Error(ErrorCode::IoError, "failed writing model file " + path.string());
}

ClassifierModel ClassifierModel::load(std::istream& is)
{
    const auto fail = [](const std::string& what) {
        return Error(ErrorCode::IoError, "malformed classifier model: " + what);
    };
    const auto expect_word = [&](const char* word) {
        std::string tok;
        if (!(is >> tok) || tok != word)
            throw fail(std::string("expected '") + word + "'");
    };

    int version = 0;
    expect_word("ringsig-classifier");
    if (!(is >> version) || version != kFormatVersion)
        throw fail("unsupported version");

    std::size_t n = 0;
    expect_word("features");
    if (!(is >> n) || n != kFeatureCount)
        throw fail("feature count");
    for (auto name : feature_names()) {
        std::string tok;
        if (!(is >> tok) || tok != name)
            throw fail("feature list");
    }
    expect_word("classes");
    if (!(is >> n) || n != kSchemeCount)
        throw fail("class count");
    for (auto s : kAllSchemes) {
        std::string tok;
        if (!(is >> tok) || tok != to_string(s))
            throw fail("class list");
    }
    double shrinkage = 0.0;
    expect_word("shrinkage");
    if (!(is >> shrinkage))
        throw fail("shrinkage");
    expect_word("components");
    if (!(is >> n))
        throw fail("component count");

    std::vector<Component> components(n);
    for (auto& c : components) {
        std::string label;
        expect_word("component");
        if (!(is >> label >> c.snr_db >> c.count))
            throw fail("component header");
        const auto scheme = parse_scheme(label);
        if (!scheme)
            throw fail("unknown class " + label);
        c.label = *scheme;
        c.mean.resize(kFeatureCount);
        c.covariance.resize(kFeatureCount, kFeatureCount);
        expect_word("mean");
        for (std::size_t i = 0; i < kFeatureCount; ++i)
            if (!(is >> c.mean(static_cast<Eigen::Index>(i))))
                throw fail("mean values");
        for (std::size_t r = 0; r < kFeatureCount; ++r) {
            expect_word("cov");
            for (std::size_t k = 0; k < kFeatureCount; ++k)
                if (!(is >> c.covariance(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k))))
                    throw fail("covariance values");
        }
    }
    ConfusionMatrix confusion{};
    expect_word("test_confusion");
    for (auto& row : confusion)
        for (auto& v : row)
            if (!(is >> v))
                throw fail("confusion matrix");
    expect_word("end");

    ClassifierModel model(std::move(components), shrinkage);
    model.confusion_ = confusion;
    return model;
}

ClassifierModel ClassifierModel::load(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw Error(ErrorCode::ModelMissing, "cannot open model file " + path.string());
    return load(is);
}

ConfusionMatrix evaluate(const ClassifierModel& model, std::span<const LabeledFeatures> dataset,
                         Split split)
{
    ConfusionMatrix m{};
    for (const auto& item : dataset)
        if (item.split == split)
            ++m[scheme_slot(item.label)][scheme_slot(model.classify_features(item.features).scheme)];
    return m;
}

ClassifierModel train(std::span<const LabeledFeatures> dataset, const TrainOptions& options)
{
    if (options.shrinkage_candidates.empty())
        throw Error(ErrorCode::DomainError, "no shrinkage candidates given");

    std::map<std::pair<std::size_t, double>, Moments> groups;
    for (const auto& item : dataset) {
        if (item.split != Split::Train)
            continue;
        auto& g = groups[{scheme_slot(item.label), item.snr_db}];
        const Eigen::VectorXd x = to_vector(item.features);
        ++g.count;
        g.sum += x;
        g.outer.noalias() += x * x.transpose();
    }
    std::array<bool, kSchemeCount> present{};
    for (const auto& [key, g] : groups)
        present[key.first] = true;
    for (auto s : kAllSchemes)
        if (!present[scheme_slot(s)])
            throw Error(ErrorCode::MissingClass,
                        std::string(to_string(s)) + " has no training blocks");

    std::vector<ClassifierModel::Component> raw;
    for (const auto& [key, g] : groups) {
        ClassifierModel::Component c;
        c.label = kAllSchemes[key.first];
        c.snr_db = key.second;
        c.count = g.count;
        const double n = static_cast<double>(g.count);
        c.mean = g.sum / n;
        c.covariance = g.outer / n - c.mean * c.mean.transpose();
        raw.push_back(std::move(c));
    }

    const auto build = [&](double lambda) {
        auto comps = raw;
        for (auto& c : comps)
            c.covariance = regularize(c.covariance, lambda);
        return ClassifierModel(std::move(comps), lambda);
    };

    const bool has_validation = std::any_of(dataset.begin(), dataset.end(), [](const auto& d) {
        return d.split == Split::Validation;
    });
    double best_lambda = options.shrinkage_candidates.front();
    if (has_validation && options.shrinkage_candidates.size() > 1) {
        std::size_t best_correct = 0;
        bool first = true;
        for (double lambda : options.shrinkage_candidates) {
            const auto conf = evaluate(build(lambda), dataset, Split::Validation);
            std::size_t correct = 0;
            for (std::size_t c = 0; c < kSchemeCount; ++c)
                correct += conf[c][c];
            if (first || correct > best_correct) {
                best_correct = correct;
                best_lambda = lambda;
                first = false;
            }
        }
    }
    auto model = build(best_lambda);
    model.set_test_confusion(evaluate(model, dataset, Split::Test));
    return model;
}

Classification classify(std::span<const IqSample> samples, const ClassifierModel& model,
                        std::optional<double> snr_db)
{
    return model.classify_features(extract_features(samples), snr_db);
}

Scheme PmiReport::top() const
{
    std::size_t best = 0;
    for (std::size_t c = 1; c < kSchemeCount; ++c)
        if (probability[c] > probability[best])
            best = c;
    return kAllSchemes[best];
}

void PmiSweepConfig::validate() const
{
    if (!is_psk(base))
        throw Error(ErrorCode::NotPsk, "PMI sweeps shape a PSK base scheme");
    if (trials < kMinPmiTrials)
        throw Error(ErrorCode::DomainError, "PMI sweeps need at least 200 trials per grid point");
    if (block_length < kMinFeatureSamples)
        throw Error(ErrorCode::TooFewSamples, "PMI blocks must hold at least 1024 symbols");
    for (double im : magnitude_grid)
        ShapingConfig{0, 0, im}.validate();
    for (int ip : phase_grid)
        ShapingConfig{0, ip, 1.0}.validate();
}

std::vector<IqSample> pmi_trial_block(const PmiSweepConfig& cfg, double magnitude_intensity,
                                      int phase_intensity, std::size_t trial)
{
    const std::uint64_t im_bits = std::bit_cast<std::uint64_t>(magnitude_intensity);
    const std::uint64_t seed = hash_words({cfg.seed, im_bits,
                                           static_cast<std::uint64_t>(phase_intensity), trial});
    const CounterStream stream(seed, "symbols");
    const unsigned m = order(cfg.base);
    std::vector<SymbolIndex> idx(cfg.block_length);
    for (std::size_t k = 0; k < idx.size(); ++k)
        idx[k] = static_cast<SymbolIndex>(stream.bits(k) % m);
    const auto clean = modulate(idx, ModConfig{cfg.base, 1.0});
    const ShapingConfig shaping{mix64(seed ^ 0x5345435245ULL), phase_intensity, magnitude_intensity};
    const auto shaped = apply_shaping(clean, make_factor_stream(shaping, clean.size()));

    ChannelConfig ch;
    ch.es_n0_db = cfg.es_n0_db;
    ch.phase_offset = kTwoPi * CounterStream(seed, "carrier").uniform(0);
    ch.noise_seed = mix64(seed ^ 0x4E4F495345ULL);
    return apply_channel(shaped, ch);
}

std::vector<PmiReport> pmi_sweep(const PmiSweepConfig& cfg, const ClassifierModel& model)
{
    cfg.validate();
    const auto hint = cfg.snr_aware ? std::optional<double>(cfg.es_n0_db) : std::nullopt;
    std::vector<PmiReport> out;
    for (int ip : cfg.phase_grid)
        for (double im : cfg.magnitude_grid) {
            PmiReport rep;
            rep.magnitude_intensity = im;
            rep.phase_intensity = ip;
            rep.es_n0_db = cfg.es_n0_db;
            rep.trials = cfg.trials;
            std::array<std::size_t, kSchemeCount> hits{};
            for (std::size_t t = 0; t < cfg.trials; ++t)
                ++hits[scheme_slot(
                    classify(pmi_trial_block(cfg, im, ip, t), model, hint).scheme)];
            for (std::size_t c = 0; c < kSchemeCount; ++c)
                rep.probability[c] = static_cast<double>(hits[c]) / static_cast<double>(cfg.trials);
            out.push_back(rep);
        }
    return out;
}

void write_pmi_csv(std::ostream& os, std::span<const PmiReport> reports, const std::string& comment)
{
    os << comment_line(comment) << "I_m,I_p,es_n0_db";
    for (auto s : kAllSchemes)
        os << ',' << to_string(s);
    os << ",trials\n";
    std::ostringstream line;
    line.imbue(std::locale::classic());
    line << std::setprecision(10);
    for (const auto& r : reports) {
        line.str({});
        line << r.magnitude_intensity << ',' << r.phase_intensity << ',' << r.es_n0_db;
        for (double p : r.probability)
            line << ',' << p;
        line << ',' << r.trials << '\n';
        os << line.str();
    }
}

std::vector<PmiReport> read_pmi_csv(std::istream& is)
{
    std::string line;
    do {
        if (!std::getline(is, line))
            throw Error(ErrorCode::IoError, "PMI CSV has no header row");
    } while (!line.empty() && line.front() == '#');

    const auto header = split_csv(line);
    std::vector<std::string> expected = {"I_m", "I_p", "es_n0_db"};
    for (auto s : kAllSchemes)
        expected.emplace_back(to_string(s));
    expected.emplace_back("trials");
    if (header != expected)
        throw Error(ErrorCode::IoError, "PMI CSV header does not match the schema");

    std::vector<PmiReport> out;
    while (std::getline(is, line)) {
        if (line.empty() || line.front() == '#')
            continue;
        const auto cells = split_csv(line);
        if (cells.size() != expected.size())
            throw Error(ErrorCode::IoError, "PMI CSV row has " + std::to_string(cells.size()) + " cells");
        PmiReport r;
        try {
            r.magnitude_intensity = std::stod(cells[0]);
            r.phase_intensity = std::stoi(cells[1]);
            r.es_n0_db = std::stod(cells[2]);
            for (std::size_t c = 0; c < kSchemeCount; ++c)
                r.probability[c] = std::stod(cells[3 + c]);
            r.trials = std::stoul(cells.back());
        } catch (const std::exception&) {
            throw Error(ErrorCode::IoError, "PMI CSV row is not numeric: " + line);
        }
        out.push_back(r);
    }
    return out;
}

void write_confusion_csv(std::ostream& os, const ConfusionMatrix& m, const std::string& comment)
{
    os << comment_line(comment) << "true";
    for (auto s : kAllSchemes)
        os << ',' << to_string(s);
    os << ",accuracy\n";
    std::ostringstream line;
    line.imbue(std::locale::classic());
    line << std::setprecision(10);
    for (std::size_t r = 0; r < kSchemeCount; ++r) {
        std::size_t total = 0;
        line.str({});
        line << to_string(kAllSchemes[r]);
        for (auto v : m[r]) {
            line << ',' << v;
            total += v;
        }
        line << ',' << (total ? static_cast<double>(m[r][r]) / static_cast<double>(total) : 0.0) << '\n';
        os << line.str();
    }
}

} // namespace ringsig
