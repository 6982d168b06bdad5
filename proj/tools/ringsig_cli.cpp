// ringsig: command-line harness for the ring-shaped noise-signaling modem.
//
//   ringsig ber          BER vs Es/N0 for every scheme in modulation.schemes
//   ringsig ber-factors  BER vs (I_m, I_p), legitimate receiver and wrong-seed attacker
//   ringsig dump-iq      unshaped / phase-only / magnitude-only / shaped constellations
//   ringsig pmi          eavesdropper identification probabilities over the shaping grid
//   ringsig gen-dataset  labelled I/Q dataset for classifier training
//   ringsig train-clf    fit the feature classifier, write model + confusion matrix
//   ringsig keys         list configuration keys

#include "ringsig/error.hpp"
#include "ringsig/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace ringsig;

std::ofstream open_csv(const ExperimentConfig& cfg, const std::string& name)
{
    std::filesystem::create_directories(cfg.out);
    const auto path = cfg.out / name;
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    std::cerr << "writing " << path.string() << '\n';
    return os;
}

int run(ExperimentKind kind, const ExperimentConfig& cfg)
{
    switch (kind) {
    case ExperimentKind::BerCurve: {
        const auto rows = run_ber_curve(cfg);
        auto os = open_csv(cfg, "ber.csv");
        write_ber_curve_csv(os, rows, csv_comment(cfg, kind));
        for (const auto& r : rows)
            std::printf("%-6s %6.2f dB  ber %.4e  theory %.4e  (%zu bits)\n",
                        std::string(to_string(r.scheme)).c_str(), r.es_n0_db, r.link.ber(), r.ber_theory,
                        r.link.bits);
        break;
    }
    case ExperimentKind::BerVsFactors: {
        const auto rows = run_ber_vs_factors(cfg);
        auto os = open_csv(cfg, "ber_factors.csv");
        write_ber_factors_csv(os, rows, csv_comment(cfg, kind));
        for (const auto& r : rows)
            std::printf("Es/N0 %5.1f  I_p %d  I_m %.2f  ber %.4e  attacker %.4f\n", r.es_n0_db,
                        r.phase_intensity, r.magnitude_intensity, r.link.ber(), r.link.attacker_ber());
        break;
    }
    case ExperimentKind::ConstellationDump:
        for (const auto& d : dump_constellation(cfg))
            std::printf("%-15s %zu samples -> %s\n", d.name.c_str(), d.samples.size(), d.file.string().c_str());
        break;
    case ExperimentKind::PmiSweep: {
        const auto model = load_model_for(cfg);
        for (const auto& r : run_pmi_sweep(cfg, model)) {
            std::printf("I_p %d  I_m %.2f  top %-6s PMI(%s) %.3f\n", r.phase_intensity, r.magnitude_intensity,
                        std::string(to_string(r.top())).c_str(), std::string(to_string(cfg.scheme)).c_str(),
                        r.probability[scheme_slot(cfg.scheme)]);
        }
        std::cerr << "writing " << (cfg.out / "pmi.csv").string() << '\n';
        break;
    }
    case ExperimentKind::DatasetGen: {
        const auto dir = cfg.dataset_dir.empty() ? cfg.out / "dataset" : cfg.dataset_dir;
        const auto rows = generate_dataset(cfg, dir);
        std::printf("%zu blocks -> %s\n", rows.size(), (dir / "manifest.csv").string().c_str());
        break;
    }
    case ExperimentKind::TrainClassifier: {
        const auto model = run_train_classifier(cfg);
        const auto acc = model.test_accuracy();
        for (auto s : kAllSchemes)
            std::printf("%-6s held-out accuracy %.3f\n", std::string(to_string(s)).c_str(), acc[scheme_slot(s)]);
        std::printf("shrinkage %g -> %s\n", model.shrinkage(), (cfg.out / "classifier.model").string().c_str());
        break;
    }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Ring-shaped noise-signaling modem harness"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t trials = 0;
    app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out, "output directory");
    app.add_option("--trials", trials, "trial count override (frames, PMI trials or blocks per class)");
    app.add_option("-s,--set", overrides, "extra key=value overrides, applied after --config");

    const std::vector<std::pair<std::string, ExperimentKind>> commands = {
        {"ber", ExperimentKind::BerCurve},
        {"ber-factors", ExperimentKind::BerVsFactors},
        {"dump-iq", ExperimentKind::ConstellationDump},
        {"pmi", ExperimentKind::PmiSweep},
        {"gen-dataset", ExperimentKind::DatasetGen},
        {"train-clf", ExperimentKind::TrainClassifier},
    };
    const std::vector<std::string> help = {
        "BER vs Es/N0 against closed-form theory",
        "BER vs magnitude/phase intensity, with a wrong-seed attacker",
        "write constellation I/Q dumps for the four shaping variants",
        "eavesdropper identification probabilities over the shaping grid",
        "generate the labelled classifier dataset (raw I/Q + manifest)",
        "train the feature classifier and record its test confusion",
    };
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < commands.size(); ++i)
        subs.push_back(app.add_subcommand(commands[i].first, help[i]));
    auto* keys = app.add_subcommand("keys", "list configuration keys");

    CLI11_PARSE(app, argc, argv);

    try {
        if (keys->parsed()) {
            for (const auto& k : ExperimentConfig::schema())
                std::printf("%-28s %-8s %s\n", std::string(k.key).c_str(), std::string(k.type).c_str(),
                            std::string(k.description).c_str());
            return 0;
        }
        ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw Error(ErrorCode::ConfigError, "--set expects key=value, got '" + kv + "'");
            cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (app.count("--seed"))
            cfg.seed = seed;
        if (app.count("--out"))
            cfg.out = out;
        if (app.count("--trials"))
            cfg.trials = trials;
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed())
                return run(commands[i].second, cfg);
    } catch (const Error& e) {
        std::fprintf(stderr, "ringsig: %s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ringsig: %s\n", e.what());
        return 1;
    }
    return 0;
}
