#include "ringsig/error.hpp"
#include "ringsig/experiments.hpp"
#include "ringsig/iq_io.hpp"
#include "ringsig/shaping.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

using namespace ringsig;
namespace fs = std::filesystem;

namespace {

ExperimentConfig scratch_config(const std::string& name)
{
    ExperimentConfig cfg;
    cfg.out = fs::path(RINGSIG_TEST_TMP) / "harness" / name;
    fs::remove_all(cfg.out);
    return cfg;
}

std::vector<std::string> lines_of(const fs::path& p)
{
    std::ifstream is(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(is, l);)
        out.push_back(l);
    return out;
}

} // namespace

TEST_SUITE("harness")
{
    TEST_CASE("shaped mpsk theory reduces to the plain closed form at I_m 1")
    {
        CHECK(theoretical_ber_shaped_mpsk(Scheme::Qpsk, 5.0, 1.0) == theoretical_ber_mpsk(Scheme::Qpsk, 5.0));
        const double x = 6.0;
        CHECK(theoretical_ber_shaped_mpsk(Scheme::Qpsk, x, 0.5) > theoretical_ber_mpsk(Scheme::Qpsk, x));
    }

    TEST_CASE("link simulation is deterministic and meets its bit budget")
    {
        auto cfg = scratch_config("link");
        const auto a = simulate_link(cfg, Scheme::Qpsk, 6.0, 4, 0.5, 30000, true);
        const auto b = simulate_link(cfg, Scheme::Qpsk, 6.0, 4, 0.5, 30000, true);
        CHECK(a.bits >= 30000);
        CHECK(a.bits == b.bits);
        CHECK(a.bit_errors == b.bit_errors);
        CHECK(a.attacker_errors == b.attacker_errors);
        CHECK(a.ber() > 0.0);
        CHECK(std::abs(a.attacker_ber() - 0.5) < 0.03);
        cfg.trials = 2;
        const auto fixed = simulate_link(cfg, Scheme::Qpsk, 6.0, 4, 0.5, 1000000);
        CHECK(fixed.frames == 2);
    }

    TEST_CASE("noiseless link is error free and E0/N0 is infinite")
    {
        auto cfg = scratch_config("clean");
        const auto s = simulate_link(cfg, Scheme::Psk8, std::numeric_limits<double>::infinity(), 4, 0.2, 20000);
        CHECK(s.bit_errors == 0);
        CHECK(std::isinf(s.e0_n0));
    }

    TEST_CASE("E0/N0 refers the noise to the unshaped amplitude")
    {
        auto cfg = scratch_config("e0");
        cfg.trials = 3;
        const auto s = simulate_link(cfg, Scheme::Qpsk, 10.0, 0, 0.5, 0);
        // Shaping at I_m = 0.5 lowers the block power to E[M^2] = 7/12.
        CHECK(s.e0_n0 == doctest::Approx(10.0 / (7.0 / 12.0)).epsilon(0.02));
    }

    TEST_CASE("ber curve csv")
    {
        auto cfg = scratch_config("ber");
        cfg.es_n0_db = {6, 8};
        cfg.ber_bits = 20000;
        const auto rows = run_ber_curve(cfg);
        REQUIRE(rows.size() == 2);
        std::ostringstream ss;
        write_ber_curve_csv(ss, rows, csv_comment(cfg, ExperimentKind::BerCurve));
        std::istringstream is(ss.str());
        std::string c, h;
        std::getline(is, c);
        std::getline(is, h);
        CHECK(c.rfind("# experiment=ber config_hash=", 0) == 0);
        CHECK(h.rfind("scheme,es_n0_db,ber_measured,ber_theory,bits,errors", 0) == 0);
    }

    TEST_CASE("ber-vs-factors sweeps the whole grid")
    {
        auto cfg = scratch_config("factors");
        cfg.es_n0_db = {8};
        cfg.ip_grid = {0, 4};
        cfg.im_grid = {0.5, 1.0};
        cfg.ber_bits = 10000;
        const auto rows = run_ber_vs_factors(cfg);
        REQUIRE(rows.size() == 4);
        std::set<std::pair<int, double>> seen;
        for (const auto& r : rows)
            seen.insert({r.phase_intensity, r.magnitude_intensity});
        CHECK(seen.size() == 4);
        std::ostringstream ss;
        write_ber_factors_csv(ss, rows, "");
        CHECK(ss.str().rfind("I_m,I_p,es_n0_db,ber_measured,ber_attacker", 0) == 0);
    }

    TEST_CASE("constellation dumps")
    {
        auto cfg = scratch_config("dump");
        cfg.phase_intensity = 4;
        cfg.magnitude_intensity = 0.3;
        cfg.dump_symbols = 4000;
        const auto dumps = dump_constellation(cfg);
        REQUIRE(dumps.size() == 4);
        for (const auto& d : dumps) {
            CHECK(fs::exists(d.file));
            const auto back = read_iq_file(d.file);
            CHECK(back.size() == 4000);
            const auto meta = read_metadata(d.file);
            CHECK(meta.get("sample_count") == "4000");
            CHECK(meta.get("scheme") == "QPSK");
            CHECK(std::stod(meta.get("I_m")) == d.magnitude_intensity);
        }
        std::set<long> phase_only;
        for (auto z : dumps[1].samples)
            phase_only.insert(std::lround(std::arg(z) / (std::numbers::pi / 8)) & 15);
        CHECK(phase_only.size() == 16);
        double lo = 10, hi = 0;
        std::set<long> mag_angles;
        for (auto z : dumps[2].samples) {
            lo = std::min(lo, std::abs(z));
            hi = std::max(hi, std::abs(z));
            mag_angles.insert(std::lround(std::arg(z) / (std::numbers::pi / 2)) & 3);
        }
        CHECK(mag_angles.size() == 4);
        CHECK(lo >= 0.3 - 1e-12);
        CHECK(lo < 0.31);
        CHECK(hi <= 1.0 + 1e-12);
        CHECK(hi > 0.99);
        cfg.scheme = Scheme::Qam16;
        CHECK_THROWS_AS((void)dump_constellation(cfg), Error);
    }

    TEST_CASE("dataset on disk matches the in-memory synthesis")
    {
        auto cfg = scratch_config("dataset");
        cfg.dataset_blocks_per_class = 12;
        cfg.dataset_dir = cfg.out / "ds";
        const auto rows = generate_dataset(cfg, cfg.dataset_dir);
        CHECK(rows.size() == 120);
        const auto manifest = lines_of(cfg.dataset_dir / "manifest.csv");
        REQUIRE(manifest.size() == 122);
        CHECK(manifest[0].rfind("# experiment=gen-dataset", 0) == 0);
        CHECK(manifest[1] == "file,block,offset,length,label,snr_db,seed,split");
        const auto back = read_manifest(cfg.dataset_dir);
        REQUIRE(back.size() == rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(back[i].file == rows[i].file);
            CHECK(back[i].offset == rows[i].offset);
            CHECK(back[i].seed == rows[i].seed);
            CHECK(back[i].split == rows[i].split);
        }
        CHECK(fs::file_size(cfg.dataset_dir / "8QAM.iq") == 12 * 1024 * 8);

        const auto disk = load_dataset_features(cfg.dataset_dir);
        const auto mem = synthesize_features(dataset_config_from(cfg));
        REQUIRE(disk.size() == mem.size());
        for (std::size_t i = 0; i < disk.size(); ++i) {
            CHECK(disk[i].label == mem[i].label);
            // Disk samples are float32, so features agree to single precision.
            for (std::size_t f = 0; f < kFeatureCount; ++f)
                CHECK(disk[i].features[f] == doctest::Approx(mem[i].features[f]).epsilon(1e-3));
        }
    }

    TEST_CASE("train then sweep through the harness files")
    {
        auto cfg = scratch_config("pipeline");
        cfg.dataset_blocks_per_class = 120;
        const auto model = run_train_classifier(cfg);
        CHECK(fs::exists(cfg.out / "classifier.model"));
        const auto conf = lines_of(cfg.out / "confusion.csv");
        REQUIRE(conf.size() == 12);
        CHECK(conf[1].rfind("true,BPSK", 0) == 0);

        cfg.pmi_trials = 200;
        cfg.pmi_im_grid = {1.0, 0.2};
        cfg.pmi_ip_grid = {1};
        cfg.pmi_dump_blocks = true;
        const auto loaded = load_model_for(cfg);
        const auto reports = run_pmi_sweep(cfg, loaded);
        REQUIRE(reports.size() == 2);
        std::ifstream is(cfg.out / "pmi.csv");
        const auto parsed = read_pmi_csv(is);
        REQUIRE(parsed.size() == 2);
        CHECK(parsed[0].probability == reports[0].probability);
        const auto blocks = cfg.out / "pmi_blocks" / "ip1_im0.2.iq";
        REQUIRE(fs::exists(blocks));
        CHECK(fs::file_size(blocks) == 200 * 1024 * 8);

        auto missing = cfg;
        missing.pmi_model = "nope.model";
        try {
            (void)load_model_for(missing);
            FAIL("expected ModelMissing");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ModelMissing);
        }
    }
}
