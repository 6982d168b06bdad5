// Acceptance run: one PASS/FAIL line per criterion, detail lines indented
// below it. Exit status is the number of failed criteria.

#include "ringsig/channel.hpp"
#include "ringsig/classifier.hpp"
#include "ringsig/experiments.hpp"
#include "ringsig/framing.hpp"
#include "ringsig/random.hpp"
#include "ringsig/shaping.hpp"
#include "ringsig/sync.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <set>
#include <string>
#include <vector>

using namespace ringsig;
using Clock = std::chrono::steady_clock;
using std::numbers::pi;

namespace {

int failures = 0;

void verdict(bool ok, const char* id, const std::string& text)
{
    std::printf("%s  %-4s %s\n", ok ? "PASS" : "FAIL", id, text.c_str());
    std::fflush(stdout);
    failures += !ok;
}

template <typename... Args>
void detail(const char* format, Args... args)
{
    std::printf("        ");
    std::printf(format, args...);
    std::printf("\n");
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* format, double a, double b = 0, double c = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

ExperimentConfig link_config()
{
    ExperimentConfig cfg;
    cfg.seed = 20240601;
    cfg.carrier = CarrierMode::Auto;
    return cfg;
}

// C1: unshaped QPSK against the Gray closed form.
void unshaped_qpsk_ber()
{
    const auto t0 = Clock::now();
    const auto cfg = link_config();
    bool ok = true;
    for (double db : {4.0, 6.0, 8.0, 10.0}) {
        const auto st = simulate_link(cfg, Scheme::Qpsk, db, 0, 1.0, 1000000);
        const double theory = q_function(std::sqrt(db_to_linear(db)));
        const double rel = st.ber() / theory - 1.0;
        ok = ok && std::abs(rel) <= 0.15 && st.bits >= 1000000;
        detail("Es/N0 %4.1f dB  ber %.4e  Q(sqrt(Es/N0)) %.4e  rel %+.3f  bits %zu  frames lost %zu", db, st.ber(),
               theory, rel, st.bits, st.frames_lost);
    }
    const double elapsed = seconds_since(t0);
    ok = ok && elapsed < 120.0;
    verdict(ok, "C1", fmt("unshaped QPSK BER within 15%% of theory at 4..10 dB, 1e6 bits/point (%.1f s)", elapsed));
}

// C2: noiseless loopback through the full receiver.
void shaping_round_trip()
{
    const auto t0 = Clock::now();
    const FrameSpec spec;
    const ModConfig mod{Scheme::Qpsk, 1.0};
    const auto bits = expand_message_to_bits(spec.message, spec.data_bits);
    std::size_t errors = 0, compared = 0, cases = 0;
    for (int ip = 0; ip <= 4; ++ip)
        for (double im : {0.1, 0.3, 0.5, 0.7, 1.0}) {
            const ShapingConfig sh{hash_words({99, static_cast<std::uint64_t>(ip), std::bit_cast<std::uint64_t>(im)}),
                                   ip, im};
            const auto frame = build_frame(bits, spec, mod, sh);
            SyncConfig sync;
            sync.effective_order = effective_order(mod.scheme, ip);
            const auto rx = receive_frame(frame.symbols(), mod, sh, spec, sync, frame.payload_bits);
            errors += rx.stats.bit_errors;
            compared += rx.stats.bits_compared;
            ++cases;
        }
    verdict(errors == 0 && cases == 25,
            "C2", fmt("noiseless loopback, I_p 0..4 x I_m {.1,.3,.5,.7,1}: %.0f bit errors in %.0f bits (%.2f s)",
                      static_cast<double>(errors), static_cast<double>(compared), seconds_since(t0)));
}

// C3: mean shaped amplitude.
void ring_amplitude()
{
    bool ok = true;
    const double amplitude = 1.0;
    for (double im : {0.2, 0.5, 0.8}) {
        const std::size_t n = 100000;
        std::vector<SymbolIndex> idx(n);
        for (std::size_t k = 0; k < n; ++k)
            idx[k] = static_cast<SymbolIndex>(mix64(k) & 3);
        const auto shaped = apply_shaping(modulate(idx, {Scheme::Qpsk, amplitude}),
                                          make_factor_stream({0xA3, 4, im}, n));
        double mean = 0;
        for (auto z : shaped)
            mean += std::abs(z);
        mean /= static_cast<double>(n);
        const double want = amplitude * (im + 1) / 2;
        const double rel = mean / want - 1;
        ok = ok && std::abs(rel) <= 0.01;
        detail("I_m %.1f  mean |S| %.5f  A(I_m+1)/2 %.5f  rel %+.4f  ring_power %.5f", im, mean, want, rel,
               ring_power(amplitude, im));
    }
    verdict(ok, "C3", "mean shaped amplitude equals A(I_m+1)/2 within 1% over 1e5 symbols");
}

// C4: measured error rate between the literal and averaged ring expressions.
void ring_ber_ordering()
{
    auto cfg = link_config();
    bool ok = true;
    for (double im : {0.3, 0.6, 1.0}) {
        const auto st = simulate_link(cfg, Scheme::Qpsk, 8.0, 4, im, 1000000);
        const double lit = theoretical_ber_ring(st.e0_n0, im, RingBerMode::Literal);
        const double avg = theoretical_ber_ring(st.e0_n0, im, RingBerMode::Averaged);
        const double ser = st.ser();
        const double sigma = std::sqrt(ser * (1 - ser) / static_cast<double>(st.symbols));
        const double lo = std::min(lit, avg) - 3 * sigma, hi = std::max(lit, avg) + 3 * sigma;
        const bool in = ser >= lo && ser <= hi;
        ok = ok && in;
        detail("I_m %.1f  E0/N0 %.2f dB  literal %.4e  averaged %.4e  SER %.4e (3 sigma %.1e)  BER %.4e", im,
               linear_to_db(st.e0_n0), lit, avg, ser, 3 * sigma, st.ber());
    }
    verdict(ok, "C4", "shaped QPSK symbol error rate at 8 dB lies between literal and averaged ring expressions +/- 3 sigma");
}

// C5: BER against I_m at fixed Es/N0.
void ber_vs_magnitude()
{
    auto cfg = link_config();
    std::vector<double> ber;
    const std::vector<double> grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    for (double im : grid)
        ber.push_back(simulate_link(cfg, Scheme::Qpsk, 8.0, 4, im, 1000000).ber());
    int inversions = 0;
    std::string row;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0 && ber[i] > ber[i - 1])
            ++inversions;
        row += fmt(" %.1f:%.3e", grid[i], ber[i]);
    }
    detail("Es/N0 8 dB, I_p 4, 1e6 bits/point:%s", row.c_str());
    verdict(inversions <= 1, "C5", fmt("BER non-increasing in I_m over 0.1..1.0 (%.0f inversions, 1 allowed)", inversions));
}

// C6: BER across I_p at I_m = 1.
void ber_vs_phase()
{
    auto cfg = link_config();
    std::vector<LinkStats> st;
    const std::vector<int> grid = {0, 1, 3, 4};
    std::size_t bits = 0, errors = 0;
    for (int ip : grid) {
        st.push_back(simulate_link(cfg, Scheme::Qpsk, 8.0, ip, 1.0, 1000000));
        bits += st.back().bits;
        errors += st.back().bit_errors;
    }
    const double pooled = static_cast<double>(errors) / static_cast<double>(bits);
    bool ok = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double sigma = std::sqrt(pooled * (1 - pooled) / static_cast<double>(st[i].bits));
        const double z = (st[i].ber() - pooled) / sigma;
        ok = ok && std::abs(z) <= 3;
        detail("I_p %d  ber %.4e  pooled %.4e  z %+.2f", grid[i], st[i].ber(), pooled, z);
    }
    verdict(ok, "C6", "BER at I_m 1 is the same for I_p {0,1,3,4} within 3 sigma (Es/N0 8 dB)");
}

// C7: receiver holding the wrong shaping seed.
void attacker()
{
    auto cfg = link_config();
    cfg.trials = 1;
    cfg.attacker_seed = 0xBAD5EED;
    const auto st = simulate_link(cfg, Scheme::Qpsk, 10.0, 4, 0.3, 10000, true);
    const double ber = st.attacker_ber();
    verdict(std::abs(ber - 0.5) <= 0.02 && st.attacker_bits >= 10000, "C7",
            fmt("wrong-seed receiver BER %.4f over %.0f bits (I_p 4, I_m 0.3, Es/N0 10 dB; legitimate %.2e)", ber,
                static_cast<double>(st.attacker_bits), st.ber()));
}

// C8: frequency estimate and the mismatched-order PLL control.
void synchronisation()
{
    const FrameSpec spec;
    const ModConfig mod{Scheme::Qpsk, 1.0};
    const auto bits = expand_message_to_bits(spec.message, spec.data_bits);
    SyncConfig sync;
    sync.effective_order = effective_order(mod.scheme, 4);
    double worst = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto frame = build_frame(bits, spec, mod, {hash_words({5, s}), 4, 0.3});
        ChannelConfig ch;
        ch.es_n0_db = 15;
        ch.cfo = 1e-3;
        ch.phase_offset = 0.37 * static_cast<double>(s);
        ch.noise_seed = hash_words({6, s});
        worst = std::max(worst, std::abs(estimate_freq_offset(apply_channel(frame.symbols(), ch), sync) - 1e-3));
    }
    detail("cfo 1e-3 at 15 dB, shaped QPSK I_p 4 I_m 0.3, 100 seeds: worst error %.2e", worst);

    std::vector<SymbolIndex> idx(3000);
    for (std::size_t k = 0; k < idx.size(); ++k)
        idx[k] = static_cast<SymbolIndex>(mix64(k + 77) & 3);
    ChannelConfig rot;
    rot.phase_offset = 0.05;
    const auto x = apply_cfo(apply_shaping(modulate(idx, mod), make_factor_stream({8, 4, 0.5}, idx.size())), rot);
    SyncConfig wrong = sync;
    wrong.effective_order = 4;
    const double bound = 2 * pi / (8.0 * sync.effective_order);
    const double matched = mean_grid_phase_error(carrier_sync_pll(x, sync).samples, 16, 500);
    const double mismatched = mean_grid_phase_error(carrier_sync_pll(x, wrong).samples, 16, 500);
    detail("PLL on I_p 4 stream: M_eff 16 error %.4f rad, loop order 4 error %.4f rad, bound %.4f rad", matched,
           mismatched, bound);
    verdict(worst <= 2e-4 && matched < bound && mismatched > bound, "C8",
            "CFO within 2e-4 at 15 dB over 100 seeds; PLL converges only with the matched M_eff");
}

// C9: clustered structure of the dumps.
void constellation_structure()
{
    ExperimentConfig cfg;
    cfg.out = "acceptance_dumps";
    cfg.phase_intensity = 4;
    cfg.magnitude_intensity = 0.3;
    cfg.dump_symbols = 10000;
    const auto dumps = dump_constellation(cfg);
    const auto count_angles = [](const std::vector<IqSample>& s, double tol) {
        std::vector<double> centres;
        for (auto z : s) {
            const double a = std::arg(z);
            bool seen = false;
            for (double c : centres)
                seen = seen || std::abs(std::remainder(a - c, 2 * pi)) < tol;
            if (!seen)
                centres.push_back(a);
        }
        return centres.size();
    };
    const std::size_t phase_clusters = count_angles(dumps[1].samples, 1e-6);
    const std::size_t mag_angles = count_angles(dumps[2].samples, 1e-6);
    double lo = 1e9, hi = 0;
    for (auto z : dumps[2].samples) {
        lo = std::min(lo, std::abs(z));
        hi = std::max(hi, std::abs(z));
    }
    const double a = cfg.amplitude, im = cfg.magnitude_intensity;
    const bool span = lo >= im * a - 1e-12 && hi <= a + 1e-12 && lo < im * a * 1.01 && hi > a * 0.99;
    detail("phase-only: %zu angle clusters; magnitude-only: %zu angles, |S| in [%.4f, %.4f]", phase_clusters,
           mag_angles, lo, hi);
    verdict(phase_clusters == 16 && mag_angles == 4 && span, "C9",
            "phase-only I_p 4 QPSK shows 16 angles; magnitude-only keeps 4 angles spanning [I_m A, A]");
}

// C10 and C11 share one trained classifier.
void classifier_criteria()
{
    const auto t0 = Clock::now();
    DatasetConfig d;
    d.seed = 1;
    const auto model = train(synthesize_features(d));
    const double train_s = seconds_since(t0);
    const auto& m = model.test_confusion();
    const auto acc = model.test_accuracy();

    PmiSweepConfig p;
    p.trials = 500;
    const auto t1 = Clock::now();
    const auto reports = pmi_sweep(p, model);
    const double sweep_s = seconds_since(t1);

    const auto q = scheme_slot(Scheme::Qpsk);
    bool covert = true;
    for (const auto& r : reports) {
        const double pq = r.probability[q];
        if (r.phase_intensity == 1 && r.magnitude_intensity == 1.0)
            covert = covert && pq >= 0.8;
        if (r.phase_intensity == 1 && r.magnitude_intensity <= 0.3)
            covert = covert && pq < 0.5;
        if (r.phase_intensity == 4)
            covert = covert && r.top() != Scheme::Qpsk;
        detail("I_p %d  I_m %.1f  PMI(QPSK) %.3f  top %s (%.3f)", r.phase_intensity, r.magnitude_intensity, pq,
               std::string(to_string(r.top())).c_str(), r.probability[scheme_slot(r.top())]);
    }
    const double total_s = train_s + sweep_s;
    verdict(covert && total_s < 600, "C10",
            fmt("PMI(QPSK) >= 0.8 at I_p 1 I_m 1 and < 0.5 for I_m <= 0.3; never top-1 at I_p 4 (500 trials, %.0f s)",
                total_s));

    const auto s32 = scheme_slot(Scheme::Psk32), s64 = scheme_slot(Scheme::Psk64);
    std::size_t n32 = 0, n64 = 0;
    for (auto v : m[s32])
        n32 += v;
    for (auto v : m[s64])
        n64 += v;
    const double mutual = static_cast<double>(m[s32][s64] + m[s64][s32]) / static_cast<double>(n32 + n64);
    for (auto s : kAllSchemes)
        detail("%-6s held-out accuracy %.3f", std::string(to_string(s)).c_str(), acc[scheme_slot(s)]);
    detail("32PSK->64PSK %.3f  64PSK->32PSK %.3f  pooled %.3f", static_cast<double>(m[s32][s64]) / n32,
           static_cast<double>(m[s64][s32]) / n64, mutual);
    const bool ok = acc[scheme_slot(Scheme::Bpsk)] >= 0.9 && acc[q] >= 0.9 && acc[scheme_slot(Scheme::Qam8)] >= 0.9 &&
                    mutual >= 0.2;
    verdict(ok, "C11", fmt("held-out accuracy >= 0.90 for BPSK/QPSK/8QAM; 32PSK/64PSK mutual confusion %.3f >= 0.20 "
                           "(training %.0f s)",
                           mutual, train_s));
}

} // namespace

int main()
{
    unshaped_qpsk_ber();
    shaping_round_trip();
    ring_amplitude();
    ring_ber_ordering();
    ber_vs_magnitude();
    ber_vs_phase();
    attacker();
    synchronisation();
    constellation_structure();
    classifier_criteria();
    std::printf("%d criteria failed\n", failures);
    return failures;
}
