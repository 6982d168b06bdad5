#include "ringsig/channel.hpp"
#include "ringsig/error.hpp"
#include "ringsig/framing.hpp"
#include "ringsig/random.hpp"
#include "ringsig/shaping.hpp"
#include "ringsig/sync.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ringsig;
using std::numbers::pi;

namespace {

std::vector<IqSample> shaped_qpsk(std::size_t n, int ip, double im, std::uint64_t seed)
{
    std::vector<SymbolIndex> idx(n);
    for (std::size_t k = 0; k < n; ++k)
        idx[k] = static_cast<SymbolIndex>(mix64(seed + k) % 4);
    return apply_shaping(modulate(idx, {Scheme::Qpsk, 1.0}), make_factor_stream({seed, ip, im}, n));
}

SyncConfig sync_for(int ip)
{
    SyncConfig s;
    s.effective_order = effective_order(Scheme::Qpsk, ip);
    return s;
}

double wrap(double a) { return std::remainder(a, 2 * pi); }

} // namespace

TEST_SUITE("sync")
{
    TEST_CASE("effective order")
    {
        CHECK(effective_order(Scheme::Qpsk, 0) == 4);
        CHECK(effective_order(Scheme::Qpsk, 1) == 4);
        CHECK(effective_order(Scheme::Qpsk, 3) == 8);
        CHECK(effective_order(Scheme::Qpsk, 4) == 16);
        CHECK(effective_order(Scheme::Bpsk, 0) == 2);
        CHECK(effective_order(Scheme::Psk64, 2) == 64);
        try {
            (void)effective_order(Scheme::Qam16, 0);
            FAIL("expected NotPsk");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NotPsk);
        }
    }

    TEST_CASE("raising shaped symbols to M_eff collapses them onto one ray")
    {
        for (int ip = 0; ip <= 4; ++ip) {
            const auto x = shaped_qpsk(4096, ip, 0.3, 17);
            const unsigned m = effective_order(Scheme::Qpsk, ip);
            double worst = 0;
            for (auto z : x) {
                IqSample p(1, 0);
                for (unsigned i = 0; i < m; ++i)
                    p *= z / std::abs(z);
                worst = std::max(worst, std::abs(std::arg(p)));
            }
            CHECK(worst < 1e-6);
        }
    }

    TEST_CASE("frequency estimate on clean shaped blocks")
    {
        const auto x = shaped_qpsk(4096, 4, 0.3, 3);
        CHECK(std::abs(estimate_freq_offset(x, sync_for(4))) < 1e-5);
        ChannelConfig ch;
        ch.cfo = 1e-3;
        ch.phase_offset = 0.4;
        const auto y = apply_cfo(shaped_qpsk(4096, 0, 1.0, 4), ch);
        CHECK(std::abs(estimate_freq_offset(y, sync_for(0)) - 1e-3) < 5e-5);
        const auto z = apply_cfo(shaped_qpsk(4096, 4, 0.5, 5), ch);
        CHECK(std::abs(estimate_freq_offset(z, sync_for(4)) - 1e-3) < 5e-5);
    }

    TEST_CASE("frequency estimator needs 512 samples")
    {
        const auto x = shaped_qpsk(511, 0, 1.0, 1);
        try {
            (void)estimate_freq_offset(x, sync_for(0));
            FAIL("expected TooFewSamples");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::TooFewSamples);
        }
    }

    TEST_CASE("pll leaves an aligned stream alone")
    {
        const auto x = shaped_qpsk(2000, 3, 0.4, 8);
        const auto out = carrier_sync_pll(x, sync_for(3));
        for (std::size_t k = 500; k < x.size(); ++k)
            CHECK(std::abs(out.samples[k] - x[k]) < 1e-6);
    }

    TEST_CASE("pll pulls in a static phase offset")
    {
        ChannelConfig ch;
        ch.phase_offset = pi / 7;
        const auto x = apply_cfo(shaped_qpsk(2000, 0, 1.0, 9), ch);
        const auto out = carrier_sync_pll(x, sync_for(0));
        const double residual = std::remainder(out.phase.back() - pi / 7, pi / 2);
        CHECK(std::abs(residual) < pi / 16);
        CHECK(mean_grid_phase_error(out.samples, 4, 500) < pi / 16);
    }

    TEST_CASE("pll tracks a small residual frequency on a shaped stream")
    {
        ChannelConfig ch;
        ch.cfo = 5e-4;
        ch.phase_offset = 0.1;
        const auto x = apply_cfo(shaped_qpsk(3000, 4, 0.5, 10), ch);
        const auto out = carrier_sync_pll(x, sync_for(4));
        CHECK(mean_grid_phase_error(out.samples, 16, 500) < 2 * pi / (8 * 16));
    }

    TEST_CASE("pll with the base order instead of M_eff does not converge on a shaped stream")
    {
        ChannelConfig ch;
        ch.phase_offset = 0.05;
        const auto x = apply_cfo(shaped_qpsk(3000, 4, 0.5, 12), ch);
        const auto matched = carrier_sync_pll(x, sync_for(4));
        SyncConfig wrong = sync_for(4);
        wrong.effective_order = 4;
        const auto mismatched = carrier_sync_pll(x, wrong);
        const double bound = 2 * pi / (8 * 16);
        CHECK(mean_grid_phase_error(matched.samples, 16, 500) < bound);
        CHECK(mean_grid_phase_error(mismatched.samples, 16, 500) > bound);
    }

    TEST_CASE("frame detection finds an embedded header")
    {
        const FrameSpec spec;
        const auto header = build_header(spec, 1.0);
        auto block = shaped_qpsk(300, 4, 0.3, 21);
        std::copy(header.begin(), header.end(), block.begin() + 37);
        const auto r = frame_detect(block, header, 0.6);
        CHECK(r.frame_start == 37);
        CHECK(r.correlation_peak > 0.99);
        CHECK(std::abs(wrap(r.phase_estimate)) < 1e-9);

        ChannelConfig flip;
        flip.phase_offset = pi;
        const auto rotated = apply_cfo(block, flip);
        const auto rr = frame_detect(rotated, header, 0.6);
        CHECK(rr.frame_start == 37);
        CHECK(std::abs(wrap(rr.phase_estimate - pi)) < 1e-9);
    }

    TEST_CASE("frame detection is translation-equivariant")
    {
        const FrameSpec spec;
        const auto header = build_header(spec, 1.0);
        auto block = shaped_qpsk(200, 2, 0.5, 22);
        std::copy(header.begin(), header.end(), block.begin() + 50);
        const auto base = frame_detect(block, header, 0.6).frame_start;
        for (std::size_t d : {1u, 7u, 33u}) {
            std::vector<IqSample> shifted = shaped_qpsk(d, 2, 0.5, 23);
            shifted.insert(shifted.end(), block.begin(), block.end());
            CHECK(frame_detect(shifted, header, 0.6).frame_start == base + d);
        }
    }

    TEST_CASE("pure noise raises NoFrame in at least 999 of 1000 trials")
    {
        const auto header = build_header(FrameSpec{}, 1.0);
        const std::vector<IqSample> zero(header.size(), IqSample(0, 0));
        std::size_t alarms = 0;
        for (std::uint64_t t = 0; t < 1000; ++t) {
            // Noise of unit power around an all-zero block.
            ChannelConfig ch;
            ch.es_n0_db = 0;
            ch.noise_seed = t;
            std::vector<IqSample> ones(header.size(), IqSample(1, 0));
            auto noise = apply_awgn(ones, ch);
            for (std::size_t k = 0; k < noise.size(); ++k)
                noise[k] -= ones[k];
            try {
                (void)frame_detect(noise, header, 0.6);
                ++alarms;
            } catch (const Error& e) {
                CHECK(e.code() == ErrorCode::NoFrame);
            }
        }
        CHECK(alarms <= 1);
        CHECK_THROWS_AS((void)frame_detect(zero, header, 0.6), Error);
    }

    TEST_CASE("input shorter than the header is rejected")
    {
        const auto header = build_header(FrameSpec{}, 1.0);
        const std::vector<IqSample> tiny(5, IqSample(1, 0));
        try {
            (void)frame_detect(tiny, header, 0.6);
            FAIL("expected TooFewSamples");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::TooFewSamples);
        }
    }

    TEST_CASE("noiseless loopback decodes every shaping setting")
    {
        FrameSpec spec;
        spec.data_bits = 2000;
        const auto bits = expand_message_to_bits(spec.message, spec.data_bits);
        for (int ip = 0; ip <= 4; ++ip)
            for (int i = 1; i <= 10; ++i) {
                const ShapingConfig sh{static_cast<std::uint64_t>(1000 + ip * 10 + i), ip, i / 10.0};
                const ModConfig mod{Scheme::Qpsk, 1.0};
                const auto f = build_frame(bits, spec, mod, sh);
                const auto rx = receive_frame(f.symbols(), mod, sh, spec, sync_for(ip), f.payload_bits);
                CHECK(rx.stats.bit_errors == 0);
                CHECK(rx.stats.bits_compared == 2000);
                CHECK(rx.bits == f.payload_bits);
                CHECK(rx.sync.frame_start == 0);
                CHECK(rx.stats.evm_post < 1e-6);
            }
    }

    TEST_CASE("receiver with a carrier offset and leading noise")
    {
        FrameSpec spec;
        spec.data_bits = 4000;
        const auto bits = expand_message_to_bits(spec.message, spec.data_bits);
        const ModConfig mod{Scheme::Qpsk, 1.0};
        const ShapingConfig sh{77, 4, 0.5};
        const auto f = build_frame(bits, spec, mod, sh);
        auto tx = shaped_qpsk(25, 4, 0.5, 1234);
        const auto body = f.symbols();
        tx.insert(tx.end(), body.begin(), body.end());
        ChannelConfig ch;
        ch.es_n0_db = 25;
        ch.cfo = 2e-3;
        ch.phase_offset = 1.0;
        ch.noise_seed = 4;
        const auto rx = receive_frame(apply_channel(tx, ch), mod, sh, spec, sync_for(4), f.payload_bits);
        CHECK(rx.sync.frame_start == 25);
        CHECK(std::abs(rx.sync.cfo_estimate - 2e-3) < 2e-4);
        CHECK(rx.stats.bit_errors == 0);
    }

    TEST_CASE("wrong shaping seed gives coin-flip bits")
    {
        FrameSpec spec;
        spec.data_bits = 10000;
        const auto bits = expand_message_to_bits(spec.message, spec.data_bits);
        const ModConfig mod{Scheme::Qpsk, 1.0};
        const auto f = build_frame(bits, spec, mod, {555, 4, 0.3});
        const auto rx = receive_frame(f.symbols(), mod, {556, 4, 0.3}, spec, sync_for(4), f.payload_bits);
        const double ber = static_cast<double>(rx.stats.bit_errors) / rx.stats.bits_compared;
        CHECK(std::abs(ber - 0.5) < 0.02);
    }

    TEST_CASE("truncated capture is a length mismatch")
    {
        FrameSpec spec;
        spec.data_bits = 1000;
        const auto f = build_frame(expand_message_to_bits("a", 1000), spec, {Scheme::Qpsk, 1.0}, {});
        auto s = f.symbols();
        s.pop_back();
        try {
            (void)receive_frame(s, {Scheme::Qpsk, 1.0}, {}, spec, sync_for(0));
            FAIL("expected LengthMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::LengthMismatch);
        }
    }
}
