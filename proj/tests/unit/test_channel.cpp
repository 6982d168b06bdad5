#include "ringsig/channel.hpp"
#include "ringsig/error.hpp"
#include "ringsig/random.hpp"
#include "ringsig/shaping.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ringsig;

TEST_SUITE("channel")
{
    TEST_CASE("infinite Es/N0 leaves samples untouched")
    {
        const std::vector<IqSample> x = {IqSample(1, 2), IqSample(-3, 0.5)};
        CHECK(apply_awgn(x, ChannelConfig{}) == x);
    }

    TEST_CASE("measured SNR and output power at 10 dB")
    {
        const std::vector<IqSample> x(100000, IqSample(0, 1));
        ChannelConfig cfg;
        cfg.es_n0_db = 10;
        cfg.noise_seed = 99;
        const auto y = apply_awgn(x, cfg);
        double noise = 0, total = 0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            noise += std::norm(y[k] - x[k]);
            total += std::norm(y[k]);
        }
        noise /= x.size();
        total /= x.size();
        CHECK(std::abs(linear_to_db(1.0 / noise) - 10.0) < 0.1);
        CHECK(total == doctest::Approx(1.1).epsilon(0.02));
    }

    TEST_CASE("noise is referenced to the measured block power")
    {
        const std::vector<IqSample> x(1000, IqSample(0.5, 0));
        CHECK(awgn_noise_variance(x, 0.0) == doctest::Approx(0.25));
        CHECK(awgn_noise_variance(x, 10.0) == doctest::Approx(0.025));
        CHECK(awgn_noise_variance(x, std::numeric_limits<double>::infinity()) == 0.0);
    }

    TEST_CASE("noise is deterministic in the seed")
    {
        const std::vector<IqSample> x(64, IqSample(1, 0));
        ChannelConfig cfg;
        cfg.es_n0_db = 3;
        cfg.noise_seed = 5;
        CHECK(apply_awgn(x, cfg) == apply_awgn(x, cfg));
        auto other = cfg;
        other.noise_seed = 6;
        CHECK(apply_awgn(x, cfg) != apply_awgn(x, other));
    }

    TEST_CASE("empty input is rejected")
    {
        const std::vector<IqSample> none;
        ChannelConfig cfg;
        cfg.es_n0_db = 3;
        try {
            (void)apply_awgn(none, cfg);
            FAIL("expected EmptyInput");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyInput);
        }
    }

    TEST_CASE("bpsk at Eb/N0 4 dB matches Q(sqrt(2 Eb/N0))")
    {
        const std::size_t n = 2000000;
        std::vector<IqSample> x(n);
        for (std::size_t k = 0; k < n; ++k)
            x[k] = (mix64(k) & 1) ? IqSample(-1, 0) : IqSample(1, 0);
        ChannelConfig cfg;
        cfg.es_n0_db = 4;
        cfg.noise_seed = 2;
        const auto y = apply_awgn(x, cfg);
        std::size_t errors = 0;
        for (std::size_t k = 0; k < n; ++k)
            errors += (y[k].real() < 0) != (x[k].real() < 0);
        const double theory = q_function(std::sqrt(2 * db_to_linear(4)));
        CHECK(std::abs(static_cast<double>(errors) / n / theory - 1) < 0.10);
    }

    TEST_CASE("carrier offset rotation")
    {
        const std::vector<IqSample> ones(4, IqSample(1, 0));
        CHECK(apply_cfo(ones, ChannelConfig{}) == ones);
        ChannelConfig half;
        half.phase_offset = std::numbers::pi;
        CHECK(std::abs(apply_cfo(ones, half)[0] - IqSample(-1, 0)) < 1e-15);
        ChannelConfig quarter;
        quarter.cfo = 0.25;
        const auto r = apply_cfo(ones, quarter);
        const std::vector<IqSample> want = {IqSample(1, 0), IqSample(0, 1), IqSample(-1, 0), IqSample(0, -1)};
        for (std::size_t k = 0; k < 4; ++k)
            CHECK(std::abs(r[k] - want[k]) < 1e-12);
        ChannelConfig far;
        far.cfo = 0.3;
        std::vector<IqSample> x(1000, IqSample(0.3, -0.4));
        for (auto z : apply_cfo(x, far))
            CHECK(std::abs(z) == doctest::Approx(0.5).epsilon(1e-15));
        far.cfo = 0.5;
        CHECK_THROWS_AS((void)apply_cfo(x, far), Error);
    }
}
