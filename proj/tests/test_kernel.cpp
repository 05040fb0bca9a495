#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "sasnav/kernel.hpp"
#include "sasnav/rng.hpp"

using namespace sasnav;

TEST_CASE("kernel weights match direct evaluation and hit exact samples") {
    Rng rng(17);
    double w[InterpKernel::taps];
    for (int trial = 0; trial < 200; ++trial) {
        const double u = rng.uniform(-50.0, 50.0);
        int m0 = 0;
        InterpKernel::weights(u, m0, w);
        for (int k = 0; k < InterpKernel::taps; ++k) {
            const double x = u - (m0 + k);
            CHECK(w[k] == Catch::Approx(InterpKernel::value(x)).margin(1e-9));
        }
    }
    // integer sample positions reproduce a delta
    int m0 = 0;
    InterpKernel::weights(12.0, m0, w);
    for (int k = 0; k < InterpKernel::taps; ++k) {
        if (m0 + k == 12)
            CHECK(w[k] == Catch::Approx(1.0));
        else
            CHECK(std::abs(w[k]) < 1e-15);
    }
}

TEST_CASE("kernel interpolates half-band signals to 1e-6") {
    // random signals occupying half the Nyquist band, as tracks sampled at
    // twice the complex bandwidth do
    Rng rng(99);
    const int n = 512;
    const int n_freqs = 40;
    double max_err = 0.0, max_ref = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> freqs(n_freqs);
        std::vector<std::complex<double>> amps(n_freqs);
        for (int i = 0; i < n_freqs; ++i) {
            freqs[i] = rng.uniform(-0.25, 0.25);
            amps[i] = {rng.normal(), rng.normal()};
        }
        const auto signal = [&](double t) {
            std::complex<double> s{};
            for (int i = 0; i < n_freqs; ++i)
                s += amps[i] * std::polar(1.0, 2.0 * std::numbers::pi * freqs[i] * t);
            return s;
        };
        std::vector<std::complex<double>> samples(n);
        for (int i = 0; i < n; ++i) samples[i] = signal(i);

        double w[InterpKernel::taps];
        for (int probe = 0; probe < 100; ++probe) {
            const double u = rng.uniform(InterpKernel::half_width + 1.0,
                                         n - InterpKernel::half_width - 2.0);
            int m0 = 0;
            InterpKernel::weights(u, m0, w);
            std::complex<double> est{};
            for (int k = 0; k < InterpKernel::taps; ++k) est += w[k] * samples[m0 + k];
            const std::complex<double> ref = signal(u);
            max_err = std::max(max_err, std::abs(est - ref));
            max_ref = std::max(max_ref, std::abs(ref));
        }
    }
    CHECK(max_err / max_ref < 1e-6);
}
