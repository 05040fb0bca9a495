#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace sasnav {

/// Kaiser-windowed sinc used to spread/gather samples between the continuous
/// delay axis and the discrete time grid. Half-width 8 samples with beta =
/// 12.5 gives <= 1e-6 max relative interpolation error for signals occupying
/// half the Nyquist band (tracks are sampled at 2x the complex bandwidth).
struct InterpKernel {
    static constexpr int half_width = 8;
    static constexpr int taps = 2 * half_width;
    static constexpr double beta = 12.5;

    /// Window value w(u) for u = |x|/half_width in [0, 1].
    static double window(double u) {
        if (u >= 1.0) return 0.0;
        return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - u * u)) / i0_beta();
    }

    /// Kernel value sinc(x) * w(|x|/half_width).
    static double value(double x) {
        const double ax = std::abs(x);
        if (ax >= half_width) return 0.0;
        const double s = (x == 0.0) ? 1.0
                                    : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        return s * window(ax / half_width);
    }

    /// Tap weights for a sample position u (in samples, arbitrary real).
    /// Writes `taps` weights for grid indices first_index() .. +taps-1.
    /// One sine evaluation serves all taps; the window comes from a table.
    static void weights(double u, int& first_index, double* w) {
        const double fl = std::floor(u);
        const int m0 = static_cast<int>(fl) - half_width + 1;
        first_index = m0;
        const double f = u - fl; // fractional part in [0, 1)
        const double s = std::sin(std::numbers::pi * f) / std::numbers::pi;
        // offsets x_k = u - (m0 + k) = f + (half_width - 1 - k)
        double sign = (half_width % 2 == 1) ? 1.0 : -1.0; // (-1)^(half_width-1)
        for (int k = 0; k < taps; ++k) {
            const double x = f + (half_width - 1 - k);
            double v;
            if (x == 0.0) {
                v = 1.0;
            } else {
                v = sign * s / x * window_table(std::abs(x) * inv_half_width());
            }
            w[k] = v;
            sign = -sign;
        }
    }

private:
    static double i0_beta() {
        static const double v = std::cyl_bessel_i(0.0, beta);
        return v;
    }
    static constexpr double inv_half_width() { return 1.0 / half_width; }

    /// Linear-interpolated table of window(u); the window is smooth so 4096
    /// knots keep the table error near 1e-9.
    static double window_table(double u) {
        static const auto table = [] {
            std::array<double, table_size + 1> t{};
            for (int i = 0; i <= table_size; ++i)
                t[static_cast<std::size_t>(i)] = window(static_cast<double>(i) / table_size);
            return t;
        }();
        if (u >= 1.0) return 0.0;
        const double p = u * table_size;
        const int i = static_cast<int>(p);
        const double f = p - i;
        return table[static_cast<std::size_t>(i)] * (1.0 - f) +
               table[static_cast<std::size_t>(i) + 1] * f;
    }

    static constexpr int table_size = 4096;
};

} // namespace sasnav
