#include "flutesim/fft.hpp"

#include <cmath>
#include <numbers>

#include "flutesim/error.hpp"

namespace flutesim {

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_inplace(std::vector<std::complex<double>>& data) {
    const std::size_t n = data.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw Error(ErrorCode::DomainError, "FFT size must be a power of two");

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = data[i + k];
                const std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

std::vector<std::complex<double>> fft_real(std::span<const double> signal,
                                           std::size_t fft_size) {
    std::vector<std::complex<double>> data(fft_size, {0.0, 0.0});
    const std::size_t n = std::min(signal.size(), fft_size);
    for (std::size_t i = 0; i < n; ++i) data[i] = {signal[i], 0.0};
    fft_inplace(data);
    return data;
}

} // namespace flutesim
