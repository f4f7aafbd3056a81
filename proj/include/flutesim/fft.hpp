#pragma once

#include <complex>
#include <span>
#include <vector>

namespace flutesim {

/// In-place iterative radix-2 FFT. data.size() must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& data);

/// Forward FFT of a real signal zero-padded (or truncated) to fft_size.
/// fft_size must be a power of two.
std::vector<std::complex<double>> fft_real(std::span<const double> signal,
                                           std::size_t fft_size);

std::size_t next_power_of_two(std::size_t n);

} // namespace flutesim
