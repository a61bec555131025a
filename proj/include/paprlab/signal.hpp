#ifndef PAPRLAB_SIGNAL_HPP
#define PAPRLAB_SIGNAL_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace paprlab {

using ComplexSample = std::complex<double>;

enum class Modulation { QPSK, QAM16 };

int bits_per_symbol(Modulation mod);
std::string modulation_name(Modulation mod);
Modulation modulation_from_name(const std::string& name);

/// Frequency-domain OFDM symbol: K subcarrier values plus the (sorted,
/// distinct) indices reserved for pilots. Data subcarriers hold constellation
/// points; pilot bins are whatever the caller last wrote there.
struct SpectrumSymbol {
    std::vector<ComplexSample> values;
    std::vector<std::size_t> pilot_indices;
    Modulation modulation = Modulation::QPSK;

    std::size_t size() const { return values.size(); }
    std::size_t num_pilots() const { return pilot_indices.size(); }

    /// Indices not reserved for pilots, ascending.
    std::vector<std::size_t> data_indices() const;

    /// Throws std::invalid_argument if K < 2, pilot indices are out of
    /// range, unsorted or duplicated, or N_p >= K.
    void validate() const;
};

/// Complex baseband time samples, length = oversampling * K.
struct TimeSignal {
    std::vector<ComplexSample> samples;
    std::size_t oversampling = 1;
};

/// Gray-mapped unit-energy QPSK: pair (b0, b1) -> ((1-2*b0) + j(1-2*b1))/sqrt(2).
std::vector<ComplexSample> map_qpsk(const std::vector<int>& bits);

/// Gray-mapped 16-QAM, levels {+-1, +-3}/sqrt(10) per axis, mean energy 1.
/// Bits (b0,b1,b2,b3): b0/b1 select the I level, b2/b3 the Q level;
/// (sign, magnitude) = (0,0)->+1, (0,1)->+3, (1,0)->-1, (1,1)->-3.
std::vector<ComplexSample> map_qam16(const std::vector<int>& bits);

std::vector<ComplexSample> map_bits(Modulation mod, const std::vector<int>& bits);

/// Unitary-convention inverse DFT, zero padded to N = L*K samples:
///   x[n] = (1/sqrt(K)) * sum_k s[k] * exp(+j*2*pi*k*n/N)
/// Direct summation, exact for any K (including 15 and 30).
TimeSignal idft(const SpectrumSymbol& spectrum, std::size_t oversampling = 1);

/// (1/M) * sum |c_i|^2. Throws std::domain_error on empty input.
double mean_energy(const std::vector<ComplexSample>& values);

/// 10*log10(max|x|^2 / mean|x|^2). The expectation is realized as the
/// per-symbol sample mean. Throws std::domain_error on empty or all-zero input.
double papr_db(const TimeSignal& signal);

} // namespace paprlab

#endif // PAPRLAB_SIGNAL_HPP
