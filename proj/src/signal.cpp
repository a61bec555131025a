#include "paprlab/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace paprlab {

int bits_per_symbol(Modulation mod) {
    return mod == Modulation::QPSK ? 2 : 4;
}

std::string modulation_name(Modulation mod) {
    return mod == Modulation::QPSK ? "qpsk" : "qam16";
}

Modulation modulation_from_name(const std::string& name) {
    if (name == "qpsk") return Modulation::QPSK;
    if (name == "qam16") return Modulation::QAM16;
    throw std::invalid_argument("unknown modulation: " + name);
}

std::vector<std::size_t> SpectrumSymbol::data_indices() const {
    std::vector<std::size_t> out;
    out.reserve(values.size() - pilot_indices.size());
    std::size_t p = 0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (p < pilot_indices.size() && pilot_indices[p] == k) {
            ++p;
            continue;
        }
        out.push_back(k);
    }
    return out;
}

void SpectrumSymbol::validate() const {
    if (values.size() < 2)
        throw std::invalid_argument("spectrum must have K >= 2 subcarriers");
    if (pilot_indices.size() >= values.size())
        throw std::invalid_argument("pilot count must be < K");
    for (std::size_t i = 0; i < pilot_indices.size(); ++i) {
        if (pilot_indices[i] >= values.size())
            throw std::invalid_argument("pilot index out of range");
        if (i > 0 && pilot_indices[i] <= pilot_indices[i - 1])
            throw std::invalid_argument("pilot indices must be strictly increasing");
    }
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt10 = 0.31622776601683793320;

double qam16_level(int sign_bit, int mag_bit) {
    // Gray per axis: 00 -> +1, 01 -> +3, 10 -> -1, 11 -> -3.
    const double mag = mag_bit ? 3.0 : 1.0;
    return (sign_bit ? -mag : mag) * kInvSqrt10;
}

} // namespace

std::vector<ComplexSample> map_qpsk(const std::vector<int>& bits) {
    if (bits.size() % 2 != 0)
        throw std::length_error("QPSK needs an even number of bits");
    std::vector<ComplexSample> out(bits.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double re = (1 - 2 * bits[2 * i]) * kInvSqrt2;
        const double im = (1 - 2 * bits[2 * i + 1]) * kInvSqrt2;
        out[i] = {re, im};
    }
    return out;
}

std::vector<ComplexSample> map_qam16(const std::vector<int>& bits) {
    if (bits.size() % 4 != 0)
        throw std::length_error("16-QAM needs a multiple of 4 bits");
    std::vector<ComplexSample> out(bits.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = {qam16_level(bits[4 * i], bits[4 * i + 1]),
                  qam16_level(bits[4 * i + 2], bits[4 * i + 3])};
    }
    return out;
}

std::vector<ComplexSample> map_bits(Modulation mod, const std::vector<int>& bits) {
    return mod == Modulation::QPSK ? map_qpsk(bits) : map_qam16(bits);
}

TimeSignal idft(const SpectrumSymbol& spectrum, std::size_t oversampling) {
    const std::size_t k_count = spectrum.values.size();
    if (k_count == 0) throw std::domain_error("idft of empty spectrum");
    if (oversampling < 1) throw std::domain_error("oversampling must be >= 1");

    const std::size_t n_count = oversampling * k_count;
    // exp(+j*2*pi*k*n/N) only takes N distinct values; build that table once
    // and walk it with index steps instead of evaluating polar per term.
    std::vector<ComplexSample> twiddle(n_count);
    for (std::size_t m = 0; m < n_count; ++m) {
        const double phase =
            2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n_count);
        twiddle[m] = {std::cos(phase), std::sin(phase)};
    }

    TimeSignal out;
    out.oversampling = oversampling;
    out.samples.resize(n_count);
    const double scale = 1.0 / std::sqrt(static_cast<double>(k_count));
    for (std::size_t n = 0; n < n_count; ++n) {
        double acc_re = 0.0;
        double acc_im = 0.0;
        std::size_t idx = 0; // (k*n) mod N, advanced by n per k
        for (std::size_t k = 0; k < k_count; ++k) {
            const ComplexSample& s = spectrum.values[k];
            const ComplexSample& w = twiddle[idx];
            acc_re += s.real() * w.real() - s.imag() * w.imag();
            acc_im += s.real() * w.imag() + s.imag() * w.real();
            idx += n;
            if (idx >= n_count) idx -= n_count;
        }
        out.samples[n] = {scale * acc_re, scale * acc_im};
    }
    return out;
}

double mean_energy(const std::vector<ComplexSample>& values) {
    if (values.empty()) throw std::domain_error("mean_energy of empty vector");
    double acc = 0.0;
    for (const auto& c : values) acc += std::norm(c);
    return acc / static_cast<double>(values.size());
}

double papr_db(const TimeSignal& signal) {
    if (signal.samples.empty()) throw std::domain_error("papr of empty signal");
    double peak = 0.0;
    double acc = 0.0;
    for (const auto& c : signal.samples) {
        const double p = std::norm(c);
        peak = std::max(peak, p);
        acc += p;
    }
    const double mean = acc / static_cast<double>(signal.samples.size());
    if (mean == 0.0) throw std::domain_error("papr undefined for all-zero signal");
    return 10.0 * std::log10(peak / mean);
}

} // namespace paprlab
