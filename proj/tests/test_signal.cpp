#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "paprlab/rng.hpp"
#include "paprlab/signal.hpp"

using namespace paprlab;

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt10 = 0.31622776601683793320;

// Independent oracle: evaluate each exp() term directly instead of walking a
// twiddle table.
std::vector<ComplexSample> idft_oracle(const std::vector<ComplexSample>& s,
                                       std::size_t oversampling) {
    const std::size_t k_count = s.size();
    const std::size_t n_count = oversampling * k_count;
    std::vector<ComplexSample> out(n_count);
    const double scale = 1.0 / std::sqrt(static_cast<double>(k_count));
    for (std::size_t n = 0; n < n_count; ++n) {
        ComplexSample acc{0.0, 0.0};
        for (std::size_t k = 0; k < k_count; ++k) {
            const double phase = 2.0 * M_PI * static_cast<double>(k) *
                                 static_cast<double>(n) / static_cast<double>(n_count);
            acc += s[k] * std::exp(ComplexSample{0.0, phase});
        }
        out[n] = scale * acc;
    }
    return out;
}

SpectrumSymbol random_spectrum(std::size_t k, std::uint64_t seed) {
    SplitMix64 rng(seed);
    SpectrumSymbol sym;
    sym.values.resize(k);
    for (auto& v : sym.values) v = {rng.next_symmetric(1.0), rng.next_symmetric(1.0)};
    return sym;
}

double energy(const std::vector<ComplexSample>& v) {
    double acc = 0.0;
    for (const auto& c : v) acc += std::norm(c);
    return acc;
}

} // namespace

TEST_SUITE("signal") {

TEST_CASE("modulation helpers") {
    CHECK(bits_per_symbol(Modulation::QPSK) == 2);
    CHECK(bits_per_symbol(Modulation::QAM16) == 4);
    CHECK(modulation_name(Modulation::QPSK) == "qpsk");
    CHECK(modulation_name(Modulation::QAM16) == "qam16");
    CHECK(modulation_from_name("qpsk") == Modulation::QPSK);
    CHECK(modulation_from_name("qam16") == Modulation::QAM16);
    CHECK_THROWS_AS(modulation_from_name("bpsk"), std::invalid_argument);
}

TEST_CASE("qpsk gray map hits the four unit-energy points") {
    const auto pts = map_qpsk({0, 0, 0, 1, 1, 0, 1, 1});
    REQUIRE(pts.size() == 4);
    CHECK(pts[0].real() == doctest::Approx(kInvSqrt2).epsilon(1e-15));
    CHECK(pts[0].imag() == doctest::Approx(kInvSqrt2).epsilon(1e-15));
    CHECK(pts[1].real() == doctest::Approx(kInvSqrt2).epsilon(1e-15));
    CHECK(pts[1].imag() == doctest::Approx(-kInvSqrt2).epsilon(1e-15));
    CHECK(pts[2].real() == doctest::Approx(-kInvSqrt2).epsilon(1e-15));
    CHECK(pts[2].imag() == doctest::Approx(kInvSqrt2).epsilon(1e-15));
    CHECK(pts[3].real() == doctest::Approx(-kInvSqrt2).epsilon(1e-15));
    CHECK(pts[3].imag() == doctest::Approx(-kInvSqrt2).epsilon(1e-15));
    for (const auto& p : pts) CHECK(std::norm(p) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("qam16 gray map: sign/magnitude per axis, mean energy one") {
    const auto a = map_qam16({0, 0, 0, 0});
    CHECK(a[0].real() == doctest::Approx(kInvSqrt10).epsilon(1e-15));
    CHECK(a[0].imag() == doctest::Approx(kInvSqrt10).epsilon(1e-15));
    const auto b = map_qam16({0, 1, 1, 1});
    CHECK(b[0].real() == doctest::Approx(3.0 * kInvSqrt10).epsilon(1e-15));
    CHECK(b[0].imag() == doctest::Approx(-3.0 * kInvSqrt10).epsilon(1e-15));
    const auto c = map_qam16({1, 0, 0, 1});
    CHECK(c[0].real() == doctest::Approx(-kInvSqrt10).epsilon(1e-15));
    CHECK(c[0].imag() == doctest::Approx(3.0 * kInvSqrt10).epsilon(1e-15));

    std::vector<int> all_bits;
    for (int p = 0; p < 16; ++p)
        for (int b = 3; b >= 0; --b) all_bits.push_back((p >> b) & 1);
    const auto pts = map_qam16(all_bits);
    REQUIRE(pts.size() == 16);
    CHECK(mean_energy(pts) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mappers reject odd bit counts") {
    CHECK_THROWS_AS(map_qpsk({0}), std::length_error);
    CHECK_THROWS_AS(map_qpsk({0, 1, 0}), std::length_error);
    CHECK_THROWS_AS(map_qam16({0, 1, 0}), std::length_error);
    CHECK_THROWS_AS(map_qam16({0, 1, 0, 1, 1}), std::length_error);
    CHECK(map_qpsk({}).empty());
}

TEST_CASE("map_bits dispatches by modulation") {
    CHECK(map_bits(Modulation::QPSK, {0, 0}) == map_qpsk({0, 0}));
    CHECK(map_bits(Modulation::QAM16, {0, 0, 0, 0}) == map_qam16({0, 0, 0, 0}));
}

TEST_CASE("data_indices skips the pilot bins") {
    SpectrumSymbol sym;
    sym.values.resize(6);
    sym.pilot_indices = {0, 3};
    CHECK(sym.data_indices() == std::vector<std::size_t>{1, 2, 4, 5});
    CHECK(sym.num_pilots() == 2);
}

TEST_CASE("spectrum validation") {
    SpectrumSymbol sym;
    sym.values.resize(1);
    CHECK_THROWS_AS(sym.validate(), std::invalid_argument);
    sym.values.resize(4);
    sym.pilot_indices = {0, 4};
    CHECK_THROWS_AS(sym.validate(), std::invalid_argument);
    sym.pilot_indices = {2, 1};
    CHECK_THROWS_AS(sym.validate(), std::invalid_argument);
    sym.pilot_indices = {1, 1};
    CHECK_THROWS_AS(sym.validate(), std::invalid_argument);
    sym.pilot_indices = {0, 1, 2, 3};
    CHECK_THROWS_AS(sym.validate(), std::invalid_argument);
    sym.pilot_indices = {0, 2};
    CHECK_NOTHROW(sym.validate());
}

TEST_CASE("idft of a single nonzero bin is a constant envelope") {
    SpectrumSymbol sym;
    sym.values = {{2.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    const auto x = idft(sym);
    REQUIRE(x.samples.size() == 4);
    for (const auto& s : x.samples) {
        CHECK(s.real() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(s.imag()) < 1e-14);
    }
    CHECK(papr_db(x) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("idft of a flat spectrum is a time impulse") {
    SpectrumSymbol sym;
    sym.values.assign(8, {1.0, 0.0});
    const auto x = idft(sym);
    CHECK(x.samples[0].real() == doctest::Approx(std::sqrt(8.0)).epsilon(1e-14));
    for (std::size_t n = 1; n < 8; ++n) CHECK(std::abs(x.samples[n]) < 1e-12);
}

TEST_CASE("flat-spectrum PAPR equals 10 log10 K") {
    for (std::size_t k : {4, 8, 15, 30}) {
        SpectrumSymbol sym;
        sym.values.assign(k, {1.0, 0.0});
        const double expect = 10.0 * std::log10(static_cast<double>(k));
        CHECK(papr_db(idft(sym)) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("K=4 all-ones gives the canonical 6.0206 dB") {
    SpectrumSymbol sym;
    sym.values.assign(4, {1.0, 0.0});
    CHECK(papr_db(idft(sym)) == doctest::Approx(6.02059991327962).epsilon(1e-10));
}

TEST_CASE("idft matches the direct-summation oracle") {
    for (std::size_t k : {4, 15, 30}) {
        for (std::size_t l : {1, 4}) {
            const auto sym = random_spectrum(k, 100 * k + l);
            const auto x = idft(sym, l);
            const auto ref = idft_oracle(sym.values, l);
            REQUIRE(x.samples.size() == ref.size());
            CHECK(x.oversampling == l);
            double num = 0.0, den = 0.0;
            for (std::size_t n = 0; n < ref.size(); ++n) {
                num += std::norm(x.samples[n] - ref[n]);
                den += std::norm(ref[n]);
            }
            CHECK(std::sqrt(num / den) < 1e-12);
        }
    }
}

TEST_CASE("parseval: time energy is L times spectrum energy") {
    for (std::size_t k : {4, 8, 15, 30, 64}) {
        for (std::size_t l : {1, 2, 4}) {
            const auto sym = random_spectrum(k, 7 * k + l);
            const auto x = idft(sym, l);
            const double e_f = energy(sym.values);
            const double e_t = energy(x.samples);
            CHECK(e_t == doctest::Approx(static_cast<double>(l) * e_f).epsilon(1e-12));
        }
    }
}

TEST_CASE("papr is invariant under amplitude scaling") {
    const auto sym = random_spectrum(15, 42);
    auto scaled = sym;
    for (auto& v : scaled.values) v *= 3.7;
    CHECK(papr_db(idft(scaled)) == doctest::Approx(papr_db(idft(sym))).epsilon(1e-12));
}

TEST_CASE("papr lies in [0, 10 log10 N]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto sym = random_spectrum(15, 1000 + seed);
        const auto x = idft(sym, 2);
        const double p = papr_db(x);
        CHECK(p >= -1e-12);
        CHECK(p <= 10.0 * std::log10(static_cast<double>(x.samples.size())) + 1e-12);
    }
}

TEST_CASE("oversampling never lowers the measured peak") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto sym = random_spectrum(15, 2000 + seed);
        CHECK(papr_db(idft(sym, 4)) >= papr_db(idft(sym, 1)) - 1e-12);
    }
}

TEST_CASE("error contracts") {
    SpectrumSymbol empty;
    CHECK_THROWS_AS(idft(empty), std::domain_error);
    SpectrumSymbol sym = random_spectrum(4, 1);
    CHECK_THROWS_AS(idft(sym, 0), std::domain_error);
    CHECK_THROWS_AS(mean_energy({}), std::domain_error);
    CHECK_THROWS_AS(papr_db(TimeSignal{}), std::domain_error);
    TimeSignal zeros;
    zeros.samples.assign(4, {0.0, 0.0});
    CHECK_THROWS_AS(papr_db(zeros), std::domain_error);
}

TEST_CASE("mean_energy examples") {
    CHECK(mean_energy({{1.0, 0.0}}) == doctest::Approx(1.0));
    CHECK(mean_energy({{3.0, 4.0}}) == doctest::Approx(25.0));
    CHECK(mean_energy({{1.0, 0.0}, {0.0, 0.0}}) == doctest::Approx(0.5));
}

} // TEST_SUITE
