#include "paprlab/mcsa.hpp"

#include <stdexcept>

#include "paprlab/rng.hpp"

namespace paprlab {

SpectrumSymbol insert_pilots(const SpectrumSymbol& symbol, const PilotConfig& pilots) {
    if (pilots.signs.size() != symbol.pilot_indices.size())
        throw std::domain_error("pilot config length does not match pilot index count");
    SpectrumSymbol out = symbol;
    for (std::size_t i = 0; i < pilots.signs.size(); ++i)
        out.values[symbol.pilot_indices[i]] = {pilots.value(i), 0.0};
    return out;
}

double pilot_magnitude(const SpectrumSymbol& symbol, PilotMagnitudeMode mode) {
    switch (mode) {
    case PilotMagnitudeMode::DATA_MEAN_ENERGY: {
        std::vector<ComplexSample> data;
        data.reserve(symbol.size() - symbol.num_pilots());
        for (std::size_t k : symbol.data_indices()) data.push_back(symbol.values[k]);
        return std::sqrt(mean_energy(data));
    }
    }
    throw std::invalid_argument("unknown pilot magnitude mode");
}

namespace {

double score(const SpectrumSymbol& symbol, const PilotConfig& pilots) {
    return papr_db(idft(insert_pilots(symbol, pilots), 1));
}

} // namespace

McsaResult mcsa_search(const SpectrumSymbol& symbol, const McsaConfig& config,
                       std::uint64_t seed) {
    const std::size_t n_pilots = symbol.pilot_indices.size();
    if (n_pilots == 0) throw std::domain_error("mcsa_search needs at least one pilot");
    if (config.max_trials < 1) throw std::invalid_argument("max_trials must be >= 1");

    const double magnitude = pilot_magnitude(symbol, config.pilot_magnitude_mode);
    SplitMix64 rng(seed);

    McsaResult best;
    for (std::uint32_t trial = 1; trial <= config.max_trials; ++trial) {
        PilotConfig candidate;
        candidate.magnitude = magnitude;
        candidate.signs.resize(n_pilots);
        if (trial == 1 && config.pin_first_trial) {
            for (auto& s : candidate.signs) s = 1.0;
        } else {
            for (auto& s : candidate.signs) s = rng.next_sign();
        }

        const double papr = score(symbol, candidate);
        if (trial == 1 || papr < best.papr_db) {
            best.pilots = std::move(candidate);
            best.papr_db = papr;
        }
        best.trials_used = trial;
        if (best.papr_db <= config.target_papr_db) {
            best.met_target = true;
            break;
        }
    }
    return best;
}

McsaResult exhaustive_search(const SpectrumSymbol& symbol) {
    const std::size_t n_pilots = symbol.pilot_indices.size();
    if (n_pilots == 0) throw std::domain_error("exhaustive_search needs at least one pilot");
    if (n_pilots > 20)
        throw std::length_error("exhaustive_search limited to N_p <= 20");

    const double magnitude =
        pilot_magnitude(symbol, PilotMagnitudeMode::DATA_MEAN_ENERGY);
    const std::uint32_t total = 1u << n_pilots;

    McsaResult best;
    for (std::uint32_t c = 0; c < total; ++c) {
        PilotConfig candidate;
        candidate.magnitude = magnitude;
        candidate.signs.resize(n_pilots);
        // Lexicographic with +1 before -1: high bit of c drives pilot 0.
        for (std::size_t i = 0; i < n_pilots; ++i)
            candidate.signs[i] = (c >> (n_pilots - 1 - i)) & 1u ? -1.0 : 1.0;

        const double papr = score(symbol, candidate);
        if (c == 0 || papr < best.papr_db) {
            best.pilots = std::move(candidate);
            best.papr_db = papr;
        }
    }
    best.trials_used = total;
    best.met_target = true;
    return best;
}

std::vector<std::size_t> default_pilot_indices(std::size_t k, std::size_t n_pilots) {
    if (n_pilots >= k) throw std::invalid_argument("pilot count must be < K");
    std::vector<std::size_t> out(n_pilots);
    const std::size_t step = n_pilots == 0 ? 1 : k / n_pilots;
    for (std::size_t i = 0; i < n_pilots; ++i) out[i] = i * step;
    return out;
}

} // namespace paprlab
