#ifndef PAPRLAB_MCSA_HPP
#define PAPRLAB_MCSA_HPP

#include <cstdint>
#include <vector>

#include "paprlab/signal.hpp"

namespace paprlab {

enum class PilotMagnitudeMode {
    /// Pilot magnitude = sqrt(E), E the mean energy of the data subcarriers
    /// (exactly 1.0 for the unit-energy constellations).
    DATA_MEAN_ENERGY,
};

struct McsaConfig {
    double target_papr_db = 0.0;
    std::uint32_t max_trials = 256;
    PilotMagnitudeMode pilot_magnitude_mode = PilotMagnitudeMode::DATA_MEAN_ENERGY;
    /// Trial 1 is the all-+1 vector (consuming no random draws), so the
    /// fixed-pilot baseline is always among the candidates and the search
    /// can never return something worse than it.
    bool pin_first_trial = true;
};

/// Pilot assignment: per-pilot sign times a common real magnitude sqrt(E).
struct PilotConfig {
    std::vector<double> signs; // each +1.0 or -1.0
    double magnitude = 1.0;

    double value(std::size_t i) const { return signs[i] * magnitude; }
};

struct McsaResult {
    PilotConfig pilots;
    double papr_db = 0.0;
    std::uint32_t trials_used = 0;
    bool met_target = false;
};

/// Copy of the symbol with pilot bins overwritten by signs[i]*magnitude
/// (purely real). Data subcarriers are untouched.
SpectrumSymbol insert_pilots(const SpectrumSymbol& symbol, const PilotConfig& pilots);

/// Pilot magnitude sqrt(E) for a symbol under the given mode.
double pilot_magnitude(const SpectrumSymbol& symbol, PilotMagnitudeMode mode);

/// Randomized pilot sign search: draws i.i.d. uniform sign vectors (seeded,
/// with replacement), scores each candidate by papr_db(idft(insert_pilots(..))),
/// stops early on the first candidate meeting the target, otherwise keeps the
/// best of max_trials. Deterministic given (symbol, config, seed).
/// Ties between equal-PAPR trials keep the first one seen.
McsaResult mcsa_search(const SpectrumSymbol& symbol, const McsaConfig& config,
                       std::uint64_t seed);

/// All 2^N_p sign vectors, enumerated lexicographically with +1 before -1;
/// returns the global minimum (first seen wins ties). trials_used = 2^N_p,
/// met_target = true by convention. Guarded to N_p <= 20.
McsaResult exhaustive_search(const SpectrumSymbol& symbol);

/// Default pilot placement: evenly spaced, index i*floor(K/N_p).
std::vector<std::size_t> default_pilot_indices(std::size_t k, std::size_t n_pilots);

} // namespace paprlab

#endif // PAPRLAB_MCSA_HPP
