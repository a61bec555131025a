#ifndef PAPRLAB_DATASET_HPP
#define PAPRLAB_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "paprlab/matrix.hpp"
#include "paprlab/mcsa.hpp"
#include "paprlab/signal.hpp"

namespace paprlab {

using BigUint = boost::multiprecision::cpp_int;

/// Everything needed to regenerate a corpus bit for bit. The MCSA settings
/// used to produce labels travel with the data so labels stay reproducible.
struct DatasetMeta {
    std::size_t k = 15;
    std::size_t n_pilots = 2;
    std::vector<std::size_t> pilot_indices; // empty -> evenly spaced default
    Modulation modulation = Modulation::QPSK;
    std::size_t num_samples = 0;
    double split_fraction = 0.70;
    std::uint64_t master_seed = 0;
    double mcsa_target_db = 0.0;
    std::uint32_t mcsa_max_trials = 256;
    double pilot_magnitude = 1.0;

    std::size_t data_subcarriers() const { return k - n_pilots; }
    std::size_t feature_width() const { return 2 * data_subcarriers(); }
    std::size_t split_index() const;

    /// Fills pilot_indices (if empty) and pilot_magnitude from k/n_pilots
    /// and the constellation.
    void finalize();
    void validate() const;
};

/// Feature rows are the interleaved re/im parts of the data subcarriers in
/// ascending index order; label rows are the MCSA pilot values signs[i]*sqrt(E).
/// Rows < split_index are the training partition.
struct PaprDataset {
    DatasetMeta meta;
    Matrix features; // num_samples x 2*(K - N_p)
    Matrix labels;   // num_samples x N_p
    std::size_t split_index = 0;

    std::size_t num_rows() const { return features.rows(); }
    std::size_t train_rows() const { return split_index; }
    std::size_t test_rows() const { return num_rows() - split_index; }
};

/// Deterministic corpus generation. Each row is derived from
/// (master_seed, row) alone, so any row can be regenerated in isolation;
/// test rows that exactly duplicate a training feature row are redrawn.
PaprDataset generate(const DatasetMeta& meta, unsigned threads = 1);

/// Regenerates the feature row for (meta, row) at the given redraw attempt.
std::vector<double> generate_feature_row(const DatasetMeta& meta, std::size_t row,
                                         std::uint32_t attempt = 0);

/// The MCSA result that labels row r (at the given redraw attempt).
McsaResult label_row(const DatasetMeta& meta, std::size_t row, std::uint32_t attempt = 0);

/// Spectrum with the stored feature row on the data subcarriers and zeros in
/// the pilot bins.
SpectrumSymbol symbol_from_features(const DatasetMeta& meta, const double* row);

/// m^exponent, exact.
BigUint modulation_power(unsigned order, unsigned exponent);

/// Size of the data sample space: m^(K - N_p), exact.
BigUint sample_space_size(const DatasetMeta& meta);

double coverage_fraction(std::uint64_t train_rows, const BigUint& space);

/// 64-bit FNV-1a over the canonical meta serialization; recorded in model
/// files so evaluation can refuse mismatched datasets.
std::uint64_t meta_hash(const DatasetMeta& meta);

std::string meta_to_json(const DatasetMeta& meta);
DatasetMeta meta_from_json(const std::string& text);

/// Writes <prefix>.meta.json, <prefix>.features.csv, <prefix>.labels.csv.
/// With binary=true writes <prefix>.bin (magic "PAPRDS1", row-major
/// little-endian float64, features block then labels block) instead of the
/// CSV pair.
void save(const PaprDataset& dataset, const std::string& prefix, bool binary = false);

/// Reads the files written by save(); validates row widths, split boundary
/// and label values. Throws ParseError naming the offending file/row.
PaprDataset load(const std::string& prefix);

/// File-loading failure with location context.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace paprlab

#endif // PAPRLAB_DATASET_HPP
