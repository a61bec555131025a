#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "paprlab/dataset.hpp"
#include "paprlab/mcsa.hpp"
#include "paprlab/neural.hpp"

namespace paprlab {

struct CcdfCurve {
    std::vector<double> thresholds_db;
    std::vector<double> probabilities;
    std::size_t sample_count = 0;
};

// 0.05 dB steps from 0 up to the worst possible PAPR for K subcarriers
// (all power in one sample) plus a 1 dB margin.
std::vector<double> default_threshold_grid(std::size_t k);

// Empirical complementary CDF: Pr(PAPR > threshold), counted exactly and
// with strict inequality at each threshold.
CcdfCurve ccdf(const std::vector<double>& papr_db,
               const std::vector<double>& thresholds_db);

// PAPR level whose empirical CCDF first drops to `probability` or below;
// an exact order statistic, no interpolation.
double papr_at_ccdf(std::vector<double> papr_db, double probability);

// Largest pointwise |quantile difference| between two sample sets over a
// log-spaced probability grid.
double max_ccdf_gap_db(std::vector<double> a, std::vector<double> b, double p_min,
                       double p_max, std::size_t points = 100);

struct MethodComparison {
    std::vector<double> original_papr_db;  // fixed all-positive pilots
    std::vector<double> mcsa_papr_db;      // fresh seeded search per symbol
    std::vector<double> nn_papr_db;        // empty when no model is given
    double mean_mcsa_trials = 0.0;
};

// Scores the held-out partition of a labeled corpus. The MCSA column comes
// from a fresh search per row whose seed derives from eval_seed, so it is
// disjoint from the streams that produced the stored labels.
MethodComparison compare_on_test_partition(const PaprDataset& dataset,
                                           const MlpModel* model,
                                           std::uint64_t eval_seed,
                                           unsigned threads = 1);

// Streams num_symbols fresh random symbols from eval_seed and scores all
// methods on each. Pick eval_seed different from the corpus master seed,
// otherwise symbol i repeats dataset row i.
MethodComparison compare_fresh(const DatasetMeta& meta, const MlpModel* model,
                               std::size_t num_symbols, std::uint64_t eval_seed,
                               unsigned threads = 1);

double mean_trials(const std::vector<McsaResult>& results);

enum class Method { NN, MCSA };

const char* method_name(Method method);

// Per-symbol work in multiply-accumulate units: the trained network costs
// one K x K-ish dense pass (K^2 + K log2 K), the search costs v oversampled
// transforms (v K^2 log2 K).
struct ComplexityReport {
    Method method = Method::NN;
    std::size_t k = 0;
    double mean_trials_v = 1.0;  // meaningful for MCSA only
    double op_count = 0.0;
};

ComplexityReport complexity_report(Method method, std::size_t k,
                                   double mean_trials_v = 1.0);

// Runs the search over the same seeded symbol set at each target level;
// lowering the target can only delay early exit, so mean trials are
// non-decreasing as the target drops.
struct SweepPoint {
    double target_db = 0.0;
    double mean_trials = 0.0;
    double met_fraction = 0.0;  // share of symbols that reached the target
};

std::vector<SweepPoint> sweep_targets(const DatasetMeta& meta,
                                      const std::vector<double>& targets_db,
                                      std::size_t num_symbols, std::uint64_t eval_seed,
                                      unsigned threads = 1);

void write_ccdf_csv(const std::string& path,
                    const std::vector<std::pair<std::string, CcdfCurve>>& curves);

} // namespace paprlab
