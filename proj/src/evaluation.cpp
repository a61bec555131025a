#include "paprlab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "paprlab/mcsa.hpp"
#include "paprlab/parallel.hpp"
#include "paprlab/rng.hpp"

namespace paprlab {

namespace {

// Salt for the per-symbol search stream, keeping it apart from the
// bit-drawing stream of the same symbol.
constexpr std::uint64_t kEvalSearchSalt = 0x4D435341u;

std::vector<double> sorted_desc(std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<double>());
    return v;
}

double order_statistic_at(const std::vector<double>& desc, double probability) {
    if (!(probability > 0.0 && probability <= 1.0))
        throw std::domain_error("probability must be in (0, 1]");
    if (desc.empty()) throw std::domain_error("no samples");
    std::size_t m = static_cast<std::size_t>(
        std::floor(probability * static_cast<double>(desc.size())));
    if (m >= desc.size()) m = desc.size() - 1;
    return desc[m];
}

McsaConfig search_config(const DatasetMeta& meta) {
    McsaConfig cfg;
    cfg.target_papr_db = meta.mcsa_target_db;
    cfg.max_trials = meta.mcsa_max_trials;
    cfg.pilot_magnitude_mode = PilotMagnitudeMode::DATA_MEAN_ENERGY;
    cfg.pin_first_trial = true;
    return cfg;
}

double scored_papr(const SpectrumSymbol& symbol, const PilotConfig& pilots) {
    return papr_db(idft(insert_pilots(symbol, pilots)));
}

PilotConfig fixed_pilots(std::size_t n_pilots, double magnitude) {
    return {std::vector<double>(n_pilots, 1.0), magnitude};
}

std::vector<double> features_of(const DatasetMeta& meta, const SpectrumSymbol& symbol) {
    std::vector<double> out(meta.feature_width());
    const auto data_idx = symbol.data_indices();
    for (std::size_t i = 0; i < data_idx.size(); ++i) {
        out[2 * i] = symbol.values[data_idx[i]].real();
        out[2 * i + 1] = symbol.values[data_idx[i]].imag();
    }
    return out;
}

SpectrumSymbol fresh_symbol(const DatasetMeta& meta, std::uint64_t seed) {
    SplitMix64 rng(seed);
    SpectrumSymbol symbol;
    symbol.modulation = meta.modulation;
    symbol.pilot_indices = meta.pilot_indices;
    symbol.values.assign(meta.k, {0.0, 0.0});
    const int nbits = bits_per_symbol(meta.modulation);
    const auto data_idx = symbol.data_indices();
    std::vector<int> bits(static_cast<std::size_t>(nbits));
    for (std::size_t i = 0; i < data_idx.size(); ++i) {
        for (auto& b : bits) b = rng.next_bit();
        symbol.values[data_idx[i]] = map_bits(meta.modulation, bits)[0];
    }
    return symbol;
}

} // namespace

std::vector<double> default_threshold_grid(std::size_t k) {
    if (k < 2) throw std::domain_error("K must be >= 2");
    const double top = 10.0 * std::log10(static_cast<double>(k)) + 1.0;
    std::vector<double> grid;
    for (std::size_t i = 0;; ++i) {
        const double t = 0.05 * static_cast<double>(i);
        if (t > top) break;
        grid.push_back(t);
    }
    return grid;
}

CcdfCurve ccdf(const std::vector<double>& papr_db,
               const std::vector<double>& thresholds_db) {
    if (papr_db.empty()) throw std::domain_error("no samples");
    if (!std::is_sorted(thresholds_db.begin(), thresholds_db.end()))
        throw std::invalid_argument("thresholds must be ascending");
    std::vector<double> sorted = papr_db;
    std::sort(sorted.begin(), sorted.end());

    CcdfCurve curve;
    curve.sample_count = papr_db.size();
    curve.thresholds_db = thresholds_db;
    curve.probabilities.reserve(thresholds_db.size());
    const double n = static_cast<double>(sorted.size());
    for (double t : thresholds_db) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
        const auto exceed = static_cast<std::size_t>(sorted.end() - it);
        curve.probabilities.push_back(static_cast<double>(exceed) / n);
    }
    return curve;
}

double papr_at_ccdf(std::vector<double> papr_db, double probability) {
    return order_statistic_at(sorted_desc(std::move(papr_db)), probability);
}

double max_ccdf_gap_db(std::vector<double> a, std::vector<double> b, double p_min,
                       double p_max, std::size_t points) {
    if (!(p_min > 0.0 && p_min <= p_max && p_max <= 1.0))
        throw std::domain_error("need 0 < p_min <= p_max <= 1");
    if (points < 2) throw std::domain_error("need at least two grid points");
    const auto da = sorted_desc(std::move(a));
    const auto db = sorted_desc(std::move(b));
    const double log_ratio = std::log(p_max / p_min);
    double worst = 0.0;
    for (std::size_t j = 0; j < points; ++j) {
        const double frac = static_cast<double>(j) / static_cast<double>(points - 1);
        // exp/log round-tripping can overshoot p_max by an ulp; clamp back.
        const double p = std::clamp(p_min * std::exp(log_ratio * frac), p_min, p_max);
        worst = std::max(worst,
                         std::abs(order_statistic_at(da, p) - order_statistic_at(db, p)));
    }
    return worst;
}

MethodComparison compare_on_test_partition(const PaprDataset& dataset,
                                           const MlpModel* model,
                                           std::uint64_t eval_seed, unsigned threads) {
    const DatasetMeta& meta = dataset.meta;
    const std::size_t n_test = dataset.test_rows();
    if (n_test == 0) throw std::domain_error("dataset has no test partition");
    if (model && model->input_width() != meta.feature_width())
        throw std::domain_error("model input width does not match the dataset");

    MethodComparison cmp;
    cmp.original_papr_db.resize(n_test);
    cmp.mcsa_papr_db.resize(n_test);
    if (model) cmp.nn_papr_db.resize(n_test);
    std::vector<std::uint32_t> trials(n_test);

    const McsaConfig cfg = search_config(meta);
    const PilotConfig baseline = fixed_pilots(meta.n_pilots, meta.pilot_magnitude);

    parallel_for(n_test, threads, [&](std::size_t i) {
        const std::size_t r = dataset.split_index + i;
        const SpectrumSymbol symbol =
            symbol_from_features(meta, dataset.features.row_ptr(r));
        cmp.original_papr_db[i] = scored_papr(symbol, baseline);

        const McsaResult res = mcsa_search(
            symbol, cfg, derive_seed(derive_seed(eval_seed, r), kEvalSearchSalt));
        cmp.mcsa_papr_db[i] = res.papr_db;
        trials[i] = res.trials_used;

        if (model) {
            std::vector<double> row(dataset.features.row_ptr(r),
                                    dataset.features.row_ptr(r) + dataset.features.cols());
            cmp.nn_papr_db[i] = scored_papr(symbol, predict_pilots(*model, row));
        }
    });

    double total = 0.0;
    for (const auto t : trials) total += static_cast<double>(t);
    cmp.mean_mcsa_trials = total / static_cast<double>(n_test);
    return cmp;
}

MethodComparison compare_fresh(const DatasetMeta& meta_in, const MlpModel* model,
                               std::size_t num_symbols, std::uint64_t eval_seed,
                               unsigned threads) {
    DatasetMeta meta = meta_in;
    meta.finalize();
    if (num_symbols == 0) throw std::domain_error("num_symbols must be >= 1");
    if (model && model->input_width() != meta.feature_width())
        throw std::domain_error("model input width does not match the configuration");

    MethodComparison cmp;
    cmp.original_papr_db.resize(num_symbols);
    cmp.mcsa_papr_db.resize(num_symbols);
    if (model) cmp.nn_papr_db.resize(num_symbols);
    std::vector<std::uint32_t> trials(num_symbols);

    const McsaConfig cfg = search_config(meta);
    const PilotConfig baseline = fixed_pilots(meta.n_pilots, meta.pilot_magnitude);

    parallel_for(num_symbols, threads, [&](std::size_t i) {
        const std::uint64_t symbol_seed = derive_seed(eval_seed, i);
        const SpectrumSymbol symbol = fresh_symbol(meta, symbol_seed);
        cmp.original_papr_db[i] = scored_papr(symbol, baseline);

        const McsaResult res =
            mcsa_search(symbol, cfg, derive_seed(symbol_seed, kEvalSearchSalt));
        cmp.mcsa_papr_db[i] = res.papr_db;
        trials[i] = res.trials_used;

        if (model) {
            cmp.nn_papr_db[i] =
                scored_papr(symbol, predict_pilots(*model, features_of(meta, symbol)));
        }
    });

    double total = 0.0;
    for (const auto t : trials) total += static_cast<double>(t);
    cmp.mean_mcsa_trials = total / static_cast<double>(num_symbols);
    return cmp;
}

double mean_trials(const std::vector<McsaResult>& results) {
    if (results.empty()) throw std::domain_error("no search results");
    double total = 0.0;
    for (const auto& r : results) total += static_cast<double>(r.trials_used);
    return total / static_cast<double>(results.size());
}

const char* method_name(Method method) {
    return method == Method::NN ? "nn" : "mcsa";
}

ComplexityReport complexity_report(Method method, std::size_t k,
                                   double mean_trials_v) {
    if (k < 2) throw std::domain_error("K must be >= 2");
    if (method == Method::MCSA && !(mean_trials_v >= 1.0))
        throw std::domain_error("mean trials v must be >= 1");
    ComplexityReport report;
    report.method = method;
    report.k = k;
    report.mean_trials_v = mean_trials_v;
    const double kd = static_cast<double>(k);
    report.op_count = method == Method::NN
                          ? kd * kd + kd * std::log2(kd)
                          : mean_trials_v * kd * kd * std::log2(kd);
    return report;
}

std::vector<SweepPoint> sweep_targets(const DatasetMeta& meta_in,
                                      const std::vector<double>& targets_db,
                                      std::size_t num_symbols, std::uint64_t eval_seed,
                                      unsigned threads) {
    DatasetMeta meta = meta_in;
    meta.finalize();
    if (targets_db.empty()) throw std::domain_error("no targets");
    if (num_symbols == 0) throw std::domain_error("num_symbols must be >= 1");

    std::vector<SweepPoint> points;
    points.reserve(targets_db.size());
    for (double target : targets_db) {
        McsaConfig cfg = search_config(meta);
        cfg.target_papr_db = target;

        std::vector<std::uint32_t> trials(num_symbols);
        std::vector<std::uint8_t> met(num_symbols);
        parallel_for(num_symbols, threads, [&](std::size_t i) {
            const std::uint64_t symbol_seed = derive_seed(eval_seed, i);
            const McsaResult res = mcsa_search(fresh_symbol(meta, symbol_seed), cfg,
                                               derive_seed(symbol_seed, kEvalSearchSalt));
            trials[i] = res.trials_used;
            met[i] = res.met_target ? 1 : 0;
        });

        SweepPoint point;
        point.target_db = target;
        double total = 0.0, hits = 0.0;
        for (std::size_t i = 0; i < num_symbols; ++i) {
            total += static_cast<double>(trials[i]);
            hits += static_cast<double>(met[i]);
        }
        point.mean_trials = total / static_cast<double>(num_symbols);
        point.met_fraction = hits / static_cast<double>(num_symbols);
        points.push_back(point);
    }
    return points;
}

void write_ccdf_csv(const std::string& path,
                    const std::vector<std::pair<std::string, CcdfCurve>>& curves) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "method,threshold_db,probability\n";
    char buf[64];
    for (const auto& [name, curve] : curves) {
        for (std::size_t i = 0; i < curve.thresholds_db.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", curve.thresholds_db[i],
                          curve.probabilities[i]);
            out << name << "," << buf << "\n";
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace paprlab
