// Acceptance gate: one criterion per ID, one PASS/FAIL line each.
// Run with no arguments for the full gate, or pass IDs ("01", "05", ...)
// to run a subset. Criterion 05 runs a 10^4-symbol smoke variant by
// default; set PAPRLAB_ACCEPTANCE_FULL=1 for the 10^5-symbol run at the
// 10^-3 operating point.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "paprlab/dataset.hpp"
#include "paprlab/evaluation.hpp"
#include "paprlab/mcsa.hpp"
#include "paprlab/neural.hpp"
#include "paprlab/rng.hpp"
#include "paprlab/signal.hpp"

using namespace paprlab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

unsigned worker_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

SpectrumSymbol random_spectrum(std::size_t k, std::uint64_t seed) {
    SplitMix64 rng(seed);
    SpectrumSymbol sym;
    sym.values.resize(k);
    for (auto& v : sym.values) v = {rng.next_symmetric(1.0), rng.next_symmetric(1.0)};
    return sym;
}

SpectrumSymbol random_qpsk_symbol(std::size_t k, std::vector<std::size_t> pilots,
                                  std::uint64_t seed) {
    SplitMix64 rng(seed);
    SpectrumSymbol sym;
    sym.modulation = Modulation::QPSK;
    sym.values.assign(k, {0.0, 0.0});
    sym.pilot_indices = std::move(pilots);
    for (std::size_t i : sym.data_indices()) {
        const std::vector<int> bits = {rng.next_bit(), rng.next_bit()};
        sym.values[i] = map_qpsk(bits)[0];
    }
    return sym;
}

// Term-by-term exp() evaluation, independent of the twiddle-table walk.
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

std::uint64_t fnv1a(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

// --- criterion 1: signal identities ---------------------------------------

Outcome criterion_signal_identities() {
    double worst_parseval = 0.0;
    for (std::size_t k : {4, 8, 15, 30}) {
        for (std::size_t l : {1, 2}) {
            for (std::uint64_t draw = 0; draw < 50; ++draw) {
                const auto sym = random_spectrum(k, 1'000 * k + 10 * l + draw);
                const auto x = idft(sym, l);
                double e_f = 0.0, e_t = 0.0;
                for (const auto& v : sym.values) e_f += std::norm(v);
                for (const auto& v : x.samples) e_t += std::norm(v);
                const double expect = static_cast<double>(l) * e_f;
                worst_parseval = std::max(worst_parseval,
                                          std::abs(e_t - expect) / expect);
            }
        }
    }

    double worst_papr_dev = 0.0;
    for (std::size_t k : {4, 8, 15, 30}) {
        SpectrumSymbol sym;
        sym.values.assign(k, {1.0, 0.0});
        const double expect = 10.0 * std::log10(static_cast<double>(k));
        worst_papr_dev = std::max(worst_papr_dev,
                                  std::abs(papr_db(idft(sym)) - expect));
    }

    double worst_idft = 0.0;
    for (std::size_t k : {4, 15, 30}) {
        for (std::size_t l : {1, 4}) {
            for (std::uint64_t draw = 0; draw < 20; ++draw) {
                const auto sym = random_spectrum(k, 2'000 * k + 10 * l + draw);
                const auto x = idft(sym, l);
                const auto ref = idft_oracle(sym.values, l);
                double num = 0.0, den = 0.0;
                for (std::size_t n = 0; n < ref.size(); ++n) {
                    num += std::norm(x.samples[n] - ref[n]);
                    den += std::norm(ref[n]);
                }
                worst_idft = std::max(worst_idft, std::sqrt(num / den));
            }
        }
    }

    Outcome out;
    out.pass = worst_parseval < 1e-12 && worst_papr_dev < 1e-9 && worst_idft < 1e-12;
    out.detail = fmt("parseval rel err %.2e (<1e-12), flat-spectrum papr dev %.2e dB "
                     "(<1e-9), idft vs direct oracle rel err %.2e (<1e-12)",
                     worst_parseval, worst_papr_dev, worst_idft);
    return out;
}

// --- criterion 2: mcsa vs exhaustive oracle --------------------------------

Outcome criterion_mcsa_vs_exhaustive() {
    Outcome out;
    out.pass = true;
    std::string parts;
    for (std::size_t n_pilots : {1, 2, 3}) {
        const auto pilots = default_pilot_indices(8, n_pilots);
        McsaConfig cfg;
        cfg.target_papr_db = -100.0;
        cfg.max_trials = 8u << n_pilots;

        std::size_t hits = 0;
        bool never_below = true;
        for (std::uint64_t i = 0; i < 1000; ++i) {
            const auto sym =
                random_qpsk_symbol(8, pilots, derive_seed(4'000 + n_pilots, i));
            const auto opt = exhaustive_search(sym);
            const auto res = mcsa_search(sym, cfg, derive_seed(5'000 + n_pilots, i));
            if (res.papr_db < opt.papr_db - 1e-12) never_below = false;
            if (std::abs(res.papr_db - opt.papr_db) <= 1e-12) ++hits;
        }
        const double frac = static_cast<double>(hits) / 1000.0;
        out.pass = out.pass && never_below && frac >= 0.95;
        parts += fmt("%sNp=%zu: optimum hit %.1f%% (>=95%%), below-optimum %s",
                     parts.empty() ? "" : "; ", n_pilots, 100.0 * frac,
                     never_below ? "never" : "SEEN");
    }
    out.detail = parts;
    return out;
}

// --- criterion 3: gradient correctness -------------------------------------

struct GradCheck {
    double worst_rel = 0.0;
    std::size_t checked = 0;
};

void check_gradients(std::size_t hidden, std::size_t batch, std::size_t draws,
                     std::uint64_t seed_base, GradCheck& stats) {
    const std::size_t d = 8, p = 2;
    for (std::size_t draw = 0; draw < draws; ++draw) {
        MlpModel m;
        Matrix x(batch, d), y(batch, p);
        // Redraw until every ReLU pre-activation is safely away from the kink,
        // so the finite-difference step cannot cross it.
        for (std::uint64_t attempt = 0;; ++attempt) {
            const std::uint64_t s = derive_seed(seed_base + draw, attempt);
            m = init_model(d, hidden, p, s);
            SplitMix64 rng(derive_seed(s, 1));
            for (double& v : m.b1) v = rng.next_symmetric(0.2);
            for (double& v : m.b2) v = rng.next_symmetric(0.2);
            for (double& v : x.data()) v = rng.next_symmetric(1.5);
            for (double& v : y.data()) v = rng.next_symmetric(1.2);
            double min_abs_z = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < batch; ++r)
                for (std::size_t h = 0; h < hidden; ++h) {
                    double z = m.b1[h];
                    for (std::size_t i = 0; i < d; ++i) z += m.w1(h, i) * x(r, i);
                    min_abs_z = std::min(min_abs_z, std::abs(z));
                }
            if (min_abs_z > 1e-4) break;
        }

        Gradients g;
        backward(m, x, y, g);
        const std::pair<double*, std::size_t> params[] = {
            {m.w1.data().data(), m.w1.size()},
            {m.b1.data(), m.b1.size()},
            {m.w2.data().data(), m.w2.size()},
            {m.b2.data(), m.b2.size()}};
        const std::pair<const double*, std::size_t> grads[] = {
            {g.w1.data().data(), g.w1.size()},
            {g.b1.data(), g.b1.size()},
            {g.w2.data().data(), g.w2.size()},
            {g.b2.data(), g.b2.size()}};
        for (std::size_t s = 0; s < 4; ++s) {
            for (std::size_t i = 0; i < params[s].second; ++i) {
                double& prm = params[s].first[i];
                const double saved = prm;
                const double h = 1e-5 * std::max(1.0, std::abs(saved));
                prm = saved + h;
                const double up = mse_loss(forward(m, x, 1), y);
                prm = saved - h;
                const double down = mse_loss(forward(m, x, 1), y);
                prm = saved;
                const double fd = (up - down) / (2.0 * h);
                const double analytic = grads[s].first[i];
                const double rel = std::abs(analytic - fd) /
                                   std::max({1e-4, std::abs(analytic), std::abs(fd)});
                stats.worst_rel = std::max(stats.worst_rel, rel);
                ++stats.checked;
            }
        }
    }
}

Outcome criterion_gradient_check() {
    GradCheck desk, full;
    check_gradients(50, 8, 100, 7'000, desk);
    check_gradients(500, 4, 10, 8'000, full);
    Outcome out;
    out.pass = desk.worst_rel < 1e-5 && full.worst_rel < 1e-5;
    out.detail = fmt("H=50: %zu params x 100 draws, worst rel err %.2e (<1e-5); "
                     "H=500 spot check: %zu params x 10 draws, worst rel err %.2e",
                     desk.checked / 100, desk.worst_rel, full.checked / 10,
                     full.worst_rel);
    return out;
}

// --- criterion 4: desk-scale generalization --------------------------------

Outcome criterion_generalization() {
    DatasetMeta meta;
    meta.k = 15;
    meta.n_pilots = 2;
    meta.num_samples = 20'000;
    meta.split_fraction = 0.70;
    meta.master_seed = 7;
    meta.mcsa_max_trials = 256;
    meta.finalize();

    const unsigned threads = worker_threads();
    const auto dataset = generate(meta, threads);

    const TrainConfig cfg;  // pinned defaults: H=500, 500 epochs, step decay
    const auto result = train(dataset, cfg, threads);
    const auto& loss = result.trace.train_loss;
    const double before = loss[loss.size() - 51];
    const double after = loss.back();
    const double plateau = std::abs(after - before) / before;

    const auto cmp = compare_on_test_partition(dataset, &result.model, 99, threads);
    const double gap = max_ccdf_gap_db(cmp.nn_papr_db, cmp.mcsa_papr_db, 1e-2, 1.0);

    Outcome out;
    out.pass = plateau < 0.01 && gap <= 1.0;
    out.detail = fmt("train loss change over last 50 epochs %.3f%% (<1%%); "
                     "NN vs MCSA ccdf gap on held-out rows %.3f dB (<=1.0 dB over "
                     "[1e-2, 1])",
                     100.0 * plateau, gap);
    return out;
}

// --- criterion 5: reduction magnitude --------------------------------------

Outcome criterion_reduction() {
    const bool full = [] {
        const char* env = std::getenv("PAPRLAB_ACCEPTANCE_FULL");
        return env != nullptr && env[0] == '1';
    }();
    const std::size_t symbols = full ? 100'000 : 10'000;
    const double op_point = full ? 1e-3 : 1e-2;
    const unsigned threads = worker_threads();

    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    out.pass = true;
    std::string parts;
    for (const auto& [k, expect] : {std::pair<std::size_t, double>{15, 6.0},
                                    std::pair<std::size_t, double>{30, 7.0}}) {
        DatasetMeta meta;
        meta.k = k;
        meta.n_pilots = 2;
        meta.num_samples = 10;
        meta.master_seed = 1'234 + k;
        meta.mcsa_max_trials = 256;
        meta.finalize();

        const auto cmp = compare_fresh(meta, nullptr, symbols, 9'000 + k, threads);
        const double reduction = papr_at_ccdf(cmp.original_papr_db, op_point) -
                                 papr_at_ccdf(cmp.mcsa_papr_db, op_point);
        const bool ok = std::abs(reduction - expect) <= 1.5;
        out.pass = out.pass && ok;
        parts += fmt("%sK=%zu: %.2f dB vs %.1f+-1.5", parts.empty() ? "" : "; ", k,
                     reduction, expect);
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (!full && elapsed >= 120.0) out.pass = false;

    out.detail = parts + fmt(" (%s: %zu symbols, ccdf %.0e, %.0f s%s)",
                             full ? "full" : "smoke", symbols, op_point, elapsed,
                             full ? "" : ", limit 120 s");
    return out;
}

// --- criterion 6: sample-space arithmetic ----------------------------------

Outcome criterion_sample_space() {
    const BigUint space = modulation_power(4, 15);
    const bool exact = space == BigUint("1073741824");
    const double cov = coverage_fraction(140'000, space);
    char rounded[32];
    std::snprintf(rounded, sizeof rounded, "%.2g", 100.0 * cov);
    const bool two_figs = std::strcmp(rounded, "0.013") == 0;

    Outcome out;
    out.pass = exact && two_figs;
    out.detail = fmt("4^15 = %s (expected 1073741824), coverage of 140000 rows = "
                     "%s%% (expected 0.013%%)",
                     space.str().c_str(), rounded);
    return out;
}

// --- criterion 7: complexity dominance -------------------------------------

Outcome criterion_complexity() {
    const unsigned threads = worker_threads();
    Outcome out;
    out.pass = true;
    std::string parts;
    for (std::size_t k : {15, 30}) {
        DatasetMeta meta;
        meta.k = k;
        meta.n_pilots = 2;
        meta.num_samples = 10;
        meta.master_seed = 1'234 + k;
        meta.mcsa_max_trials = 256;
        meta.finalize();

        // Measured v across target levels, same symbol population as the
        // reduction runs (smaller draw: dominance needs v, not tight CIs).
        std::vector<double> vs;
        for (const auto& pt :
             sweep_targets(meta, {8.0, 7.0, 6.0, 5.0, 4.0}, 2'000, 9'000 + k, threads))
            vs.push_back(pt.mean_trials);
        const auto cmp = compare_fresh(meta, nullptr, 500, 9'000 + k, threads);
        vs.push_back(cmp.mean_mcsa_trials);

        const double nn_ops = complexity_report(Method::NN, k).op_count;
        std::size_t used = 0;
        for (double v : vs) {
            if (v < 2.0) continue;
            ++used;
            if (!(nn_ops < complexity_report(Method::MCSA, k, v).op_count))
                out.pass = false;
        }
        parts += fmt("%sK=%zu: nn %.0f ops < mcsa for %zu measured v in [%.1f, %.1f]",
                     parts.empty() ? "" : "; ", k, nn_ops, used,
                     *std::min_element(vs.begin(), vs.end()),
                     *std::max_element(vs.begin(), vs.end()));
    }
    out.detail = parts;
    return out;
}

// --- criterion 8: methodology guard ----------------------------------------

Outcome criterion_methodology() {
    DatasetMeta meta;
    meta.k = 8;
    meta.n_pilots = 2;
    meta.num_samples = 2'000;
    meta.master_seed = 31;
    meta.mcsa_max_trials = 16;
    meta.finalize();
    auto dataset = generate(meta, worker_threads());

    // Hash-based train/test disjointness on the clean corpus.
    const std::size_t width = dataset.features.cols();
    std::unordered_multimap<std::uint64_t, std::size_t> train_index;
    for (std::size_t r = 0; r < dataset.split_index; ++r)
        train_index.emplace(fnv1a(dataset.features.row_ptr(r), width * sizeof(double)),
                            r);
    std::size_t duplicates = 0;
    for (std::size_t r = dataset.split_index; r < dataset.num_rows(); ++r) {
        const auto h = fnv1a(dataset.features.row_ptr(r), width * sizeof(double));
        const auto [lo, hi] = train_index.equal_range(h);
        for (auto it = lo; it != hi; ++it)
            if (std::memcmp(dataset.features.row_ptr(r),
                            dataset.features.row_ptr(it->second),
                            width * sizeof(double)) == 0)
                ++duplicates;
    }

    // Poison the held-out rows; training must never touch them.
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t r = dataset.split_index; r < dataset.num_rows(); ++r) {
        for (std::size_t c = 0; c < dataset.features.cols(); ++c)
            dataset.features(r, c) = nan;
        for (std::size_t c = 0; c < dataset.labels.cols(); ++c)
            dataset.labels(r, c) = nan;
    }
    TrainConfig cfg;
    cfg.hidden_units = 32;
    cfg.epochs = 20;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.05;
    cfg.lr_schedule = LrSchedule::CONSTANT;
    const auto result = train(dataset, cfg, worker_threads());
    bool finite = true;
    for (double v : result.trace.train_loss) finite = finite && std::isfinite(v);
    for (double v : result.trace.val_loss) finite = finite && std::isfinite(v);
    for (double v : result.model.w1.data()) finite = finite && std::isfinite(v);
    for (double v : result.model.w2.data()) finite = finite && std::isfinite(v);

    Outcome out;
    out.pass = duplicates == 0 && finite;
    out.detail = fmt("train/test duplicate rows: %zu (expected 0); training on the "
                     "NaN-poisoned corpus stayed finite: %s",
                     duplicates, finite ? "yes" : "NO");
    return out;
}

struct Criterion {
    const char* id;
    const char* title;
    Outcome (*run)();
};

constexpr Criterion kCriteria[] = {
    {"01", "signal identities", &criterion_signal_identities},
    {"02", "mcsa vs exhaustive oracle", &criterion_mcsa_vs_exhaustive},
    {"03", "gradient correctness", &criterion_gradient_check},
    {"04", "desk-scale generalization", &criterion_generalization},
    {"05", "reduction magnitude", &criterion_reduction},
    {"06", "sample-space arithmetic", &criterion_sample_space},
    {"07", "complexity dominance", &criterion_complexity},
    {"08", "methodology guard", &criterion_methodology},
};

} // namespace

int main(int argc, char** argv) {
    std::vector<const Criterion*> selected;
    if (argc <= 1) {
        for (const auto& c : kCriteria) selected.push_back(&c);
    } else {
        for (int i = 1; i < argc; ++i) {
            const Criterion* found = nullptr;
            for (const auto& c : kCriteria)
                if (std::strcmp(argv[i], c.id) == 0) found = &c;
            if (!found) {
                std::fprintf(stderr, "unknown criterion id: %s (use 01..08)\n",
                             argv[i]);
                return 2;
            }
            selected.push_back(found);
        }
    }

    bool all_pass = true;
    for (const Criterion* c : selected) {
        Outcome outcome;
        try {
            outcome = c->run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        all_pass = all_pass && outcome.pass;
        std::printf("%s %s %s: %s\n", outcome.pass ? "PASS" : "FAIL", c->id, c->title,
                    outcome.detail.c_str());
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
