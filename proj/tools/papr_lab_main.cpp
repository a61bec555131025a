#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "paprlab/dataset.hpp"
#include "paprlab/evaluation.hpp"
#include "paprlab/mcsa.hpp"
#include "paprlab/neural.hpp"
#include "paprlab/rng.hpp"
#include "paprlab/signal.hpp"

namespace {

using paprlab::DatasetMeta;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void prepare_out_dir(CLI::App& root, const std::string& out) {
    std::filesystem::create_directories(out);
    std::ofstream cfg(out + "/effective.cfg");
    if (!cfg) throw std::runtime_error("cannot write " + out + "/effective.cfg");
    cfg << root.config_to_str(true, true);
}

struct GenOpts {
    DatasetMeta meta;
    std::string mod = "qpsk";
    std::string out = "out";
    std::string name = "dataset";
    bool binary = false;
    unsigned threads = 1;
};

void run_gen(CLI::App& root, GenOpts& o) {
    prepare_out_dir(root, o.out);
    o.meta.modulation = paprlab::modulation_from_name(o.mod);
    paprlab::PaprDataset ds = paprlab::generate(o.meta, o.threads);
    const std::string prefix = o.out + "/" + o.name;
    paprlab::save(ds, prefix, o.binary);

    const unsigned order = 1u << paprlab::bits_per_symbol(ds.meta.modulation);
    const paprlab::BigUint data_space = paprlab::sample_space_size(ds.meta);
    const paprlab::BigUint full_space =
        paprlab::modulation_power(order, static_cast<unsigned>(ds.meta.k));
    const double cov_data =
        paprlab::coverage_fraction(ds.train_rows(), data_space);
    const double cov_full =
        paprlab::coverage_fraction(ds.train_rows(), full_space);

    char line[160];
    std::cout << "wrote " << prefix << ".meta.json (+ "
              << (o.binary ? "bin" : "csv") << " tables)\n";
    std::cout << "rows: " << ds.num_rows() << " (train " << ds.train_rows()
              << ", test " << ds.test_rows() << ")\n";
    std::cout << "sample space, data subcarriers (m^(K-Np)): " << data_space << "\n";
    std::cout << "sample space, all subcarriers  (m^K):      " << full_space << "\n";
    std::snprintf(line, sizeof line,
                  "training coverage: %.2g%% of the data space (%.2g%% of the full "
                  "space)",
                  100.0 * cov_data, 100.0 * cov_full);
    std::cout << line << "\n";
}

struct TrainOpts {
    std::string data;
    std::string out = "out";
    std::string model_name = "model.bin";
    paprlab::TrainConfig cfg;
    std::string optimizer = "sgd-momentum";
    std::string schedule = "step";
    unsigned threads = 1;
};

void run_train(CLI::App& root, TrainOpts& o) {
    prepare_out_dir(root, o.out);
    o.cfg.optimizer = paprlab::optimizer_from_name(o.optimizer);
    o.cfg.lr_schedule = paprlab::lr_schedule_from_name(o.schedule);

    const paprlab::PaprDataset ds = paprlab::load(o.data);
    const std::size_t report_every = std::max<std::size_t>(1, o.cfg.epochs / 20);
    const auto progress = [&](std::size_t epoch, double train_loss, double val_loss) {
        if ((epoch + 1) % report_every != 0 && epoch + 1 != o.cfg.epochs) return;
        std::cout << "epoch " << (epoch + 1) << "/" << o.cfg.epochs
                  << "  train=" << fmt_short(train_loss)
                  << "  val=" << fmt_short(val_loss) << "\n";
    };
    const paprlab::TrainResult result = paprlab::train(ds, o.cfg, o.threads, progress);

    const std::string model_path = o.out + "/" + o.model_name;
    paprlab::save_model(result.model, model_path);

    const std::string trace_path = o.out + "/loss_trace.csv";
    std::ofstream trace(trace_path);
    if (!trace) throw std::runtime_error("cannot write " + trace_path);
    trace << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < result.trace.train_loss.size(); ++e)
        trace << (e + 1) << "," << fmt(result.trace.train_loss[e]) << ","
              << fmt(result.trace.val_loss[e]) << "\n";

    std::cout << "wrote " << model_path << " and " << trace_path << "\n";
    std::cout << "final train loss " << fmt_short(result.trace.train_loss.back())
              << ", val loss " << fmt_short(result.trace.val_loss.back()) << "\n";
}

struct EvalOpts {
    std::string data;
    std::string model_path;
    std::uint64_t seed = 99;
    std::size_t fresh = 0;
    double op_point = 1e-3;
    std::string out = "out";
    unsigned threads = 1;
};

void run_eval(CLI::App& root, EvalOpts& o) {
    prepare_out_dir(root, o.out);

    DatasetMeta meta;
    paprlab::PaprDataset ds;
    if (o.fresh > 0) {
        std::ifstream meta_file(o.data + ".meta.json");
        if (!meta_file)
            throw std::runtime_error("cannot open: " + o.data + ".meta.json");
        std::ostringstream text;
        text << meta_file.rdbuf();
        meta = paprlab::meta_from_json(text.str());
        meta.validate();
        if (o.seed == meta.master_seed)
            throw std::runtime_error(
                "--seed equals the corpus master seed; fresh symbols would repeat "
                "dataset rows, pick another seed");
    } else {
        ds = paprlab::load(o.data);
        meta = ds.meta;
    }

    paprlab::MlpModel model;
    const bool have_model = !o.model_path.empty();
    if (have_model) {
        model = paprlab::load_model(o.model_path);
        const std::uint64_t expected = paprlab::meta_hash(meta);
        if (model.dataset_meta_hash != expected)
            throw std::runtime_error(
                "model was trained on a different dataset (meta hash mismatch)");
    }

    const paprlab::MethodComparison cmp =
        o.fresh > 0 ? paprlab::compare_fresh(meta, have_model ? &model : nullptr,
                                             o.fresh, o.seed, o.threads)
                    : paprlab::compare_on_test_partition(
                          ds, have_model ? &model : nullptr, o.seed, o.threads);

    const auto grid = paprlab::default_threshold_grid(meta.k);
    std::vector<std::pair<std::string, paprlab::CcdfCurve>> curves;
    curves.emplace_back("original", paprlab::ccdf(cmp.original_papr_db, grid));
    curves.emplace_back("mcsa", paprlab::ccdf(cmp.mcsa_papr_db, grid));
    if (have_model) curves.emplace_back("nn", paprlab::ccdf(cmp.nn_papr_db, grid));
    paprlab::write_ccdf_csv(o.out + "/ccdf.csv", curves);

    const double p_orig = paprlab::papr_at_ccdf(cmp.original_papr_db, o.op_point);
    const double p_mcsa = paprlab::papr_at_ccdf(cmp.mcsa_papr_db, o.op_point);
    const auto nn_report = paprlab::complexity_report(paprlab::Method::NN, meta.k);
    const auto mcsa_report = paprlab::complexity_report(
        paprlab::Method::MCSA, meta.k, std::max(1.0, cmp.mean_mcsa_trials));

    nlohmann::ordered_json summary;
    summary["k"] = meta.k;
    summary["modulation"] = paprlab::modulation_name(meta.modulation);
    summary["num_symbols"] = cmp.original_papr_db.size();
    summary["source"] = o.fresh > 0 ? "fresh" : "test-partition";
    summary["ccdf_operating_point"] = o.op_point;
    summary["papr_db_at_op"]["original"] = p_orig;
    summary["papr_db_at_op"]["mcsa"] = p_mcsa;
    summary["reduction_db"]["mcsa"] = p_orig - p_mcsa;
    if (have_model) {
        const double p_nn = paprlab::papr_at_ccdf(cmp.nn_papr_db, o.op_point);
        summary["papr_db_at_op"]["nn"] = p_nn;
        summary["reduction_db"]["nn"] = p_orig - p_nn;
    }
    summary["mean_trials_v"] = cmp.mean_mcsa_trials;
    summary["op_count"]["nn"] = nn_report.op_count;
    summary["op_count"]["mcsa"] = mcsa_report.op_count;
    summary["op_count"]["ratio"] = mcsa_report.op_count / nn_report.op_count;

    std::ofstream sum(o.out + "/summary.json");
    if (!sum) throw std::runtime_error("cannot write " + o.out + "/summary.json");
    sum << summary.dump(2) << "\n";

    std::cout << "wrote " << o.out << "/ccdf.csv and " << o.out << "/summary.json\n";
    std::cout << "at CCDF " << fmt_short(o.op_point) << ": original "
              << fmt_short(p_orig) << " dB, mcsa " << fmt_short(p_mcsa)
              << " dB (reduction " << fmt_short(p_orig - p_mcsa) << " dB)";
    if (have_model)
        std::cout << ", nn "
                  << fmt_short(paprlab::papr_at_ccdf(cmp.nn_papr_db, o.op_point))
                  << " dB";
    std::cout << "\n";
}

struct TraceOpts {
    std::size_t k = 32;
    std::string mod = "qam16";
    std::uint64_t seed = 1;
    std::size_t oversampling = 1;
    bool all_ones = false;
    std::string out = "out";
};

void run_trace(CLI::App& root, TraceOpts& o) {
    prepare_out_dir(root, o.out);
    const paprlab::Modulation mod = paprlab::modulation_from_name(o.mod);

    paprlab::SpectrumSymbol symbol;
    symbol.modulation = mod;
    symbol.values.assign(o.k, {1.0, 0.0});
    if (!o.all_ones) {
        paprlab::SplitMix64 rng(o.seed);
        const int nbits = paprlab::bits_per_symbol(mod);
        std::vector<int> bits(static_cast<std::size_t>(nbits) * o.k);
        for (auto& b : bits) b = rng.next_bit();
        symbol.values = paprlab::map_bits(mod, bits);
    }

    const paprlab::TimeSignal x = paprlab::idft(symbol, o.oversampling);
    const double papr = paprlab::papr_db(x);

    const std::string csv_path = o.out + "/trace.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path);
    csv << "n,power\n";
    for (std::size_t n = 0; n < x.samples.size(); ++n)
        csv << n << "," << fmt(std::norm(x.samples[n])) << "\n";

    nlohmann::ordered_json j;
    j["k"] = o.k;
    j["modulation"] = o.mod;
    j["seed"] = o.seed;
    j["oversampling"] = o.oversampling;
    j["all_ones"] = o.all_ones;
    j["papr_db"] = papr;
    std::ofstream sum(o.out + "/trace.json");
    if (!sum) throw std::runtime_error("cannot write " + o.out + "/trace.json");
    sum << j.dump(2) << "\n";

    std::cout << "wrote " << csv_path << " (" << x.samples.size() << " samples)\n";
    std::cout << "PAPR: " << fmt(papr) << " dB\n";
}

struct SweepOpts {
    std::size_t k = 15;
    std::size_t pilots = 2;
    std::string mod = "qpsk";
    std::vector<double> targets;
    std::size_t symbols = 10000;
    std::uint32_t trials = 256;
    std::uint64_t seed = 99;
    std::string out = "out";
    unsigned threads = 1;
};

void run_sweep(CLI::App& root, SweepOpts& o) {
    prepare_out_dir(root, o.out);
    if (o.targets.empty())
        for (double t = 9.0; t >= 3.0 - 1e-9; t -= 0.5) o.targets.push_back(t);

    DatasetMeta meta;
    meta.k = o.k;
    meta.n_pilots = o.pilots;
    meta.modulation = paprlab::modulation_from_name(o.mod);
    meta.mcsa_max_trials = o.trials;

    const auto points =
        paprlab::sweep_targets(meta, o.targets, o.symbols, o.seed, o.threads);

    const std::string path = o.out + "/sweep.csv";
    std::ofstream csv(path);
    if (!csv) throw std::runtime_error("cannot write " + path);
    csv << "target_db,mean_trials,met_fraction\n";
    for (const auto& p : points)
        csv << fmt(p.target_db) << "," << fmt(p.mean_trials) << ","
            << fmt(p.met_fraction) << "\n";

    std::cout << "wrote " << path << "\n";
    std::cout << "target_db  mean_trials  met_fraction\n";
    char line[120];
    for (const auto& p : points) {
        std::snprintf(line, sizeof line, "%9.2f  %11.2f  %12.4f", p.target_db,
                      p.mean_trials, p.met_fraction);
        std::cout << line << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"OFDM PAPR reduction laboratory: datasets, search, training, reports"};
    app.set_config("--config", "", "read options from an INI file (flags win)");
    app.require_subcommand(1);

    GenOpts gen;
    CLI::App* cmd_gen = app.add_subcommand("gen", "generate a labeled pilot-sign corpus");
    cmd_gen->add_option("--k", gen.meta.k, "subcarrier count")->capture_default_str();
    cmd_gen->add_option("--pilots", gen.meta.n_pilots, "pilot subcarrier count")
        ->capture_default_str();
    cmd_gen
        ->add_option("--pilot-indices", gen.meta.pilot_indices,
                     "explicit pilot bins (default: evenly spaced)")
        ->delimiter(',');
    cmd_gen->add_option("--mod", gen.mod, "modulation: qpsk or qam16")
        ->check(CLI::IsMember({"qpsk", "qam16"}))
        ->capture_default_str();
    cmd_gen->add_option("--samples", gen.meta.num_samples, "total rows to generate")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--split", gen.meta.split_fraction, "training fraction")
        ->capture_default_str();
    cmd_gen->add_option("--seed", gen.meta.master_seed, "master seed")
        ->capture_default_str();
    cmd_gen
        ->add_option("--target", gen.meta.mcsa_target_db,
                     "label-search early-exit PAPR target in dB (0 = never met)")
        ->capture_default_str();
    cmd_gen->add_option("--trials", gen.meta.mcsa_max_trials, "label-search trial budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_gen->add_option("--name", gen.name, "output file prefix")->capture_default_str();
    cmd_gen->add_flag("--binary", gen.binary, "write one packed binary instead of CSVs");
    cmd_gen->add_option("--out", gen.out, "output directory")->capture_default_str();
    cmd_gen->add_option("--threads", gen.threads, "worker threads")->capture_default_str();

    TrainOpts tr;
    CLI::App* cmd_train = app.add_subcommand("train", "fit the pilot-sign network");
    cmd_train->add_option("--data", tr.data, "dataset path prefix (from gen)")->required();
    cmd_train->add_option("--epochs", tr.cfg.epochs, "training epochs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_train->add_option("--batch", tr.cfg.batch_size, "minibatch size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_train->add_option("--hidden", tr.cfg.hidden_units, "hidden layer width")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_train->add_option("--lr", tr.cfg.learning_rate, "base learning rate")
        ->capture_default_str();
    cmd_train->add_option("--momentum", tr.cfg.momentum, "momentum coefficient")
        ->capture_default_str();
    cmd_train
        ->add_option("--optimizer", tr.optimizer, "optimizer: sgd-momentum or adam")
        ->check(CLI::IsMember({"sgd-momentum", "sgd", "adam"}))
        ->capture_default_str();
    cmd_train
        ->add_option("--schedule", tr.schedule,
                     "learning-rate schedule: constant, inverse-time, linear, step")
        ->check(CLI::IsMember({"constant", "inverse-time", "linear", "step"}))
        ->capture_default_str();
    cmd_train
        ->add_option("--decay", tr.cfg.lr_decay, "inverse-time decay coefficient")
        ->capture_default_str();
    cmd_train
        ->add_option("--val-fraction", tr.cfg.validation_fraction,
                     "tail share of the training partition held out for validation")
        ->capture_default_str();
    cmd_train->add_option("--seed", tr.cfg.seed, "init/shuffle seed")
        ->capture_default_str();
    cmd_train->add_option("--model-name", tr.model_name, "model file name")
        ->capture_default_str();
    cmd_train->add_option("--out", tr.out, "output directory")->capture_default_str();
    cmd_train->add_option("--threads", tr.threads, "worker threads")
        ->capture_default_str();

    EvalOpts ev;
    CLI::App* cmd_eval = app.add_subcommand("eval", "CCDF comparison and reports");
    cmd_eval->add_option("--data", ev.data, "dataset path prefix (from gen)")->required();
    cmd_eval->add_option("--model", ev.model_path, "model file (omit to skip the NN)");
    cmd_eval->add_option("--seed", ev.seed, "evaluation seed (search + fresh symbols)")
        ->capture_default_str();
    cmd_eval
        ->add_option("--fresh", ev.fresh,
                     "score N freshly drawn symbols instead of the test partition")
        ->capture_default_str();
    cmd_eval
        ->add_option("--op-point", ev.op_point, "CCDF probability to report reductions at")
        ->capture_default_str();
    cmd_eval->add_option("--out", ev.out, "output directory")->capture_default_str();
    cmd_eval->add_option("--threads", ev.threads, "worker threads")
        ->capture_default_str();

    TraceOpts trc;
    CLI::App* cmd_trace =
        app.add_subcommand("trace", "time-domain power trace of one OFDM symbol");
    cmd_trace->add_option("--k", trc.k, "subcarrier count")->capture_default_str();
    cmd_trace->add_option("--mod", trc.mod, "modulation: qpsk or qam16")
        ->check(CLI::IsMember({"qpsk", "qam16"}))
        ->capture_default_str();
    cmd_trace->add_option("--seed", trc.seed, "symbol seed")->capture_default_str();
    cmd_trace->add_option("--oversampling", trc.oversampling, "oversampling factor L")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_trace->add_flag("--all-ones", trc.all_ones,
                        "use the all-ones spectrum instead of random data");
    cmd_trace->add_option("--out", trc.out, "output directory")->capture_default_str();

    SweepOpts sw;
    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "search-cost table over PAPR targets");
    cmd_sweep->add_option("--k", sw.k, "subcarrier count")->capture_default_str();
    cmd_sweep->add_option("--pilots", sw.pilots, "pilot subcarrier count")
        ->capture_default_str();
    cmd_sweep->add_option("--mod", sw.mod, "modulation: qpsk or qam16")
        ->check(CLI::IsMember({"qpsk", "qam16"}))
        ->capture_default_str();
    cmd_sweep
        ->add_option("--targets", sw.targets,
                     "explicit target list in dB (default: 9 down to 3 by 0.5)")
        ->delimiter(',');
    cmd_sweep->add_option("--symbols", sw.symbols, "symbols per target")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_sweep->add_option("--trials", sw.trials, "search trial budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd_sweep->add_option("--seed", sw.seed, "evaluation seed")->capture_default_str();
    cmd_sweep->add_option("--out", sw.out, "output directory")->capture_default_str();
    cmd_sweep->add_option("--threads", sw.threads, "worker threads")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (cmd_gen->parsed()) run_gen(app, gen);
        if (cmd_train->parsed()) run_train(app, tr);
        if (cmd_eval->parsed()) run_eval(app, ev);
        if (cmd_trace->parsed()) run_trace(app, trc);
        if (cmd_sweep->parsed()) run_sweep(app, sw);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
