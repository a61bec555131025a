#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "paprlab/dataset.hpp"
#include "paprlab/evaluation.hpp"
#include "paprlab/mcsa.hpp"
#include "paprlab/neural.hpp"
#include "paprlab/rng.hpp"
#include "paprlab/signal.hpp"

namespace py = pybind11;
using namespace paprlab;

namespace {

py::array_t<double> to_numpy(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::memcpy(out.mutable_data(), m.data().data(), m.size() * sizeof(double));
    return out;
}

Matrix from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D float array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::memcpy(m.data().data(), a.data(), m.size() * sizeof(double));
    return m;
}

py::object to_py_int(const BigUint& v) {
    // Exact arbitrary-precision handoff via the decimal string.
    return py::module_::import("builtins").attr("int")(v.str());
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "OFDM PAPR reduction laboratory (C++ core)";

    py::enum_<Modulation>(m, "Modulation")
        .value("QPSK", Modulation::QPSK)
        .value("QAM16", Modulation::QAM16);

    m.def("bits_per_symbol", &bits_per_symbol);
    m.def("modulation_name", &modulation_name);
    m.def("modulation_from_name", &modulation_from_name);
    m.def("map_bits", &map_bits, py::arg("modulation"), py::arg("bits"));

    py::class_<SpectrumSymbol>(m, "SpectrumSymbol")
        .def(py::init<>())
        .def_readwrite("values", &SpectrumSymbol::values)
        .def_readwrite("pilot_indices", &SpectrumSymbol::pilot_indices)
        .def_readwrite("modulation", &SpectrumSymbol::modulation)
        .def("size", &SpectrumSymbol::size)
        .def("num_pilots", &SpectrumSymbol::num_pilots)
        .def("data_indices", &SpectrumSymbol::data_indices)
        .def("validate", &SpectrumSymbol::validate);

    py::class_<TimeSignal>(m, "TimeSignal")
        .def(py::init<>())
        .def_readwrite("samples", &TimeSignal::samples)
        .def_readwrite("oversampling", &TimeSignal::oversampling);

    m.def("idft", &idft, py::arg("spectrum"), py::arg("oversampling") = 1);
    m.def("mean_energy", &mean_energy);
    m.def("papr_db", &papr_db);

    py::enum_<PilotMagnitudeMode>(m, "PilotMagnitudeMode")
        .value("DATA_MEAN_ENERGY", PilotMagnitudeMode::DATA_MEAN_ENERGY);

    py::class_<McsaConfig>(m, "McsaConfig")
        .def(py::init<>())
        .def_readwrite("target_papr_db", &McsaConfig::target_papr_db)
        .def_readwrite("max_trials", &McsaConfig::max_trials)
        .def_readwrite("pilot_magnitude_mode", &McsaConfig::pilot_magnitude_mode)
        .def_readwrite("pin_first_trial", &McsaConfig::pin_first_trial);

    py::class_<PilotConfig>(m, "PilotConfig")
        .def(py::init<>())
        .def_readwrite("signs", &PilotConfig::signs)
        .def_readwrite("magnitude", &PilotConfig::magnitude)
        .def("value", &PilotConfig::value);

    py::class_<McsaResult>(m, "McsaResult")
        .def(py::init<>())
        .def_readwrite("pilots", &McsaResult::pilots)
        .def_readwrite("papr_db", &McsaResult::papr_db)
        .def_readwrite("trials_used", &McsaResult::trials_used)
        .def_readwrite("met_target", &McsaResult::met_target);

    m.def("insert_pilots", &insert_pilots);
    m.def("pilot_magnitude", &pilot_magnitude);
    m.def("mcsa_search", &mcsa_search, py::arg("symbol"), py::arg("config"),
          py::arg("seed"));
    m.def("exhaustive_search", &exhaustive_search);
    m.def("default_pilot_indices", &default_pilot_indices);

    py::class_<DatasetMeta>(m, "DatasetMeta")
        .def(py::init<>())
        .def_readwrite("k", &DatasetMeta::k)
        .def_readwrite("n_pilots", &DatasetMeta::n_pilots)
        .def_readwrite("pilot_indices", &DatasetMeta::pilot_indices)
        .def_readwrite("modulation", &DatasetMeta::modulation)
        .def_readwrite("num_samples", &DatasetMeta::num_samples)
        .def_readwrite("split_fraction", &DatasetMeta::split_fraction)
        .def_readwrite("master_seed", &DatasetMeta::master_seed)
        .def_readwrite("mcsa_target_db", &DatasetMeta::mcsa_target_db)
        .def_readwrite("mcsa_max_trials", &DatasetMeta::mcsa_max_trials)
        .def_readwrite("pilot_magnitude", &DatasetMeta::pilot_magnitude)
        .def("data_subcarriers", &DatasetMeta::data_subcarriers)
        .def("feature_width", &DatasetMeta::feature_width)
        .def("split_index", &DatasetMeta::split_index)
        .def("finalize", &DatasetMeta::finalize)
        .def("validate", &DatasetMeta::validate);

    py::class_<PaprDataset>(m, "PaprDataset")
        .def(py::init<>())
        .def_readwrite("meta", &PaprDataset::meta)
        .def_readwrite("split_index", &PaprDataset::split_index)
        .def_property(
            "features", [](const PaprDataset& d) { return to_numpy(d.features); },
            [](PaprDataset& d, const py::array_t<double>& a) { d.features = from_numpy(a); })
        .def_property(
            "labels", [](const PaprDataset& d) { return to_numpy(d.labels); },
            [](PaprDataset& d, const py::array_t<double>& a) { d.labels = from_numpy(a); })
        .def("num_rows", &PaprDataset::num_rows)
        .def("train_rows", &PaprDataset::train_rows)
        .def("test_rows", &PaprDataset::test_rows);

    m.def("generate", &generate, py::arg("meta"), py::arg("threads") = 1);
    m.def("generate_feature_row", &generate_feature_row, py::arg("meta"), py::arg("row"),
          py::arg("attempt") = 0);
    m.def("label_row", &label_row, py::arg("meta"), py::arg("row"), py::arg("attempt") = 0);
    m.def("symbol_from_features",
          [](const DatasetMeta& meta, const std::vector<double>& row) {
              if (row.size() != meta.feature_width())
                  throw std::invalid_argument("feature row width mismatch");
              return symbol_from_features(meta, row.data());
          });
    m.def("sample_space_size",
          [](const DatasetMeta& meta) { return to_py_int(sample_space_size(meta)); });
    m.def("modulation_power", [](unsigned order, unsigned exponent) {
        return to_py_int(modulation_power(order, exponent));
    });
    m.def("coverage_fraction", [](std::uint64_t train_rows, py::object space) {
        const BigUint s(py::str(space).cast<std::string>());
        return coverage_fraction(train_rows, s);
    });
    m.def("meta_hash", &meta_hash);
    m.def("meta_to_json", &meta_to_json);
    m.def("meta_from_json", &meta_from_json);
    m.def("save", &save, py::arg("dataset"), py::arg("prefix"), py::arg("binary") = false);
    m.def("load", &load, py::arg("prefix"));

    py::enum_<Optimizer>(m, "Optimizer")
        .value("SGD_MOMENTUM", Optimizer::SGD_MOMENTUM)
        .value("ADAM", Optimizer::ADAM);

    py::enum_<LrSchedule>(m, "LrSchedule")
        .value("CONSTANT", LrSchedule::CONSTANT)
        .value("INVERSE_TIME", LrSchedule::INVERSE_TIME)
        .value("LINEAR_TO_ZERO", LrSchedule::LINEAR_TO_ZERO)
        .value("STEP_DECAY", LrSchedule::STEP_DECAY);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("hidden_units", &TrainConfig::hidden_units)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("momentum", &TrainConfig::momentum)
        .def_readwrite("optimizer", &TrainConfig::optimizer)
        .def_readwrite("lr_schedule", &TrainConfig::lr_schedule)
        .def_readwrite("lr_decay", &TrainConfig::lr_decay)
        .def_readwrite("validation_fraction", &TrainConfig::validation_fraction)
        .def_readwrite("seed", &TrainConfig::seed)
        .def("validate", &TrainConfig::validate)
        .def("epoch_learning_rate", &TrainConfig::epoch_learning_rate);

    py::class_<TrainTrace>(m, "TrainTrace")
        .def(py::init<>())
        .def_readwrite("train_loss", &TrainTrace::train_loss)
        .def_readwrite("val_loss", &TrainTrace::val_loss);

    py::class_<MlpModel>(m, "MlpModel")
        .def(py::init<>())
        .def_property_readonly("w1", [](const MlpModel& mm) { return to_numpy(mm.w1); })
        .def_property_readonly("w2", [](const MlpModel& mm) { return to_numpy(mm.w2); })
        .def_readwrite("b1", &MlpModel::b1)
        .def_readwrite("b2", &MlpModel::b2)
        .def_readwrite("pilot_magnitude", &MlpModel::pilot_magnitude)
        .def_readwrite("dataset_meta_hash", &MlpModel::dataset_meta_hash)
        .def_readwrite("training_json", &MlpModel::training_json)
        .def("input_width", &MlpModel::input_width)
        .def("hidden_units", &MlpModel::hidden_units)
        .def("output_width", &MlpModel::output_width);

    py::class_<TrainResult>(m, "TrainResult")
        .def(py::init<>())
        .def_readwrite("model", &TrainResult::model)
        .def_readwrite("trace", &TrainResult::trace);

    m.def("init_model", &init_model, py::arg("input_width"), py::arg("hidden_units"),
          py::arg("output_width"), py::arg("seed"));
    m.def(
        "forward",
        [](const MlpModel& model, const py::array_t<double>& x, unsigned threads) {
            return to_numpy(forward(model, from_numpy(x), threads));
        },
        py::arg("model"), py::arg("x"), py::arg("threads") = 1);
    m.def("mse_loss", [](const py::array_t<double>& p, const py::array_t<double>& t) {
        return mse_loss(from_numpy(p), from_numpy(t));
    });
    m.def("train", &train, py::arg("dataset"), py::arg("config"), py::arg("threads") = 1,
          py::arg("on_epoch") = EpochCallback{});
    m.def(
        "predict_pilots",
        [](const MlpModel& model, const py::array_t<double>& x, unsigned threads) {
            return to_numpy(predict_pilots(model, from_numpy(x), threads));
        },
        py::arg("model"), py::arg("x"), py::arg("threads") = 1);
    m.def(
        "predict_pilot_config",
        [](const MlpModel& model, const std::vector<double>& features) {
            return predict_pilots(model, features);
        },
        py::arg("model"), py::arg("features"));
    m.def("save_model", &save_model);
    m.def("load_model", &load_model);

    py::class_<CcdfCurve>(m, "CcdfCurve")
        .def(py::init<>())
        .def_readwrite("thresholds_db", &CcdfCurve::thresholds_db)
        .def_readwrite("probabilities", &CcdfCurve::probabilities)
        .def_readwrite("sample_count", &CcdfCurve::sample_count);

    m.def("default_threshold_grid", &default_threshold_grid);
    m.def("ccdf", &ccdf, py::arg("papr_db"), py::arg("thresholds_db"));
    m.def("papr_at_ccdf", &papr_at_ccdf, py::arg("papr_db"), py::arg("probability"));
    m.def("max_ccdf_gap_db", &max_ccdf_gap_db, py::arg("a"), py::arg("b"),
          py::arg("p_min"), py::arg("p_max"), py::arg("points") = 100);

    py::class_<MethodComparison>(m, "MethodComparison")
        .def(py::init<>())
        .def_readwrite("original_papr_db", &MethodComparison::original_papr_db)
        .def_readwrite("mcsa_papr_db", &MethodComparison::mcsa_papr_db)
        .def_readwrite("nn_papr_db", &MethodComparison::nn_papr_db)
        .def_readwrite("mean_mcsa_trials", &MethodComparison::mean_mcsa_trials);

    m.def("compare_on_test_partition", &compare_on_test_partition, py::arg("dataset"),
          py::arg("model") = nullptr, py::arg("eval_seed") = 99, py::arg("threads") = 1);
    m.def("compare_fresh", &compare_fresh, py::arg("meta"), py::arg("model") = nullptr,
          py::arg("num_symbols") = 1000, py::arg("eval_seed") = 99,
          py::arg("threads") = 1);
    m.def("mean_trials", &mean_trials);

    py::enum_<Method>(m, "Method").value("NN", Method::NN).value("MCSA", Method::MCSA);

    py::class_<ComplexityReport>(m, "ComplexityReport")
        .def(py::init<>())
        .def_readwrite("method", &ComplexityReport::method)
        .def_readwrite("k", &ComplexityReport::k)
        .def_readwrite("mean_trials_v", &ComplexityReport::mean_trials_v)
        .def_readwrite("op_count", &ComplexityReport::op_count);

    m.def("complexity_report", &complexity_report, py::arg("method"), py::arg("k"),
          py::arg("mean_trials_v") = 1.0);

    py::class_<SweepPoint>(m, "SweepPoint")
        .def(py::init<>())
        .def_readwrite("target_db", &SweepPoint::target_db)
        .def_readwrite("mean_trials", &SweepPoint::mean_trials)
        .def_readwrite("met_fraction", &SweepPoint::met_fraction);

    m.def("sweep_targets", &sweep_targets, py::arg("meta"), py::arg("targets_db"),
          py::arg("num_symbols"), py::arg("eval_seed"), py::arg("threads") = 1);

    py::class_<SplitMix64>(m, "SplitMix64")
        .def(py::init<std::uint64_t>())
        .def("next", &SplitMix64::next)
        .def("next_bit", &SplitMix64::next_bit)
        .def("next_sign", &SplitMix64::next_sign)
        .def("next_unit", &SplitMix64::next_unit);

    m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("salt"));
}
