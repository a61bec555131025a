#include "paprlab/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "paprlab/parallel.hpp"
#include "paprlab/rng.hpp"

namespace paprlab {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void relu_rows(const MlpModel& model, const Matrix& x, Matrix& z1, Matrix& a1,
               unsigned threads) {
    const std::size_t h_units = model.hidden_units();
    const std::size_t d = model.input_width();
    parallel_for(x.rows(), threads, [&](std::size_t r) {
        const double* xr = x.row_ptr(r);
        double* zr = z1.row_ptr(r);
        double* ar = a1.row_ptr(r);
        for (std::size_t h = 0; h < h_units; ++h) {
            const double* w = model.w1.row_ptr(h);
            double acc = model.b1[h];
            for (std::size_t i = 0; i < d; ++i) acc += w[i] * xr[i];
            zr[h] = acc;
            ar[h] = acc > 0.0 ? acc : 0.0;
        }
    });
}

void output_rows(const MlpModel& model, const Matrix& a1, Matrix& out,
                 unsigned threads) {
    const std::size_t p_units = model.output_width();
    const std::size_t h_units = model.hidden_units();
    parallel_for(a1.rows(), threads, [&](std::size_t r) {
        const double* ar = a1.row_ptr(r);
        double* orow = out.row_ptr(r);
        for (std::size_t p = 0; p < p_units; ++p) {
            const double* w = model.w2.row_ptr(p);
            double acc = model.b2[p];
            for (std::size_t h = 0; h < h_units; ++h) acc += w[h] * ar[h];
            orow[p] = acc;
        }
    });
}

void check_input(const MlpModel& model, const Matrix& x) {
    if (x.cols() != model.input_width())
        throw std::domain_error("input width does not match the model");
}

struct ParamSlot {
    double* value;
    const double* grad;
    std::size_t count;
};

std::vector<ParamSlot> param_slots(MlpModel& model, const Gradients& grads) {
    return {
        {model.w1.data().data(), grads.w1.data().data(), model.w1.size()},
        {model.b1.data(), grads.b1.data(), model.b1.size()},
        {model.w2.data().data(), grads.w2.data().data(), model.w2.size()},
        {model.b2.data(), grads.b2.data(), model.b2.size()},
    };
}

struct OptimizerState {
    std::vector<std::vector<double>> first;   // momentum / Adam m
    std::vector<std::vector<double>> second;  // Adam v
    std::uint64_t step = 0;

    explicit OptimizerState(const std::vector<ParamSlot>& slots) {
        for (const auto& s : slots) {
            first.emplace_back(s.count, 0.0);
            second.emplace_back(s.count, 0.0);
        }
    }
};

void apply_update(const TrainConfig& cfg, double lr, std::vector<ParamSlot>& slots,
                  OptimizerState& state) {
    ++state.step;
    if (cfg.optimizer == Optimizer::ADAM) {
        const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
        const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
        for (std::size_t s = 0; s < slots.size(); ++s) {
            auto& m = state.first[s];
            auto& v = state.second[s];
            const ParamSlot& slot = slots[s];
            for (std::size_t i = 0; i < slot.count; ++i) {
                const double g = slot.grad[i];
                m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g;
                v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g * g;
                slot.value[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kAdamEps);
            }
        }
    } else {
        for (std::size_t s = 0; s < slots.size(); ++s) {
            auto& m = state.first[s];
            const ParamSlot& slot = slots[s];
            for (std::size_t i = 0; i < slot.count; ++i) {
                m[i] = cfg.momentum * m[i] + slot.grad[i];
                slot.value[i] -= lr * m[i];
            }
        }
    }
}

void gather_rows(const Matrix& src, const std::vector<std::size_t>& order,
                 std::size_t begin, std::size_t end, Matrix& dst) {
    for (std::size_t i = begin; i < end; ++i)
        std::memcpy(dst.row_ptr(i - begin), src.row_ptr(order[i]),
                    src.cols() * sizeof(double));
}

} // namespace

const char* optimizer_name(Optimizer opt) {
    return opt == Optimizer::ADAM ? "adam" : "sgd-momentum";
}

Optimizer optimizer_from_name(const std::string& name) {
    if (name == "adam") return Optimizer::ADAM;
    if (name == "sgd-momentum" || name == "sgd") return Optimizer::SGD_MOMENTUM;
    throw std::invalid_argument("unknown optimizer: " + name);
}

const char* lr_schedule_name(LrSchedule sched) {
    switch (sched) {
        case LrSchedule::CONSTANT: return "constant";
        case LrSchedule::INVERSE_TIME: return "inverse-time";
        case LrSchedule::LINEAR_TO_ZERO: return "linear";
        case LrSchedule::STEP_DECAY: return "step";
    }
    throw std::logic_error("unreachable");
}

LrSchedule lr_schedule_from_name(const std::string& name) {
    if (name == "constant") return LrSchedule::CONSTANT;
    if (name == "inverse-time") return LrSchedule::INVERSE_TIME;
    if (name == "linear") return LrSchedule::LINEAR_TO_ZERO;
    if (name == "step") return LrSchedule::STEP_DECAY;
    throw std::invalid_argument("unknown learning-rate schedule: " + name);
}

void TrainConfig::validate() const {
    if (hidden_units < 1) throw std::domain_error("hidden_units must be >= 1");
    if (epochs < 1) throw std::domain_error("epochs must be >= 1");
    if (batch_size < 1) throw std::domain_error("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::domain_error("learning_rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0))
        throw std::domain_error("momentum must be in [0, 1)");
    if (lr_schedule == LrSchedule::INVERSE_TIME && !(lr_decay >= 0.0))
        throw std::domain_error("lr_decay must be >= 0");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw std::domain_error("validation_fraction must be in (0, 1)");
}

double TrainConfig::epoch_learning_rate(std::size_t epoch) const {
    switch (lr_schedule) {
        case LrSchedule::CONSTANT:
            return learning_rate;
        case LrSchedule::INVERSE_TIME:
            return learning_rate / (1.0 + lr_decay * static_cast<double>(epoch));
        case LrSchedule::LINEAR_TO_ZERO:
            return learning_rate *
                   (1.0 - static_cast<double>(epoch) / static_cast<double>(epochs));
        case LrSchedule::STEP_DECAY: {
            const double frac =
                static_cast<double>(epoch) / static_cast<double>(epochs);
            if (frac < 0.6) return learning_rate;
            if (frac < 0.85) return learning_rate * 0.1;
            return learning_rate * 0.01;
        }
    }
    throw std::logic_error("unreachable");
}

MlpModel init_model(std::size_t input_width, std::size_t hidden_units,
                    std::size_t output_width, std::uint64_t seed) {
    if (input_width < 1 || hidden_units < 1 || output_width < 1)
        throw std::domain_error("model dimensions must be >= 1");
    MlpModel model;
    model.w1 = Matrix(hidden_units, input_width);
    model.b1.assign(hidden_units, 0.0);
    model.w2 = Matrix(output_width, hidden_units);
    model.b2.assign(output_width, 0.0);

    SplitMix64 rng(derive_seed(seed, 0));
    const double s1 = 1.0 / std::sqrt(static_cast<double>(input_width));
    for (double& w : model.w1.data()) w = rng.next_symmetric(1.0) * s1;
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_units));
    for (double& w : model.w2.data()) w = rng.next_symmetric(1.0) * s2;
    return model;
}

Matrix forward(const MlpModel& model, const Matrix& x, unsigned threads) {
    check_input(model, x);
    Matrix z1(x.rows(), model.hidden_units());
    Matrix a1(x.rows(), model.hidden_units());
    relu_rows(model, x, z1, a1, threads);
    Matrix out(x.rows(), model.output_width());
    output_rows(model, a1, out, threads);
    return out;
}

std::vector<double> forward(const MlpModel& model, const std::vector<double>& features) {
    Matrix x(1, features.size());
    std::memcpy(x.row_ptr(0), features.data(), features.size() * sizeof(double));
    const Matrix out = forward(model, x, 1);
    return {out.data().begin(), out.data().end()};
}

double mse_loss(const Matrix& predicted, const Matrix& target) {
    if (!predicted.same_shape(target))
        throw std::domain_error("prediction and target shapes differ");
    if (predicted.empty()) throw std::domain_error("empty batch");
    double acc = 0.0;
    const auto& p = predicted.data();
    const auto& t = target.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - t[i];
        acc += d * d;
    }
    return acc / static_cast<double>(p.size());
}

double backward(const MlpModel& model, const Matrix& x, const Matrix& y,
                Gradients& grads, unsigned threads) {
    check_input(model, x);
    if (y.rows() != x.rows() || y.cols() != model.output_width())
        throw std::domain_error("target shape does not match the model");
    if (x.rows() == 0) throw std::domain_error("empty batch");

    const std::size_t n = x.rows();
    const std::size_t d = model.input_width();
    const std::size_t h_units = model.hidden_units();
    const std::size_t p_units = model.output_width();

    Matrix z1(n, h_units), a1(n, h_units);
    relu_rows(model, x, z1, a1, threads);
    Matrix out(n, p_units);
    output_rows(model, a1, out, threads);

    // dL/d(out) for the mean over all n*p squared errors.
    const double scale = 2.0 / static_cast<double>(n * p_units);
    Matrix g(n, p_units);
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double diff = out.data()[i] - y.data()[i];
        loss += diff * diff;
        g.data()[i] = scale * diff;
    }
    loss /= static_cast<double>(out.size());

    auto reset = [](Matrix& m, std::size_t rows, std::size_t cols) {
        if (m.rows() == rows && m.cols() == cols)
            std::fill(m.data().begin(), m.data().end(), 0.0);
        else
            m = Matrix(rows, cols);
    };
    reset(grads.w1, h_units, d);
    grads.b1.assign(h_units, 0.0);
    reset(grads.w2, p_units, h_units);
    grads.b2.assign(p_units, 0.0);

    // Accumulate over the batch in row order within each column slice, so the
    // result is bit-identical for any thread count.
    parallel_blocks(h_units, threads, [&](std::size_t h0, std::size_t h1) {
        for (std::size_t r = 0; r < n; ++r) {
            const double* gr = g.row_ptr(r);
            const double* ar = a1.row_ptr(r);
            for (std::size_t p = 0; p < p_units; ++p) {
                double* wrow = grads.w2.row_ptr(p);
                const double gv = gr[p];
                for (std::size_t h = h0; h < h1; ++h) wrow[h] += gv * ar[h];
            }
        }
    });
    for (std::size_t r = 0; r < n; ++r) {
        const double* gr = g.row_ptr(r);
        for (std::size_t p = 0; p < p_units; ++p) grads.b2[p] += gr[p];
    }

    Matrix dz1(n, h_units);
    parallel_for(n, threads, [&](std::size_t r) {
        const double* gr = g.row_ptr(r);
        const double* zr = z1.row_ptr(r);
        double* dzr = dz1.row_ptr(r);
        for (std::size_t h = 0; h < h_units; ++h) {
            double acc = 0.0;
            for (std::size_t p = 0; p < p_units; ++p) acc += gr[p] * model.w2(p, h);
            dzr[h] = zr[h] > 0.0 ? acc : 0.0;
        }
    });

    parallel_blocks(h_units, threads, [&](std::size_t h0, std::size_t h1) {
        for (std::size_t r = 0; r < n; ++r) {
            const double* dzr = dz1.row_ptr(r);
            const double* xr = x.row_ptr(r);
            for (std::size_t h = h0; h < h1; ++h) {
                const double dv = dzr[h];
                if (dv == 0.0) continue;
                double* wrow = grads.w1.row_ptr(h);
                for (std::size_t i = 0; i < d; ++i) wrow[i] += dv * xr[i];
            }
        }
    });
    for (std::size_t r = 0; r < n; ++r) {
        const double* dzr = dz1.row_ptr(r);
        for (std::size_t h = 0; h < h_units; ++h) grads.b1[h] += dzr[h];
    }

    return loss;
}

TrainResult train(const PaprDataset& dataset, const TrainConfig& config,
                  unsigned threads, const EpochCallback& on_epoch) {
    config.validate();
    if (dataset.split_index < 1 || dataset.split_index > dataset.features.rows())
        throw std::domain_error("dataset has no usable training partition");

    const std::size_t n_train_all = dataset.split_index;
    const std::size_t n_val = static_cast<std::size_t>(
        config.validation_fraction * static_cast<double>(n_train_all));
    const std::size_t n_fit = n_train_all - n_val;
    if (n_fit < 1) throw std::domain_error("validation split leaves no training rows");

    const std::size_t d = dataset.features.cols();
    const std::size_t p_units = dataset.labels.cols();

    // Degenerate tiny corpora can floor the validation slice to zero rows;
    // score the fit rows then so the trace stays finite.
    const std::size_t val_begin = n_val > 0 ? n_fit : 0;
    const std::size_t val_rows = n_val > 0 ? n_val : n_fit;
    Matrix x_val(val_rows, d), y_val(val_rows, p_units);
    for (std::size_t i = 0; i < val_rows; ++i) {
        const std::size_t r = val_begin + i;
        std::memcpy(x_val.row_ptr(i), dataset.features.row_ptr(r), d * sizeof(double));
        std::memcpy(y_val.row_ptr(i), dataset.labels.row_ptr(r),
                    p_units * sizeof(double));
    }

    TrainResult result;
    result.model = init_model(d, config.hidden_units, p_units, config.seed);
    result.model.pilot_magnitude = dataset.meta.pilot_magnitude;
    result.model.dataset_meta_hash = meta_hash(dataset.meta);
    {
        nlohmann::ordered_json t;
        t["hidden_units"] = config.hidden_units;
        t["epochs"] = config.epochs;
        t["batch_size"] = config.batch_size;
        t["learning_rate"] = config.learning_rate;
        t["momentum"] = config.momentum;
        t["optimizer"] = optimizer_name(config.optimizer);
        t["lr_schedule"] = lr_schedule_name(config.lr_schedule);
        t["lr_decay"] = config.lr_decay;
        t["validation_fraction"] = config.validation_fraction;
        t["seed"] = config.seed;
        result.model.training_json = t.dump();
    }

    Gradients grads;
    grads.w1 = Matrix(config.hidden_units, d);
    grads.b1.assign(config.hidden_units, 0.0);
    grads.w2 = Matrix(p_units, config.hidden_units);
    grads.b2.assign(p_units, 0.0);
    auto slots = param_slots(result.model, grads);
    OptimizerState opt_state(slots);

    std::vector<std::size_t> order(n_fit);
    std::iota(order.begin(), order.end(), std::size_t{0});

    const std::size_t batch = std::min<std::size_t>(config.batch_size, n_fit);
    Matrix xb(batch, d), yb(batch, p_units);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        SplitMix64 shuffle_rng(derive_seed(config.seed, epoch + 1));
        for (std::size_t i = n_fit - 1; i > 0; --i) {
            const std::size_t j = shuffle_rng.next_below(i + 1);
            std::swap(order[i], order[j]);
        }

        const double lr = config.epoch_learning_rate(epoch);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < n_fit; begin += batch) {
            const std::size_t end = std::min(n_fit, begin + batch);
            const std::size_t rows = end - begin;
            if (xb.rows() != rows) {
                xb = Matrix(rows, d);
                yb = Matrix(rows, p_units);
            }
            gather_rows(dataset.features, order, begin, end, xb);
            gather_rows(dataset.labels, order, begin, end, yb);

            epoch_loss += backward(result.model, xb, yb, grads, threads);
            ++batches;
            // backward may reallocate the gradient buffers, so refresh the views.
            slots = param_slots(result.model, grads);
            apply_update(config, lr, slots, opt_state);
        }

        const double train_loss = epoch_loss / static_cast<double>(batches);
        const double val_loss =
            mse_loss(forward(result.model, x_val, threads), y_val);
        result.trace.train_loss.push_back(train_loss);
        result.trace.val_loss.push_back(val_loss);
        if (on_epoch) on_epoch(epoch, train_loss, val_loss);
    }

    return result;
}

Matrix predict_pilots(const MlpModel& model, const Matrix& x, unsigned threads) {
    Matrix out = forward(model, x, threads);
    for (double& v : out.data())
        v = v < 0.0 ? -model.pilot_magnitude : model.pilot_magnitude;
    return out;
}

PilotConfig predict_pilots(const MlpModel& model, const std::vector<double>& features) {
    const std::vector<double> out = forward(model, features);
    PilotConfig config;
    config.magnitude = model.pilot_magnitude;
    config.signs.reserve(out.size());
    for (double v : out) config.signs.push_back(v < 0.0 ? -1.0 : 1.0);
    return config;
}

namespace {

void write_block(std::ofstream& out, const double* data, std::size_t count) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * sizeof(double)));
}

void read_block(std::ifstream& in, double* data, std::size_t count,
                const std::string& path, const char* which) {
    in.read(reinterpret_cast<char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
        throw ParseError(path + ": truncated " + which + " block");
}

} // namespace

void save_model(const MlpModel& model, const std::string& path) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["layout"] = "mlp-relu-1h";
    j["activation"] = "relu";
    j["input_width"] = model.input_width();
    j["hidden_units"] = model.hidden_units();
    j["output_width"] = model.output_width();
    j["pilot_magnitude"] = model.pilot_magnitude;
    j["dataset_meta_hash"] = model.dataset_meta_hash;
    try {
        j["training"] = nlohmann::ordered_json::parse(model.training_json);
    } catch (const nlohmann::json::exception&) {
        j["training"] = nullptr;
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump() << "\n";
    write_block(out, model.w1.data().data(), model.w1.size());
    write_block(out, model.b1.data(), model.b1.size());
    write_block(out, model.w2.data().data(), model.w2.size());
    write_block(out, model.b2.data(), model.b2.size());
    if (!out) throw std::runtime_error("write failed: " + path);
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    std::string header;
    if (!std::getline(in, header)) throw ParseError(path + ": missing header line");

    MlpModel model;
    std::size_t d = 0, h = 0, p = 0;
    try {
        const auto j = nlohmann::ordered_json::parse(header);
        if (j.at("schema_version").get<int>() != 1)
            throw ParseError(path + ": unsupported model schema version");
        if (j.at("layout").get<std::string>() != "mlp-relu-1h")
            throw ParseError(path + ": unsupported model layout");
        d = j.at("input_width").get<std::size_t>();
        h = j.at("hidden_units").get<std::size_t>();
        p = j.at("output_width").get<std::size_t>();
        model.pilot_magnitude = j.at("pilot_magnitude").get<double>();
        model.dataset_meta_hash = j.at("dataset_meta_hash").get<std::uint64_t>();
        model.training_json = j.at("training").dump();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": bad model header: " + e.what());
    }
    if (d < 1 || h < 1 || p < 1) throw ParseError(path + ": bad model dimensions");

    model.w1 = Matrix(h, d);
    model.b1.assign(h, 0.0);
    model.w2 = Matrix(p, h);
    model.b2.assign(p, 0.0);
    read_block(in, model.w1.data().data(), model.w1.size(), path, "w1");
    read_block(in, model.b1.data(), model.b1.size(), path, "b1");
    read_block(in, model.w2.data().data(), model.w2.size(), path, "w2");
    read_block(in, model.b2.data(), model.b2.size(), path, "b2");
    char extra;
    if (in.read(&extra, 1) && in.gcount() == 1)
        throw ParseError(path + ": trailing bytes after parameter blocks");
    return model;
}

} // namespace paprlab
