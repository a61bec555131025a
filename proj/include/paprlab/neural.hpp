#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "paprlab/dataset.hpp"
#include "paprlab/matrix.hpp"
#include "paprlab/mcsa.hpp"

namespace paprlab {

enum class Activation { RELU };

// Single hidden layer, ReLU activation, linear output. Trained with MSE
// against the searched pilot values, so the regression target is +-sqrt(E)
// per pilot and prediction quantizes the output back onto that set.
struct MlpModel {
    Matrix w1;  // hidden x input
    std::vector<double> b1;
    Matrix w2;  // output x hidden
    std::vector<double> b2;
    Activation activation = Activation::RELU;
    double pilot_magnitude = 1.0;
    std::uint64_t dataset_meta_hash = 0;
    // JSON provenance blob stamped by train() and carried in the model file:
    // seed, optimizer, schedule and the rest of the training configuration.
    std::string training_json = "null";

    std::size_t input_width() const { return w1.cols(); }
    std::size_t hidden_units() const { return w1.rows(); }
    std::size_t output_width() const { return w2.rows(); }
};

struct Gradients {
    Matrix w1;
    std::vector<double> b1;
    Matrix w2;
    std::vector<double> b2;
};

enum class Optimizer { SGD_MOMENTUM, ADAM };

// STEP_DECAY holds the base rate for the first 60% of the epochs, then 1/10
// of it until 85%, then 1/100: the early phase does the annealing, the cold
// tail lets the loss settle to a flat plateau.
enum class LrSchedule { CONSTANT, INVERSE_TIME, LINEAR_TO_ZERO, STEP_DECAY };

const char* optimizer_name(Optimizer opt);
Optimizer optimizer_from_name(const std::string& name);
const char* lr_schedule_name(LrSchedule sched);
LrSchedule lr_schedule_from_name(const std::string& name);

struct TrainConfig {
    std::size_t hidden_units = 500;
    std::size_t epochs = 500;
    std::size_t batch_size = 256;
    double learning_rate = 0.08;
    double momentum = 0.9;
    Optimizer optimizer = Optimizer::SGD_MOMENTUM;
    LrSchedule lr_schedule = LrSchedule::STEP_DECAY;
    double lr_decay = 0.0;  // inverse-time coefficient, used by INVERSE_TIME
    double validation_fraction = 0.1;
    std::uint64_t seed = 1;

    void validate() const;
    double epoch_learning_rate(std::size_t epoch) const;
};

struct TrainTrace {
    std::vector<double> train_loss;  // one entry per epoch
    std::vector<double> val_loss;
};

struct TrainResult {
    MlpModel model;
    TrainTrace trace;
};

using EpochCallback =
    std::function<void(std::size_t epoch, double train_loss, double val_loss)>;

MlpModel init_model(std::size_t input_width, std::size_t hidden_units,
                    std::size_t output_width, std::uint64_t seed);

// Raw network outputs, one row per input row.
Matrix forward(const MlpModel& model, const Matrix& x, unsigned threads = 1);
std::vector<double> forward(const MlpModel& model, const std::vector<double>& features);

double mse_loss(const Matrix& predicted, const Matrix& target);

// Analytic gradient of the batch MSE with respect to all parameters.
double backward(const MlpModel& model, const Matrix& x, const Matrix& y,
                Gradients& grads, unsigned threads = 1);

// Fits on rows [0, split_index) of the dataset; the last validation_fraction
// of that range is held out for the per-epoch validation loss (when that
// slice floors to zero rows, the fit rows themselves are scored instead).
// Rows at or beyond split_index are never touched.
TrainResult train(const PaprDataset& dataset, const TrainConfig& config,
                  unsigned threads = 1, const EpochCallback& on_epoch = {});

// Quantizes raw outputs onto {-pilot_magnitude, +pilot_magnitude}; a raw
// value of exactly zero maps to +pilot_magnitude.
Matrix predict_pilots(const MlpModel& model, const Matrix& x, unsigned threads = 1);
PilotConfig predict_pilots(const MlpModel& model, const std::vector<double>& features);

void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

} // namespace paprlab
