#pragma once

#include <vector>

#include "mrn/rng.hpp"

namespace mrn {

// Per-feature affine map to [0,1] fitted on training rows. A feature with
// zero observed range maps to 0.
struct MinMaxScaler {
    std::vector<double> lo;
    std::vector<double> hi;
};

MinMaxScaler scaler_fit(const std::vector<std::vector<double>>& rows);
std::vector<double> scaler_transform(const MinMaxScaler& s, const std::vector<double>& x);
std::vector<double> scaler_inverse(const MinMaxScaler& s, const std::vector<double>& z);

// Dense feed-forward net; rectifier on every layer except the last, which is
// linear. sizes = {in, hidden..., out}; weights are out-major row blocks.
struct MlpModel {
    std::vector<int> sizes;
    std::vector<std::vector<double>> w; // per layer, sizes[l+1] x sizes[l], row-major
    std::vector<std::vector<double>> b; // per layer, sizes[l+1]
};

// Symmetric uniform init with limit sqrt(6 / (fan_in + fan_out)); zero biases.
MlpModel mlp_init(const std::vector<int>& sizes, Rng& rng);

std::vector<double> mlp_forward(const MlpModel& model, const std::vector<double>& x);

struct Dataset {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
};

struct TrainConfig {
    int epochs = 100;
    int batch_size = 64;
    double validation_split = 0.2;
    double initial_lr = 0.01;
    double decay_steps = 10000.0;
    double decay_rate = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

void validate_train_config(const TrainConfig& cfg);

struct TrainHistory {
    std::vector<double> train_mae; // per epoch, post-update
    std::vector<double> val_mae;   // per epoch; empty validation set yields NaN-free zeros skipped
};

// Gradient of the batch-mean absolute error at the current weights, same
// shapes as the model. Exposed for finite-difference verification.
struct MlpGradient {
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;
};

MlpGradient mlp_gradient(const MlpModel& model,
                         const std::vector<const std::vector<double>*>& xs,
                         const std::vector<double>& ys);

double mlp_mae(const MlpModel& model, const Dataset& data);

// Mini-batch adaptive-moment descent on mean absolute error. The tail
// `validation_split` share of the incoming (pre-shuffled) rows is held out;
// the rest is reshuffled every epoch. Learning rate decays continuously as
// initial * rate^(update/decay_steps). Throws NumericalError if the loss
// turns non-finite.
TrainHistory mlp_train(MlpModel& model, const Dataset& data, const TrainConfig& cfg, Rng& rng);

} // namespace mrn
