#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "asmp/data_io.hpp"
#include "asmp/energy.hpp"
#include "asmp/graph.hpp"
#include "asmp/rng.hpp"

namespace asmp {

enum class FeatureMapKind { identity, linear, two_layer };

/// Feature transform g_theta: a two-layer perceptron by default, with a
/// plain linear and an identity variant for controlled experiments.
/// Biases are stored as 1 x d matrices so the optimizer treats every
/// parameter uniformly.
struct Mlp {
    FeatureMapKind kind = FeatureMapKind::two_layer;
    Matrix w1, b1;  // in x hidden, 1 x hidden (linear: in x classes, 1 x classes)
    Matrix w2, b2;  // hidden x classes, 1 x classes (two_layer only)
};

struct ClassifierModel {
    Mlp mlp;
    AsmpParams asmp;
    NormMode normalization = NormMode::rw;
    bool structure_updates = true;
    double degree_floor = kDegreeFloor;
    std::uint64_t seed = 1;
};

enum class HyperMode { fixed, learned_fd };

struct TrainConfig {
    int epochs = 200;
    double learning_rate = 0.01;
    double weight_decay = 5e-4;
    double dropout = 0.0;
    int hidden = 16;
    HyperMode hyperparam_mode = HyperMode::fixed;
    double fd_step = 1e-4;  // central-difference step for the six ASMP scalars
    int patience = 50;      // epochs without val improvement before stopping; <= 0 disables
};

/// Fresh model with symmetric-uniform 1/sqrt(fan_in) weights and zero biases.
ClassifierModel init_model(int in_dim, int n_classes, const TrainConfig& cfg,
                           const AsmpParams& asmp, std::uint64_t seed,
                           FeatureMapKind kind = FeatureMapKind::two_layer);

/// Set eta1/eta2 to the safety-scaled theorem bounds, with B taken from the
/// current feature map output and c from the adjacency degrees.
void seed_step_sizes_from_theorem(ClassifierModel& model, const Graph& g, double safety = 0.9);

/// g_theta evaluated without dropout.
Matrix feature_map(const Mlp& mlp, const Matrix& z);

/// K layers of ASMP on top of x. When frozen_p is non-null, the normalized
/// propagator used by each outer iteration's H updates is recorded there
/// (that is the structure sequence that theta-backprop treats as constant).
Matrix propagate(const ClassifierModel& model, const Graph& g, const Matrix& x,
                 std::vector<Matrix>* frozen_p = nullptr);

/// Class scores: propagate(feature_map(z)). Softmax lives inside the loss.
Matrix forward(const ClassifierModel& model, const Graph& g, const Matrix& z);

/// Mean cross-entropy over the split (max-subtracted softmax).
double ce_loss(const Matrix& scores, const std::vector<int>& labels,
               const std::vector<int>& split);

/// d(ce_loss)/d(scores); rows outside the split are zero.
Matrix ce_loss_grad(const Matrix& scores, const std::vector<int>& labels,
                    const std::vector<int>& split);

struct ThetaGrads {
    Matrix w1, b1, w2, b2;
};

/// Backprop of the train-split loss to theta with the S-sequence frozen
/// (dropout off). Returns the gradients and the frozen propagators so tests
/// can replay the identical surrogate.
ThetaGrads theta_gradients(const ClassifierModel& model, const Graph& g, const Matrix& z,
                           const std::vector<int>& split, std::vector<Matrix>* frozen_p_out,
                           double* loss_out = nullptr);

/// The surrogate the gradients above differentiate: g_theta then the
/// H-recursion replayed over a fixed propagator sequence.
double replay_loss(const ClassifierModel& model, const Matrix& z,
                   const std::vector<Matrix>& frozen_p, const std::vector<int>& labels,
                   const std::vector<int>& split);

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = -1;  // 0-based index into history
};

/// End-to-end training: exact backprop for theta (structure stop-gradient),
/// central finite differences for the six ASMP scalars when
/// hyperparam_mode == learned_fd (twelve extra forward passes per epoch).
/// The model is left at the epoch with the best validation loss.
TrainResult train(ClassifierModel& model, const Graph& g, const Splits& splits,
                  const TrainConfig& cfg);

struct EvalResult {
    double accuracy = 0.0;
    double loss = 0.0;
};

/// Accuracy (argmax ties break toward the lowest class index) and mean loss
/// on the split.
EvalResult evaluate(const ClassifierModel& model, const Graph& g,
                    const std::vector<int>& split);

/// Test-split loss of a perturbed-trained model re-run on the clean graph.
double clean_graph_loss_probe(const ClassifierModel& model, const Graph& clean_g,
                              const std::vector<int>& test_split);

void save_checkpoint(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_checkpoint(const std::filesystem::path& path);

}  // namespace asmp
