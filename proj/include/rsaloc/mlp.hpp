#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "rsaloc/geometry.hpp"
#include "rsaloc/linalg.hpp"
#include "rsaloc/rng.hpp"

namespace rsaloc {

enum class InputMode { Preprocessed, Raw };

std::string_view input_mode_name(InputMode m);
InputMode input_mode_from_name(std::string_view name);

/// Per-dimension standardization fitted on the training split.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> std_dev;  // floored at kNormalizerStdFloor

    void apply(std::span<const double> in, std::span<double> out) const;
};

inline constexpr double kNormalizerStdFloor = 1e-8;
inline constexpr double kLayerNormEps = 1e-5;
inline constexpr int kDefaultHiddenWidth = 128;

/// Two-layer perceptron: Linear(hidden) -> LayerNorm -> ReLU -> Linear(3).
/// Weight matrices are row-major; w1 is hidden x input, w2 is 3 x hidden.
struct MlpModel {
    InputMode input_mode = InputMode::Preprocessed;
    int input_dim = 0;
    int hidden_dim = kDefaultHiddenWidth;
    double ln_eps = kLayerNormEps;

    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> ln_gain;
    std::vector<double> ln_bias;
    std::vector<double> w2;
    std::vector<double> b2;

    Normalizer normalizer;
    std::uint64_t train_seed = 0;
    /// Hash of (anchors, path loss) the training data came from; checked
    /// before the model is evaluated against a scene.
    std::uint64_t scene_fingerprint = 0;
};

/// Intermediate activations kept for backpropagation. Reuse one instance
/// across calls to avoid reallocation.
struct ForwardCache {
    std::vector<double> x_norm;
    std::vector<double> h1;     // pre-LayerNorm
    std::vector<double> h_hat;  // normalized, pre-affine
    std::vector<double> h2;     // post-affine (pre-ReLU)
    std::vector<double> h3;     // post-ReLU
    double mu = 0.0;
    double inv_sigma = 0.0;
    std::array<double, 3> t_hat{};
};

/// Parameter-shaped gradient accumulators.
struct Gradients {
    std::vector<double> w1, b1, ln_gain, ln_bias, w2, b2;

    explicit Gradients(const MlpModel& model);
    void zero();
};

/// Scratch vectors for backward(); reuse across calls.
struct BackwardScratch {
    std::vector<double> dh3, dh2, dh_hat, dh1;
};

/// Standalone LayerNorm with affine parameters, exposed for testing the
/// sub-step in isolation.
std::vector<double> layer_norm(std::span<const double> x,
                               std::span<const double> gain,
                               std::span<const double> bias, double eps);

/// Seeded initialization: weights uniform in +-sqrt(6 / fan_in), biases
/// zero, LayerNorm gain one / bias zero.
MlpModel init_model(InputMode mode, int input_dim, int hidden_dim,
                    RandomSource& rng);

void forward(const MlpModel& model, std::span<const double> x, ForwardCache& cache);

/// Mean over the batch of squared Euclidean errors (summed over the three
/// coordinates, not averaged).
double mse_loss(const Matrix& predictions, const Matrix& labels);

/// Accumulates the gradient of the per-sample squared error into `grads`.
void backward(const MlpModel& model, const ForwardCache& cache,
              std::span<const double> label, Gradients& grads,
              BackwardScratch& scratch);
void backward(const MlpModel& model, const ForwardCache& cache,
              std::span<const double> label, Gradients& grads);

/// Adam optimizer state (first/second moments per parameter).
struct AdamState {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step = 0;

    std::vector<double> m_w1, v_w1, m_b1, v_b1, m_g, v_g, m_beta, v_beta,
        m_w2, v_w2, m_b2, v_b2;

    AdamState(const MlpModel& model, double learning_rate);
};

/// One bias-corrected Adam update of all parameters in place.
void adam_step(AdamState& state, MlpModel& model, const Gradients& grads);

/// Per-dimension mean/std over the selected rows; std floored so constant
/// dimensions normalize to zero.
Normalizer fit_normalizer(const Matrix& features, std::span<const std::size_t> rows);

struct TrainConfig {
    int epochs = 300;
    int batch_size = 256;
    std::uint64_t seed = 0;
    double lr = 0.01;
    InputMode input_mode = InputMode::Preprocessed;
    int hidden_dim = kDefaultHiddenWidth;
};

struct EpochStats {
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct TrainResult {
    MlpModel model;  // parameters of the best-validation epoch
    std::vector<EpochStats> curve;
    int best_epoch = 0;  // index into curve
    double best_val_mse = 0.0;
};

/// Mini-batch Adam training with per-epoch shuffling and best-validation
/// model selection. Deterministic for a fixed config.
TrainResult train(const Matrix& features, const Matrix& labels,
                  std::span<const std::size_t> train_idx,
                  std::span<const std::size_t> val_idx, const TrainConfig& cfg);

Point3 predict(const MlpModel& model, std::span<const double> x);

double mean_squared_error(const MlpModel& model, const Matrix& features,
                          const Matrix& labels, std::span<const std::size_t> rows);

/// Versioned JSON checkpoint; load/save round-trips are lossless.
void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace rsaloc
