#include "rsaloc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <unordered_set>

#include <json.hpp>

#include "rsaloc/errors.hpp"
#include "rsaloc/kernels.hpp"

namespace rsaloc {

std::string_view input_mode_name(InputMode m) {
    return m == InputMode::Preprocessed ? "preprocessed" : "raw";
}

InputMode input_mode_from_name(std::string_view name) {
    if (name == "preprocessed") return InputMode::Preprocessed;
    if (name == "raw") return InputMode::Raw;
    throw ConfigError("unknown input mode '" + std::string(name) +
                      "' (expected 'preprocessed' or 'raw')");
}

void Normalizer::apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t i = 0; i < in.size(); ++i)
        out[i] = (in[i] - mean[i]) / std_dev[i];
}

Gradients::Gradients(const MlpModel& model)
    : w1(model.w1.size(), 0.0),
      b1(model.b1.size(), 0.0),
      ln_gain(model.ln_gain.size(), 0.0),
      ln_bias(model.ln_bias.size(), 0.0),
      w2(model.w2.size(), 0.0),
      b2(model.b2.size(), 0.0) {}

void Gradients::zero() {
    std::fill(w1.begin(), w1.end(), 0.0);
    std::fill(b1.begin(), b1.end(), 0.0);
    std::fill(ln_gain.begin(), ln_gain.end(), 0.0);
    std::fill(ln_bias.begin(), ln_bias.end(), 0.0);
    std::fill(w2.begin(), w2.end(), 0.0);
    std::fill(b2.begin(), b2.end(), 0.0);
}

std::vector<double> layer_norm(std::span<const double> x,
                               std::span<const double> gain,
                               std::span<const double> bias, double eps) {
    const std::size_t n = x.size();
    if (gain.size() != n || bias.size() != n)
        throw ConfigError("layer_norm: parameter length mismatch");

    double mu = 0.0;
    for (double v : x) mu += v;
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mu) * (v - mu);
    var /= static_cast<double>(n);

    const double inv_sigma = 1.0 / std::sqrt(var + eps);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = gain[i] * ((x[i] - mu) * inv_sigma) + bias[i];
    return out;
}

MlpModel init_model(InputMode mode, int input_dim, int hidden_dim,
                    RandomSource& rng) {
    if (input_dim < 1 || hidden_dim < 1)
        throw ConfigError("init_model: dimensions must be positive");

    MlpModel m;
    m.input_mode = mode;
    m.input_dim = input_dim;
    m.hidden_dim = hidden_dim;
    m.w1.resize(static_cast<std::size_t>(hidden_dim) * input_dim);
    m.b1.assign(hidden_dim, 0.0);
    m.ln_gain.assign(hidden_dim, 1.0);
    m.ln_bias.assign(hidden_dim, 0.0);
    m.w2.resize(static_cast<std::size_t>(3) * hidden_dim);
    m.b2.assign(3, 0.0);

    const double lim1 = std::sqrt(6.0 / input_dim);
    for (auto& w : m.w1) w = rng.uniform(-lim1, lim1);
    const double lim2 = std::sqrt(6.0 / hidden_dim);
    for (auto& w : m.w2) w = rng.uniform(-lim2, lim2);
    return m;
}

void forward(const MlpModel& model, std::span<const double> x,
             ForwardCache& cache) {
    const std::size_t d = static_cast<std::size_t>(model.input_dim);
    const std::size_t h = static_cast<std::size_t>(model.hidden_dim);
    if (x.size() != d)
        throw ConfigError("forward: input has dimension " +
                          std::to_string(x.size()) + ", model expects " +
                          std::to_string(d));

    const auto& k = kern::ops();
    cache.x_norm.resize(d);
    model.normalizer.apply(x, cache.x_norm);

    cache.h1.resize(h);
    k.matvec(model.w1.data(), h, d, cache.x_norm.data(), model.b1.data(),
             cache.h1.data());

    cache.mu = k.sum(cache.h1.data(), h) / static_cast<double>(h);
    double var = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
        const double c = cache.h1[i] - cache.mu;
        var += c * c;
    }
    var /= static_cast<double>(h);
    cache.inv_sigma = 1.0 / std::sqrt(var + model.ln_eps);

    cache.h_hat.resize(h);
    for (std::size_t i = 0; i < h; ++i)
        cache.h_hat[i] = (cache.h1[i] - cache.mu) * cache.inv_sigma;

    cache.h2.resize(h);
    k.norm_affine(cache.h1.data(), cache.mu, cache.inv_sigma,
                  model.ln_gain.data(), model.ln_bias.data(), cache.h2.data(), h);

    cache.h3.resize(h);
    k.relu(cache.h2.data(), cache.h3.data(), h);

    k.matvec(model.w2.data(), 3, h, cache.h3.data(), model.b2.data(),
             cache.t_hat.data());
}

double mse_loss(const Matrix& predictions, const Matrix& labels) {
    if (predictions.rows() == 0) throw ConfigError("mse_loss: empty batch");
    if (predictions.rows() != labels.rows() || predictions.cols() != labels.cols())
        throw ConfigError("mse_loss: shape mismatch");

    double total = 0.0;
    for (std::size_t i = 0; i < predictions.rows(); ++i) {
        for (std::size_t c = 0; c < predictions.cols(); ++c) {
            const double e = predictions(i, c) - labels(i, c);
            total += e * e;
        }
    }
    return total / static_cast<double>(predictions.rows());
}

void backward(const MlpModel& model, const ForwardCache& cache,
              std::span<const double> label, Gradients& grads,
              BackwardScratch& s) {
    const std::size_t d = static_cast<std::size_t>(model.input_dim);
    const std::size_t h = static_cast<std::size_t>(model.hidden_dim);
    const auto& k = kern::ops();

    // d(loss)/d(t_hat) for loss = ||t_hat - label||^2
    std::array<double, 3> dt{};
    for (int c = 0; c < 3; ++c) dt[c] = 2.0 * (cache.t_hat[c] - label[c]);

    k.ger(grads.w2.data(), 3, h, 1.0, dt.data(), cache.h3.data());
    for (int c = 0; c < 3; ++c) grads.b2[c] += dt[c];

    s.dh3.resize(h);
    k.matvec_t(model.w2.data(), 3, h, dt.data(), s.dh3.data());

    s.dh2.resize(h);
    k.relu_grad(s.dh3.data(), cache.h2.data(), s.dh2.data(), h);

    s.dh_hat.resize(h);
    for (std::size_t i = 0; i < h; ++i) {
        grads.ln_gain[i] += s.dh2[i] * cache.h_hat[i];
        grads.ln_bias[i] += s.dh2[i];
        s.dh_hat[i] = s.dh2[i] * model.ln_gain[i];
    }

    // LayerNorm jacobian: couples every unit through the mean and variance
    const double mean_dh =
        k.sum(s.dh_hat.data(), h) / static_cast<double>(h);
    const double mean_dh_h =
        k.dot(s.dh_hat.data(), cache.h_hat.data(), h) / static_cast<double>(h);
    s.dh1.resize(h);
    for (std::size_t i = 0; i < h; ++i)
        s.dh1[i] = cache.inv_sigma *
                   (s.dh_hat[i] - mean_dh - cache.h_hat[i] * mean_dh_h);

    k.ger(grads.w1.data(), h, d, 1.0, s.dh1.data(), cache.x_norm.data());
    k.axpy(grads.b1.data(), 1.0, s.dh1.data(), h);
}

void backward(const MlpModel& model, const ForwardCache& cache,
              std::span<const double> label, Gradients& grads) {
    BackwardScratch scratch;
    backward(model, cache, label, grads, scratch);
}

AdamState::AdamState(const MlpModel& model, double learning_rate)
    : lr(learning_rate),
      m_w1(model.w1.size(), 0.0), v_w1(model.w1.size(), 0.0),
      m_b1(model.b1.size(), 0.0), v_b1(model.b1.size(), 0.0),
      m_g(model.ln_gain.size(), 0.0), v_g(model.ln_gain.size(), 0.0),
      m_beta(model.ln_bias.size(), 0.0), v_beta(model.ln_bias.size(), 0.0),
      m_w2(model.w2.size(), 0.0), v_w2(model.w2.size(), 0.0),
      m_b2(model.b2.size(), 0.0), v_b2(model.b2.size(), 0.0) {}

void adam_step(AdamState& state, MlpModel& model, const Gradients& grads) {
    state.step += 1;
    const double inv_bc1 =
        1.0 / (1.0 - std::pow(state.beta1, static_cast<double>(state.step)));
    const double inv_bc2 =
        1.0 / (1.0 - std::pow(state.beta2, static_cast<double>(state.step)));

    const auto& k = kern::ops();
    auto update = [&](std::vector<double>& p, std::vector<double>& m,
                      std::vector<double>& v, const std::vector<double>& g) {
        k.adam_update(p.data(), m.data(), v.data(), g.data(), p.size(), state.lr,
                      state.beta1, state.beta2, state.eps, inv_bc1, inv_bc2);
    };
    update(model.w1, state.m_w1, state.v_w1, grads.w1);
    update(model.b1, state.m_b1, state.v_b1, grads.b1);
    update(model.ln_gain, state.m_g, state.v_g, grads.ln_gain);
    update(model.ln_bias, state.m_beta, state.v_beta, grads.ln_bias);
    update(model.w2, state.m_w2, state.v_w2, grads.w2);
    update(model.b2, state.m_b2, state.v_b2, grads.b2);
}

Normalizer fit_normalizer(const Matrix& features,
                          std::span<const std::size_t> rows) {
    if (rows.empty()) throw ConfigError("fit_normalizer: empty batch");

    const std::size_t d = features.cols();
    const double n = static_cast<double>(rows.size());
    Normalizer norm;
    norm.mean.assign(d, 0.0);
    norm.std_dev.assign(d, 0.0);

    for (std::size_t r : rows) {
        const auto row = features.row(r);
        for (std::size_t c = 0; c < d; ++c) norm.mean[c] += row[c];
    }
    for (std::size_t c = 0; c < d; ++c) norm.mean[c] /= n;

    for (std::size_t r : rows) {
        const auto row = features.row(r);
        for (std::size_t c = 0; c < d; ++c) {
            const double dev = row[c] - norm.mean[c];
            norm.std_dev[c] += dev * dev;
        }
    }
    for (std::size_t c = 0; c < d; ++c)
        norm.std_dev[c] = std::max(std::sqrt(norm.std_dev[c] / n),
                                   kNormalizerStdFloor);
    return norm;
}

namespace {

void check_disjoint(std::span<const std::size_t> a,
                    std::span<const std::size_t> b) {
    std::unordered_set<std::size_t> seen(a.begin(), a.end());
    for (std::size_t i : b)
        if (seen.count(i))
            throw ConfigError("train: train/validation splits overlap");
}

}  // namespace

TrainResult train(const Matrix& features, const Matrix& labels,
                  std::span<const std::size_t> train_idx,
                  std::span<const std::size_t> val_idx, const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (!(cfg.lr > 0.0)) throw ConfigError("train: learning rate must be positive");
    if (features.rows() != labels.rows() || labels.cols() != 3)
        throw ConfigError("train: feature/label shape mismatch");
    if (train_idx.empty() || val_idx.empty())
        throw ConfigError("train: empty split");
    check_disjoint(train_idx, val_idx);

    RandomSource rng(cfg.seed);
    MlpModel model = init_model(cfg.input_mode, static_cast<int>(features.cols()),
                                cfg.hidden_dim, rng);
    model.train_seed = cfg.seed;
    model.normalizer = fit_normalizer(features, train_idx);

    AdamState adam(model, cfg.lr);
    Gradients grads(model);
    ForwardCache cache;
    BackwardScratch scratch;
    const auto& k = kern::ops();

    std::vector<std::size_t> order(train_idx.begin(), train_idx.end());

    TrainResult result;
    result.best_val_mse = std::numeric_limits<double>::infinity();
    std::array<std::vector<double>, 6> best_params;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the training stream keeps shuffles reproducible
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = rng.next_below(i);
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(
                start + static_cast<std::size_t>(cfg.batch_size), order.size());
            const double batch_n = static_cast<double>(stop - start);

            grads.zero();
            double batch_loss = 0.0;
            for (std::size_t s = start; s < stop; ++s) {
                const std::size_t row = order[s];
                forward(model, features.row(row), cache);
                const auto label = labels.row(row);
                for (int c = 0; c < 3; ++c) {
                    const double e = cache.t_hat[c] - label[c];
                    batch_loss += e * e;
                }
                backward(model, cache, label, grads, scratch);
            }
            batch_loss /= batch_n;
            if (!std::isfinite(batch_loss))
                throw TrainingError("train: loss diverged", epoch);

            const double inv_n = 1.0 / batch_n;
            k.scale(grads.w1.data(), inv_n, grads.w1.size());
            k.scale(grads.b1.data(), inv_n, grads.b1.size());
            k.scale(grads.ln_gain.data(), inv_n, grads.ln_gain.size());
            k.scale(grads.ln_bias.data(), inv_n, grads.ln_bias.size());
            k.scale(grads.w2.data(), inv_n, grads.w2.size());
            k.scale(grads.b2.data(), inv_n, grads.b2.size());
            adam_step(adam, model, grads);

            epoch_loss += batch_loss;
            ++batches;
        }

        EpochStats stats;
        stats.train_mse = epoch_loss / static_cast<double>(batches);
        stats.val_mse = mean_squared_error(model, features, labels, val_idx);
        if (!std::isfinite(stats.val_mse))
            throw TrainingError("train: validation loss diverged", epoch);
        result.curve.push_back(stats);

        if (stats.val_mse < result.best_val_mse) {
            result.best_val_mse = stats.val_mse;
            result.best_epoch = epoch;
            best_params = {model.w1, model.b1,     model.ln_gain,
                           model.ln_bias, model.w2, model.b2};
        }
    }

    model.w1 = std::move(best_params[0]);
    model.b1 = std::move(best_params[1]);
    model.ln_gain = std::move(best_params[2]);
    model.ln_bias = std::move(best_params[3]);
    model.w2 = std::move(best_params[4]);
    model.b2 = std::move(best_params[5]);
    result.model = std::move(model);
    return result;
}

Point3 predict(const MlpModel& model, std::span<const double> x) {
    ForwardCache cache;
    forward(model, x, cache);
    return {cache.t_hat[0], cache.t_hat[1], cache.t_hat[2]};
}

double mean_squared_error(const MlpModel& model, const Matrix& features,
                          const Matrix& labels,
                          std::span<const std::size_t> rows) {
    if (rows.empty()) throw ConfigError("mean_squared_error: empty selection");
    ForwardCache cache;
    double total = 0.0;
    for (std::size_t r : rows) {
        forward(model, features.row(r), cache);
        const auto label = labels.row(r);
        for (int c = 0; c < 3; ++c) {
            const double e = cache.t_hat[c] - label[c];
            total += e * e;
        }
    }
    return total / static_cast<double>(rows.size());
}

namespace {

constexpr int kCheckpointVersion = 1;
constexpr const char* kCheckpointFormat = "rsaloc-mlp-checkpoint";

}  // namespace

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = kCheckpointFormat;
    j["version"] = kCheckpointVersion;
    j["input_mode"] = std::string(input_mode_name(model.input_mode));
    j["input_dim"] = model.input_dim;
    j["hidden_dim"] = model.hidden_dim;
    j["ln_eps"] = model.ln_eps;
    j["train_seed"] = model.train_seed;
    j["scene_fingerprint"] = model.scene_fingerprint;
    j["normalizer"] = {{"mean", model.normalizer.mean},
                       {"std", model.normalizer.std_dev}};
    j["params"] = {{"w1", model.w1},         {"b1", model.b1},
                   {"ln_gain", model.ln_gain}, {"ln_bias", model.ln_bias},
                   {"w2", model.w2},         {"b2", model.b2}};

    std::ofstream out(path);
    if (!out) throw Error("checkpoint: cannot write " + path.string());
    out << j.dump(1) << '\n';
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("checkpoint: cannot read " + path.string());

    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("checkpoint: " + path.string() + ": " + e.what());
    }

    try {
        if (j.at("format").get<std::string>() != kCheckpointFormat)
            throw FormatError("checkpoint: unrecognized format field");
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion)
            throw FormatError("checkpoint: version " + std::to_string(version) +
                              " unsupported (expected " +
                              std::to_string(kCheckpointVersion) + ")");

        MlpModel m;
        m.input_mode = input_mode_from_name(j.at("input_mode").get<std::string>());
        m.input_dim = j.at("input_dim").get<int>();
        m.hidden_dim = j.at("hidden_dim").get<int>();
        m.ln_eps = j.at("ln_eps").get<double>();
        m.train_seed = j.at("train_seed").get<std::uint64_t>();
        m.scene_fingerprint = j.at("scene_fingerprint").get<std::uint64_t>();
        m.normalizer.mean = j.at("normalizer").at("mean").get<std::vector<double>>();
        m.normalizer.std_dev = j.at("normalizer").at("std").get<std::vector<double>>();
        const auto& p = j.at("params");
        m.w1 = p.at("w1").get<std::vector<double>>();
        m.b1 = p.at("b1").get<std::vector<double>>();
        m.ln_gain = p.at("ln_gain").get<std::vector<double>>();
        m.ln_bias = p.at("ln_bias").get<std::vector<double>>();
        m.w2 = p.at("w2").get<std::vector<double>>();
        m.b2 = p.at("b2").get<std::vector<double>>();

        const std::size_t d = static_cast<std::size_t>(m.input_dim);
        const std::size_t h = static_cast<std::size_t>(m.hidden_dim);
        if (m.w1.size() != h * d || m.b1.size() != h || m.ln_gain.size() != h ||
            m.ln_bias.size() != h || m.w2.size() != 3 * h || m.b2.size() != 3 ||
            m.normalizer.mean.size() != d || m.normalizer.std_dev.size() != d)
            throw FormatError("checkpoint: parameter shapes are inconsistent");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("checkpoint: " + path.string() + ": " + e.what());
    }
}

}  // namespace rsaloc
