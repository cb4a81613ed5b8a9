#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nowkit/error.hpp"
#include "nowkit/random.hpp"
#include "nowkit/transform.hpp"

namespace nowkit {

struct Hyperparams {
    int n_timesteps = 12;
    int hidden_size = 4;
    double learning_rate = 0.01;
    int epochs = 200;
    std::uint64_t seed = 0;
    double l2_penalty = 0.0;

    void validate() const {
        if (n_timesteps < 1 || hidden_size < 1 || epochs < 1 || !(learning_rate > 0.0) || !(l2_penalty >= 0.0))
            throw Error(Errc::ConfigError, "hyperparameters out of bounds");
    }
    bool operator==(const Hyperparams&) const = default;
};

/// Single-layer LSTM with a linear head. All parameters live in one flat buffer:
///   W      4H x V  input weights, gate blocks ordered (input, forget, cell, output)
///   U      4H x H  recurrent weights
///   b      4H      gate biases
///   w_out  H       head weights
///   b_out  1       head bias
class LstmParams {
public:
    LstmParams() = default;
    LstmParams(int hidden_size, int n_vars)
        : hidden_(hidden_size), vars_(n_vars),
          data_(static_cast<std::size_t>(4 * hidden_size * n_vars + 4 * hidden_size * hidden_size + 4 * hidden_size + hidden_size + 1), 0.0) {
        if (hidden_size < 1 || n_vars < 1) throw Error(Errc::ShapeMismatch, "hidden_size and n_vars must be >= 1");
    }

    int hidden_size() const noexcept { return hidden_; }
    int n_vars() const noexcept { return vars_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<double> flat() noexcept { return data_; }
    std::span<const double> flat() const noexcept { return data_; }

    std::span<double> W() noexcept { return slice(0, w_size()); }
    std::span<double> U() noexcept { return slice(w_size(), u_size()); }
    std::span<double> b() noexcept { return slice(w_size() + u_size(), 4 * h()); }
    std::span<double> w_out() noexcept { return slice(w_size() + u_size() + 4 * h(), h()); }
    double& b_out() noexcept { return data_.back(); }

    std::span<const double> W() const noexcept { return slice(0, w_size()); }
    std::span<const double> U() const noexcept { return slice(w_size(), u_size()); }
    std::span<const double> b() const noexcept { return slice(w_size() + u_size(), 4 * h()); }
    std::span<const double> w_out() const noexcept { return slice(w_size() + u_size() + 4 * h(), h()); }
    double b_out() const noexcept { return data_.back(); }

    /// Sum of squares of W, U and w_out (biases are not penalized).
    double weight_sq_norm() const noexcept {
        double s = 0.0;
        for (double x : W()) s += x * x;
        for (double x : U()) s += x * x;
        for (double x : w_out()) s += x * x;
        return s;
    }

    bool operator==(const LstmParams&) const = default;

private:
    std::size_t h() const noexcept { return static_cast<std::size_t>(hidden_); }
    std::size_t w_size() const noexcept { return 4 * h() * static_cast<std::size_t>(vars_); }
    std::size_t u_size() const noexcept { return 4 * h() * h(); }
    std::span<double> slice(std::size_t off, std::size_t n) noexcept { return std::span<double>(data_).subspan(off, n); }
    std::span<const double> slice(std::size_t off, std::size_t n) const noexcept {
        return std::span<const double>(data_).subspan(off, n);
    }

    int hidden_ = 0;
    int vars_ = 0;
    std::vector<double> data_;
};

/// Weights uniform on [-r, r], r = 1/sqrt(hidden); biases zero except the forget gate (1.0).
inline LstmParams init_params(const Hyperparams& hyper, int n_vars) {
    LstmParams p(hyper.hidden_size, n_vars);
    Rng rng(derive_seed(hyper.seed, "lstm-init"));
    const double r = 1.0 / std::sqrt(static_cast<double>(hyper.hidden_size));
    for (double& x : p.W()) x = rng.uniform(-r, r);
    for (double& x : p.U()) x = rng.uniform(-r, r);
    for (double& x : p.w_out()) x = rng.uniform(-r, r);
    auto b = p.b();
    for (int k = 0; k < hyper.hidden_size; ++k) b[static_cast<std::size_t>(hyper.hidden_size + k)] = 1.0;
    return p;
}

namespace detail {

inline double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

/// Activations kept for backpropagation; gates stored post-nonlinearity.
struct Tape {
    std::vector<double> gates;  // T x 4H: i, f, g, o
    std::vector<double> c;      // (T+1) x H, row 0 = c_0
    std::vector<double> h;      // (T+1) x H, row 0 = h_0
};

inline double run_forward(const LstmParams& p, std::span<const double> window, int steps, Tape* tape) {
    const std::size_t H = static_cast<std::size_t>(p.hidden_size());
    const std::size_t V = static_cast<std::size_t>(p.n_vars());
    const auto W = p.W();
    const auto U = p.U();
    const auto b = p.b();

    std::vector<double> h(H, 0.0), c(H, 0.0), z(4 * H);
    if (tape) {
        tape->gates.assign(static_cast<std::size_t>(steps) * 4 * H, 0.0);
        tape->c.assign(static_cast<std::size_t>(steps + 1) * H, 0.0);
        tape->h.assign(static_cast<std::size_t>(steps + 1) * H, 0.0);
    }
    for (int t = 0; t < steps; ++t) {
        const double* x = window.data() + static_cast<std::size_t>(t) * V;
        for (std::size_t r = 0; r < 4 * H; ++r) {
            double acc = b[r];
            const double* wr = W.data() + r * V;
            for (std::size_t j = 0; j < V; ++j) acc += wr[j] * x[j];
            const double* ur = U.data() + r * H;
            for (std::size_t j = 0; j < H; ++j) acc += ur[j] * h[j];
            z[r] = acc;
        }
        for (std::size_t k = 0; k < H; ++k) {
            const double i = sigmoid(z[k]);
            const double f = sigmoid(z[H + k]);
            const double g = std::tanh(z[2 * H + k]);
            const double o = sigmoid(z[3 * H + k]);
            c[k] = f * c[k] + i * g;
            h[k] = o * std::tanh(c[k]);
            if (tape) {
                double* gt = tape->gates.data() + static_cast<std::size_t>(t) * 4 * H;
                gt[k] = i;
                gt[H + k] = f;
                gt[2 * H + k] = g;
                gt[3 * H + k] = o;
            }
        }
        if (tape) {
            std::copy(c.begin(), c.end(), tape->c.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(t) + 1) * H));
            std::copy(h.begin(), h.end(), tape->h.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(t) + 1) * H));
        }
    }
    double y = p.b_out();
    const auto w_out = p.w_out();
    for (std::size_t k = 0; k < H; ++k) y += w_out[k] * h[k];
    return y;
}

inline void check_window(const LstmParams& p, const DesignMatrix& m) {
    if (static_cast<int>(m.n_vars()) != p.n_vars())
        throw Error(Errc::ShapeMismatch, "window has " + std::to_string(m.n_vars()) + " columns, model expects " +
                                             std::to_string(p.n_vars()));
    if (m.values.size() != static_cast<std::size_t>(m.n_timesteps) * m.n_vars())
        throw Error(Errc::ShapeMismatch, "window buffer size does not match its shape");
}

}  // namespace detail

/// Prediction for one window; h_0 = c_0 = 0, rows consumed in chronological order.
inline double forward(const LstmParams& params, const DesignMatrix& window) {
    detail::check_window(params, window);
    return detail::run_forward(params, window.values, window.n_timesteps, nullptr);
}

/// Mean squared error.
inline double loss(std::span<const double> predictions, std::span<const double> actuals) {
    if (predictions.size() != actuals.size()) throw Error(Errc::LengthMismatch, "predictions vs actuals");
    if (predictions.empty()) throw Error(Errc::EmptyInput, "loss of zero samples");
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) s += (predictions[i] - actuals[i]) * (predictions[i] - actuals[i]);
    return s / static_cast<double>(predictions.size());
}

struct Sample {
    DesignMatrix window;
    double target = 0.0;
};

/// MSE over the batch plus l2 * ||weights||^2.
inline double regularized_loss(const LstmParams& params, std::span<const Sample> batch, double l2_penalty) {
    std::vector<double> preds, actuals;
    for (const auto& s : batch) {
        preds.push_back(forward(params, s.window));
        actuals.push_back(s.target);
    }
    return loss(preds, actuals) + l2_penalty * params.weight_sq_norm();
}

struct LossAndGradient {
    double loss = 0.0;
    LstmParams gradient;
};

/// Backpropagation through time over the whole batch.
inline LossAndGradient backward(const LstmParams& params, std::span<const Sample> batch, double l2_penalty) {
    if (batch.empty()) throw Error(Errc::EmptyInput, "empty batch");
    const std::size_t H = static_cast<std::size_t>(params.hidden_size());
    const std::size_t V = static_cast<std::size_t>(params.n_vars());
    LossAndGradient out{0.0, LstmParams(params.hidden_size(), params.n_vars())};
    auto gW = out.gradient.W();
    auto gU = out.gradient.U();
    auto gb = out.gradient.b();
    auto gw_out = out.gradient.w_out();
    const auto U = params.U();
    const auto w_out = params.w_out();
    const double n = static_cast<double>(batch.size());

    detail::Tape tape;
    std::vector<double> dh(H), dc(H), dz(4 * H), dh_prev(H);
    for (const auto& s : batch) {
        detail::check_window(params, s.window);
        const int T = s.window.n_timesteps;
        const double y = detail::run_forward(params, s.window.values, T, &tape);
        const double residual = y - s.target;
        out.loss += residual * residual / n;
        const double dy = 2.0 * residual / n;

        out.gradient.b_out() += dy;
        const double* hT = tape.h.data() + static_cast<std::size_t>(T) * H;
        for (std::size_t k = 0; k < H; ++k) {
            gw_out[k] += dy * hT[k];
            dh[k] = dy * w_out[k];
            dc[k] = 0.0;
        }
        for (int t = T - 1; t >= 0; --t) {
            const double* gt = tape.gates.data() + static_cast<std::size_t>(t) * 4 * H;
            const double* c_prev = tape.c.data() + static_cast<std::size_t>(t) * H;
            const double* c_cur = tape.c.data() + static_cast<std::size_t>(t + 1) * H;
            const double* h_prev = tape.h.data() + static_cast<std::size_t>(t) * H;
            const double* x = s.window.values.data() + static_cast<std::size_t>(t) * V;
            for (std::size_t k = 0; k < H; ++k) {
                const double i = gt[k], f = gt[H + k], g = gt[2 * H + k], o = gt[3 * H + k];
                const double tc = std::tanh(c_cur[k]);
                const double dct = dc[k] + dh[k] * o * (1.0 - tc * tc);
                dz[k] = dct * g * i * (1.0 - i);
                dz[H + k] = dct * c_prev[k] * f * (1.0 - f);
                dz[2 * H + k] = dct * i * (1.0 - g * g);
                dz[3 * H + k] = dh[k] * tc * o * (1.0 - o);
                dc[k] = dct * f;
            }
            std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
            for (std::size_t r = 0; r < 4 * H; ++r) {
                const double d = dz[r];
                gb[r] += d;
                double* gwr = gW.data() + r * V;
                for (std::size_t j = 0; j < V; ++j) gwr[j] += d * x[j];
                double* gur = gU.data() + r * H;
                const double* ur = U.data() + r * H;
                for (std::size_t j = 0; j < H; ++j) {
                    gur[j] += d * h_prev[j];
                    dh_prev[j] += ur[j] * d;
                }
            }
            dh.swap(dh_prev);
        }
    }
    if (l2_penalty > 0.0) {
        out.loss += l2_penalty * params.weight_sq_norm();
        const auto W = params.W();
        for (std::size_t j = 0; j < gW.size(); ++j) gW[j] += 2.0 * l2_penalty * W[j];
        for (std::size_t j = 0; j < gU.size(); ++j) gU[j] += 2.0 * l2_penalty * U[j];
        for (std::size_t j = 0; j < gw_out.size(); ++j) gw_out[j] += 2.0 * l2_penalty * w_out[j];
    }
    return out;
}

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long t = 0;

    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;
};

/// One bias-corrected Adam update, element-wise over the flat parameter buffer.
inline void adam_step(LstmParams& params, const LstmParams& grads, AdamState& state, double lr) {
    auto p = params.flat();
    const auto g = grads.flat();
    if (g.size() != p.size()) throw Error(Errc::ShapeMismatch, "gradient shape");
    if (state.m.size() != p.size()) {
        state.m.assign(p.size(), 0.0);
        state.v.assign(p.size(), 0.0);
        state.t = 0;
    }
    state.t += 1;
    const double c1 = 1.0 - std::pow(AdamState::beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(AdamState::beta2, static_cast<double>(state.t));
    for (std::size_t j = 0; j < p.size(); ++j) {
        state.m[j] = AdamState::beta1 * state.m[j] + (1.0 - AdamState::beta1) * g[j];
        state.v[j] = AdamState::beta2 * state.v[j] + (1.0 - AdamState::beta2) * g[j] * g[j];
        const double m_hat = state.m[j] / c1;
        const double v_hat = state.v[j] / c2;
        p[j] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::epsilon);
    }
}

struct TransformSettings {
    bool seasonal_adjust = true;
    GrowthKind growth = GrowthKind::Simple;
    bool operator==(const TransformSettings&) const = default;
};

struct TrainedModel {
    LstmParams params;
    Hyperparams hyper;
    std::vector<std::string> variable_ids;
    std::vector<StandardizationParams> standardization;
    std::vector<double> training_loss_curve;
    // Pipeline metadata; empty/default when the model is trained directly on windows.
    std::string target_id;
    YearRange train_years;
    TransformSettings transform;
};

/// Full-batch Adam for hyper.epochs epochs. Loss is recorded before each update.
inline TrainedModel train(std::span<const Sample> dataset, const Hyperparams& hyper) {
    hyper.validate();
    if (dataset.size() < 2) throw Error(Errc::InsufficientData, "training needs at least 2 samples");
    const auto& first = dataset.front().window;
    for (const auto& s : dataset) {
        if (s.window.n_timesteps != hyper.n_timesteps || s.window.variable_ids != first.variable_ids ||
            s.window.values.size() != first.values.size())
            throw Error(Errc::ShapeMismatch, "training windows differ in shape or variable order");
        if (!std::isfinite(s.target)) throw Error(Errc::InsufficientData, "non-finite training target");
    }
    TrainedModel model;
    model.hyper = hyper;
    model.variable_ids = first.variable_ids;
    model.params = init_params(hyper, static_cast<int>(first.n_vars()));
    AdamState state;
    model.training_loss_curve.reserve(static_cast<std::size_t>(hyper.epochs));
    for (int e = 0; e < hyper.epochs; ++e) {
        auto lg = backward(model.params, dataset, hyper.l2_penalty);
        if (!std::isfinite(lg.loss)) throw Error(Errc::InsufficientData, "training diverged at epoch " + std::to_string(e));
        model.training_loss_curve.push_back(lg.loss);
        adam_step(model.params, lg.gradient, state, hyper.learning_rate);
    }
    return model;
}

inline double predict(const TrainedModel& model, const DesignMatrix& matrix) {
    if (matrix.variable_ids != model.variable_ids)
        throw Error(Errc::VariableOrderMismatch, "matrix columns do not match the model's variable order");
    return forward(model.params, matrix);
}

// ---- serialization ----

inline nlohmann::ordered_json to_json(const Hyperparams& h) {
    return {{"n_timesteps", h.n_timesteps}, {"hidden_size", h.hidden_size}, {"learning_rate", h.learning_rate},
            {"epochs", h.epochs}, {"seed", h.seed}, {"l2_penalty", h.l2_penalty}};
}

inline Hyperparams hyperparams_from_json(const nlohmann::ordered_json& j, const Hyperparams& defaults = {}) {
    Hyperparams h = defaults;
    h.n_timesteps = j.value("n_timesteps", h.n_timesteps);
    h.hidden_size = j.value("hidden_size", h.hidden_size);
    h.learning_rate = j.value("learning_rate", h.learning_rate);
    h.epochs = j.value("epochs", h.epochs);
    h.seed = j.value("seed", h.seed);
    h.l2_penalty = j.value("l2_penalty", h.l2_penalty);
    h.validate();
    return h;
}

inline nlohmann::ordered_json to_json(const TrainedModel& m) {
    nlohmann::ordered_json std_arr = nlohmann::ordered_json::array();
    for (const auto& s : m.standardization)
        std_arr.push_back({{"variable_id", s.variable_id}, {"mean", s.mean}, {"sd", s.sd},
                           {"fitted_on", {s.fitted_on.first, s.fitted_on.last}}});
    auto arr = [](std::span<const double> xs) { return nlohmann::ordered_json(std::vector<double>(xs.begin(), xs.end())); };
    return {
        {"format", "nowkit-lstm/1"},
        {"target_id", m.target_id},
        {"train_years", {m.train_years.first, m.train_years.last}},
        {"transform", {{"seasonal_adjust", m.transform.seasonal_adjust},
                       {"growth", m.transform.growth == GrowthKind::Simple ? "simple" : "log"}}},
        {"hyperparams", to_json(m.hyper)},
        {"variable_ids", m.variable_ids},
        {"standardization", std_arr},
        {"params", {{"hidden_size", m.params.hidden_size()},
                    {"n_vars", m.params.n_vars()},
                    {"W", arr(m.params.W())},
                    {"U", arr(m.params.U())},
                    {"b", arr(m.params.b())},
                    {"w_out", arr(m.params.w_out())},
                    {"b_out", m.params.b_out()}}},
        {"training_loss_curve", m.training_loss_curve},
    };
}

inline TrainedModel model_from_json(const nlohmann::ordered_json& j) {
    try {
        TrainedModel m;
        m.target_id = j.at("target_id").get<std::string>();
        m.train_years = {j.at("train_years").at(0).get<int>(), j.at("train_years").at(1).get<int>()};
        m.transform.seasonal_adjust = j.at("transform").at("seasonal_adjust").get<bool>();
        m.transform.growth = j.at("transform").at("growth").get<std::string>() == "log" ? GrowthKind::Log : GrowthKind::Simple;
        m.hyper = hyperparams_from_json(j.at("hyperparams"));
        m.variable_ids = j.at("variable_ids").get<std::vector<std::string>>();
        for (const auto& s : j.at("standardization"))
            m.standardization.push_back({s.at("variable_id").get<std::string>(), s.at("mean").get<double>(),
                                         s.at("sd").get<double>(),
                                         {s.at("fitted_on").at(0).get<int>(), s.at("fitted_on").at(1).get<int>()}});
        const auto& p = j.at("params");
        m.params = LstmParams(p.at("hidden_size").get<int>(), p.at("n_vars").get<int>());
        auto load = [&](const char* key, std::span<double> dst) {
            const auto v = p.at(key).get<std::vector<double>>();
            if (v.size() != dst.size()) throw Error(Errc::ShapeMismatch, std::string("parameter block ") + key);
            std::copy(v.begin(), v.end(), dst.begin());
        };
        load("W", m.params.W());
        load("U", m.params.U());
        load("b", m.params.b());
        load("w_out", m.params.w_out());
        m.params.b_out() = p.at("b_out").get<double>();
        m.training_loss_curve = j.at("training_loss_curve").get<std::vector<double>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("model json: ") + e.what());
    }
}

}  // namespace nowkit
