#include "mrn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrn/errors.hpp"

namespace mrn {

namespace {

constexpr double kRangeFloor = 1e-15;

struct ForwardCache {
    std::vector<std::vector<double>> pre;  // z per layer
    std::vector<std::vector<double>> post; // activations, post[0] = input
};

void forward_cached(const MlpModel& m, const std::vector<double>& x, ForwardCache& cache) {
    const std::size_t layers = m.w.size();
    cache.pre.resize(layers);
    cache.post.resize(layers + 1);
    cache.post[0] = x;
    for (std::size_t l = 0; l < layers; ++l) {
        const int out = m.sizes[l + 1];
        const int in = m.sizes[l];
        auto& z = cache.pre[l];
        z.assign(static_cast<std::size_t>(out), 0.0);
        const auto& a = cache.post[l];
        for (int o = 0; o < out; ++o) {
            double s = m.b[l][static_cast<std::size_t>(o)];
            const double* wrow = m.w[l].data() + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) s += wrow[i] * a[static_cast<std::size_t>(i)];
            z[static_cast<std::size_t>(o)] = s;
        }
        auto& act = cache.post[l + 1];
        act = z;
        if (l + 1 < layers)
            for (double& v : act) v = std::max(0.0, v);
    }
}

} // namespace

MinMaxScaler scaler_fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw DomainError("scaler_fit: empty training set");
    const std::size_t width = rows.front().size();
    MinMaxScaler s;
    s.lo.assign(width, 0.0);
    s.hi.assign(width, 0.0);
    for (std::size_t f = 0; f < width; ++f) {
        double lo = rows.front()[f];
        double hi = rows.front()[f];
        for (const auto& r : rows) {
            if (r.size() != width) throw DomainError("scaler_fit: ragged rows");
            lo = std::min(lo, r[f]);
            hi = std::max(hi, r[f]);
        }
        s.lo[f] = lo;
        s.hi[f] = hi;
    }
    return s;
}

std::vector<double> scaler_transform(const MinMaxScaler& s, const std::vector<double>& x) {
    if (x.size() != s.lo.size()) throw DomainError("scaler_transform: width mismatch");
    std::vector<double> z(x.size(), 0.0);
    for (std::size_t f = 0; f < x.size(); ++f) {
        const double range = s.hi[f] - s.lo[f];
        z[f] = range < kRangeFloor ? 0.0 : (x[f] - s.lo[f]) / range;
    }
    return z;
}

std::vector<double> scaler_inverse(const MinMaxScaler& s, const std::vector<double>& z) {
    if (z.size() != s.lo.size()) throw DomainError("scaler_inverse: width mismatch");
    std::vector<double> x(z.size(), 0.0);
    for (std::size_t f = 0; f < z.size(); ++f) {
        const double range = s.hi[f] - s.lo[f];
        x[f] = range < kRangeFloor ? s.lo[f] : s.lo[f] + z[f] * range;
    }
    return x;
}

MlpModel mlp_init(const std::vector<int>& sizes, Rng& rng) {
    if (sizes.size() < 2) throw ConfigError("mlp_init: need at least input and output sizes");
    for (int s : sizes)
        if (s < 1) throw ConfigError("mlp_init: layer sizes must be positive");
    MlpModel m;
    m.sizes = sizes;
    m.w.resize(sizes.size() - 1);
    m.b.resize(sizes.size() - 1);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int in = sizes[l];
        const int out = sizes[l + 1];
        const double limit = std::sqrt(6.0 / (in + out));
        m.w[l].resize(static_cast<std::size_t>(out) * in);
        for (double& v : m.w[l]) v = rng.uniform(-limit, limit);
        m.b[l].assign(static_cast<std::size_t>(out), 0.0);
    }
    return m;
}

std::vector<double> mlp_forward(const MlpModel& m, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != m.sizes.front())
        throw DomainError("mlp_forward: input width mismatch");
    ForwardCache cache;
    forward_cached(m, x, cache);
    return cache.post.back();
}

MlpGradient mlp_gradient(const MlpModel& m,
                         const std::vector<const std::vector<double>*>& xs,
                         const std::vector<double>& ys) {
    if (xs.empty() || xs.size() != ys.size()) throw DomainError("mlp_gradient: bad batch");
    MlpGradient g;
    g.w.resize(m.w.size());
    g.b.resize(m.b.size());
    for (std::size_t l = 0; l < m.w.size(); ++l) {
        g.w[l].assign(m.w[l].size(), 0.0);
        g.b[l].assign(m.b[l].size(), 0.0);
    }
    const double inv_batch = 1.0 / static_cast<double>(xs.size());
    ForwardCache cache;
    const std::size_t layers = m.w.size();
    for (std::size_t s = 0; s < xs.size(); ++s) {
        forward_cached(m, *xs[s], cache);
        const double residual = cache.post.back()[0] - ys[s];
        // Subgradient of |r|: sign, with 0 chosen at the kink.
        double d0 = 0.0;
        if (residual > 0.0) d0 = inv_batch;
        else if (residual < 0.0) d0 = -inv_batch;
        std::vector<double> delta{d0};
        for (std::size_t l = layers; l-- > 0;) {
            const int out = m.sizes[l + 1];
            const int in = m.sizes[l];
            const auto& a = cache.post[l];
            for (int o = 0; o < out; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                if (d == 0.0) continue;
                double* grow = g.w[l].data() + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) grow[i] += d * a[static_cast<std::size_t>(i)];
                g.b[l][static_cast<std::size_t>(o)] += d;
            }
            if (l == 0) break;
            std::vector<double> next(static_cast<std::size_t>(in), 0.0);
            for (int i = 0; i < in; ++i) {
                if (cache.pre[l - 1][static_cast<std::size_t>(i)] <= 0.0) continue; // rectifier gate
                double s2 = 0.0;
                for (int o = 0; o < out; ++o)
                    s2 += m.w[l][static_cast<std::size_t>(o) * in + i] * delta[static_cast<std::size_t>(o)];
                next[static_cast<std::size_t>(i)] = s2;
            }
            delta = std::move(next);
        }
    }
    return g;
}

double mlp_mae(const MlpModel& m, const Dataset& data) {
    if (data.x.empty()) throw DomainError("mlp_mae: empty dataset");
    double total = 0.0;
    for (std::size_t s = 0; s < data.x.size(); ++s)
        total += std::abs(mlp_forward(m, data.x[s])[0] - data.y[s]);
    return total / static_cast<double>(data.x.size());
}

void validate_train_config(const TrainConfig& cfg) {
    if (cfg.epochs < 0) throw ConfigError("train: epochs must be >= 0");
    if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (!(cfg.validation_split > 0.0) || !(cfg.validation_split < 1.0))
        throw ConfigError("train: validation_split must lie in (0, 1)");
    if (!(cfg.initial_lr > 0.0)) throw ConfigError("train: initial_lr must be positive");
    if (!(cfg.decay_steps > 0.0)) throw ConfigError("train: decay_steps must be positive");
    if (!(cfg.decay_rate > 0.0) || cfg.decay_rate > 1.0) throw ConfigError("train: decay_rate must be in (0, 1]");
}

TrainHistory mlp_train(MlpModel& model, const Dataset& data, const TrainConfig& cfg, Rng& rng) {
    validate_train_config(cfg);
    if (data.x.size() != data.y.size()) throw DomainError("train: feature/target count mismatch");
    const std::size_t n = data.x.size();
    if (n < 2) throw DomainError("train: need at least 2 samples");
    const std::size_t n_val = std::min(n - 1, static_cast<std::size_t>(std::lround(
                                                  static_cast<double>(n) * cfg.validation_split)));
    const std::size_t n_train = n - n_val;

    Dataset train_view;
    Dataset val_view;
    for (std::size_t s = 0; s < n_train; ++s) {
        train_view.x.push_back(data.x[s]);
        train_view.y.push_back(data.y[s]);
    }
    for (std::size_t s = n_train; s < n; ++s) {
        val_view.x.push_back(data.x[s]);
        val_view.y.push_back(data.y[s]);
    }

    // Adaptive-moment state, flat per layer.
    std::vector<std::vector<double>> mw(model.w.size()), vw(model.w.size());
    std::vector<std::vector<double>> mb(model.b.size()), vb(model.b.size());
    for (std::size_t l = 0; l < model.w.size(); ++l) {
        mw[l].assign(model.w[l].size(), 0.0);
        vw[l].assign(model.w[l].size(), 0.0);
        mb[l].assign(model.b[l].size(), 0.0);
        vb[l].assign(model.b[l].size(), 0.0);
    }

    TrainHistory history;
    std::vector<std::size_t> order(n_train);
    for (std::size_t s = 0; s < n_train; ++s) order[s] = s;

    long long update = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(n_train, start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<const std::vector<double>*> xs;
            std::vector<double> ys;
            xs.reserve(stop - start);
            ys.reserve(stop - start);
            for (std::size_t s = start; s < stop; ++s) {
                xs.push_back(&train_view.x[order[s]]);
                ys.push_back(train_view.y[order[s]]);
            }
            const MlpGradient g = mlp_gradient(model, xs, ys);
            const double lr =
                cfg.initial_lr * std::pow(cfg.decay_rate, static_cast<double>(update) / cfg.decay_steps);
            ++update;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(update));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(update));
            const auto adam = [&](std::vector<double>& p, std::vector<double>& m1, std::vector<double>& m2,
                                  const std::vector<double>& grad) {
                for (std::size_t i = 0; i < p.size(); ++i) {
                    m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * grad[i];
                    m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
                    p[i] -= lr * (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + cfg.epsilon);
                }
            };
            for (std::size_t l = 0; l < model.w.size(); ++l) {
                adam(model.w[l], mw[l], vw[l], g.w[l]);
                adam(model.b[l], mb[l], vb[l], g.b[l]);
            }
        }
        const double train_mae = mlp_mae(model, train_view);
        const double val_mae = n_val > 0 ? mlp_mae(model, val_view) : train_mae;
        if (!std::isfinite(train_mae) || !std::isfinite(val_mae))
            throw NumericalError("train: loss diverged at epoch " + std::to_string(epoch + 1) + " of " +
                                 std::to_string(cfg.epochs));
        history.train_mae.push_back(train_mae);
        history.val_mae.push_back(val_mae);
    }
    return history;
}

} // namespace mrn
