#include "essarb/price_features.hpp"

#include <cmath>
#include <string>

#include "essarb/errors.hpp"

namespace essarb {

Eigen::Index RnnParams::param_count() const {
    return static_cast<Eigen::Index>(hidden) * hidden + 3 * hidden + 1;
}

Vec RnnParams::flat() const {
    Vec f(param_count());
    Eigen::Index off = 0;
    f.segment(off, W.size()) = Eigen::Map<const Vec>(W.data(), W.size());
    off += W.size();
    f.segment(off, hidden) = w;
    off += hidden;
    f.segment(off, hidden) = b;
    off += hidden;
    f.segment(off, hidden) = w_out;
    off += hidden;
    f[off] = b_out;
    return f;
}

void RnnParams::set_flat(const Vec& f) {
    if (f.size() != param_count())
        throw UsageError("rnn params: flat vector has wrong length");
    Eigen::Index off = 0;
    Eigen::Map<Vec>(W.data(), W.size()) = f.segment(off, W.size());
    off += W.size();
    w = f.segment(off, hidden);
    off += hidden;
    b = f.segment(off, hidden);
    off += hidden;
    w_out = f.segment(off, hidden);
    off += hidden;
    b_out = f[off];
}

RnnParams RnnParams::random(double alpha, int hidden, Rng& rng) {
    if (alpha < 0.0 || alpha > 1.0) throw UsageError("rnn: alpha must be in [0,1]");
    if (hidden < 1) throw UsageError("rnn: hidden width must be >= 1");
    RnnParams p;
    p.alpha = alpha;
    p.hidden = hidden;
    p.W.resize(hidden, hidden);
    // Recurrent fan-in counts the hidden state plus the scalar input.
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden + 1));
    for (Eigen::Index k = 0; k < p.W.size(); ++k)
        p.W.data()[k] = rng.uniform(-bound, bound);
    p.w.resize(hidden);
    for (int i = 0; i < hidden; ++i) p.w[i] = rng.uniform(-bound, bound);
    p.b = Vec::Zero(hidden);
    const double bound_out = 1.0 / std::sqrt(static_cast<double>(hidden));
    p.w_out.resize(hidden);
    for (int i = 0; i < hidden; ++i) p.w_out[i] = rng.uniform(-bound_out, bound_out);
    p.b_out = 0.0;
    return p;
}

double ema_step(double smoothed_prev, double price_next, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw UsageError("ema: alpha must be in [0,1]");
    return alpha * smoothed_prev + (1.0 - alpha) * price_next;
}

Vec rnn_step(const Vec& h, double input, const RnnParams& params) {
    if (h.size() != params.hidden)
        throw UsageError("rnn_step: hidden state length " + std::to_string(h.size()) +
                         " does not match width " + std::to_string(params.hidden));
    Vec a = params.W * h + params.w * input + params.b;
    return a.array().tanh();
}

double readout(const Vec& h, const RnnParams& params) {
    if (h.size() != params.hidden)
        throw UsageError("readout: hidden state length mismatch");
    return params.w_out.dot(h) + params.b_out;
}

void bptt_accumulate(const RnnParams& params, const NormStats& stats,
                     const std::vector<double>& prices, BpttResult& out) {
    const std::size_t len = prices.size();
    if (len < 2) throw DataError("bptt: sequence must have at least 2 prices");
    const int n = params.hidden;
    if (out.grad.size() != params.param_count()) {
        out.grad = Vec::Zero(params.param_count());
        out.loss = 0.0;
    }

    // Forward: smooth, standardize, unroll. h[-1] = 0.
    std::vector<double> z(len);
    double smoothed = prices[0];
    z[0] = (smoothed - stats.price_mean) / stats.price_std;
    for (std::size_t t = 1; t < len; ++t) {
        smoothed = ema_step(smoothed, prices[t], params.alpha);
        z[t] = (smoothed - stats.price_mean) / stats.price_std;
    }
    std::vector<Vec> h(len);
    Vec hp = Vec::Zero(n);
    for (std::size_t t = 0; t < len; ++t) {
        Vec a = params.W * hp + params.w * z[t] + params.b;
        h[t] = a.array().tanh();
        hp = h[t];
    }
    // Residuals: prediction for index t (t >= 1) comes from h[t-1].
    std::vector<double> e(len, 0.0);
    for (std::size_t t = 1; t < len; ++t) {
        const double yhat = params.w_out.dot(h[t - 1]) + params.b_out;
        const double r = yhat - z[t];
        e[t] = r;
        out.loss += r * r;
    }

    // Backward through time.
    Eigen::Index off = 0;
    Eigen::Map<Mat> gW(out.grad.data() + off, n, n);
    off += params.W.size();
    Eigen::Map<Vec> gw(out.grad.data() + off, n);
    off += n;
    Eigen::Map<Vec> gb(out.grad.data() + off, n);
    off += n;
    Eigen::Map<Vec> gwo(out.grad.data() + off, n);
    off += n;
    double& gbo = out.grad[off];

    Vec ga_next = Vec::Zero(n);
    for (std::size_t ti = len; ti-- > 0;) {
        Vec gh = Vec::Zero(n);
        if (ti + 1 < len) {
            gh.noalias() = params.W.transpose() * ga_next;
            gh += 2.0 * e[ti + 1] * params.w_out;
            gwo += 2.0 * e[ti + 1] * h[ti];
            gbo += 2.0 * e[ti + 1];
        }
        Vec ga = gh.cwiseProduct(Vec::Ones(n) - h[ti].cwiseProduct(h[ti]));
        if (ti > 0) gW.noalias() += ga * h[ti - 1].transpose();
        gw += ga * z[ti];
        gb += ga;
        ga_next.swap(ga);
    }
}

BpttResult bptt_loss_and_grads(const RnnParams& params, const NormStats& stats,
                               const std::vector<double>& prices) {
    BpttResult out;
    out.grad = Vec::Zero(params.param_count());
    bptt_accumulate(params, stats, prices, out);
    return out;
}

RnnParams train_rnn(const PriceSeries& train, const RnnConfig& config,
                    const NormStats& stats, Rng& rng,
                    std::vector<double>* loss_curve) {
    if (config.seq_len < 2) throw UsageError("train_rnn: sequence length must be >= 2");
    if (train.size() < static_cast<std::size_t>(config.seq_len))
        throw DataError("train_rnn: training series shorter than one sub-sequence");

    Rng init_rng = rng.child(0);
    Rng sample_rng = rng.child(1);
    RnnParams params = RnnParams::random(config.alpha, config.hidden, init_rng);

    Vec flat = params.flat();
    AdamState adam = AdamState::make(flat.size(), config.lr);
    BpttResult batch;
    std::vector<double> seq(config.seq_len);
    const std::size_t n_starts = train.size() - config.seq_len + 1;
    if (loss_curve) loss_curve->clear();

    for (int step = 0; step < config.steps; ++step) {
        batch.loss = 0.0;
        batch.grad = Vec::Zero(flat.size());
        for (int bi = 0; bi < config.batch; ++bi) {
            const std::size_t start = sample_rng.uniform_index(n_starts);
            for (int k = 0; k < config.seq_len; ++k)
                seq[k] = train.points[start + k].price;
            bptt_accumulate(params, stats, seq, batch);
        }
        if (!std::isfinite(batch.loss))
            throw NumericError("train_rnn: non-finite loss at step " + std::to_string(step + 1));
        if (loss_curve) loss_curve->push_back(batch.loss);
        adam_step(flat, batch.grad, adam);
        params.set_flat(flat);
    }
    return params;
}

FeatureStream::FeatureStream(const RnnParams& params, const NormStats& stats)
    : params_(&params), stats_(stats) {
    reset();
}

void FeatureStream::reset() {
    h_ = Vec::Zero(params_->hidden);
    smoothed_ = 0.0;
    started_ = false;
}

double FeatureStream::step(double price) {
    if (!started_) {
        smoothed_ = price;
        started_ = true;
    } else {
        smoothed_ = ema_step(smoothed_, price, params_->alpha);
    }
    const double z = (smoothed_ - stats_.price_mean) / stats_.price_std;
    h_ = rnn_step(h_, z, *params_);
    return smoothed_;
}

double FeatureStream::predict_next_smoothed() const {
    return stats_.price_mean + stats_.price_std * readout(h_, *params_);
}

std::vector<FeatureSample> stream_window(const PriceWindow& window,
                                         const RnnParams& params,
                                         const NormStats& stats) {
    FeatureStream stream(params, stats);
    for (std::size_t i = 0; i < window.warmup_len; ++i) stream.step(window.prices[i]);
    std::vector<FeatureSample> out;
    out.reserve(window.episode_len());
    for (std::size_t t = 0; t < window.episode_len(); ++t) {
        const double price = window.episode_price(t);
        const double smoothed = stream.step(price);
        out.push_back({price, smoothed, stream.hidden()});
    }
    return out;
}

}  // namespace essarb
