#include "essarb/dense_net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "essarb/errors.hpp"

namespace essarb {

namespace {

void apply_activation(Activation act, Vec& x) {
    switch (act) {
        case Activation::Tanh: x = x.array().tanh(); break;
        case Activation::Relu: x = x.array().max(0.0); break;
        case Activation::Identity: break;
    }
}

void apply_activation(Activation act, Mat& x) {
    switch (act) {
        case Activation::Tanh: x = x.array().tanh(); break;
        case Activation::Relu: x = x.array().max(0.0); break;
        case Activation::Identity: break;
    }
}

// Multiplies g in place by the activation derivative, recovered from the
// post-activation values. relu' at 0 is taken as 0.
template <typename T>
void mul_activation_deriv(Activation act, const T& post, T& g) {
    switch (act) {
        case Activation::Tanh:
            g.array() *= 1.0 - post.array().square();
            break;
        case Activation::Relu:
            g.array() *= (post.array() > 0.0).template cast<double>();
            break;
        case Activation::Identity:
            break;
    }
}

}  // namespace

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
        if (layers_[i + 1].weight.cols() != layers_[i].weight.rows())
            throw UsageError("dense net: layer dimensions do not chain at layer " +
                             std::to_string(i + 1));
    }
    for (const auto& l : layers_) {
        if (l.bias.size() != l.weight.rows())
            throw UsageError("dense net: bias length does not match layer output");
        if (!l.weight.allFinite() || !l.bias.allFinite())
            throw UsageError("dense net: non-finite parameters");
    }
}

DenseNet DenseNet::random(const std::vector<int>& dims,
                          const std::vector<Activation>& acts, Rng& rng) {
    if (dims.size() < 2 || acts.size() != dims.size() - 1)
        throw UsageError("dense net: need dims {in,...,out} and one activation per layer");
    std::vector<DenseLayer> layers;
    layers.reserve(acts.size());
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        DenseLayer l;
        l.weight.resize(dims[i + 1], dims[i]);
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[i]));
        double* p = l.weight.data();
        for (Eigen::Index k = 0; k < l.weight.size(); ++k)
            p[k] = rng.uniform(-bound, bound);
        l.bias = Vec::Zero(dims[i + 1]);
        l.act = acts[i];
        layers.push_back(std::move(l));
    }
    return DenseNet(std::move(layers));
}

int DenseNet::input_dim() const {
    return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int DenseNet::output_dim() const {
    return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

Eigen::Index DenseNet::param_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

Vec DenseNet::params() const {
    Vec flat(param_count());
    Eigen::Index off = 0;
    for (const auto& l : layers_) {
        flat.segment(off, l.weight.size()) =
            Eigen::Map<const Vec>(l.weight.data(), l.weight.size());
        off += l.weight.size();
        flat.segment(off, l.bias.size()) = l.bias;
        off += l.bias.size();
    }
    return flat;
}

void DenseNet::set_params(const Vec& flat) {
    if (flat.size() != param_count())
        throw UsageError("dense net: parameter vector has wrong length");
    Eigen::Index off = 0;
    for (auto& l : layers_) {
        Eigen::Map<Vec>(l.weight.data(), l.weight.size()) =
            flat.segment(off, l.weight.size());
        off += l.weight.size();
        l.bias = flat.segment(off, l.bias.size());
        off += l.bias.size();
    }
}

Vec DenseNet::forward(const Vec& input) const {
    Cache cache;
    return forward(input, cache);
}

const Vec& DenseNet::forward(const Vec& input, Cache& cache) const {
    if (layers_.empty()) throw UsageError("dense net: empty network");
    if (input.size() != input_dim())
        throw UsageError("dense net: input length " + std::to_string(input.size()) +
                         " does not match first layer input " +
                         std::to_string(input_dim()));
    cache.post.resize(layers_.size() + 1);
    cache.post[0] = input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        cache.post[i + 1].noalias() = layers_[i].weight * cache.post[i];
        cache.post[i + 1] += layers_[i].bias;
        apply_activation(layers_[i].act, cache.post[i + 1]);
    }
    return cache.post.back();
}

void DenseNet::backward(const Cache& cache, const Vec& upstream, Vec& grad,
                        Vec* input_grad) const {
    if (cache.post.size() != layers_.size() + 1)
        throw UsageError("dense net: backward without matching forward cache");
    if (upstream.size() != output_dim())
        throw UsageError("dense net: upstream gradient length mismatch");
    if (grad.size() != param_count())
        throw UsageError("dense net: gradient buffer length mismatch");

    Vec g = upstream;
    Eigen::Index off_end = param_count();
    for (std::size_t ri = layers_.size(); ri-- > 0;) {
        const auto& l = layers_[ri];
        mul_activation_deriv<Vec>(l.act, cache.post[ri + 1], g);

        off_end -= l.bias.size();
        grad.segment(off_end, l.bias.size()) += g;
        off_end -= l.weight.size();
        Eigen::Map<Mat> gw(grad.data() + off_end, l.weight.rows(), l.weight.cols());
        gw.noalias() += g * cache.post[ri].transpose();

        if (ri > 0 || input_grad != nullptr) {
            Vec next = l.weight.transpose() * g;
            g.swap(next);
        }
    }
    if (input_grad != nullptr) *input_grad = g;
}

const Mat& DenseNet::forward_batch(const Mat& input, BatchCache& cache) const {
    if (layers_.empty()) throw UsageError("dense net: empty network");
    if (input.cols() != input_dim())
        throw UsageError("dense net: batch input width does not match first layer");
    cache.post.resize(layers_.size() + 1);
    cache.post[0] = input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        cache.post[i + 1].noalias() = cache.post[i] * layers_[i].weight.transpose();
        cache.post[i + 1].rowwise() += layers_[i].bias.transpose();
        apply_activation(layers_[i].act, cache.post[i + 1]);
    }
    return cache.post.back();
}

void DenseNet::backward_batch(BatchCache& cache, const Mat& upstream, Vec& grad) const {
    if (cache.post.size() != layers_.size() + 1)
        throw UsageError("dense net: backward_batch without matching forward cache");
    if (grad.size() != param_count())
        throw UsageError("dense net: gradient buffer length mismatch");

    cache.scratch.resize(layers_.size() + 1);
    Eigen::Index off_end = param_count();
    const Mat* g = &upstream;
    for (std::size_t ri = layers_.size(); ri-- > 0;) {
        const auto& l = layers_[ri];
        Mat& gz = cache.scratch[ri + 1];
        gz = *g;
        mul_activation_deriv<Mat>(l.act, cache.post[ri + 1], gz);

        off_end -= l.bias.size();
        grad.segment(off_end, l.bias.size()) += gz.colwise().sum();
        off_end -= l.weight.size();
        Eigen::Map<Mat> gw(grad.data() + off_end, l.weight.rows(), l.weight.cols());
        gw.noalias() += gz.transpose() * cache.post[ri];

        if (ri > 0) {
            cache.scratch[ri].noalias() = gz * l.weight;
            g = &cache.scratch[ri];
        }
    }
}

Vec softmax(const Vec& logits) {
    const double shift = logits.maxCoeff();
    Vec e = (logits.array() - shift).exp();
    return e / e.sum();
}

AdamState AdamState::make(Eigen::Index n, double lr_) {
    AdamState s;
    s.m = Vec::Zero(n);
    s.v = Vec::Zero(n);
    s.lr = lr_;
    return s;
}

void adam_step(Vec& params, const Vec& grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw UsageError("adam: parameter/gradient/state lengths disagree");
    if (!grads.allFinite())
        throw NumericError("adam: non-finite gradient at step " +
                           std::to_string(state.t + 1));
    state.t += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads.cwiseProduct(grads);
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    params.array() -=
        state.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

double grad_check(const std::function<double(const Vec&, Vec&)>& loss_fn,
                  const Vec& params, double step) {
    Vec analytic = Vec::Zero(params.size());
    Vec none;
    loss_fn(params, analytic);

    double max_err = 0.0;
    Vec p = params;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double orig = p[i];
        p[i] = orig + step;
        const double up = loss_fn(p, none);
        p[i] = orig - step;
        const double down = loss_fn(p, none);
        p[i] = orig;
        const double fd = (up - down) / (2.0 * step);
        const double denom = std::max({1.0, std::abs(fd), std::abs(analytic[i])});
        max_err = std::max(max_err, std::abs(fd - analytic[i]) / denom);
    }
    return max_err;
}

}  // namespace essarb
