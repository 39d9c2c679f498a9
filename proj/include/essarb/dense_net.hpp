#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "essarb/rng.hpp"

namespace essarb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Activation { Tanh, Relu, Identity };

struct DenseLayer {
    Mat weight;  // out x in
    Vec bias;    // out
    Activation act = Activation::Identity;
};

// Minimal fully connected network at 64-bit precision. Forward/backward are
// exact analytic passes; parameters expose a flat view (per layer: weight in
// column-major order, then bias) for the optimizer.
class DenseNet {
public:
    DenseNet() = default;
    explicit DenseNet(std::vector<DenseLayer> layers);

    // dims = {in, h1, ..., out}; acts has one entry per layer. Weights are
    // uniform in +-1/sqrt(fan_in), biases zero.
    static DenseNet random(const std::vector<int>& dims,
                           const std::vector<Activation>& acts, Rng& rng);

    bool empty() const { return layers_.empty(); }
    int input_dim() const;
    int output_dim() const;
    const std::vector<DenseLayer>& layers() const { return layers_; }

    Eigen::Index param_count() const;
    Vec params() const;
    void set_params(const Vec& flat);

    Vec forward(const Vec& input) const;

    // post[0] is the input, post[i] the activation output of layer i.
    // Activation derivatives are recovered from the post-activations, so no
    // pre-activation storage is needed.
    struct Cache {
        std::vector<Vec> post;
    };
    const Vec& forward(const Vec& input, Cache& cache) const;

    // Gradients of the scalar loss whose gradient at the output is
    // `upstream`. Parameter gradients are accumulated into `grad` (flat
    // layout; caller zeroes). Fills *input_grad when non-null.
    void backward(const Cache& cache, const Vec& upstream, Vec& grad,
                  Vec* input_grad = nullptr) const;

    // Batched variants over rows of `input` (N x in). backward_batch
    // accumulates the sum over rows of the per-sample parameter gradients.
    struct BatchCache {
        std::vector<Mat> post;
        std::vector<Mat> scratch;
    };
    const Mat& forward_batch(const Mat& input, BatchCache& cache) const;
    void backward_batch(BatchCache& cache, const Mat& upstream, Vec& grad) const;

private:
    std::vector<DenseLayer> layers_;
};

// Numerically stable softmax (max subtraction).
Vec softmax(const Vec& logits);

// Bias-corrected Adam over a flat parameter vector.
struct AdamState {
    Vec m, v;
    long t = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState make(Eigen::Index n, double lr);
};

// In-place update; throws NumericError on non-finite gradients.
void adam_step(Vec& params, const Vec& grads, AdamState& state);

// loss_fn(params, grad_out) returns the loss and fills grad_out with the
// analytic gradient whenever grad_out.size() != 0. Compares the analytic
// gradient against central differences with the given step; the per-entry
// error is relative with the denominator floored at 1.
double grad_check(const std::function<double(const Vec&, Vec&)>& loss_fn,
                  const Vec& params, double step);

}  // namespace essarb
