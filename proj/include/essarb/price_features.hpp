#pragma once

#include <vector>

#include "essarb/dense_net.hpp"
#include "essarb/price_data.hpp"
#include "essarb/rng.hpp"

namespace essarb {

// Single-layer tanh recurrence over EMA-smoothed prices with a linear
// readout that predicts the next smoothed price. The RNN consumes smoothed
// prices standardized by the training-partition stats.
struct RnnParams {
    double alpha = 0.7;  // EMA coefficient in [0,1]
    int hidden = 16;
    Mat W;       // hidden x hidden
    Vec w;       // hidden
    Vec b;       // hidden
    Vec w_out;   // hidden
    double b_out = 0.0;

    Eigen::Index param_count() const;
    Vec flat() const;  // [W col-major, w, b, w_out, b_out]
    void set_flat(const Vec& flat);

    static RnnParams random(double alpha, int hidden, Rng& rng);
};

struct RnnConfig {
    double alpha = 0.7;
    int hidden = 16;
    int steps = 4000;
    double lr = 0.01;
    int batch = 10;       // sub-sequences per Adam step
    int seq_len = 168;    // sub-sequence length
};

double ema_step(double smoothed_prev, double price_next, double alpha);

// One recurrence step on an already-standardized input.
Vec rnn_step(const Vec& h, double input, const RnnParams& params);

double readout(const Vec& h, const RnnParams& params);

struct BpttResult {
    double loss = 0.0;
    Vec grad;  // same flat layout as RnnParams::flat()
};

// Exact gradients through the full unrolled recurrence of the squared
// prediction error over one raw price sequence (smoothing and
// standardization happen inside). Accumulates into `out` when accumulate is
// true so batches can sum losses and gradients.
void bptt_accumulate(const RnnParams& params, const NormStats& stats,
                     const std::vector<double>& prices, BpttResult& out);
BpttResult bptt_loss_and_grads(const RnnParams& params, const NormStats& stats,
                               const std::vector<double>& prices);

RnnParams train_rnn(const PriceSeries& train, const RnnConfig& config,
                    const NormStats& stats, Rng& rng,
                    std::vector<double>* loss_curve = nullptr);

// Streaming cursor over prices: h always reflects every price consumed so
// far, smoothing included. Streams share immutable params.
class FeatureStream {
public:
    FeatureStream(const RnnParams& params, const NormStats& stats);

    void reset();
    // Consumes one price and returns the updated smoothed price.
    double step(double price);

    double smoothed() const { return smoothed_; }
    const Vec& hidden() const { return h_; }
    // Readout of the current hidden state mapped back to $/MWh; estimates the
    // next smoothed price.
    double predict_next_smoothed() const;

private:
    const RnnParams* params_;
    NormStats stats_;
    Vec h_;
    double smoothed_ = 0.0;
    bool started_ = false;
};

struct FeatureSample {
    double price;
    double smoothed;
    Vec hidden;
};

// Runs the stream through the warm-up segment, then emits one sample per
// episode step, each taken after its price has been consumed.
std::vector<FeatureSample> stream_window(const PriceWindow& window,
                                         const RnnParams& params,
                                         const NormStats& stats);

}  // namespace essarb
