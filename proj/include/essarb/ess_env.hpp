#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "essarb/dense_net.hpp"
#include "essarb/price_data.hpp"
#include "essarb/price_features.hpp"
#include "essarb/rng.hpp"

namespace essarb {

struct EssSpec {
    double e_min = 0.0;           // MWh
    double e_max = 8.0;           // MWh
    double p_charge_max = 2.0;    // MW
    double p_discharge_max = 2.0; // MW
    double eta_c = 1.0;
    double eta_d = 1.0;
    double tau = 1.0;             // hours per step
    double beta = 1.0;            // wear cost coefficient on realized power

    void validate() const;  // throws UsageError on violated invariants
};

// Paper action indices: 1 discharge, 2 charge, 3 idle. Network logits and
// Q-table rows use index0 = Discharge, 1 = Charge, 2 = Idle.
enum class Action : int { Discharge = 1, Charge = 2, Idle = 3 };

constexpr int kNumActions = 3;

inline int action_index(Action a) { return static_cast<int>(a) - 1; }
inline Action action_from_index(int i) { return static_cast<Action>(i + 1); }

struct EssState {
    double energy = 0.0;    // E, MWh
    double avg_cost = 0.0;  // c, $/MWh book cost of stored inventory
    double price = 0.0;     // rho, $/MWh
    Vec hidden;             // h (may be empty when no feature extractor runs)
};

struct StepRecord {
    EssState before;
    Action action = Action::Idle;
    double p_charge = 0.0;     // MW
    double p_discharge = 0.0;  // MW
    double reward = 0.0;
    double cash_flow = 0.0;         // includes the wear term
    double wear_cost = 0.0;         // beta * (p_c + p_d)
    double metric_increment = 0.0;  // (rho*eta_d - c) * p_d * tau
    double smoothed = 0.0;          // smoothed price at the decision time
    EssState after;
};

struct Trajectory {
    std::vector<StepRecord> steps;
    EssState terminal;  // equals steps.back().after when non-empty
};

struct Metrics {
    double total_reward = 0.0;
    double cumulative_profit = 0.0;
    double cash_flow = 0.0;            // wear included
    double cash_flow_excl_beta = 0.0;
    double terminal_book_value = 0.0;  // c_{T+1} * E_{T+1}
};

// Bang-bang power realization; saturation keeps every action feasible.
std::pair<double, double> realize_action(const EssState& state, Action a,
                                         const EssSpec& spec);

// Per-step cash flow shared with the foresight bound so both sides produce
// bit-identical stage values.
double cash_flow_of(double price, double p_charge, double p_discharge,
                    const EssSpec& spec);

// Applies one transition; the next price / hidden state are installed into
// the successor state.
std::pair<EssState, StepRecord> step(const EssState& state, Action a,
                                     double price_next, const Vec& hidden_next,
                                     const EssSpec& spec);

using PolicyFn = std::function<Action(const EssState&, Rng&)>;

// Runs one episode over the window's episode segment, starting at
// E = e_min, c = 0. When rnn is null the hidden state stays empty and the
// smoothed price column mirrors the raw price.
Trajectory run_episode(const PriceWindow& window, const RnnParams* rnn,
                       const NormStats* stats, const PolicyFn& policy,
                       const EssSpec& spec, Rng& rng);

Metrics metrics(const Trajectory& traj);

}  // namespace essarb
