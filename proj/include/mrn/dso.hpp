#pragma once

#include <utility>
#include <vector>

#include "mrn/plant.hpp"
#include "mrn/simplex.hpp"

namespace mrn {

struct LrhoConfig {
    int n_p = 3;        // prediction steps
    int n_c = 4;        // control cycle, in plant steps
    double t_c = 20.0;  // seconds per prediction step
    double sigma = 0.2; // per-cycle split-rate movement bound
};

void validate_lrho(const LrhoConfig& cfg);

struct AlphaParams {
    int k = 0;
    std::vector<double> alpha_ii;       // per region
    std::vector<double> alpha_ij;       // k*k, diagonal zero

    double ij(int i, int j) const { return alpha_ij[static_cast<std::size_t>(i) * k + j]; }
};

// alpha_ii = N_II/N_I, alpha_ij = N_IJ/N_I; all zero for an empty region.
AlphaParams compute_alphas(const NetworkState& state);

// Column layout of one optimization instance. Flow variables come first,
// step-major (f_II block, border-pair block, transfer-triple block), then the
// accumulation variables for steps 1..n_p. All variables are nonnegative by
// the solver's standard form.
struct LpLayout {
    int k = 0;
    int n_p = 0;
    std::vector<std::pair<int, int>> pairs; // ordered border pairs
    std::vector<Triple> triples;            // canonical transfer triples

    int pair_index(int i, int h) const;
    int triple_index(int i, int h, int j) const;

    int flows_per_step() const { return k + static_cast<int>(pairs.size() + triples.size()); }
    int f_ii(int step, int i) const { return step * flows_per_step() + i; }
    int f_ih(int step, int pair_idx) const { return step * flows_per_step() + k + pair_idx; }
    int f_ihj(int step, int triple_idx) const {
        return step * flows_per_step() + k + static_cast<int>(pairs.size()) + triple_idx;
    }
    int acc(int step, int i) const { // step in 1..n_p
        return n_p * flows_per_step() + (step - 1) * k + i;
    }
    int total_vars() const { return n_p * (flows_per_step() + k); }
};

struct DsoLp {
    LinearProgram lp;
    LpLayout layout;
};

// Rolling-horizon instance anchored at the current state. `q_forecast[s]` is
// the k*k matrix of mean demand rates over prediction step s. Throughput is
// maximized subject to the Euler state recursion, stop-over/destination flow
// coupling, per-line outflow caps scaled by the frozen alphas, and
// 0 <= N <= n_jam. Caps at step 0 use the known state, so each collapses to
// its single tightest line.
DsoLp build_lp(const NetworkState& state,
               const AlphaParams& alphas,
               const std::vector<PwaMfd>& pwa,
               const std::vector<std::vector<double>>& q_forecast,
               const Topology& topo,
               const std::vector<RegionParams>& regions,
               const LrhoConfig& cfg);

// First-step transfer flows mapped back to split rates:
// theta[i,h,j] = f_ihj / (alpha_ij * pwa_i(N_i)), renormalized over h, held at
// prev when the denominator or the whole flow row vanishes, then clipped to
// [prev - sigma, prev + sigma] and renormalized. Diagonal rates stay 1.
SplitRates recover_split_rates(const LpSolution& solution,
                               const LpLayout& layout,
                               const AlphaParams& alphas,
                               const std::vector<PwaMfd>& pwa,
                               const NetworkState& state,
                               const SplitRates& prev_theta,
                               const Topology& topo,
                               const LrhoConfig& cfg);

struct LrhoResult {
    Trajectory trajectory;
    std::vector<SplitRates> theta_schedule; // one per control cycle
    std::vector<double> objectives;         // optimal objective per cycle
    std::vector<int> lp_iterations;         // simplex pivots per cycle
};

// Closed loop: every n_c plant steps freeze alphas, solve the horizon LP with
// the true demand as forecast, recover theta*, and hold it while the plant
// advances. Throws NumericalError with the cycle index if any LP comes back
// infeasible.
LrhoResult run_lrho(const Topology& topo,
                    const std::vector<RegionParams>& regions,
                    const DemandProfile& demand,
                    const std::vector<PwaMfd>& pwa,
                    const LrhoConfig& cfg,
                    int steps,
                    double dt);

} // namespace mrn
