#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fleetobs/matrix.hpp"
#include "fleetobs/rng.hpp"

namespace fleetobs {

enum class ConsensusRule { uniform, metropolis_hastings, given };

// CAV communication graph plus its row-stochastic consensus matrix.
// adjacency(i, j) = 1 means CAV i receives from CAV j (j is an in-neighbor
// of i); the diagonal is always 1. W has the sparsity of the adjacency and
// rows summing to 1.
struct CavNetwork {
    std::size_t n = 0;
    Matrix adjacency;
    Matrix w;
    std::vector<std::vector<int>> in_neighbors;  // sorted, includes self

    std::size_t directed_edge_count() const;  // excludes self-loops
};

// Validates the adjacency (square 0/1, self-loops) and builds W. For
// ConsensusRule::given, pass the ready-made W; it is checked against the
// adjacency sparsity and row-stochasticity.
CavNetwork make_network(const Matrix& adjacency, ConsensusRule rule,
                        const Matrix* given_w = nullptr);

bool is_strongly_connected(const Matrix& adjacency);

// Directed G(n, p) with self-loops added. If require_strong, resamples until
// strongly connected (throws std::runtime_error after max_attempts).
CavNetwork erdos_renyi(std::size_t n, double p, RngStream& rng,
                       bool require_strong, ConsensusRule rule,
                       int max_attempts = 1000);

// Adjacency-list JSON: {"nodes": n, "out_neighbors": {"0": [...], ...}}.
// Out-neighbors of v are the nodes that receive from v; self-loops are
// implicit and not listed.
std::string adjacency_to_json(const Matrix& adjacency);
Matrix adjacency_from_json(const std::string& json_text);

// Shared observation matrices of the CAV network.
//  d_blocks[i] = sum_{j in N(i)} C_j^T C_j            (the D_C blocks)
//  dbar       = block matrix with (i,j) block C_j^T for j in N(i), else 0.
//
// dbar follows the per-CAV noise expansion of the innovation (every shared
// measurement enters unweighted), which is what makes the error-dynamics
// identity exact; the W-weighted variant does not match the observer update.
struct SharedObservation {
    std::vector<Matrix> d_blocks;   // n blocks, state_dim x state_dim
    Matrix dbar;                    // (n*state_dim) x total_channels
    std::vector<std::size_t> channel_offset;  // per CAV, into dbar columns
    std::size_t total_channels = 0;
};

SharedObservation build_shared_observation(
    const std::vector<Matrix>& c_rows,
    const std::vector<std::vector<int>>& in_neighbors);

struct ObservabilityResult {
    bool observable = false;
    std::size_t rank = 0;
    std::size_t dim = 0;
};

// Numerical rank of the stacked observability matrix of (W (x) A, D_C),
// stacking D_C (W (x) A)^p until the rank saturates or reaches n*state_dim.
// Rank detection by incremental orthogonalization with a relative threshold
// of dim * 1e-12 against the largest row seen.
ObservabilityResult check_distributed_observability(
    const Matrix& w, const Matrix& a, const std::vector<Matrix>& d_blocks);

}  // namespace fleetobs
