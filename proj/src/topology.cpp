#include "fleetobs/topology.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "fleetobs/kernels.hpp"

namespace fleetobs {

namespace {

void check_adjacency(const Matrix& adj) {
    if (!adj.square() || adj.empty())
        throw std::invalid_argument("adjacency must be square and non-empty");
    for (std::size_t i = 0; i < adj.rows(); ++i) {
        for (std::size_t j = 0; j < adj.cols(); ++j) {
            const double v = adj(i, j);
            if (v != 0.0 && v != 1.0)
                throw std::invalid_argument("adjacency entries must be 0/1");
        }
        if (adj(i, i) != 1.0)
            throw std::invalid_argument("adjacency must carry self-loops");
    }
}

std::vector<std::vector<int>> neighbor_sets(const Matrix& adj) {
    std::vector<std::vector<int>> nb(adj.rows());
    for (std::size_t i = 0; i < adj.rows(); ++i)
        for (std::size_t j = 0; j < adj.cols(); ++j)
            if (adj(i, j) != 0.0) nb[i].push_back(static_cast<int>(j));
    return nb;
}

}  // namespace

std::size_t CavNetwork::directed_edge_count() const {
    std::size_t e = 0;
    for (const auto& nb : in_neighbors) e += nb.size() - 1;
    return e;
}

CavNetwork make_network(const Matrix& adjacency, ConsensusRule rule,
                        const Matrix* given_w) {
    check_adjacency(adjacency);
    CavNetwork net;
    net.n = adjacency.rows();
    net.adjacency = adjacency;
    net.in_neighbors = neighbor_sets(adjacency);

    switch (rule) {
        case ConsensusRule::uniform: {
            net.w = Matrix(net.n, net.n);
            for (std::size_t i = 0; i < net.n; ++i) {
                const double wij = 1.0 / static_cast<double>(net.in_neighbors[i].size());
                for (int j : net.in_neighbors[i]) net.w(i, j) = wij;
            }
            break;
        }
        case ConsensusRule::metropolis_hastings: {
            net.w = Matrix(net.n, net.n);
            std::vector<std::size_t> deg(net.n);
            for (std::size_t i = 0; i < net.n; ++i)
                deg[i] = net.in_neighbors[i].size() - 1;  // self excluded
            for (std::size_t i = 0; i < net.n; ++i) {
                double diag = 1.0;
                for (int j : net.in_neighbors[i]) {
                    if (static_cast<std::size_t>(j) == i) continue;
                    const double wij = 1.0 / (1.0 + static_cast<double>(
                                                        std::max(deg[i], deg[j])));
                    net.w(i, j) = wij;
                    diag -= wij;
                }
                net.w(i, i) = diag;
            }
            break;
        }
        case ConsensusRule::given: {
            if (given_w == nullptr)
                throw std::invalid_argument("make_network: given rule needs W");
            if (!given_w->same_shape(adjacency))
                throw std::invalid_argument("make_network: W shape mismatch");
            for (std::size_t i = 0; i < net.n; ++i) {
                double sum = 0.0;
                for (std::size_t j = 0; j < net.n; ++j) {
                    const double v = (*given_w)(i, j);
                    if (v < 0.0)
                        throw std::invalid_argument("make_network: W entries must be >= 0");
                    if (v > 0.0 && adjacency(i, j) == 0.0)
                        throw std::invalid_argument(
                            "make_network: W nonzero outside adjacency");
                    sum += v;
                }
                if (std::abs(sum - 1.0) > 1e-12)
                    throw std::invalid_argument("make_network: W rows must sum to 1");
            }
            net.w = *given_w;
            break;
        }
    }
    return net;
}

bool is_strongly_connected(const Matrix& adjacency) {
    if (!adjacency.square() || adjacency.empty())
        throw std::invalid_argument("is_strongly_connected: square 0/1 matrix required");
    const std::size_t n = adjacency.rows();

    // Kosaraju-style double reachability from node 0 (iterative DFS).
    auto reach = [&](bool transpose) {
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v) {
                const double e = transpose ? adjacency(v, u) : adjacency(u, v);
                if (e != 0.0 && !seen[v]) {
                    seen[v] = 1;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        return count == n;
    };
    return reach(false) && reach(true);
}

CavNetwork erdos_renyi(std::size_t n, double p, RngStream& rng,
                       bool require_strong, ConsensusRule rule,
                       int max_attempts) {
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("erdos_renyi: p must be in [0,1]");
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Matrix adj(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            adj(i, i) = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                if (rng.uniform() < p) adj(i, j) = 1.0;
            }
        }
        if (!require_strong || is_strongly_connected(adj))
            return make_network(adj, rule);
    }
    throw std::runtime_error(
        "erdos_renyi: no strongly connected sample within attempt budget");
}

std::string adjacency_to_json(const Matrix& adjacency) {
    check_adjacency(adjacency);
    nlohmann::json j;
    j["nodes"] = adjacency.rows();
    nlohmann::json out = nlohmann::json::object();
    for (std::size_t v = 0; v < adjacency.cols(); ++v) {
        std::vector<int> outs;
        for (std::size_t i = 0; i < adjacency.rows(); ++i)
            if (i != v && adjacency(i, v) != 0.0) outs.push_back(static_cast<int>(i));
        out[std::to_string(v)] = outs;
    }
    j["out_neighbors"] = out;
    return j.dump(2);
}

Matrix adjacency_from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    const std::size_t n = j.at("nodes").get<std::size_t>();
    Matrix adj(n, n);
    for (std::size_t i = 0; i < n; ++i) adj(i, i) = 1.0;
    for (const auto& [key, outs] : j.at("out_neighbors").items()) {
        const std::size_t v = std::stoul(key);
        if (v >= n) throw std::invalid_argument("adjacency_from_json: node id out of range");
        for (const auto& t : outs) {
            const std::size_t i = t.get<std::size_t>();
            if (i >= n)
                throw std::invalid_argument("adjacency_from_json: neighbor id out of range");
            adj(i, v) = 1.0;
        }
    }
    return adj;
}

SharedObservation build_shared_observation(
    const std::vector<Matrix>& c_rows,
    const std::vector<std::vector<int>>& in_neighbors) {
    const std::size_t n = c_rows.size();
    if (in_neighbors.size() != n)
        throw std::invalid_argument("build_shared_observation: size mismatch");
    std::size_t dim = 0;
    for (const auto& c : c_rows)
        if (c.rows() > 0) dim = c.cols();
    if (dim == 0) throw std::invalid_argument("build_shared_observation: no sensors");

    SharedObservation so;
    so.channel_offset.resize(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (c_rows[i].rows() > 0 && c_rows[i].cols() != dim)
            throw std::invalid_argument("build_shared_observation: C dimension mismatch");
        so.channel_offset[i] = so.total_channels;
        so.total_channels += c_rows[i].rows();
    }

    so.d_blocks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Matrix d(dim, dim);
        for (int j : in_neighbors[i]) {
            const Matrix& cj = c_rows[static_cast<std::size_t>(j)];
            if (cj.rows() == 0) continue;
            d += cj.transpose() * cj;
        }
        so.d_blocks.push_back(std::move(d));
    }

    so.dbar = Matrix(n * dim, so.total_channels);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j : in_neighbors[i]) {
            const Matrix& cj = c_rows[static_cast<std::size_t>(j)];
            const std::size_t col0 = so.channel_offset[static_cast<std::size_t>(j)];
            for (std::size_t r = 0; r < cj.rows(); ++r)
                for (std::size_t q = 0; q < dim; ++q)
                    so.dbar(i * dim + q, col0 + r) = cj(r, q);
        }
    }
    return so;
}

namespace {

// Appends rows to an orthonormal basis, reporting how many were independent.
class IncrementalRank {
  public:
    explicit IncrementalRank(std::size_t dim) : dim_(dim) {}

    std::size_t rank() const { return basis_.size() / dim_; }
    double scale() const { return scale_; }

    // Two-pass modified Gram-Schmidt; a row joins the basis if its residual
    // exceeds tol_rel * (largest row norm seen so far).
    bool add_row(const double* row, double tol_rel) {
        work_.assign(row, row + dim_);
        const double nrm0 = std::sqrt(kernels::sum_sq(work_.data(), dim_));
        scale_ = std::max(scale_, nrm0);
        if (nrm0 == 0.0) return false;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t b = 0; b < rank(); ++b) {
                const double* q = basis_.data() + b * dim_;
                const double c = kernels::dot(q, work_.data(), dim_);
                kernels::axpy(-c, q, work_.data(), dim_);
            }
        }
        const double nrm = std::sqrt(kernels::sum_sq(work_.data(), dim_));
        if (nrm <= tol_rel * scale_) return false;
        kernels::scal(1.0 / nrm, work_.data(), dim_);
        basis_.insert(basis_.end(), work_.begin(), work_.end());
        return true;
    }

  private:
    std::size_t dim_;
    double scale_ = 0.0;
    std::vector<double> basis_;
    std::vector<double> work_;
};

}  // namespace

ObservabilityResult check_distributed_observability(
    const Matrix& w, const Matrix& a, const std::vector<Matrix>& d_blocks) {
    const std::size_t n = w.rows();
    if (!w.square() || d_blocks.size() != n)
        throw std::invalid_argument("check_distributed_observability: bad shapes");
    const std::size_t state_dim = a.rows();
    if (!a.square() || (n && d_blocks[0].rows() != state_dim))
        throw std::invalid_argument("check_distributed_observability: bad shapes");
    const std::size_t dim = n * state_dim;

    const Matrix m = kronecker(w, a);
    const Matrix d_c = Matrix::block_diag(d_blocks);

    // Keep only the nonzero rows of D_C; the p-th stacked block is those
    // rows of D_C * M^p, advanced by one right-multiplication per power.
    std::vector<std::size_t> live_rows;
    for (std::size_t r = 0; r < dim; ++r) {
        bool nonzero = false;
        for (std::size_t c2 = 0; c2 < state_dim; ++c2)
            if (d_c(r, (r / state_dim) * state_dim + c2) != 0.0) nonzero = true;
        if (nonzero) live_rows.push_back(r);
    }

    ObservabilityResult res;
    res.dim = dim;
    if (live_rows.empty()) return res;

    Matrix block(live_rows.size(), dim);
    for (std::size_t t = 0; t < live_rows.size(); ++t)
        for (std::size_t c2 = 0; c2 < dim; ++c2)
            block(t, c2) = d_c(live_rows[t], c2);

    IncrementalRank basis(dim);
    const double tol_rel = static_cast<double>(dim) * 1e-12;
    for (std::size_t power = 0; power < dim; ++power) {
        bool grew = false;
        for (std::size_t t = 0; t < block.rows(); ++t)
            grew |= basis.add_row(&block(t, 0), tol_rel);
        if (basis.rank() >= dim) break;
        if (!grew && power > 0) break;  // Krylov row space saturated
        if (power + 1 < dim) {
            Matrix next(block.rows(), dim);
            kernels::gemm_acc(block.data(), block.rows(), dim, m.data(), dim,
                              next.data());
            block = std::move(next);
        }
    }
    res.rank = basis.rank();
    res.observable = (res.rank == dim);
    return res;
}

}  // namespace fleetobs
