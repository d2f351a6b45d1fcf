#include "fleetobs/observer.hpp"

#include <cmath>
#include <stdexcept>

#include "fleetobs/kernels.hpp"

namespace fleetobs {

ObserverBank ObserverBank::zeros(std::size_t n, std::size_t state_dim) {
    ObserverBank b;
    b.estimates.assign(n, Vec(state_dim, 0.0));
    return b;
}

std::vector<Vec> predict(ObserverBank& bank, const Matrix& w, const Matrix& a,
                         const std::vector<std::vector<int>>& in_neighbors) {
    const std::size_t n = bank.estimates.size();
    if (w.rows() != n || in_neighbors.size() != n)
        throw std::invalid_argument("predict: dimension mismatch");
    const std::size_t sd = a.rows();

    // A xhat^j once per CAV, then weighted sums.
    std::vector<Vec> propagated(n);
    for (std::size_t j = 0; j < n; ++j) propagated[j] = a * bank.estimates[j];

    std::vector<Vec> aprioris(n, Vec(sd, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (int j : in_neighbors[i]) {
            const auto ju = static_cast<std::size_t>(j);
            axpy(w(i, ju), propagated[ju], aprioris[i]);
            if (ju != i) ++bank.consensus_messages;
        }
    }
    return aprioris;
}

void innovate(ObserverBank& bank, const std::vector<Vec>& aprioris,
              const std::vector<Vec>& measurements,
              const std::vector<Matrix>& c_rows,
              const std::vector<Matrix>& k_blocks,
              const std::vector<std::vector<int>>& in_neighbors) {
    const std::size_t n = bank.estimates.size();
    if (aprioris.size() != n || measurements.size() != n ||
        c_rows.size() != n || k_blocks.size() != n)
        throw std::invalid_argument("innovate: dimension mismatch");
    const std::size_t sd = aprioris.front().size();

    for (std::size_t i = 0; i < n; ++i) {
        Vec acc(sd, 0.0);  // sum_j C_j^T (y_j - C_j xhat_pred)
        for (int j : in_neighbors[i]) {
            const auto ju = static_cast<std::size_t>(j);
            const Matrix& cj = c_rows[ju];
            if (cj.rows() != measurements[ju].size())
                throw std::invalid_argument("innovate: missing neighbor measurement");
            for (std::size_t r = 0; r < cj.rows(); ++r) {
                const double innov =
                    measurements[ju][r] -
                    kernels::dot(&cj(r, 0), aprioris[i].data(), sd);
                kernels::axpy(innov, &cj(r, 0), acc.data(), sd);
            }
            if (ju != i) ++bank.measurement_messages;
        }
        bank.estimates[i] = aprioris[i];
        const Vec corr = k_blocks[i] * acc;
        axpy(1.0, corr, bank.estimates[i]);
    }
}

Vec residual(const Vec& estimate, const Vec& own_measurement,
             const Matrix& c_i) {
    Vec pred = c_i * estimate;
    Vec r(pred.size());
    for (std::size_t q = 0; q < pred.size(); ++q)
        r[q] = std::abs(own_measurement[q] - pred[q]);
    return r;
}

void baseline_inner_loop_step(ObserverBank& bank, const Matrix& w,
                              const Matrix& a,
                              const std::vector<Vec>& measurements,
                              const std::vector<Matrix>& c_rows,
                              const std::vector<Matrix>& k_blocks,
                              const std::vector<std::vector<int>>& in_neighbors,
                              int inner_loops) {
    if (inner_loops < 1)
        throw std::invalid_argument("baseline_inner_loop_step: L must be >= 1");
    const std::size_t n = bank.estimates.size();
    const std::size_t sd = a.rows();

    // Local prediction + own-measurement innovation.
    for (std::size_t i = 0; i < n; ++i) {
        Vec pred = a * bank.estimates[i];
        Vec acc(sd, 0.0);
        const Matrix& ci = c_rows[i];
        for (std::size_t r = 0; r < ci.rows(); ++r) {
            const double innov =
                measurements[i][r] - kernels::dot(&ci(r, 0), pred.data(), sd);
            kernels::axpy(innov, &ci(r, 0), acc.data(), sd);
        }
        const Vec corr = k_blocks[i] * acc;
        bank.estimates[i] = pred;
        axpy(1.0, corr, bank.estimates[i]);
    }

    // L consensus sweeps over the a-posteriori estimates.
    for (int sweep = 0; sweep < inner_loops; ++sweep) {
        std::vector<Vec> mixed(n, Vec(sd, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (int j : in_neighbors[i]) {
                const auto ju = static_cast<std::size_t>(j);
                axpy(w(i, ju), bank.estimates[ju], mixed[i]);
                if (ju != i) ++bank.consensus_messages;
            }
        }
        bank.estimates = std::move(mixed);
    }
}

double error_dynamics_check(const ErrorDynamicsInputs& in, const Matrix& a_hat,
                            const std::vector<Matrix>& k_blocks,
                            const SharedObservation& so) {
    if (!in.errors || !in.model_defect || !in.meas_noise || !in.fault)
        throw std::invalid_argument("error_dynamics_check: missing recorded inputs");
    const auto& errors = *in.errors;
    if (errors.size() < 2)
        throw std::invalid_argument("error_dynamics_check: need at least one step");
    const std::size_t n = errors.front().size();
    const std::size_t sd = errors.front().front().size();
    const std::size_t dim = n * sd;

    Vec stacked_prev(dim), predicted(dim), eta(dim);
    double worst = 0.0;
    for (std::size_t k = 1; k < errors.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t q = 0; q < sd; ++q)
                stacked_prev[i * sd + q] = errors[k - 1][i][q];
        kernels::gemv(a_hat.data(), dim, dim, stacked_prev.data(),
                      predicted.data());

        // eta_k = (I - K D_C)(1_n (x) nu_{k-1}) - K Dbar (mu_k + f_k)
        const Vec& nu = (*in.model_defect)[k];
        for (std::size_t i = 0; i < n; ++i) {
            // v = nu - K_i D_i nu
            Vec dnu = so.d_blocks[i] * nu;
            Vec kdnu = k_blocks[i] * dnu;
            for (std::size_t q = 0; q < sd; ++q)
                eta[i * sd + q] = nu[q] - kdnu[q];
        }
        // stack mu + f over channels, then subtract K Dbar (mu + f)
        Vec chan(so.total_channels, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const auto& mu = (*in.meas_noise)[k][j];
            const auto& f = (*in.fault)[k][j];
            for (std::size_t r = 0; r < mu.size(); ++r)
                chan[so.channel_offset[j] + r] = mu[r] + f[r];
        }
        Vec dbar_chan = so.dbar * chan;
        for (std::size_t i = 0; i < n; ++i) {
            Vec block(sd);
            for (std::size_t q = 0; q < sd; ++q) block[q] = dbar_chan[i * sd + q];
            const Vec kb = k_blocks[i] * block;
            for (std::size_t q = 0; q < sd; ++q) eta[i * sd + q] -= kb[q];
        }

        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t q = 0; q < sd; ++q) {
                const double defect = errors[k][i][q] -
                                      predicted[i * sd + q] - eta[i * sd + q];
                worst = std::max(worst, std::abs(defect));
            }
    }
    return worst;
}

}  // namespace fleetobs
