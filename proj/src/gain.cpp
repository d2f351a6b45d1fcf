#include "fleetobs/gain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "fleetobs/eig.hpp"
#include "fleetobs/kernels.hpp"

namespace fleetobs {

std::string GainDesign::to_json() const {
    nlohmann::json j;
    j["epsilon"] = epsilon;
    j["rho"] = rho;
    j["beta"] = beta;
    j["ratio"] = ratio;
    j["position_gain"] = position_gain;
    j["velocity_gain"] = velocity_gain;
    j["k_blocks"] = nlohmann::json::array();
    for (const auto& k : k_blocks) {
        // blocks are diagonal by construction of the search family
        std::vector<double> d(k.rows());
        for (std::size_t i = 0; i < k.rows(); ++i) d[i] = k(i, i);
        j["k_blocks"].push_back(d);
    }
    return j.dump(2);
}

GainDesign GainDesign::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    GainDesign g;
    g.epsilon = j.at("epsilon").get<double>();
    g.rho = j.at("rho").get<double>();
    g.beta = j.at("beta").get<double>();
    g.ratio = j.at("ratio").get<double>();
    g.position_gain = j.value("position_gain", 0.0);
    g.velocity_gain = j.value("velocity_gain", 0.0);
    for (const auto& d : j.at("k_blocks")) {
        const auto diag = d.get<std::vector<double>>();
        Matrix k(diag.size(), diag.size());
        for (std::size_t i = 0; i < diag.size(); ++i) k(i, i) = diag[i];
        g.k_blocks.push_back(std::move(k));
    }
    return g;
}

Matrix closed_loop(const Matrix& w, const Matrix& a,
                   const std::vector<Matrix>& k_blocks,
                   const std::vector<Matrix>& d_blocks) {
    const std::size_t n = w.rows();
    const std::size_t sd = a.rows();
    if (k_blocks.size() != n || d_blocks.size() != n)
        throw std::invalid_argument("closed_loop: block count mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (k_blocks[i].rows() != sd || d_blocks[i].rows() != sd)
            throw std::invalid_argument("closed_loop: block shape mismatch");

    Matrix m = kronecker(w, a);
    const std::size_t dim = n * sd;
    Matrix kdm(dim, dim);
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix kd = k_blocks[i] * d_blocks[i];
        for (std::size_t r = 0; r < sd; ++r) {
            double* out = &kdm(i * sd + r, 0);
            for (std::size_t c = 0; c < sd; ++c) {
                const double v = kd(r, c);
                if (v != 0.0) kernels::axpy(v, &m(i * sd + c, 0), out, dim);
            }
        }
    }
    m -= kdm;
    return m;
}

double isolation_ratio(const std::vector<Matrix>& k_blocks,
                       const std::vector<Matrix>& c_rows,
                       const std::vector<std::vector<int>>& in_neighbors) {
    const std::size_t n = k_blocks.size();
    if (c_rows.size() != n || in_neighbors.size() != n)
        throw std::invalid_argument("isolation_ratio: size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (int j : in_neighbors[i]) {
            const auto ju = static_cast<std::size_t>(j);
            if (ju == i) continue;
            const Matrix& cj = c_rows[ju];
            for (std::size_t bj = 0; bj < cj.rows(); ++bj) {
                Vec cjr(cj.cols());
                for (std::size_t q = 0; q < cj.cols(); ++q) cjr[q] = cj(bj, q);
                const Vec kjc = k_blocks[ju] * cjr;
                const double denom = dot(cjr, kjc) - 1.0;
                if (std::abs(denom) < 1e-12)
                    throw std::runtime_error(
                        "isolation_ratio: degenerate gain, C_j K_j C_j^T == 1");
                const Vec kic = k_blocks[i] * cjr;
                const Matrix& ci = c_rows[i];
                for (std::size_t bi = 0; bi < ci.rows(); ++bi) {
                    double num = 0.0;
                    for (std::size_t q = 0; q < ci.cols(); ++q)
                        num += ci(bi, q) * kic[q];
                    worst = std::max(worst, std::abs(num) / std::abs(denom));
                }
            }
        }
    }
    return worst;
}

namespace {

std::vector<Matrix> diagonal_family(const std::vector<Matrix>& d_blocks,
                                    std::size_t coords, double gp, double gv) {
    std::vector<Matrix> ks;
    ks.reserve(d_blocks.size());
    for (const auto& d : d_blocks) {
        Matrix k(d.rows(), d.cols());
        for (std::size_t q = 0; q < d.rows(); ++q) {
            if (d(q, q) == 0.0) continue;
            k(q, q) = (q % coords == 0) ? gp : gv;
        }
        ks.push_back(std::move(k));
    }
    return ks;
}

struct Candidate {
    double gp = 0.0, gv = 0.0;
    double rho = 2.0, ratio = 0.0;
    bool ok = false;
};

bool better(const Candidate& a, const Candidate& b) {
    if (!b.ok) return a.ok;
    if (!a.ok) return false;
    if (a.rho != b.rho) return a.rho < b.rho;
    if (a.gp != b.gp) return a.gp < b.gp;
    return a.gv < b.gv;
}

}  // namespace

GainDesign synthesize_gain(const Matrix& w, const Matrix& a,
                           const std::vector<Matrix>& c_rows,
                           const std::vector<std::vector<int>>& in_neighbors,
                           double epsilon, const GainSearchGrid& grid) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("synthesize_gain: epsilon must be in (0,1)");
    if (grid.position_gains.empty() || grid.velocity_gains.empty())
        throw std::invalid_argument("synthesize_gain: empty search grid");

    const auto so = build_shared_observation(c_rows, in_neighbors);
    const auto obs = check_distributed_observability(w, a, so.d_blocks);
    if (!obs.observable)
        throw std::runtime_error(
            "synthesize_gain: (W (x) A, D_C) is not observable (rank " +
            std::to_string(obs.rank) + " of " + std::to_string(obs.dim) + ")");

    // NCA blocks couple position to acceleration through a(0,2); NCV is 2x2.
    const std::size_t coords = (a.rows() >= 3 && a(0, 2) != 0.0) ? 3 : 2;

    auto evaluate = [&](double gp, double gv) {
        Candidate cand;
        cand.gp = gp;
        cand.gv = gv;
        const auto ks = diagonal_family(so.d_blocks, coords, gp, gv);
        cand.ratio = isolation_ratio(ks, c_rows, in_neighbors);
        if (cand.ratio > epsilon) return cand;
        cand.rho = spectral_radius(closed_loop(w, a, ks, so.d_blocks));
        cand.ok = cand.rho < 1.0;
        return cand;
    };

    Candidate best;
    for (double gp : grid.position_gains)
        for (double gv : grid.velocity_gains) {
            const Candidate c = evaluate(gp, gv);
            if (better(c, best)) best = c;
        }
    if (!best.ok)
        throw std::runtime_error(
            "synthesize_gain: no stabilizing gain in the search family");

    if (grid.refine) {
        // Golden-section refinement along each axis that has an interval.
        const double phi = 0.6180339887498949;
        auto refine_axis = [&](bool velocity_axis, double lo, double hi) {
            if (!(hi > lo)) return;
            auto eval_at = [&](double t) {
                return velocity_axis ? evaluate(best.gp, t) : evaluate(t, best.gv);
            };
            double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
            Candidate c1 = eval_at(x1), c2 = eval_at(x2);
            for (int it = 0; it < 40 && hi - lo > 1e-6; ++it) {
                if ((c1.ok ? c1.rho : 2.0) <= (c2.ok ? c2.rho : 2.0)) {
                    hi = x2;
                    x2 = x1;
                    c2 = c1;
                    x1 = hi - phi * (hi - lo);
                    c1 = eval_at(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    c1 = c2;
                    x2 = lo + phi * (hi - lo);
                    c2 = eval_at(x2);
                }
            }
            for (const Candidate& c : {c1, c2})
                if (better(c, best)) best = c;
        };
        const auto [vlo, vhi] = std::minmax_element(grid.velocity_gains.begin(),
                                                    grid.velocity_gains.end());
        refine_axis(true, *vlo, *vhi);
        const auto [plo, phi2] = std::minmax_element(grid.position_gains.begin(),
                                                     grid.position_gains.end());
        refine_axis(false, *plo, *phi2);
    }

    GainDesign design;
    design.k_blocks = diagonal_family(so.d_blocks, coords, best.gp, best.gv);
    design.epsilon = epsilon;
    design.rho = best.rho;
    design.ratio = best.ratio;
    design.position_gain = best.gp;
    design.velocity_gain = best.gv;
    design.beta = two_norm(closed_loop(w, a, design.k_blocks, so.d_blocks));
    return design;
}

BoundChain bound_chain(const GainDesign& design, const Matrix& g,
                       const std::vector<double>& noise_var_per_cav,
                       const std::vector<Matrix>& c_rows,
                       const std::vector<std::vector<int>>& in_neighbors,
                       double n_cavs, double measurement_gain_c) {
    if (design.beta >= 1.0)
        throw std::runtime_error(
            "bound_chain: ||A_hat||_2 >= 1, steady-state bound is unbounded");
    const std::size_t n = design.k_blocks.size();
    if (c_rows.size() != n || noise_var_per_cav.size() != n)
        throw std::invalid_argument("bound_chain: size mismatch");

    const auto so = build_shared_observation(c_rows, in_neighbors);
    BoundChain bc;
    bc.c = measurement_gain_c;

    // I - K D_C and K are block-diagonal; their norms are block maxima.
    double a1 = 0.0, a2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t sd = design.k_blocks[i].rows();
        const Matrix ikd =
            Matrix::identity(sd) - design.k_blocks[i] * so.d_blocks[i];
        a1 = std::max(a1, two_norm(ikd));
        a2 = std::max(a2, two_norm(design.k_blocks[i]));
    }
    bc.alpha1 = a1 * a1;
    bc.alpha2 = a2 * a2;
    bc.g_norm = two_norm(g);

    double rn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t sd = so.d_blocks[i].rows();
        Matrix blk(sd, sd);
        for (int j : in_neighbors[i]) {
            const auto ju = static_cast<std::size_t>(j);
            if (c_rows[ju].rows() == 0) continue;
            blk += (c_rows[ju].transpose() * c_rows[ju]) * noise_var_per_cav[ju];
        }
        rn = std::max(rn, two_norm(blk));
    }
    bc.rbar_norm = rn;

    bc.theta = (bc.alpha1 * n_cavs * bc.g_norm + bc.alpha2 * bc.rbar_norm) /
               (n_cavs * (1.0 - design.beta * design.beta));
    return bc;
}

std::vector<double> empirical_error_cov(
    const std::vector<std::vector<Vec>>& errors) {
    if (errors.size() < 50)
        throw std::invalid_argument("empirical_error_cov: window shorter than 50");
    const std::size_t n = errors.front().size();
    const std::size_t dim = errors.front().front().size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double worst = 0.0;
        for (std::size_t q = 0; q < dim; ++q) {
            double mean = 0.0;
            for (const auto& ek : errors) mean += ek[i][q];
            mean /= static_cast<double>(errors.size());
            double var = 0.0;
            for (const auto& ek : errors) {
                const double d = ek[i][q] - mean;
                var += d * d;
            }
            var /= static_cast<double>(errors.size());
            worst = std::max(worst, var);
        }
        out[i] = worst;
    }
    return out;
}

}  // namespace fleetobs
