#include "fleetobs/fdi.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fleetobs/specfun.hpp"

namespace fleetobs {

StatelessThreshold stateless_threshold(double detection_level_m, double phi) {
    if (!(detection_level_m > 0.0))
        throw std::domain_error("stateless_threshold: m must be > 0");
    if (phi < 0.0) throw std::domain_error("stateless_threshold: Phi must be >= 0");
    StatelessThreshold t;
    t.threshold = detection_level_m * phi;
    t.kappa = erf(detection_level_m / std::sqrt(2.0));
    return t;
}

Hypothesis stateless_detect(double residual, double threshold) {
    if (residual < 0.0) throw std::domain_error("stateless_detect: r must be >= 0");
    return residual >= threshold ? Hypothesis::fault_alarm : Hypothesis::no_fault;
}

double distance_measure(std::span<const double> residual_window, double phi) {
    if (!(phi > 0.0)) throw std::domain_error("distance_measure: Phi must be > 0");
    if (residual_window.empty())
        throw std::invalid_argument("distance_measure: empty window");
    double s = 0.0;
    for (double r : residual_window) s += r * r;
    return s / phi;
}

double weighted_distance_measure(std::span<const double> residual_window,
                                 double lambda, double phi) {
    if (!(phi > 0.0))
        throw std::domain_error("weighted_distance_measure: Phi must be > 0");
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw std::domain_error("weighted_distance_measure: lambda must be in (0,1]");
    if (residual_window.empty())
        throw std::invalid_argument("weighted_distance_measure: empty window");
    // window is oldest first; newest residual carries lambda^0.
    double s = 0.0;
    double wgt = 1.0;
    for (std::size_t i = residual_window.size(); i-- > 0;) {
        s += wgt * residual_window[i] * residual_window[i];
        wgt *= lambda;
    }
    return s / phi;
}

double stateful_threshold(double far, std::size_t window_len) {
    if (!(far > 0.0 && far < 1.0))
        throw std::domain_error("stateful_threshold: far must be in (0,1)");
    if (window_len < 1)
        throw std::domain_error("stateful_threshold: window must be >= 1 step");
    return 2.0 * inv_reg_lower_gamma(1.0 - far,
                                     static_cast<double>(window_len) / 2.0);
}

double weighted_stateful_threshold(double far, std::size_t window_len,
                                   double lambda) {
    if (!(far > 0.0 && far < 1.0))
        throw std::domain_error("weighted_stateful_threshold: far must be in (0,1)");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::domain_error(
            "weighted_stateful_threshold: lambda must be in (0,1); "
            "use stateful_threshold at lambda = 1");
    const double shape =
        (1.0 - std::pow(lambda, static_cast<double>(window_len))) /
        (2.0 - 2.0 * lambda);
    return 2.0 * inv_reg_lower_gamma(1.0 - far, shape);
}

double far_of_statistic(double psi, std::size_t window_len,
                        std::optional<double> lambda) {
    if (psi < 0.0) throw std::domain_error("far_of_statistic: psi must be >= 0");
    double shape = static_cast<double>(window_len) / 2.0;
    if (lambda) {
        if (!(*lambda > 0.0 && *lambda < 1.0))
            throw std::domain_error("far_of_statistic: lambda must be in (0,1)");
        shape = (1.0 - std::pow(*lambda, static_cast<double>(window_len))) /
                (2.0 - 2.0 * *lambda);
    }
    if (psi == 0.0) return 1.0;
    return 1.0 - reg_lower_gamma(shape, psi / 2.0);
}

Hypothesis stateful_detect(double statistic, double threshold) {
    if (statistic < 0.0)
        throw std::domain_error("stateful_detect: statistic must be >= 0");
    return statistic >= threshold ? Hypothesis::fault_alarm : Hypothesis::no_fault;
}

ResidualWindow::ResidualWindow(std::size_t capacity) : buf_(capacity, 0.0) {
    if (capacity == 0)
        throw std::invalid_argument("ResidualWindow: capacity must be >= 1");
}

void ResidualWindow::push(double r) {
    buf_[head_] = r;
    head_ = (head_ + 1) % buf_.size();
    if (count_ < buf_.size()) ++count_;
}

std::span<const double> ResidualWindow::ordered() const {
    if (count_ < buf_.size())
        throw std::logic_error("ResidualWindow: window not yet full");
    ordered_.resize(buf_.size());
    for (std::size_t i = 0; i < buf_.size(); ++i)
        ordered_[i] = buf_[(head_ + i) % buf_.size()];
    return ordered_;
}

}  // namespace fleetobs
