#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fleetobs {

enum class Hypothesis { no_fault, fault_alarm };

// theta = m * Phi with companion detection probability kappa = erf(m/sqrt 2).
struct StatelessThreshold {
    double threshold = 0.0;
    double kappa = 0.0;
};

StatelessThreshold stateless_threshold(double detection_level_m, double phi);

// Alarm iff r >= threshold (boundary alarms).
Hypothesis stateless_detect(double residual, double threshold);

// psi = sum over the window of r^2 / Phi. The window must be fully
// populated and Phi > 0.
double distance_measure(std::span<const double> residual_window, double phi);

// Weighted form: sum lambda^(k-m) r_m^2 / Phi, newest residual weight 1.
// residual_window is ordered oldest first. 0 < lambda <= 1.
double weighted_distance_measure(std::span<const double> residual_window,
                                 double lambda, double phi);

// Chi-square threshold 2 * invP(1 - far, T/2).
double stateful_threshold(double far, std::size_t window_len);

// Weighted variant with effective shape (1 - lambda^T) / (2 - 2 lambda);
// lambda must be in (0,1) (use the unweighted form at lambda = 1).
double weighted_stateful_threshold(double far, std::size_t window_len,
                                   double lambda);

// Implied false-alarm rate of an observed statistic:
// 1 - P(shape, psi/2), with the unweighted or weighted shape.
double far_of_statistic(double psi, std::size_t window_len,
                        std::optional<double> lambda = std::nullopt);

Hypothesis stateful_detect(double statistic, double threshold);

// Fixed-capacity sliding residual window (oldest first when full).
class ResidualWindow {
  public:
    explicit ResidualWindow(std::size_t capacity);

    void push(double r);
    bool full() const { return count_ >= buf_.size(); }
    std::size_t capacity() const { return buf_.size(); }
    // Chronological copy, oldest first; only valid when full().
    std::span<const double> ordered() const;

  private:
    std::vector<double> buf_;
    mutable std::vector<double> ordered_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
};

}  // namespace fleetobs
