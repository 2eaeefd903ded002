#pragma once

// A single-curve configuration: curve, ray directions, phase and stacked mass per node.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mesomem/curve.hpp"
#include "mesomem/model.hpp"

namespace mesomem {

class Configuration {
public:
    Configuration() = default;

    /// Validates sizes, |theta| = 1 (to 1e-8), nu.theta > 0, chi in {0,1} and M >= 0.
    Configuration(PeriodicCurve curve, std::vector<Vec2> theta, std::vector<Phase> chi,
                  std::vector<double> mass)
        : curve_(std::move(curve)), theta_(std::move(theta)), chi_(std::move(chi)), mass_(std::move(mass)) {
        const std::size_t n = curve_.size();
        if (theta_.size() != n || chi_.size() != n || mass_.size() != n)
            throw DomainError("configuration fields must have one value per curve node");
        alignment_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double len = norm(theta_[i]);
            if (std::abs(len - 1.0) > 1e-8)
                throw DomainError("theta is not a unit vector at node " + std::to_string(i));
            theta_[i] = theta_[i] / len;
            if (chi_[i] > 1) throw DomainError("chi must be 0 or 1 at node " + std::to_string(i));
            if (!(mass_[i] >= 0.0) || !std::isfinite(mass_[i]))
                throw DomainError("mass must be nonnegative at node " + std::to_string(i));
            alignment_[i] = dot(curve_.normal()[i], theta_[i]);
            if (!(alignment_[i] > 0.0)) throw TransversalityError(i, alignment_[i]);
        }
        const double h = curve_.spacing();
        theta_prime_ = periodic_derivative(std::span<const Vec2>(theta_), h);
        mass_slope_ = periodic_derivative(std::span<const double>(mass_), h);
        rotation_.resize(n);
        for (std::size_t i = 0; i < n; ++i) rotation_[i] = dot(theta_prime_[i], perp(theta_[i]));
    }

    /// theta = nu at every node.
    static Configuration normal_rays(PeriodicCurve curve, std::vector<Phase> chi, std::vector<double> mass) {
        std::vector<Vec2> theta = curve.normal();
        return Configuration(std::move(curve), std::move(theta), std::move(chi), std::move(mass));
    }

    std::size_t size() const noexcept { return curve_.size(); }
    const PeriodicCurve& curve() const noexcept { return curve_; }
    const std::vector<Vec2>& theta() const noexcept { return theta_; }
    const std::vector<Phase>& chi() const noexcept { return chi_; }
    const std::vector<double>& mass() const noexcept { return mass_; }

    /// nu.theta per node.
    const std::vector<double>& alignment() const noexcept { return alignment_; }
    /// theta'.theta^perp per node.
    const std::vector<double>& rotation() const noexcept { return rotation_; }
    const std::vector<Vec2>& theta_prime() const noexcept { return theta_prime_; }
    /// M' per node.
    const std::vector<double>& mass_slope() const noexcept { return mass_slope_; }

    RayGeometry ray(std::size_t i) const noexcept { return {alignment_[i], rotation_[i]}; }

private:
    PeriodicCurve curve_;
    std::vector<Vec2> theta_;
    std::vector<Phase> chi_;
    std::vector<double> mass_;
    std::vector<double> alignment_, rotation_, mass_slope_;
    std::vector<Vec2> theta_prime_;
};

}  // namespace mesomem
