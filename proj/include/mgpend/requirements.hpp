#ifndef MGPEND_REQUIREMENTS_HPP
#define MGPEND_REQUIREMENTS_HPP

// Quantum-control requirements evaluated on the optically trapped pendulum:
// the Qf product of the effective oscillator and the measurement-rate band
// of the bare pendulum, plus where that band meets the sub-SQL region.

#include "mgpend/budget.hpp"
#include "mgpend/cavity.hpp"
#include "mgpend/suspension.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

namespace mgpend {

struct RequirementReport {
    double temperature = 0.0;
    QfReport eq1;
    double eq2_edge_hz = 0.0;
    bool eq2_pass = false;  // the measurement-rate band reaches a region where thermal noise is below the SQL
    std::vector<Interval> sub_sql_band;
    std::vector<Interval> band_overlap;  // measurement-rate band intersected with the sub-SQL band
    EffectiveOscillator effective;

    bool pass() const { return eq1.pass && eq2_pass; }
};

inline std::vector<Interval> intersect_above(const std::vector<Interval>& bands, double f_lo)
{
    std::vector<Interval> out;
    for (const auto& b : bands) {
        const double lo = std::max(b.lo, f_lo);
        if (lo < b.hi) out.push_back({lo, b.hi});
    }
    return out;
}

/// Evaluates both requirements at `temperature`. When `pinned_effective_omega`
/// is set, the optical spring is sized to reach it; otherwise the cavity's
/// trap beam sets the spring.
inline RequirementReport effective_requirements(PendulumModel model, const Cavity& cavity, double temperature,
                                                std::span<const double> grid_hz,
                                                std::optional<double> pinned_effective_omega = std::nullopt,
                                                const BudgetOptions& opts = {})
{
    model.env.temperature = temperature;
    validate(model);
    const Mode pend = pendulum_mode(model);
    RequirementReport r;
    r.temperature = temperature;
    r.effective = pinned_effective_omega
                      ? effective_oscillator_at(pend.omega, pend.quality_factor, model.test_mass.mass,
                                                *pinned_effective_omega)
                      : effective_oscillator(model, cavity);
    r.eq1 = qf_requirement(r.effective.omega_eff, r.effective.q_eff, temperature);
    r.eq2_edge_hz = measurement_band_edge(pend.omega, pend.quality_factor, temperature);
    BudgetOptions thermal_opts = opts;
    thermal_opts.include_quantum = false;
    thermal_opts.include_suspension = true;
    const Budget budget = assemble_budget(model, cavity, grid_hz, thermal_opts);
    r.sub_sql_band = sub_sql_band(budget, BandSelection::ThermalOnly);
    r.band_overlap = intersect_above(r.sub_sql_band, r.eq2_edge_hz);
    r.eq2_pass = !r.band_overlap.empty();
    return r;
}

}  // namespace mgpend

#endif
