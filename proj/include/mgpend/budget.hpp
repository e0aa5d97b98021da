#ifndef MGPEND_BUDGET_HPP
#define MGPEND_BUDGET_HPP

// Displacement noise budget of a suspended cavity mirror: suspension thermal
// noise from the fluctuation-dissipation theorem with structural damping,
// substrate and coating Brownian noise, probe quantum noise and the
// free-mass standard quantum limit.
//
// Spectra are single-sided amplitude spectral densities in m/sqrt(Hz) on a
// grid given in Hz.

#include "mgpend/cavity.hpp"
#include "mgpend/suspension.hpp"
#include "mgpend/units.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mgpend {

/// Raised when spectra that must share a grid do not.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class NoiseKind { Thermal, Quantum, Other };

inline const char* to_string(NoiseKind k)
{
    switch (k) {
    case NoiseKind::Thermal: return "thermal";
    case NoiseKind::Quantum: return "quantum";
    case NoiseKind::Other: return "other";
    }
    return "other";
}

struct NoiseSpectrum {
    std::vector<double> frequencies;  // Hz, strictly increasing
    std::vector<double> asd;          // m/sqrt(Hz)
    std::string label;
    NoiseKind kind = NoiseKind::Other;

    std::size_t size() const { return frequencies.size(); }
};

inline void validate_grid(std::span<const double> grid_hz)
{
    if (grid_hz.empty()) throw DomainError("frequency grid is empty");
    for (std::size_t i = 0; i < grid_hz.size(); ++i) {
        detail::require_finite(grid_hz[i], "grid frequency");
        if (!(grid_hz[i] > 0.0)) throw DomainError("grid frequency must be > 0 Hz");
        if (i > 0 && !(grid_hz[i] > grid_hz[i - 1])) throw DomainError("grid must be strictly increasing");
    }
}

inline void validate(const NoiseSpectrum& s)
{
    if (s.frequencies.size() != s.asd.size()) throw ShapeError("spectrum '" + s.label + "': length mismatch");
    validate_grid(s.frequencies);
    for (double v : s.asd) {
        if (!std::isfinite(v) || !(v > 0.0)) throw DomainError("spectrum '" + s.label + "': asd must be finite and > 0");
    }
}

struct GridSpec {
    double f_min = 10.0;   // Hz
    double f_max = 1e4;    // Hz
    std::size_t points = 2000;
};

/// Logarithmically spaced grid including both end points.
inline std::vector<double> log_grid(const GridSpec& spec)
{
    detail::require_positive(spec.f_min, "grid.f_min");
    detail::require_positive(spec.f_max, "grid.f_max");
    if (!(spec.f_max > spec.f_min)) throw DomainError("grid.f_max must exceed grid.f_min");
    if (spec.points < 2) throw DomainError("grid.points must be >= 2");
    std::vector<double> grid(spec.points);
    const double a = std::log(spec.f_min);
    const double b = std::log(spec.f_max);
    const double n = static_cast<double>(spec.points - 1);
    for (std::size_t i = 0; i < spec.points; ++i) {
        grid[i] = std::exp(a + (b - a) * static_cast<double>(i) / n);
    }
    grid.front() = spec.f_min;
    grid.back() = spec.f_max;
    return grid;
}

// ---------------------------------------------------------------------------
// Thermal noise

/// Displacement PSD of one structurally damped mode at omega:
/// (4 k_B T / omega) m_n w_n^2 phi_n / (m_n^2 ((w_n^2 - w^2)^2 + w_n^4 phi_n^2)).
inline double mode_thermal_psd(const Mode& mode, double temperature, double omega)
{
    const double wn2 = mode.omega * mode.omega;
    const double phi = mode.loss_angle();
    const double detune = wn2 - omega * omega;
    const double m = mode.effective_mass;
    return 4.0 * constants::k_B * temperature / omega * m * wn2 * phi / (m * m * (detune * detune + wn2 * wn2 * phi * phi));
}

inline NoiseSpectrum suspension_thermal_asd(std::span<const Mode> modes, double temperature,
                                            std::span<const double> grid_hz,
                                            std::string label = "suspension thermal")
{
    validate_grid(grid_hz);
    detail::require_positive(temperature, "temperature");
    if (modes.empty()) throw DomainError("suspension thermal noise needs at least one mode");
    for (const Mode& m : modes) validate(m);
    NoiseSpectrum s{{grid_hz.begin(), grid_hz.end()}, std::vector<double>(grid_hz.size()), std::move(label),
                    NoiseKind::Thermal};
    for (std::size_t i = 0; i < grid_hz.size(); ++i) {
        const double w = to_omega(grid_hz[i]);
        double psd = 0.0;
        for (const Mode& m : modes) psd += mode_thermal_psd(m, temperature, w);
        s.asd[i] = std::sqrt(psd);
    }
    return s;
}

/// Mirror elastic constants needed for Brownian noise.
struct MirrorSubstrate {
    double young_modulus = 0.0;
    double poisson_ratio = 0.0;
};

/// Half-infinite mirror substrate Brownian noise with a thin-coating correction:
/// S = (4 k_B T / w) (1 - s^2) / (sqrt(pi) E w0) [phi_sub + (2/sqrt(pi)) ((1-2s)/(1-s)) phi_c d / w0].
inline NoiseSpectrum mirror_thermal_asd(const TestMass& tm, const MirrorSubstrate& sub, double temperature,
                                        std::span<const double> grid_hz, std::string label = "mirror thermal")
{
    validate(tm);
    validate_grid(grid_hz);
    detail::require_positive(temperature, "temperature");
    detail::require_positive(sub.young_modulus, "substrate young_modulus");
    if (!(tm.beam_radius > 0.0)) throw DomainError("beam radius must be > 0");
    const double s = sub.poisson_ratio;
    const double w0 = tm.beam_radius;
    const double sqrt_pi = std::sqrt(constants::pi);
    const double loss = tm.substrate_loss_angle
                        + (2.0 / sqrt_pi) * ((1.0 - 2.0 * s) / (1.0 - s)) * tm.coating_loss_angle * tm.coating_thickness / w0;
    if (!(loss > 0.0)) throw DomainError("mirror needs a non-zero substrate or coating loss");
    const double geometric = (1.0 - s * s) / (sqrt_pi * sub.young_modulus * w0);
    NoiseSpectrum out{{grid_hz.begin(), grid_hz.end()}, std::vector<double>(grid_hz.size()), std::move(label),
                      NoiseKind::Thermal};
    for (std::size_t i = 0; i < grid_hz.size(); ++i) {
        const double w = to_omega(grid_hz[i]);
        out.asd[i] = std::sqrt(4.0 * constants::k_B * temperature / w * geometric * loss);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quantum noise

/// Free-mass standard quantum limit sqrt(2 hbar / m) / omega.
inline NoiseSpectrum sql_asd(double mass, std::span<const double> grid_hz)
{
    detail::require_positive(mass, "mass");
    validate_grid(grid_hz);
    NoiseSpectrum out{{grid_hz.begin(), grid_hz.end()}, std::vector<double>(grid_hz.size()), "SQL", NoiseKind::Other};
    const double k = std::sqrt(2.0 * constants::hbar / mass);
    for (std::size_t i = 0; i < grid_hz.size(); ++i) out.asd[i] = k / to_omega(grid_hz[i]);
    return out;
}

/// Probe shot noise plus radiation-pressure back-action on a free mass.
inline NoiseSpectrum quantum_noise_asd(const Cavity& cavity, double mass, std::span<const double> grid_hz,
                                       std::string label = "quantum")
{
    detail::require_positive(mass, "mass");
    validate_grid(grid_hz);
    const double s_shot = shot_noise_displacement_psd(cavity);
    const double s_force = radiation_pressure_force_psd(cavity);
    NoiseSpectrum out{{grid_hz.begin(), grid_hz.end()}, std::vector<double>(grid_hz.size()), std::move(label),
                      NoiseKind::Quantum};
    for (std::size_t i = 0; i < grid_hz.size(); ++i) {
        const double w = to_omega(grid_hz[i]);
        const double w2 = w * w;
        out.asd[i] = std::sqrt(s_shot + s_force / (mass * mass * w2 * w2));
    }
    return out;
}

/// Frequency (Hz) where shot noise equals back-action, i.e. where the quantum noise touches the SQL.
inline double quantum_crossover_frequency(const Cavity& cavity, double mass)
{
    detail::require_positive(mass, "mass");
    return to_hz(std::pow(radiation_pressure_force_psd(cavity) / (mass * mass * shot_noise_displacement_psd(cavity)), 0.25));
}

// ---------------------------------------------------------------------------
// Aggregation

/// Root-sum-square of spectra sharing one grid.
inline NoiseSpectrum quadrature_sum(std::span<const NoiseSpectrum> parts, std::string label, NoiseKind kind)
{
    if (parts.empty()) throw DomainError("quadrature sum of no spectra");
    const auto& grid = parts.front().frequencies;
    for (const auto& p : parts) {
        validate(p);
        if (p.frequencies != grid) throw ShapeError("spectrum '" + p.label + "' is on a different grid");
    }
    NoiseSpectrum out{grid, std::vector<double>(grid.size()), std::move(label), kind};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double psd = 0.0;
        for (const auto& p : parts) psd += p.asd[i] * p.asd[i];
        out.asd[i] = std::sqrt(psd);
    }
    return out;
}

struct Budget {
    std::vector<NoiseSpectrum> components;
    std::optional<NoiseSpectrum> total;  // absent when there are no components
    NoiseSpectrum sql;

    const std::vector<double>& grid() const { return sql.frequencies; }
};

inline Budget total_budget(std::vector<NoiseSpectrum> components, double mass, std::span<const double> grid_hz)
{
    Budget b;
    b.sql = sql_asd(mass, grid_hz);
    for (const auto& c : components) {
        validate(c);
        if (c.frequencies != b.sql.frequencies) throw ShapeError("component '" + c.label + "' is not on the budget grid");
    }
    if (!components.empty()) b.total = quadrature_sum(components, "total", NoiseKind::Other);
    b.components = std::move(components);
    return b;
}

enum class BandSelection { ThermalOnly, Total };

struct Interval {
    double lo = 0.0;  // Hz
    double hi = 0.0;  // Hz
};

/// Maximal grid intervals where `spectrum` < `reference`; edges interpolated
/// linearly in log-log space.
inline std::vector<Interval> below_intervals(const NoiseSpectrum& spectrum, const NoiseSpectrum& reference)
{
    if (spectrum.frequencies != reference.frequencies) throw ShapeError("band search needs a shared grid");
    const auto& f = spectrum.frequencies;
    std::vector<Interval> out;
    const std::size_t n = f.size();
    std::vector<double> excess(n);
    for (std::size_t i = 0; i < n; ++i) excess[i] = std::log(spectrum.asd[i] / reference.asd[i]);
    auto crossing = [&](std::size_t i) {
        const double t = excess[i - 1] / (excess[i - 1] - excess[i]);
        return std::exp(std::log(f[i - 1]) + t * (std::log(f[i]) - std::log(f[i - 1])));
    };
    std::optional<double> open;
    for (std::size_t i = 0; i < n; ++i) {
        const bool below = excess[i] < 0.0;
        if (below && !open) open = (i == 0) ? f[0] : crossing(i);
        if (!below && open) {
            out.push_back({*open, crossing(i)});
            open.reset();
        }
    }
    if (open) out.push_back({*open, f.back()});
    return out;
}

/// Thermal-only total: root-sum-square of the thermal components.
inline std::optional<NoiseSpectrum> thermal_total(const Budget& b)
{
    std::vector<NoiseSpectrum> thermal;
    for (const auto& c : b.components) {
        if (c.kind == NoiseKind::Thermal) thermal.push_back(c);
    }
    if (thermal.empty()) return std::nullopt;
    return quadrature_sum(thermal, "thermal total", NoiseKind::Thermal);
}

inline std::vector<Interval> sub_sql_band(const Budget& b, BandSelection which = BandSelection::ThermalOnly)
{
    const std::optional<NoiseSpectrum> sel = which == BandSelection::ThermalOnly ? thermal_total(b) : b.total;
    if (!sel) return {};
    return below_intervals(*sel, b.sql);
}

// ---------------------------------------------------------------------------
// Full budget for a suspended mirror

struct BudgetOptions {
    int violin_modes = 2;
    bool include_suspension = true;
    bool include_pitch = true;
    bool include_mirror = true;
    bool include_quantum = true;
    ViolinOptions violin;
};

/// The modes entering suspension thermal noise: pendulum, pitch and the first violin modes.
inline std::vector<Mode> suspension_modes(const PendulumModel& model, const BudgetOptions& opts = {})
{
    std::vector<Mode> modes{pendulum_mode(model)};
    if (opts.include_pitch) modes.push_back(pitch_mode(model));
    if (opts.violin_modes > 0) {
        auto v = violin_modes(model.fiber, model.test_mass.mass, opts.violin_modes,
                              material_q(model.fiber.material), opts.violin);
        modes.insert(modes.end(), v.begin(), v.end());
    }
    return modes;
}

inline Budget assemble_budget(const PendulumModel& model, const Cavity& cavity, std::span<const double> grid_hz,
                              const BudgetOptions& opts = {})
{
    validate(model);
    const double temperature = model.env.temperature;
    std::vector<NoiseSpectrum> parts;
    if (opts.include_suspension) {
        const auto modes = suspension_modes(model, opts);
        parts.push_back(suspension_thermal_asd(modes, temperature, grid_hz));
    }
    if (opts.include_mirror) {
        const MirrorSubstrate sub{model.fiber.material.young_modulus, model.fiber.material.poisson_ratio};
        parts.push_back(mirror_thermal_asd(model.test_mass, sub, temperature, grid_hz));
    }
    if (opts.include_quantum) parts.push_back(quantum_noise_asd(cavity, model.test_mass.mass, grid_hz));
    return total_budget(std::move(parts), model.test_mass.mass, grid_hz);
}

}  // namespace mgpend

#endif
