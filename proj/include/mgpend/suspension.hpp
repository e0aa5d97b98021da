#ifndef MGPEND_SUSPENSION_HPP
#define MGPEND_SUSPENSION_HPP

// Mechanical model of a single-fiber monolithic pendulum: mode frequencies,
// gravitational dissipation dilution, structural damping and the loss
// channels that limit the pendulum Q.

#include "mgpend/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mgpend {

struct PendulumModel {
    Fiber fiber;
    TestMass test_mass;
    Environment env;
    std::optional<double> measured_pendulum_q;
};

inline void validate(const PendulumModel& p)
{
    validate(p.fiber);
    validate(p.test_mass);
    validate(p.env);
    if (p.measured_pendulum_q) detail::require_positive(*p.measured_pendulum_q, "measured_pendulum_q");
}

enum class ModeKind { Pendulum, Violin, Pitch, Yaw };

inline const char* to_string(ModeKind k)
{
    switch (k) {
    case ModeKind::Pendulum: return "pendulum";
    case ModeKind::Violin: return "violin";
    case ModeKind::Pitch: return "pitch";
    case ModeKind::Yaw: return "yaw";
    }
    return "unknown";
}

/// A mechanical resonance as seen from the displacement of the beam spot.
struct Mode {
    ModeKind kind = ModeKind::Pendulum;
    int order = 0;  // violin harmonic number, 0 otherwise
    double omega = 0.0;           // rad/s
    double quality_factor = 0.0;
    double effective_mass = 0.0;  // kg

    double loss_angle() const { return 1.0 / quality_factor; }
};

inline void validate(const Mode& m)
{
    detail::require_positive(m.omega, "mode.omega");
    detail::require_positive(m.quality_factor, "mode.quality_factor");
    detail::require_positive(m.effective_mass, "mode.effective_mass");
    if (m.kind == ModeKind::Violin && m.order < 1) throw DomainError("violin order must be >= 1");
}

struct LossBudget {
    std::vector<std::pair<std::string, double>> contributions;
    double total_phi = 0.0;

    void add(std::string channel, double phi)
    {
        detail::require_non_negative(phi, "loss angle");
        contributions.emplace_back(std::move(channel), phi);
        total_phi += phi;
    }

    double quality_factor() const { return 1.0 / total_phi; }
};

// ---------------------------------------------------------------------------
// Mode frequencies

/// Point-mass pendulum on a massless wire, sqrt(g/l).
inline double pendulum_omega(const Fiber& fiber)
{
    validate(fiber);
    return std::sqrt(constants::g / fiber.length);
}

inline double pendulum_omega(const PendulumModel& model)
{
    validate(model);
    return pendulum_omega(model.fiber);
}

/// Linear mass density of the fiber.
inline double fiber_line_density(const Fiber& fiber)
{
    return fiber.material.density * constants::pi * fiber.radius * fiber.radius;
}

/// Gravitational over elastic rigidity, (4l/r^2) sqrt(m g / (E pi)).
inline double dilution_factor(const Fiber& fiber, double mass)
{
    validate(fiber);
    detail::require_positive(mass, "mass");
    const double l = fiber.length;
    const double r = fiber.radius;
    return 4.0 * l / (r * r) * std::sqrt(mass * constants::g / (fiber.material.young_modulus * constants::pi));
}

inline double diluted_pendulum_q(const Fiber& fiber, double mass, double q_mat)
{
    detail::require_positive(q_mat, "q_mat");
    return dilution_factor(fiber, mass) * q_mat;
}

/// Structural-damping dissipation rate gamma(omega) = omega_m^2 / (Q_m omega).
inline double structural_gamma(double omega_m, double q_m, double omega)
{
    detail::require_positive(omega_m, "omega_m");
    detail::require_positive(q_m, "q_m");
    detail::require_positive(omega, "omega");
    return omega_m * omega_m / (q_m * omega);
}

/// Conventions for violin-mode loss and coupling.
struct ViolinOptions {
    double dilution_fraction = 0.5;  // Q_n = fraction * dilution * Q_mat
    std::optional<double> effective_mass_override;
};

/// Taut-string violin modes, omega_n = (n pi / l) sqrt(m g / mu).
/// Effective masses are referred to the test-mass displacement,
/// m_n = m^2 pi^2 n^2 / (2 mu l).
inline std::vector<Mode> violin_modes(const Fiber& fiber, double mass, int n_max, double q_mat,
                                      const ViolinOptions& opts = {})
{
    if (n_max < 1) throw DomainError("n_max must be >= 1");
    detail::require_positive(q_mat, "q_mat");
    const double mu = fiber_line_density(fiber);
    const double q_n = opts.dilution_fraction * dilution_factor(fiber, mass) * q_mat;
    const double wave_speed = std::sqrt(mass * constants::g / mu);
    std::vector<Mode> modes;
    modes.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) {
        Mode m;
        m.kind = ModeKind::Violin;
        m.order = n;
        m.omega = n * constants::pi / fiber.length * wave_speed;
        m.quality_factor = q_n;
        m.effective_mass = opts.effective_mass_override.value_or(
            mass * mass * constants::pi * constants::pi * n * n / (2.0 * mu * fiber.length));
        modes.push_back(m);
    }
    return modes;
}

/// Moment of inertia of the disk about a diameter through its centre, per unit mass.
inline double pitch_inertia_per_mass(const TestMass& tm)
{
    const double R = tm.disk_radius;
    const double h = tm.thickness;
    return R * R / 4.0 + h * h / 12.0;
}

/// Rigid-body pitch of the disk about the fiber attachment,
/// sqrt(g b / (I_cm/m + b^2)). `gravity` is exposed for scaling checks.
inline double pitch_frequency(const TestMass& tm, double gravity = constants::g)
{
    validate(tm);
    detail::require_positive(gravity, "gravity");
    const double b = tm.pivot_offset();
    return std::sqrt(gravity * b / (pitch_inertia_per_mass(tm) + b * b));
}

/// Torsional yaw mode, sqrt(kappa_t / I_z) with kappa_t = pi G r^4 / (2 l), I_z = m R^2 / 2.
/// No gravitational stiffening, so this mode reads the material Q directly.
inline double yaw_frequency(const Fiber& fiber, const TestMass& tm)
{
    validate(fiber);
    validate(tm);
    detail::require_positive(fiber.material.shear_modulus, "material.shear_modulus");
    const double r = fiber.radius;
    const double kappa_t = constants::pi * fiber.material.shear_modulus * r * r * r * r / (2.0 * fiber.length);
    const double i_z = tm.mass * tm.disk_radius * tm.disk_radius / 2.0;
    return std::sqrt(kappa_t / i_z);
}

/// Pendulum mode with the measured Q when present, the diluted material Q otherwise.
inline Mode pendulum_mode(const PendulumModel& model)
{
    validate(model);
    Mode m;
    m.kind = ModeKind::Pendulum;
    m.omega = pendulum_omega(model.fiber);
    m.quality_factor = model.measured_pendulum_q.value_or(
        diluted_pendulum_q(model.fiber, model.test_mass.mass, material_q(model.fiber.material)));
    m.effective_mass = model.test_mass.mass;
    return m;
}

/// Pitch mode seen at the disk centre. Effective mass is I_pivot / b^2.
/// The pitch mode bends the same fiber joint as the pendulum mode, so it is
/// given the same imaginary stiffness: m_p w_p^2 / Q_p = m w_m^2 / Q_m.
inline Mode pitch_mode(const PendulumModel& model)
{
    const Mode pend = pendulum_mode(model);
    const TestMass& tm = model.test_mass;
    const double b = tm.pivot_offset();
    Mode m;
    m.kind = ModeKind::Pitch;
    m.omega = pitch_frequency(tm);
    m.effective_mass = tm.mass * (1.0 + pitch_inertia_per_mass(tm) / (b * b));
    const double stiffness_ratio =
        (m.effective_mass * m.omega * m.omega) / (pend.effective_mass * pend.omega * pend.omega);
    m.quality_factor = pend.quality_factor * stiffness_ratio;
    return m;
}

// ---------------------------------------------------------------------------
// Loss channels

/// Surface-loss limited Q, linear in fiber radius about the material's anchor point.
inline double surface_limited_q(const Fiber& fiber)
{
    validate(fiber);
    const auto& ref = fiber.material.surface_reference;
    if (!ref) throw ConfigError("material '" + fiber.material.name + "' has no surface-loss reference");
    return ref->q * (fiber.radius / ref->radius);
}

/// Zener relaxation time of the fundamental radial thermal mode, rho C r^2 / (2.16^2 kappa).
inline double thermoelastic_time_constant(const Fiber& fiber)
{
    validate(fiber);
    const Material& mat = fiber.material;
    if (!mat.specific_heat || !mat.thermal_conductivity) {
        throw ConfigError("material '" + mat.name + "' lacks thermal properties");
    }
    constexpr double zeta = 2.16 * 2.16;
    return mat.density * *mat.specific_heat * fiber.radius * fiber.radius / (zeta * *mat.thermal_conductivity);
}

/// Peak thermoelastic loss angle E alpha^2 T / (2 rho C).
inline double thermoelastic_peak(const Fiber& fiber, const Environment& env)
{
    const Material& mat = fiber.material;
    if (!mat.thermal_expansion || !mat.specific_heat) {
        throw ConfigError("material '" + mat.name + "' lacks thermal properties");
    }
    const double alpha = *mat.thermal_expansion;
    return mat.young_modulus * alpha * alpha * env.temperature / (2.0 * mat.density * *mat.specific_heat);
}

/// Linear Zener thermoelastic loss angle of the fiber at omega.
inline double thermoelastic_loss_angle(const Fiber& fiber, const Environment& env, double omega)
{
    validate(env);
    detail::require_non_negative(omega, "omega");
    const double tau = thermoelastic_time_constant(fiber);
    const double x = omega * tau;
    return 2.0 * thermoelastic_peak(fiber, env) * x / (1.0 + x * x);
}

/// Free-molecular drag coefficient for diffuse reflection on a disk face-on.
inline constexpr double gas_drag_coefficient = 1.0 + constants::pi / 4.0;

/// Residual-gas damping rate c_d P A / (m v_th), A = 2 pi R^2.
inline double gas_damping_gamma(const TestMass& tm, const Environment& env)
{
    validate(tm);
    validate(env);
    const double v_th = std::sqrt(constants::k_B * env.temperature / env.gas_molecular_mass);
    const double area = 2.0 * constants::pi * tm.disk_radius * tm.disk_radius;
    return gas_drag_coefficient * env.pressure * area / (tm.mass * v_th);
}

/// Gas-limited Q = omega_m / gamma_gas; infinite in vacuum.
inline double gas_limited_q(const TestMass& tm, const Environment& env, double omega_m)
{
    detail::require_positive(omega_m, "omega_m");
    const double gamma = gas_damping_gamma(tm, env);
    if (gamma == 0.0) return std::numeric_limits<double>::infinity();
    return omega_m / gamma;
}

/// Pendulum-mode loss angles: diluted bulk and thermoelastic fiber loss, gas
/// drag, and whatever the measured Q leaves unexplained.
inline LossBudget pendulum_loss_budget(const PendulumModel& model)
{
    validate(model);
    const double omega_m = pendulum_omega(model.fiber);
    const double dilution = dilution_factor(model.fiber, model.test_mass.mass);
    LossBudget budget;
    budget.add("material (diluted)", model.fiber.material.bulk_loss_angle / dilution);
    const Material& mat = model.fiber.material;
    if (mat.thermal_expansion && mat.specific_heat && mat.thermal_conductivity) {
        budget.add("thermoelastic (diluted)", thermoelastic_loss_angle(model.fiber, model.env, omega_m) / dilution);
    }
    budget.add("residual gas", gas_damping_gamma(model.test_mass, model.env) / omega_m);
    if (model.measured_pendulum_q) {
        const double excess = 1.0 / *model.measured_pendulum_q - budget.total_phi;
        budget.add("unmodelled excess", std::max(0.0, excess));
    }
    return budget;
}

// ---------------------------------------------------------------------------
// Requirement checks

struct QfReport {
    double lhs = 0.0;  // Q_m omega_m, rad/s
    double rhs = 0.0;  // k_B T / hbar, rad/s
    bool pass = false;
    double margin = 0.0;  // lhs / rhs
};

/// Coherent-oscillation requirement Q_m omega_m > k_B T / hbar.
inline QfReport qf_requirement(double omega_m, double q_m, double temperature)
{
    detail::require_positive(omega_m, "omega_m");
    detail::require_positive(q_m, "q_m");
    QfReport r;
    r.lhs = q_m * omega_m;
    r.rhs = thermal_decoherence_rate(temperature);
    r.margin = r.lhs / r.rhs;
    r.pass = r.lhs > r.rhs;
    return r;
}

/// Lower edge (Hz) of the band where omega^2 / gamma(omega) > 4 k_B T / hbar
/// under structural damping: omega^3 > 4 k_B T omega_m^2 / (hbar Q_m).
inline double measurement_band_edge(double omega_m, double q_m, double temperature)
{
    detail::require_positive(omega_m, "omega_m");
    detail::require_positive(q_m, "q_m");
    const double rhs = 4.0 * thermal_decoherence_rate(temperature);
    return to_hz(std::cbrt(rhs * omega_m * omega_m / q_m));
}

/// Same edge found by scanning omega^2/gamma(omega) on a frequency grid (Hz)
/// and interpolating the first upward crossing linearly in log-log space.
/// Returns nullopt when the grid never crosses.
inline std::optional<double> measurement_band_edge_scan(double omega_m, double q_m, double temperature,
                                                        std::span<const double> grid_hz)
{
    const double target = 4.0 * thermal_decoherence_rate(temperature);
    auto excess = [&](double f) {
        const double w = to_omega(f);
        return std::log(w * w / structural_gamma(omega_m, q_m, w) / target);
    };
    for (std::size_t i = 1; i < grid_hz.size(); ++i) {
        const double e0 = excess(grid_hz[i - 1]);
        const double e1 = excess(grid_hz[i]);
        if (e0 <= 0.0 && e1 > 0.0) {
            const double t = e0 / (e0 - e1);
            return std::exp(std::log(grid_hz[i - 1]) + t * (std::log(grid_hz[i]) - std::log(grid_hz[i - 1])));
        }
    }
    return std::nullopt;
}

}  // namespace mgpend

#endif
