#ifndef MGPEND_UNITS_HPP
#define MGPEND_UNITS_HPP

// Physical constants, material presets and geometry types shared by every
// module. Frequencies are angular (rad/s) everywhere inside the library;
// conversion to Hz happens only at I/O boundaries.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgpend {

/// Raised when a physical argument is outside the domain of a formula.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a required model parameter is missing or inconsistent.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace constants {
inline constexpr double k_B = 1.380649e-23;      // J/K
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double c = 2.99792458e8;        // m/s
inline constexpr double g = 9.80665;             // m/s^2
inline constexpr double pi = std::numbers::pi;
inline constexpr double air_molecular_mass = 4.8e-26;  // kg
}  // namespace constants

inline constexpr double to_omega(double hz) { return 2.0 * constants::pi * hz; }
inline constexpr double to_hz(double omega) { return omega / (2.0 * constants::pi); }

namespace detail {

inline void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) {
        throw DomainError(std::string(what) + " must be finite");
    }
}

inline void require_positive(double v, const char* what)
{
    require_finite(v, what);
    if (!(v > 0.0)) {
        throw DomainError(std::string(what) + " must be > 0");
    }
}

inline void require_non_negative(double v, const char* what)
{
    require_finite(v, what);
    if (v < 0.0) {
        throw DomainError(std::string(what) + " must be >= 0");
    }
}

}  // namespace detail

/// Reference point for surface-loss limited Q, which scales linearly with radius.
struct SurfaceLossReference {
    double q = 0.0;
    double radius = 0.0;  // m
};

struct Material {
    std::string name;
    double young_modulus = 0.0;  // Pa
    double shear_modulus = 0.0;  // Pa
    double density = 0.0;        // kg/m^3
    double poisson_ratio = 0.0;
    double bulk_loss_angle = 0.0;
    std::optional<SurfaceLossReference> surface_reference;
    std::optional<double> thermal_expansion;     // 1/K
    std::optional<double> specific_heat;         // J/(kg K)
    std::optional<double> thermal_conductivity;  // W/(m K)
};

/// Handbook fused-silica values. Bulk loss angle is 1/Q_mat with the
/// yaw-mode material Q of 1.2e4; surface-loss anchor is 2e4 at r = 0.5 um.
inline Material fused_silica()
{
    Material m;
    m.name = "fused silica";
    m.young_modulus = 72e9;
    m.shear_modulus = 31e9;
    m.density = 2200.0;
    m.poisson_ratio = 0.17;
    m.bulk_loss_angle = 1.0 / 1.2e4;
    m.surface_reference = SurfaceLossReference{2e4, 0.5e-6};
    m.thermal_expansion = 5.5e-7;
    m.specific_heat = 740.0;
    m.thermal_conductivity = 1.38;
    return m;
}

inline void validate(const Material& m)
{
    detail::require_positive(m.young_modulus, "material.young_modulus");
    detail::require_positive(m.density, "material.density");
    detail::require_positive(m.bulk_loss_angle, "material.bulk_loss_angle");
    detail::require_finite(m.poisson_ratio, "material.poisson_ratio");
    if (m.poisson_ratio < 0.0 || m.poisson_ratio >= 0.5) {
        throw DomainError("material.poisson_ratio must lie in [0, 0.5)");
    }
    detail::require_non_negative(m.shear_modulus, "material.shear_modulus");
    if (m.surface_reference) {
        detail::require_positive(m.surface_reference->q, "material.surface_reference.q");
        detail::require_positive(m.surface_reference->radius, "material.surface_reference.radius");
    }
    if (m.thermal_expansion) detail::require_finite(*m.thermal_expansion, "material.thermal_expansion");
    if (m.specific_heat) detail::require_positive(*m.specific_heat, "material.specific_heat");
    if (m.thermal_conductivity) {
        detail::require_positive(*m.thermal_conductivity, "material.thermal_conductivity");
    }
}

/// Intrinsic material quality factor, 1/phi_mat.
inline double material_q(const Material& m) { return 1.0 / m.bulk_loss_angle; }

struct Fiber {
    double length = 0.0;  // m
    double radius = 0.0;  // m
    Material material;
};

inline void validate(const Fiber& f)
{
    detail::require_positive(f.length, "fiber.length");
    detail::require_positive(f.radius, "fiber.radius");
    validate(f.material);
}

/// Thin-fiber model validity; non-fatal.
inline std::vector<std::string> warnings(const Fiber& f)
{
    std::vector<std::string> out;
    if (f.length / f.radius <= 100.0) {
        out.emplace_back("fiber aspect ratio l/r <= 100; thin-fiber model is unreliable");
    }
    return out;
}

struct TestMass {
    double mass = 0.0;           // kg
    double disk_radius = 0.0;    // m
    double thickness = 0.0;      // m
    double substrate_loss_angle = 0.0;
    double coating_loss_angle = 0.0;
    double coating_thickness = 0.0;  // m
    double beam_radius = 0.0;        // m, 1/e^2 intensity radius
    std::optional<double> attachment_offset;  // m, pivot to centre of mass; defaults to disk_radius

    double pivot_offset() const { return attachment_offset.value_or(disk_radius); }
};

inline void validate(const TestMass& t)
{
    detail::require_positive(t.mass, "test_mass.mass");
    detail::require_positive(t.disk_radius, "test_mass.disk_radius");
    detail::require_positive(t.thickness, "test_mass.thickness");
    detail::require_non_negative(t.substrate_loss_angle, "test_mass.substrate_loss_angle");
    detail::require_non_negative(t.coating_loss_angle, "test_mass.coating_loss_angle");
    detail::require_non_negative(t.coating_thickness, "test_mass.coating_thickness");
    detail::require_non_negative(t.beam_radius, "test_mass.beam_radius");
    if (t.attachment_offset) detail::require_positive(*t.attachment_offset, "test_mass.attachment_offset");
}

/// Flags a disk whose geometric mass disagrees with the declared mass by >= 20%.
inline std::vector<std::string> warnings(const TestMass& t, double density)
{
    std::vector<std::string> out;
    const double geometric = density * constants::pi * t.disk_radius * t.disk_radius * t.thickness;
    if (std::abs(t.mass - geometric) / t.mass >= 0.2) {
        out.emplace_back("test mass differs from rho*pi*R^2*h by 20% or more");
    }
    return out;
}

struct Environment {
    double temperature = 300.0;  // K
    double pressure = 0.0;       // Pa
    double gas_molecular_mass = constants::air_molecular_mass;  // kg
};

inline void validate(const Environment& e)
{
    detail::require_positive(e.temperature, "environment.temperature");
    detail::require_non_negative(e.pressure, "environment.pressure");
    detail::require_positive(e.gas_molecular_mass, "environment.gas_molecular_mass");
}

/// Zero-point displacement sqrt(hbar / (2 m omega)).
inline double zero_point_motion(double mass, double omega)
{
    detail::require_positive(mass, "mass");
    detail::require_positive(omega, "omega");
    return std::sqrt(constants::hbar / (2.0 * mass * omega));
}

/// k_B T / hbar in rad/s.
inline double thermal_decoherence_rate(double temperature)
{
    detail::require_positive(temperature, "temperature");
    return constants::k_B * temperature / constants::hbar;
}

}  // namespace mgpend

#endif
