#ifndef MGPEND_CAVITY_HPP
#define MGPEND_CAVITY_HPP

// Fabry-Perot readout and optical-spring model. Detunings are expressed in
// units of kappa, the amplitude decay rate (half-width of the power
// Lorentzian), kappa = pi c / (L_rt F).

#include "mgpend/suspension.hpp"
#include "mgpend/units.hpp"

#include <cmath>
#include <string>

namespace mgpend {

struct Cavity {
    double round_trip_length = 0.1;  // m
    double finesse = 5000.0;
    double wavelength = 1064e-9;  // m
    double probe_power = 0.2e-3;  // W
    double trap_power = 0.1;      // W
    double trap_detuning = 6.0;   // Delta / kappa, positive = blue of resonance
    double coupling_efficiency = 1.0;
};

inline void validate(const Cavity& c)
{
    detail::require_positive(c.round_trip_length, "cavity.round_trip_length");
    detail::require_finite(c.finesse, "cavity.finesse");
    if (!(c.finesse > 1.0)) throw DomainError("cavity.finesse must be > 1");
    detail::require_positive(c.wavelength, "cavity.wavelength");
    detail::require_non_negative(c.probe_power, "cavity.probe_power");
    detail::require_non_negative(c.trap_power, "cavity.trap_power");
    detail::require_finite(c.trap_detuning, "cavity.trap_detuning");
    detail::require_positive(c.coupling_efficiency, "cavity.coupling_efficiency");
    if (c.coupling_efficiency > 1.0) throw DomainError("cavity.coupling_efficiency must be <= 1");
}

inline double laser_omega(double wavelength) { return 2.0 * constants::pi * constants::c / wavelength; }

inline double cavity_kappa(const Cavity& c)
{
    validate(c);
    return constants::pi * constants::c / (c.round_trip_length * c.finesse);
}

/// Lorentzian build-up eta (2F/pi) P_in / (1 + delta^2).
inline double circulating_power(const Cavity& c, double input_power, double detuning)
{
    validate(c);
    detail::require_non_negative(input_power, "input_power");
    detail::require_finite(detuning, "detuning");
    return c.coupling_efficiency * (2.0 * c.finesse / constants::pi) * input_power / (1.0 + detuning * detuning);
}

struct OpticalRigidity {
    double k = 0.0;  // N/m, positive is restoring
    bool has_spring = false;
    /// A restoring (blue-detuned) spring comes with optical anti-damping.
    bool anti_damped = false;
    std::string diagnostic;
};

/// Adiabatic optical spring of the trap beam:
/// k = (2/c) (omega_L / L) P_max 2 delta / (kappa (1 + delta^2)^2), L = L_rt / 2.
inline OpticalRigidity optical_rigidity(const Cavity& c)
{
    validate(c);
    OpticalRigidity out;
    const double delta = c.trap_detuning;
    if (delta == 0.0 || c.trap_power == 0.0) {
        out.diagnostic = "no spring: trap beam is on resonance or off";
        return out;
    }
    const double p_max = circulating_power(c, c.trap_power, 0.0);
    const double cavity_length = c.round_trip_length / 2.0;
    const double lorentz = 1.0 + delta * delta;
    out.k = (2.0 / constants::c) * (laser_omega(c.wavelength) / cavity_length) * p_max * (2.0 * delta)
            / (cavity_kappa(c) * lorentz * lorentz);
    out.has_spring = true;
    out.anti_damped = delta > 0.0;
    out.diagnostic = out.anti_damped ? "restoring spring, optically anti-damped (needs a second beam or feedback)"
                                     : "anti-restoring spring, optically damped";
    return out;
}

/// Pendulum mode stiffened by a lossless optical spring.
struct EffectiveOscillator {
    double omega_m = 0.0;
    double q_m = 0.0;
    double omega_opt = 0.0;
    double omega_eff = 0.0;
    double q_eff = 0.0;
    double k_opt = 0.0;  // N/m
    double k_g = 0.0;    // N/m
    double spring_ratio = 0.0;

    double qf_product_hz() const { return q_eff * to_hz(omega_eff); }
    /// d omega_eff / d omega_m at fixed optical rigidity.
    double frequency_sensitivity() const { return omega_m / omega_eff; }
};

inline EffectiveOscillator effective_oscillator(double omega_m, double q_m, double mass, double k_opt)
{
    detail::require_positive(omega_m, "omega_m");
    detail::require_positive(q_m, "q_m");
    detail::require_positive(mass, "mass");
    detail::require_non_negative(k_opt, "k_opt");
    EffectiveOscillator e;
    e.omega_m = omega_m;
    e.q_m = q_m;
    e.k_opt = k_opt;
    e.k_g = mass * omega_m * omega_m;
    e.spring_ratio = k_opt / e.k_g;
    e.omega_opt = std::sqrt(k_opt / mass);
    e.omega_eff = std::sqrt(e.omega_opt * e.omega_opt + omega_m * omega_m);
    const double r = e.omega_eff / omega_m;
    e.q_eff = q_m * r * r;
    return e;
}

/// Effective oscillator with the optical spring chosen to reach omega_eff.
inline EffectiveOscillator effective_oscillator_at(double omega_m, double q_m, double mass, double omega_eff)
{
    detail::require_positive(omega_eff, "omega_eff");
    if (omega_eff < omega_m) throw DomainError("omega_eff must be >= omega_m for a restoring spring");
    return effective_oscillator(omega_m, q_m, mass, mass * (omega_eff * omega_eff - omega_m * omega_m));
}

/// Pendulum mode trapped by the cavity's trap beam.
inline EffectiveOscillator effective_oscillator(const PendulumModel& model, const Cavity& cavity)
{
    const Mode pend = pendulum_mode(model);
    const OpticalRigidity rig = optical_rigidity(cavity);
    if (rig.k < 0.0) throw DomainError("trap detuning gives an anti-restoring optical spring");
    return effective_oscillator(pend.omega, pend.quality_factor, model.test_mass.mass, rig.k);
}

/// Shot-noise relative intensity noise sqrt(2 hbar omega_L / P), 1/sqrt(Hz).
inline double shot_noise_rin(double power, double wavelength)
{
    detail::require_positive(power, "power");
    detail::require_positive(wavelength, "wavelength");
    return std::sqrt(2.0 * constants::hbar * laser_omega(wavelength) / power);
}

/// Phase response of the reflected probe to mirror displacement, 8F/lambda (rad/m),
/// valid well inside the cavity linewidth.
inline double sensing_gain(const Cavity& c)
{
    validate(c);
    return 8.0 * c.finesse / c.wavelength;
}

namespace detail {
inline double coupled_probe_power(const Cavity& c)
{
    validate(c);
    if (!(c.probe_power > 0.0)) throw DomainError("probe power must be > 0 for a finite shot-noise level");
    return c.coupling_efficiency * c.probe_power;
}
}  // namespace detail

/// Single-sided shot-noise displacement PSD (m^2/Hz) for ideal homodyne readout.
inline double shot_noise_displacement_psd(const Cavity& c)
{
    const double p = detail::coupled_probe_power(c);
    const double gain = sensing_gain(c);
    const double phase_psd = constants::hbar * laser_omega(c.wavelength) / (2.0 * p);
    return phase_psd / (gain * gain);
}

/// Single-sided radiation-pressure force PSD (N^2/Hz) from probe amplitude fluctuations.
inline double radiation_pressure_force_psd(const Cavity& c)
{
    const double p = detail::coupled_probe_power(c);
    const double buildup = 2.0 * c.finesse / constants::pi;
    const double force_per_power = 2.0 / constants::c;
    const double rin = shot_noise_rin(p, c.wavelength);
    const double p_circ = buildup * p;
    return force_per_power * force_per_power * p_circ * p_circ * rin * rin;
}

}  // namespace mgpend

#endif
