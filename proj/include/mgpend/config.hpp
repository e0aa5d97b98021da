#ifndef MGPEND_CONFIG_HPP
#define MGPEND_CONFIG_HPP

// Experiment configuration as a JSON document. Every key is optional and
// defaults to the reference preset (7 mg silica disk on a 5 cm,
// 1 um diameter silica fiber, finesse-5000 cavity, 300 K, 1e-5 Pa).
// Unknown keys are rejected with their JSON-pointer location.
//
//   material:    name, young_modulus [Pa], shear_modulus [Pa], density [kg/m^3],
//                poisson_ratio, q_mat (= 1/bulk loss angle), surface_q,
//                surface_reference_radius [m], thermal_expansion [1/K],
//                specific_heat [J/(kg K)], thermal_conductivity [W/(m K)]
//   fiber:       length [m], radius [m]
//   test_mass:   mass [kg], disk_radius [m], thickness [m], substrate_loss_angle,
//                coating_loss_angle, coating_thickness [m], beam_radius [m]
//                (1/e^2 intensity radius), attachment_offset [m] (null = disk_radius)
//   environment: temperature [K], pressure [Pa], gas_molecular_mass [kg]
//   suspension:  measured_q (null = diluted material Q), violin_modes,
//                violin_dilution_fraction, include_pitch
//   cavity:      round_trip_length [m], finesse, wavelength [m], probe_power [W],
//                trap_power [W], trap_detuning [kappa], coupling_efficiency,
//                effective_frequency_hz (null = set by the trap beam)
//   budget:      suspension, mirror, quantum (booleans selecting components)
//   grid:        f_min [Hz], f_max [Hz], points
//   ringdown:    f0 [Hz], bandwidth [Hz], bin_seconds [s]

#include "mgpend/budget.hpp"
#include "mgpend/cavity.hpp"
#include "mgpend/suspension.hpp"
#include "mgpend/units.hpp"

#include "json.hpp"

#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>

namespace mgpend {

using json = nlohmann::json;

struct RingdownDefaults {
    double f0 = 2.2;
    double bandwidth = 0.5;
    double bin_seconds = 30.0;
};

struct ExperimentConfig {
    PendulumModel pendulum;
    Cavity cavity;
    std::optional<double> effective_frequency_hz;
    BudgetOptions budget;
    GridSpec grid;
    RingdownDefaults ringdown;
};

/// Reference parameter set: 7 mg disk, 5 cm fiber, finesse-5000 cavity.
inline ExperimentConfig reference_preset()
{
    ExperimentConfig c;
    c.pendulum.fiber = Fiber{0.05, 0.5e-6, fused_silica()};
    TestMass& tm = c.pendulum.test_mass;
    tm.mass = 7e-6;
    tm.disk_radius = 1.5e-3;
    tm.thickness = 0.5e-3;
    tm.substrate_loss_angle = 1e-6;
    tm.coating_loss_angle = 3e-5;
    tm.coating_thickness = 4.5e-6;
    tm.beam_radius = 184e-6;
    c.pendulum.env = Environment{300.0, 1e-5, constants::air_molecular_mass};
    c.pendulum.measured_pendulum_q = 2.0e6;
    c.cavity = Cavity{};
    c.effective_frequency_hz = 280.0;
    return c;
}

namespace detail {

inline json opt_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Walks one JSON object, tracking its location for error messages.
class SectionReader {
public:
    SectionReader(const json& root, std::string path) : path_(std::move(path))
    {
        const json* node = &root;
        if (!node->is_object()) throw ConfigError(location() + ": expected an object");
        node_ = node;
    }

    void allow(std::initializer_list<const char*> keys) const
    {
        for (const auto& [key, value] : node_->items()) {
            bool known = false;
            for (const char* k : keys) known = known || key == k;
            if (!known) throw ConfigError(path_ + "/" + key + ": unknown key");
        }
    }

    void number(const char* key, double& out) const
    {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(path_ + "/" + key + ": expected a number");
            out = v->get<double>();
        }
    }

    void optional_number(const char* key, std::optional<double>& out) const
    {
        if (const json* v = find(key)) {
            if (v->is_null()) {
                out.reset();
            } else if (v->is_number()) {
                out = v->get<double>();
            } else {
                throw ConfigError(path_ + "/" + key + ": expected a number or null");
            }
        }
    }

    void count(const char* key, std::size_t& out) const
    {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || v->get<long long>() < 0) {
                throw ConfigError(path_ + "/" + key + ": expected a non-negative integer");
            }
            out = v->get<std::size_t>();
        }
    }

    void integer(const char* key, int& out) const
    {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) throw ConfigError(path_ + "/" + key + ": expected an integer");
            out = v->get<int>();
        }
    }

    void boolean(const char* key, bool& out) const
    {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(path_ + "/" + key + ": expected true or false");
            out = v->get<bool>();
        }
    }

    void text(const char* key, std::string& out) const
    {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(path_ + "/" + key + ": expected a string");
            out = v->get<std::string>();
        }
    }

private:
    const json* find(const char* key) const
    {
        auto it = node_->find(key);
        return it == node_->end() ? nullptr : &*it;
    }
    std::string location() const { return path_.empty() ? "/" : path_; }

    const json* node_ = nullptr;
    std::string path_;
};

}  // namespace detail

/// Builds a configuration from a JSON document layered over the reference preset.
inline ExperimentConfig config_from_json(const json& doc)
{
    ExperimentConfig c = reference_preset();
    detail::SectionReader root(doc, "");
    root.allow({"material", "fiber", "test_mass", "environment", "suspension", "cavity", "budget", "grid", "ringdown"});

    auto section = [&](const char* name, auto&& fn) {
        if (auto it = doc.find(name); it != doc.end()) fn(detail::SectionReader(*it, std::string("/") + name));
    };

    section("material", [&](const detail::SectionReader& r) {
        r.allow({"name", "young_modulus", "shear_modulus", "density", "poisson_ratio", "q_mat", "surface_q",
                 "surface_reference_radius", "thermal_expansion", "specific_heat", "thermal_conductivity"});
        Material& m = c.pendulum.fiber.material;
        r.text("name", m.name);
        r.number("young_modulus", m.young_modulus);
        r.number("shear_modulus", m.shear_modulus);
        r.number("density", m.density);
        r.number("poisson_ratio", m.poisson_ratio);
        double q_mat = material_q(m);
        r.number("q_mat", q_mat);
        m.bulk_loss_angle = 1.0 / q_mat;
        std::optional<double> sq = m.surface_reference ? std::optional(m.surface_reference->q) : std::nullopt;
        std::optional<double> sr = m.surface_reference ? std::optional(m.surface_reference->radius) : std::nullopt;
        r.optional_number("surface_q", sq);
        r.optional_number("surface_reference_radius", sr);
        if (sq.has_value() != sr.has_value()) {
            throw ConfigError("/material: surface_q and surface_reference_radius must be given together");
        }
        m.surface_reference = sq ? std::optional(SurfaceLossReference{*sq, *sr}) : std::nullopt;
        r.optional_number("thermal_expansion", m.thermal_expansion);
        r.optional_number("specific_heat", m.specific_heat);
        r.optional_number("thermal_conductivity", m.thermal_conductivity);
    });
    section("fiber", [&](const detail::SectionReader& r) {
        r.allow({"length", "radius"});
        r.number("length", c.pendulum.fiber.length);
        r.number("radius", c.pendulum.fiber.radius);
    });
    section("test_mass", [&](const detail::SectionReader& r) {
        r.allow({"mass", "disk_radius", "thickness", "substrate_loss_angle", "coating_loss_angle", "coating_thickness",
                 "beam_radius", "attachment_offset"});
        TestMass& t = c.pendulum.test_mass;
        r.number("mass", t.mass);
        r.number("disk_radius", t.disk_radius);
        r.number("thickness", t.thickness);
        r.number("substrate_loss_angle", t.substrate_loss_angle);
        r.number("coating_loss_angle", t.coating_loss_angle);
        r.number("coating_thickness", t.coating_thickness);
        r.number("beam_radius", t.beam_radius);
        r.optional_number("attachment_offset", t.attachment_offset);
    });
    section("environment", [&](const detail::SectionReader& r) {
        r.allow({"temperature", "pressure", "gas_molecular_mass"});
        r.number("temperature", c.pendulum.env.temperature);
        r.number("pressure", c.pendulum.env.pressure);
        r.number("gas_molecular_mass", c.pendulum.env.gas_molecular_mass);
    });
    section("suspension", [&](const detail::SectionReader& r) {
        r.allow({"measured_q", "violin_modes", "violin_dilution_fraction", "include_pitch"});
        r.optional_number("measured_q", c.pendulum.measured_pendulum_q);
        r.integer("violin_modes", c.budget.violin_modes);
        r.number("violin_dilution_fraction", c.budget.violin.dilution_fraction);
        r.boolean("include_pitch", c.budget.include_pitch);
    });
    section("cavity", [&](const detail::SectionReader& r) {
        r.allow({"round_trip_length", "finesse", "wavelength", "probe_power", "trap_power", "trap_detuning",
                 "coupling_efficiency", "effective_frequency_hz"});
        Cavity& cv = c.cavity;
        r.number("round_trip_length", cv.round_trip_length);
        r.number("finesse", cv.finesse);
        r.number("wavelength", cv.wavelength);
        r.number("probe_power", cv.probe_power);
        r.number("trap_power", cv.trap_power);
        r.number("trap_detuning", cv.trap_detuning);
        r.number("coupling_efficiency", cv.coupling_efficiency);
        r.optional_number("effective_frequency_hz", c.effective_frequency_hz);
    });
    section("budget", [&](const detail::SectionReader& r) {
        r.allow({"suspension", "mirror", "quantum"});
        r.boolean("suspension", c.budget.include_suspension);
        r.boolean("mirror", c.budget.include_mirror);
        r.boolean("quantum", c.budget.include_quantum);
    });
    section("grid", [&](const detail::SectionReader& r) {
        r.allow({"f_min", "f_max", "points"});
        r.number("f_min", c.grid.f_min);
        r.number("f_max", c.grid.f_max);
        r.count("points", c.grid.points);
    });
    section("ringdown", [&](const detail::SectionReader& r) {
        r.allow({"f0", "bandwidth", "bin_seconds"});
        r.number("f0", c.ringdown.f0);
        r.number("bandwidth", c.ringdown.bandwidth);
        r.number("bin_seconds", c.ringdown.bin_seconds);
    });

    try {
        validate(c.pendulum);
        validate(c.cavity);
        if (c.budget.violin_modes < 0) throw DomainError("suspension.violin_modes must be >= 0");
        if (c.effective_frequency_hz) detail::require_positive(*c.effective_frequency_hz, "cavity.effective_frequency_hz");
        log_grid(c.grid);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline json config_to_json(const ExperimentConfig& c)
{
    const Material& m = c.pendulum.fiber.material;
    const TestMass& t = c.pendulum.test_mass;
    const Cavity& cv = c.cavity;
    json doc;
    doc["material"] = {
        {"name", m.name},
        {"young_modulus", m.young_modulus},
        {"shear_modulus", m.shear_modulus},
        {"density", m.density},
        {"poisson_ratio", m.poisson_ratio},
        {"q_mat", material_q(m)},
        {"surface_q", m.surface_reference ? json(m.surface_reference->q) : json(nullptr)},
        {"surface_reference_radius", m.surface_reference ? json(m.surface_reference->radius) : json(nullptr)},
        {"thermal_expansion", detail::opt_to_json(m.thermal_expansion)},
        {"specific_heat", detail::opt_to_json(m.specific_heat)},
        {"thermal_conductivity", detail::opt_to_json(m.thermal_conductivity)},
    };
    doc["fiber"] = {{"length", c.pendulum.fiber.length}, {"radius", c.pendulum.fiber.radius}};
    doc["test_mass"] = {
        {"mass", t.mass},
        {"disk_radius", t.disk_radius},
        {"thickness", t.thickness},
        {"substrate_loss_angle", t.substrate_loss_angle},
        {"coating_loss_angle", t.coating_loss_angle},
        {"coating_thickness", t.coating_thickness},
        {"beam_radius", t.beam_radius},
        {"attachment_offset", detail::opt_to_json(t.attachment_offset)},
    };
    doc["environment"] = {{"temperature", c.pendulum.env.temperature},
                          {"pressure", c.pendulum.env.pressure},
                          {"gas_molecular_mass", c.pendulum.env.gas_molecular_mass}};
    doc["suspension"] = {{"measured_q", detail::opt_to_json(c.pendulum.measured_pendulum_q)},
                         {"violin_modes", c.budget.violin_modes},
                         {"violin_dilution_fraction", c.budget.violin.dilution_fraction},
                         {"include_pitch", c.budget.include_pitch}};
    doc["cavity"] = {
        {"round_trip_length", cv.round_trip_length},
        {"finesse", cv.finesse},
        {"wavelength", cv.wavelength},
        {"probe_power", cv.probe_power},
        {"trap_power", cv.trap_power},
        {"trap_detuning", cv.trap_detuning},
        {"coupling_efficiency", cv.coupling_efficiency},
        {"effective_frequency_hz", detail::opt_to_json(c.effective_frequency_hz)},
    };
    doc["budget"] = {{"suspension", c.budget.include_suspension},
                     {"mirror", c.budget.include_mirror},
                     {"quantum", c.budget.include_quantum}};
    doc["grid"] = {{"f_min", c.grid.f_min}, {"f_max", c.grid.f_max}, {"points", c.grid.points}};
    doc["ringdown"] = {{"f0", c.ringdown.f0}, {"bandwidth", c.ringdown.bandwidth}, {"bin_seconds", c.ringdown.bin_seconds}};
    return doc;
}

inline json parse_json_text(const std::string& text, const std::string& origin)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

/// Overrides one dotted path ("fiber.radius") in a config document with a
/// JSON value. The path must already exist in the full document.
inline void set_config_value(json& doc, const std::string& dotted_path, const json& value)
{
    json::json_pointer ptr("/" + [&] {
        std::string p = dotted_path;
        for (char& ch : p) {
            if (ch == '.') ch = '/';
        }
        return p;
    }());
    if (!doc.contains(ptr)) throw ConfigError(dotted_path + ": no such configuration field");
    doc[ptr] = value;
}

/// Reads `dotted_path` as a number from the full config document.
inline double get_config_number(const json& doc, const std::string& dotted_path)
{
    std::string p = dotted_path;
    for (char& ch : p) {
        if (ch == '.') ch = '/';
    }
    json::json_pointer ptr("/" + p);
    if (!doc.contains(ptr) || !doc.at(ptr).is_number()) {
        throw ConfigError(dotted_path + ": not a numeric configuration field");
    }
    return doc.at(ptr).get<double>();
}

}  // namespace mgpend

#endif
