#include "test_support.hpp"

#include <limits>

using namespace mgpend;
using namespace mgpend::test;

TEST(Constants, CodataValues)
{
    EXPECT_EQ(constants::k_B, 1.380649e-23);
    EXPECT_EQ(constants::hbar, 1.054571817e-34);
    EXPECT_EQ(constants::c, 2.99792458e8);
    EXPECT_EQ(constants::g, 9.80665);
}

TEST(Constants, AngularConversionRoundTrip)
{
    EXPECT_DOUBLE_EQ(to_hz(to_omega(2.2)), 2.2);
    EXPECT_DOUBLE_EQ(to_omega(1.0), 2.0 * std::numbers::pi);
}

TEST(Material, FusedSilicaPreset)
{
    const Material m = fused_silica();
    EXPECT_EQ(m.young_modulus, 72e9);
    EXPECT_EQ(m.shear_modulus, 31e9);
    EXPECT_EQ(m.density, 2200.0);
    EXPECT_EQ(m.poisson_ratio, 0.17);
    EXPECT_DOUBLE_EQ(material_q(m), 1.2e4);
    EXPECT_EQ(*m.thermal_expansion, 5.5e-7);
    EXPECT_EQ(*m.specific_heat, 740.0);
    EXPECT_EQ(*m.thermal_conductivity, 1.38);
    EXPECT_NO_THROW(validate(m));
}

TEST(Material, RejectsUnphysicalValues)
{
    auto bad = [](auto mutate) {
        Material m = fused_silica();
        mutate(m);
        return m;
    };
    EXPECT_THROW(validate(bad([](Material& m) { m.young_modulus = 0.0; })), DomainError);
    EXPECT_THROW(validate(bad([](Material& m) { m.density = -1.0; })), DomainError);
    EXPECT_THROW(validate(bad([](Material& m) { m.poisson_ratio = 0.5; })), DomainError);
    EXPECT_THROW(validate(bad([](Material& m) { m.poisson_ratio = -0.01; })), DomainError);
    EXPECT_THROW(validate(bad([](Material& m) { m.bulk_loss_angle = 0.0; })), DomainError);
    EXPECT_THROW(validate(bad([](Material& m) { m.young_modulus = std::numeric_limits<double>::quiet_NaN(); })),
                 DomainError);
    EXPECT_THROW(validate(bad([](Material& m) { m.density = std::numeric_limits<double>::infinity(); })),
                 DomainError);
    EXPECT_NO_THROW(validate(bad([](Material& m) { m.poisson_ratio = 0.0; })));
}

TEST(Fiber, RejectsNonPositiveGeometry)
{
    EXPECT_THROW(validate(Fiber{0.0, 0.5e-6, fused_silica()}), DomainError);
    EXPECT_THROW(validate(Fiber{0.05, -1e-6, fused_silica()}), DomainError);
    EXPECT_NO_THROW(validate(Fiber{0.05, 0.5e-6, fused_silica()}));
}

TEST(Fiber, StubbyFiberWarns)
{
    EXPECT_TRUE(warnings(Fiber{0.05, 0.5e-6, fused_silica()}).empty());
    EXPECT_EQ(warnings(Fiber{5e-5, 1e-6, fused_silica()}).size(), 1u);
}

TEST(TestMass, ReferenceDiskHasNoMassWarning)
{
    const PendulumModel p = reference_model();
    EXPECT_TRUE(warnings(p.test_mass, p.fiber.material.density).empty());
    TestMass heavy = p.test_mass;
    heavy.mass = 20e-6;
    EXPECT_EQ(warnings(heavy, p.fiber.material.density).size(), 1u);
}

TEST(TestMass, RejectsBadFields)
{
    TestMass t = reference_model().test_mass;
    t.mass = 0.0;
    EXPECT_THROW(validate(t), DomainError);
    t = reference_model().test_mass;
    t.coating_loss_angle = -1e-5;
    EXPECT_THROW(validate(t), DomainError);
    t = reference_model().test_mass;
    t.attachment_offset = 0.0;
    EXPECT_THROW(validate(t), DomainError);
}

TEST(ZeroPointMotion, SevenMilligramAt280Hz)
{
    EXPECT_LT(rel(zero_point_motion(7e-6, to_omega(280.0)), oracle::zpf_7mg_280hz), 1e-12);
}

TEST(ZeroPointMotion, SquareRootScaling)
{
    const double x = zero_point_motion(7e-6, 100.0);
    EXPECT_DOUBLE_EQ(zero_point_motion(28e-6, 100.0), x / 2.0);
    EXPECT_DOUBLE_EQ(zero_point_motion(7e-6, 400.0), x / 2.0);
}

TEST(ZeroPointMotion, RoundTripIdentityRandomized)
{
    Sampler s;
    for (int i = 0; i < kRandomCases; ++i) {
        const double m = s.log_uniform(1e-9, 10.0);
        const double w = s.log_uniform(1e-2, 1e6);
        const double x = zero_point_motion(m, w);
        const double back = x * x * 2.0 * m * w;
        EXPECT_LE(std::abs(back - constants::hbar), 10.0 * std::numeric_limits<double>::epsilon() * constants::hbar)
            << "m=" << m << " w=" << w;
    }
}

TEST(ZeroPointMotion, RejectsNonPositive)
{
    EXPECT_THROW(zero_point_motion(0.0, 1.0), DomainError);
    EXPECT_THROW(zero_point_motion(1.0, -1.0), DomainError);
    EXPECT_THROW(zero_point_motion(std::numeric_limits<double>::quiet_NaN(), 1.0), DomainError);
}

TEST(ThermalDecoherence, RoomTemperature)
{
    EXPECT_LT(rel(thermal_decoherence_rate(300.0), oracle::decoherence_300k), 1e-12);
}

TEST(ThermalDecoherence, LinearAndVanishesTowardZero)
{
    EXPECT_DOUBLE_EQ(thermal_decoherence_rate(600.0), 2.0 * thermal_decoherence_rate(300.0));
    EXPECT_LT(thermal_decoherence_rate(1e-30), 1e-6);
}

TEST(ThermalDecoherence, RejectsNonPositiveTemperature)
{
    EXPECT_THROW(thermal_decoherence_rate(0.0), DomainError);
    EXPECT_THROW(thermal_decoherence_rate(-1.0), DomainError);
}

TEST(Environment, Validation)
{
    EXPECT_NO_THROW(validate(Environment{300.0, 0.0}));
    EXPECT_THROW(validate(Environment{0.0, 0.0}), DomainError);
    EXPECT_THROW(validate(Environment{300.0, -1.0}), DomainError);
}
