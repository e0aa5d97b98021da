#include "test_support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>

using namespace mgpend;
using namespace mgpend::test;

namespace {

std::vector<double> default_grid() { return log_grid(GridSpec{}); }

NoiseSpectrum flat(const std::vector<double>& grid, double level, std::string label, NoiseKind kind = NoiseKind::Thermal)
{
    return NoiseSpectrum{grid, std::vector<double>(grid.size(), level), std::move(label), kind};
}

std::size_t index_near(const std::vector<double>& grid, double f)
{
    return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), f) - grid.begin());
}

}  // namespace

// --- grid -------------------------------------------------------------------

TEST(Grid, DefaultLogGrid)
{
    const auto g = default_grid();
    ASSERT_EQ(g.size(), 2000u);
    EXPECT_EQ(g.front(), 10.0);
    EXPECT_EQ(g.back(), 1e4);
    const double ratio = g[1] / g[0];
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], ratio, 1e-12);
}

TEST(Grid, RejectsBadSpecs)
{
    EXPECT_THROW(log_grid(GridSpec{0.0, 10.0, 10}), DomainError);
    EXPECT_THROW(log_grid(GridSpec{10.0, 10.0, 10}), DomainError);
    EXPECT_THROW(log_grid(GridSpec{1.0, 10.0, 1}), DomainError);
    const std::vector<double> with_zero{0.0, 1.0, 2.0};
    EXPECT_THROW(validate_grid(with_zero), DomainError);
    const std::vector<double> unsorted{1.0, 3.0, 2.0};
    EXPECT_THROW(validate_grid(unsorted), DomainError);
}

// --- suspension thermal -------------------------------------------------------

TEST(SuspensionThermal, ReferenceLevelAt400Hz)
{
    const std::vector<double> f{400.0};
    const Mode pend = pendulum_mode(reference_model());
    const auto s = suspension_thermal_asd(std::span(&pend, 1), 300.0, f);
    EXPECT_LT(rel(s.asd[0], oracle::suspension_far_400hz), 2e-3);
    const auto sql = sql_asd(7e-6, f);
    EXPECT_LT(rel(sql.asd[0], oracle::sql_400hz), 1e-12);
    EXPECT_LT(s.asd[0], sql.asd[0]);
}

TEST(SuspensionThermal, FarAboveResonanceSlope)
{
    const Mode pend = pendulum_mode(reference_model());
    std::vector<double> f;
    for (double x = 50.0 * to_hz(pend.omega); x < 1000.0; x *= 1.3) f.push_back(x);
    std::vector<double> f2(f.size());
    std::transform(f.begin(), f.end(), f2.begin(), [](double v) { return 2.0 * v; });
    const auto a = suspension_thermal_asd(std::span(&pend, 1), 300.0, f);
    const auto b = suspension_thermal_asd(std::span(&pend, 1), 300.0, f2);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LT(rel(b.asd[i] / a.asd[i], std::pow(2.0, -2.5)), 1e-3);
}

TEST(SuspensionThermal, OnResonanceValue)
{
    Mode m{ModeKind::Pendulum, 0, to_omega(5.0), 1e4, 1e-3};
    const std::vector<double> f{5.0};
    const auto s = suspension_thermal_asd(std::span(&m, 1), 300.0, f);
    const double expected = 4.0 * constants::k_B * 300.0 * m.quality_factor / (m.effective_mass * std::pow(m.omega, 3));
    EXPECT_LT(rel(s.asd[0] * s.asd[0], expected), 1e-12);
}

TEST(SuspensionThermal, EquipartitionByQuadrature)
{
    // <x^2> m w_m^2 / 2 = k_B T / 2 for a structurally damped mode
    using boost::math::quadrature::gauss_kronrod;
    for (double q : {1e2, 1e3, 1e4}) {
        const Mode m{ModeKind::Pendulum, 0, 14.0, q, 7e-6};
        auto psd_per_hz = [&](double w) { return mode_thermal_psd(m, 300.0, w) / (2.0 * std::numbers::pi); };
        const double lo = m.omega / 100.0;
        const double hi = m.omega * 100.0;
        const double w1 = m.omega * (1.0 - 20.0 / q);
        const double w2 = m.omega * (1.0 + 20.0 / q);
        double integral = 0.0;
        for (auto [a, b] : {std::pair{lo, w1}, {w1, m.omega}, {m.omega, w2}, {w2, hi}}) {
            integral += gauss_kronrod<double, 61>::integrate(psd_per_hz, a, b, 15, 1e-12);
        }
        const double energy = integral * m.effective_mass * m.omega * m.omega / 2.0;
        EXPECT_LT(rel(energy, constants::k_B * 300.0 / 2.0), 0.05) << "Q=" << q;
    }
}

TEST(SuspensionThermal, MoreModesNeverLowerRandomized)
{
    Sampler s;
    const auto grid = log_grid(GridSpec{1.0, 1e4, 200});
    for (int i = 0; i < kRandomCases / 10; ++i) {
        std::vector<Mode> modes;
        const int n = 2 + static_cast<int>(s.uniform(0.0, 4.0));
        for (int k = 0; k < n; ++k) {
            modes.push_back({ModeKind::Pendulum, 0, s.log_uniform(1.0, 1e4), s.log_uniform(10.0, 1e8),
                             s.log_uniform(1e-7, 1.0)});
        }
        const auto all = suspension_thermal_asd(modes, 300.0, grid);
        const auto subset = suspension_thermal_asd(std::span(modes).first(static_cast<std::size_t>(n - 1)), 300.0, grid);
        for (std::size_t j = 0; j < grid.size(); ++j) EXPECT_GE(all.asd[j], subset.asd[j]);
    }
}

TEST(SuspensionThermal, Errors)
{
    const auto grid = default_grid();
    EXPECT_THROW(suspension_thermal_asd({}, 300.0, grid), DomainError);
    const Mode m = pendulum_mode(reference_model());
    EXPECT_THROW(suspension_thermal_asd(std::span(&m, 1), 0.0, grid), DomainError);
    const std::vector<double> zero{0.0, 1.0};
    EXPECT_THROW(suspension_thermal_asd(std::span(&m, 1), 300.0, zero), DomainError);
}

// --- mirror thermal -------------------------------------------------------------

TEST(MirrorThermal, ReferenceLevelAt1kHz)
{
    const PendulumModel p = reference_model();
    const std::vector<double> f{1000.0};
    const auto s = mirror_thermal_asd(p.test_mass, {72e9, 0.17}, 300.0, f);
    EXPECT_LT(rel(s.asd[0], oracle::mirror_1khz), 1e-12);
}

TEST(MirrorThermal, SubstrateOnlyLaws)
{
    TestMass tm = reference_model().test_mass;
    tm.coating_loss_angle = 0.0;
    tm.coating_thickness = 0.0;
    const std::vector<double> f{100.0, 400.0};
    const auto a = mirror_thermal_asd(tm, {72e9, 0.17}, 300.0, f);
    EXPECT_LT(rel(a.asd[1], a.asd[0] / 2.0), 1e-14);
    tm.substrate_loss_angle *= 2.0;
    const auto b = mirror_thermal_asd(tm, {72e9, 0.17}, 300.0, f);
    EXPECT_LT(rel(b.asd[0], a.asd[0] * std::sqrt(2.0)), 1e-14);
}

TEST(MirrorThermal, LosslessMirrorRejected)
{
    TestMass tm = reference_model().test_mass;
    tm.substrate_loss_angle = 0.0;
    tm.coating_loss_angle = 0.0;
    EXPECT_THROW(mirror_thermal_asd(tm, {72e9, 0.17}, 300.0, default_grid()), DomainError);
    tm = reference_model().test_mass;
    tm.beam_radius = 0.0;
    EXPECT_THROW(mirror_thermal_asd(tm, {72e9, 0.17}, 300.0, default_grid()), DomainError);
}

// --- SQL and quantum noise ------------------------------------------------------

TEST(Sql, SevenMilligramAt1kHz)
{
    const std::vector<double> f{1000.0, 2000.0};
    const auto s = sql_asd(7e-6, f);
    EXPECT_LT(rel(s.asd[0], oracle::sql_1khz), 1e-12);
    EXPECT_LT(rel(s.asd[1], s.asd[0] / 2.0), 1e-14);
    EXPECT_LT(rel(sql_asd(28e-6, f).asd[0], s.asd[0] / 2.0), 1e-14);
}

TEST(QuantumNoise, NeverBelowSqlAndTouchesAtCrossover)
{
    const Cavity c;
    const double f_touch = quantum_crossover_frequency(c, 7e-6);
    EXPECT_LT(rel(f_touch, oracle::f_quantum_touch), 1e-12);
    const auto grid = default_grid();
    const auto q = quantum_noise_asd(c, 7e-6, grid);
    const auto sql = sql_asd(7e-6, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_GE(q.asd[i], sql.asd[i] * (1.0 - 1e-14));
    const std::vector<double> at{f_touch};
    EXPECT_LT(rel(quantum_noise_asd(c, 7e-6, at).asd[0], sql_asd(7e-6, at).asd[0]), 1e-12);
}

TEST(QuantumNoise, SqlBoundRandomized)
{
    Sampler s;
    for (int i = 0; i < kRandomCases; ++i) {
        Cavity c;
        c.finesse = s.log_uniform(10.0, 1e6);
        c.probe_power = s.log_uniform(1e-7, 1.0);
        const double m = s.log_uniform(1e-7, 1.0);
        const std::vector<double> f{s.log_uniform(1.0, 1e5)};
        EXPECT_GE(quantum_noise_asd(c, m, f).asd[0], sql_asd(m, f).asd[0] * (1.0 - 1e-14));
    }
}

TEST(QuantumNoise, PowerScalingOfEachTerm)
{
    Cavity c;
    Cavity doubled = c;
    doubled.probe_power *= 2.0;
    EXPECT_LT(rel(std::sqrt(shot_noise_displacement_psd(doubled)), std::sqrt(shot_noise_displacement_psd(c)) / std::sqrt(2.0)),
              1e-14);
    EXPECT_LT(rel(std::sqrt(radiation_pressure_force_psd(doubled)), std::sqrt(radiation_pressure_force_psd(c)) * std::sqrt(2.0)),
              1e-14);
}

TEST(QuantumNoise, ReferenceProbeIsSqlLimitedNear1kHz)
{
    const std::vector<double> f{1000.0};
    const double q = quantum_noise_asd(Cavity{}, 7e-6, f).asd[0];
    EXPECT_LT(q / sql_asd(7e-6, f).asd[0], 1.01);
}

// --- totals -----------------------------------------------------------------------

TEST(TotalBudget, SingleAndEqualComponents)
{
    const auto grid = default_grid();
    const auto a = flat(grid, 1e-18, "a");
    const Budget one = total_budget({a}, 7e-6, grid);
    ASSERT_TRUE(one.total.has_value());
    EXPECT_EQ(one.total->asd, a.asd);
    const Budget two = total_budget({a, flat(grid, 1e-18, "b")}, 7e-6, grid);
    for (double v : two.total->asd) EXPECT_LT(rel(v, std::sqrt(2.0) * 1e-18), 1e-15);
}

TEST(TotalBudget, EmptyGivesSqlOnly)
{
    const auto grid = default_grid();
    const Budget b = total_budget({}, 7e-6, grid);
    EXPECT_TRUE(b.components.empty());
    EXPECT_FALSE(b.total.has_value());
    EXPECT_EQ(b.sql.size(), grid.size());
    EXPECT_TRUE(sub_sql_band(b).empty());
}

TEST(TotalBudget, QuadratureIdentityAndPermutationRandomized)
{
    Sampler s;
    const auto grid = log_grid(GridSpec{10.0, 1e4, 64});
    for (int i = 0; i < kRandomCases; ++i) {
        std::vector<NoiseSpectrum> parts;
        const int n = 1 + static_cast<int>(s.uniform(0.0, 5.0));
        for (int k = 0; k < n; ++k) {
            NoiseSpectrum p{grid, std::vector<double>(grid.size()), "c" + std::to_string(k), NoiseKind::Thermal};
            for (double& v : p.asd) v = s.log_uniform(1e-21, 1e-15);
            parts.push_back(std::move(p));
        }
        const Budget b = total_budget(parts, 7e-6, grid);
        std::vector<NoiseSpectrum> reversed(parts.rbegin(), parts.rend());
        const Budget r = total_budget(reversed, 7e-6, grid);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            double sum = 0.0;
            for (const auto& p : parts) sum += p.asd[j] * p.asd[j];
            EXPECT_LT(rel(b.total->asd[j] * b.total->asd[j], sum), 1e-12);
            EXPECT_LT(rel(r.total->asd[j], b.total->asd[j]), 1e-15);
        }
    }
}

TEST(TotalBudget, MismatchedGridIsShapeError)
{
    const auto grid = default_grid();
    const auto other = log_grid(GridSpec{10.0, 1e4, 100});
    EXPECT_THROW(total_budget({flat(other, 1e-18, "x")}, 7e-6, grid), ShapeError);
    NoiseSpectrum broken = flat(grid, 1e-18, "broken");
    broken.asd.pop_back();
    EXPECT_THROW(total_budget({broken}, 7e-6, grid), ShapeError);
    NoiseSpectrum negative = flat(grid, 1e-18, "neg");
    negative.asd[3] = -1.0;
    EXPECT_THROW(total_budget({negative}, 7e-6, grid), DomainError);
}

// --- sub-SQL band ---------------------------------------------------------------------

TEST(SubSqlBand, ReferenceThermalBudget)
{
    const ExperimentConfig cfg = reference();
    BudgetOptions opts;
    opts.include_quantum = false;
    const Budget b = assemble_budget(cfg.pendulum, cfg.cavity, default_grid(), opts);
    const auto bands = sub_sql_band(b);
    ASSERT_FALSE(bands.empty());
    EXPECT_GE(bands.front().lo, 250.0);
    EXPECT_LE(bands.front().lo, 450.0);
    EXPECT_GE(bands.front().hi, 1500.0);
    EXPECT_LE(bands.front().hi, 2100.0);
    // the violin fundamental closes the first band
    EXPECT_LT(bands.front().hi, oracle::f_violin1);
}

TEST(SubSqlBand, AllAboveOrAllBelow)
{
    const auto grid = default_grid();
    const auto sql = sql_asd(7e-6, grid);
    NoiseSpectrum loud = sql;
    for (double& v : loud.asd) v *= 10.0;
    loud.kind = NoiseKind::Thermal;
    EXPECT_TRUE(sub_sql_band(total_budget({loud}, 7e-6, grid)).empty());
    NoiseSpectrum quiet = sql;
    for (double& v : quiet.asd) v *= 1e-6;
    quiet.kind = NoiseKind::Thermal;
    const auto all = sub_sql_band(total_budget({quiet}, 7e-6, grid));
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0].lo, grid.front());
    EXPECT_EQ(all[0].hi, grid.back());
}

TEST(SubSqlBand, IntervalsSortedDisjointAndInteriorStrict)
{
    Sampler s;
    const auto grid = log_grid(GridSpec{10.0, 1e4, 300});
    for (int i = 0; i < kRandomCases / 4; ++i) {
        const auto sql = sql_asd(7e-6, grid);
        NoiseSpectrum noisy = sql;
        noisy.kind = NoiseKind::Thermal;
        for (double& v : noisy.asd) v *= s.log_uniform(0.3, 3.0);
        const Budget b = total_budget({noisy}, 7e-6, grid);
        const auto bands = sub_sql_band(b);
        for (std::size_t k = 0; k < bands.size(); ++k) {
            EXPECT_LE(bands[k].lo, bands[k].hi);
            if (k > 0) {
                EXPECT_GT(bands[k].lo, bands[k - 1].hi);
            }
            for (std::size_t j = 0; j < grid.size(); ++j) {
                if (grid[j] > bands[k].lo && grid[j] < bands[k].hi) {
                    EXPECT_LT(noisy.asd[j], sql.asd[j]);
                }
            }
        }
        // grid points outside every band are not below the SQL
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const bool inside = std::any_of(bands.begin(), bands.end(),
                                            [&](const Interval& iv) { return grid[j] >= iv.lo && grid[j] <= iv.hi; });
            if (!inside) {
                EXPECT_GE(noisy.asd[j], sql.asd[j]);
            }
        }
    }
}

TEST(SubSqlBand, TotalSelectionIncludesQuantum)
{
    const ExperimentConfig cfg = reference();
    const Budget b = assemble_budget(cfg.pendulum, cfg.cavity, default_grid());
    // quantum noise never goes below the SQL, so neither does the total
    EXPECT_TRUE(sub_sql_band(b, BandSelection::Total).empty());
    EXPECT_FALSE(sub_sql_band(b, BandSelection::ThermalOnly).empty());
}

// --- assembly ---------------------------------------------------------------------------

TEST(AssembleBudget, ComponentSelection)
{
    const ExperimentConfig cfg = reference();
    const auto grid = default_grid();
    const Budget full = assemble_budget(cfg.pendulum, cfg.cavity, grid);
    ASSERT_EQ(full.components.size(), 3u);
    EXPECT_EQ(full.components[0].label, "suspension thermal");
    EXPECT_EQ(full.components[1].label, "mirror thermal");
    EXPECT_EQ(full.components[2].label, "quantum");
    BudgetOptions none;
    none.include_suspension = none.include_mirror = none.include_quantum = false;
    const Budget empty = assemble_budget(cfg.pendulum, cfg.cavity, grid, none);
    EXPECT_TRUE(empty.components.empty());
}

TEST(AssembleBudget, ModesIncludePitchAndTwoViolins)
{
    const auto modes = suspension_modes(reference_model());
    ASSERT_EQ(modes.size(), 4u);
    EXPECT_EQ(modes[0].kind, ModeKind::Pendulum);
    EXPECT_EQ(modes[1].kind, ModeKind::Pitch);
    EXPECT_EQ(modes[2].kind, ModeKind::Violin);
    EXPECT_EQ(modes[3].order, 2);
}

TEST(AssembleBudget, ViolinPeakVisible)
{
    const ExperimentConfig cfg = reference();
    const auto grid = default_grid();
    const Budget b = assemble_budget(cfg.pendulum, cfg.cavity, grid);
    const auto& s = b.components[0].asd;
    const std::size_t i = index_near(grid, oracle::f_violin1);
    EXPECT_GT(s[i] + s[i - 1], 10.0 * s[index_near(grid, 1500.0)]);
}
