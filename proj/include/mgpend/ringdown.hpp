#ifndef MGPEND_RINGDOWN_HPP
#define MGPEND_RINGDOWN_HPP

// Ring-down Q estimation: band-pass the record around the mode, extract the
// amplitude envelope by quadrature demodulation, aggregate envelope samples
// into time bins with standard errors and fit an exponential decay.
//
// Filtering is done with zero-phase spectral masks (FFTW) on a zero-padded
// record; link against fftw3.

#include "mgpend/units.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mgpend {

/// Failure of one analysis stage; `stage()` names it for diagnostics.
class AnalysisError : public std::runtime_error {
public:
    AnalysisError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage))
    {
    }
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct RingdownTrace {
    double sample_rate = 0.0;  // Hz
    std::vector<double> samples;
    double start_time = 0.0;  // s

    double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
    double time_at(std::size_t i) const { return start_time + static_cast<double>(i) / sample_rate; }
};

inline void validate(const RingdownTrace& t)
{
    detail::require_positive(t.sample_rate, "sample_rate");
    detail::require_finite(t.start_time, "start_time");
    if (t.samples.empty()) throw DomainError("trace has no samples");
}

/// Throws unless the record holds at least ten cycles at f0.
inline void require_cycles(const RingdownTrace& t, double f0)
{
    if (t.duration() * f0 < 10.0) throw DomainError("trace must span at least 10 cycles of the mode");
}

// ---------------------------------------------------------------------------
// Synthesis

struct SynthesisParams {
    double f0 = 2.2;  // Hz
    double q = 2e3;
    double sample_rate = 20.0;  // Hz
    double duration = 600.0;    // s
    double amplitude = 1.0;
    double noise_rms = 0.0;
    std::uint64_t seed = 1;
    std::optional<double> drift_uhz;  // peak frequency wander, micro-Hz
    double phase = 0.0;               // rad
};

/// Amplitude 1/e time for a mode of quality factor q at f0: Q / (pi f0).
inline double decay_time(double f0, double q) { return q / (constants::pi * f0); }

/// x(t) = A exp(-t/tau) cos(phase(t)) + white noise. The optional drift wanders
/// the frequency sinusoidally over the record with a seed-dependent phase.
/// q = infinity gives a constant envelope.
inline RingdownTrace synthesize_ringdown(const SynthesisParams& p)
{
    detail::require_positive(p.f0, "f0");
    if (!(p.q > 0.0)) throw DomainError("q must be > 0");
    detail::require_positive(p.sample_rate, "sample_rate");
    detail::require_positive(p.duration, "duration");
    detail::require_non_negative(p.noise_rms, "noise_rms");
    detail::require_finite(p.amplitude, "amplitude");
    if (p.sample_rate < 4.0 * p.f0) throw DomainError("sample_rate must be >= 4 f0 to avoid aliasing");
    if (p.duration * p.f0 < 10.0) throw DomainError("duration must cover at least 10 cycles");

    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * constants::pi);
    const double drift_phase = uniform(rng);
    const double drift_hz = p.drift_uhz.value_or(0.0) * 1e-6;
    const double drift_omega = 2.0 * constants::pi / p.duration;
    const double inv_tau = std::isinf(p.q) ? 0.0 : 1.0 / decay_time(p.f0, p.q);

    const auto n = static_cast<std::size_t>(std::llround(p.duration * p.sample_rate));
    RingdownTrace trace{p.sample_rate, std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / p.sample_rate;
        // integral of drift_hz sin(drift_omega t' + drift_phase) dt'
        const double wander = drift_hz == 0.0 ? 0.0
                              : drift_hz / drift_omega * (std::cos(drift_phase) - std::cos(drift_omega * t + drift_phase));
        const double phase = 2.0 * constants::pi * (p.f0 * t + wander) + p.phase;
        double x = p.amplitude * std::exp(-t * inv_tau) * std::cos(phase);
        if (p.noise_rms > 0.0) x += p.noise_rms * noise(rng);
        trace.samples[i] = x;
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Spectral filtering

namespace detail {

struct FftwPlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

/// Applies a real, even frequency response gain(f) to `x` with zero padding to
/// twice the record length; the output has the input's length.
inline std::vector<double> apply_spectral_mask(std::span<const double> x, double sample_rate,
                                               const std::function<double(double)>& gain)
{
    const std::size_t n = x.size();
    const std::size_t padded = 2 * n;
    const std::size_t bins = padded / 2 + 1;
    std::unique_ptr<double[], FftwFree> time(static_cast<double*>(fftw_malloc(sizeof(double) * padded)));
    std::unique_ptr<fftw_complex[], FftwFree> freq(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
    FftwPlan forward(fftw_plan_dft_r2c_1d(static_cast<int>(padded), time.get(), freq.get(), FFTW_ESTIMATE));
    FftwPlan backward(fftw_plan_dft_c2r_1d(static_cast<int>(padded), freq.get(), time.get(), FFTW_ESTIMATE));

    std::copy(x.begin(), x.end(), time.get());
    std::fill(time.get() + n, time.get() + padded, 0.0);
    fftw_execute(forward.get());
    const double df = sample_rate / static_cast<double>(padded);
    for (std::size_t k = 0; k < bins; ++k) {
        const double g = gain(static_cast<double>(k) * df) / static_cast<double>(padded);
        freq[k][0] *= g;
        freq[k][1] *= g;
    }
    fftw_execute(backward.get());
    return {time.get(), time.get() + n};
}

/// 1 inside [lo, hi], raised-cosine roll-off to 0 over `edge` outside.
inline double raised_cosine_band(double f, double lo, double hi, double edge)
{
    if (f >= lo && f <= hi) return 1.0;
    const double d = f < lo ? lo - f : f - hi;
    if (d >= edge) return 0.0;
    return 0.5 * (1.0 + std::cos(constants::pi * d / edge));
}

}  // namespace detail

/// Width of the band-pass roll-off outside the pass band.
inline double bandpass_edge(double bandwidth) { return bandwidth / 4.0; }

/// Time for the band-pass response to a record edge to ring down, 2 / edge width.
inline double bandpass_settle_time(double bandwidth) { return 2.0 / bandpass_edge(bandwidth); }

/// Zero-phase band-pass of width `bandwidth` centred on `f_center`, with
/// raised-cosine edges of width bandwidth/4 outside the band.
inline RingdownTrace bandpass(const RingdownTrace& trace, double f_center, double bandwidth)
{
    validate(trace);
    detail::require_positive(f_center, "f_center");
    detail::require_positive(bandwidth, "bandwidth");
    if (!(bandwidth < f_center)) throw DomainError("bandwidth must be smaller than the centre frequency");
    const double edge = bandpass_edge(bandwidth);
    const double lo = f_center - bandwidth / 2.0;
    const double hi = f_center + bandwidth / 2.0;
    if (hi + edge >= trace.sample_rate / 2.0) throw DomainError("band extends beyond the Nyquist frequency");
    RingdownTrace out{trace.sample_rate, {}, trace.start_time};
    out.samples = detail::apply_spectral_mask(trace.samples, trace.sample_rate,
                                              [&](double f) { return detail::raised_cosine_band(f, lo, hi, edge); });
    return out;
}

// ---------------------------------------------------------------------------
// Envelope

struct Envelope {
    std::vector<double> times;  // s
    std::vector<double> amplitudes;
};

struct EnvelopeOptions {
    double lowpass_fraction = 0.25;  // low-pass corner as a fraction of f0
    /// Discarded at each end of the record; defaults to 8 / f_lowpass.
    std::optional<double> settle_seconds;
    /// Output sample spacing; defaults to a quarter low-pass period.
    std::optional<double> sample_spacing;
};

/// Quadrature demodulation at f0: I, Q mixed down and low-passed at f0/4,
/// magnitude 2 sqrt(I^2 + Q^2), decimated (by default) to four samples per
/// low-pass period.
inline Envelope envelope(const RingdownTrace& trace, double f0, const EnvelopeOptions& opts = {})
{
    validate(trace);
    detail::require_positive(f0, "f0");
    if (!(f0 < trace.sample_rate / 4.0)) throw DomainError("f0 must be below a quarter of the sample rate");
    const double f_lp = opts.lowpass_fraction * f0;
    detail::require_positive(f_lp, "low-pass corner");

    const std::size_t n = trace.samples.size();
    std::vector<double> in_phase(n);
    std::vector<double> quadrature(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double arg = 2.0 * constants::pi * f0 * trace.time_at(i);
        in_phase[i] = trace.samples[i] * std::cos(arg);
        quadrature[i] = trace.samples[i] * std::sin(arg);
    }
    const double edge = f_lp / 2.0;
    auto lowpass = [&](double f) { return detail::raised_cosine_band(f, 0.0, f_lp - edge, edge); };
    in_phase = detail::apply_spectral_mask(in_phase, trace.sample_rate, lowpass);
    quadrature = detail::apply_spectral_mask(quadrature, trace.sample_rate, lowpass);

    const double settle = opts.settle_seconds.value_or(8.0 / f_lp);
    const auto skip = static_cast<std::size_t>(std::ceil(settle * trace.sample_rate));
    const double spacing = opts.sample_spacing.value_or(1.0 / (4.0 * f_lp));
    detail::require_positive(spacing, "sample_spacing");
    const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(spacing * trace.sample_rate)));
    Envelope env;
    if (2 * skip >= n) return env;
    for (std::size_t i = skip; i < n - skip; i += step) {
        env.times.push_back(trace.time_at(i));
        env.amplitudes.push_back(2.0 * std::hypot(in_phase[i], quadrature[i]));
    }
    return env;
}

// ---------------------------------------------------------------------------
// Binning

struct BinnedEnvelope {
    std::vector<double> bin_centers;  // s, mean sample time within the bin
    std::vector<double> means;
    std::vector<double> standard_errors;
    std::vector<std::size_t> counts;
    std::vector<double> time_variances;  // s^2, spread of sample times within each bin

    std::size_t size() const { return means.size(); }
};

/// Groups envelope samples into consecutive bins of `bin_seconds` starting at
/// the first sample; bins with fewer than two samples are dropped.
inline BinnedEnvelope bin_average(const Envelope& env, double bin_seconds)
{
    detail::require_positive(bin_seconds, "bin_seconds");
    if (env.times.size() != env.amplitudes.size()) throw DomainError("envelope times/amplitudes length mismatch");
    if (env.times.empty()) throw AnalysisError("binning", "insufficient data: empty envelope");

    // Sorting makes the result independent of the order traces were merged in.
    std::vector<std::pair<double, double>> samples(env.times.size());
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = {env.times[i], env.amplitudes[i]};
    std::sort(samples.begin(), samples.end());

    const double t0 = samples.front().first;
    BinnedEnvelope out;
    std::size_t i = 0;
    while (i < samples.size()) {
        const auto bin = static_cast<long long>(std::floor((samples[i].first - t0) / bin_seconds));
        std::size_t j = i;
        double sum_t = 0.0;
        double sum_a = 0.0;
        while (j < samples.size() && static_cast<long long>(std::floor((samples[j].first - t0) / bin_seconds)) == bin) {
            sum_t += samples[j].first;
            sum_a += samples[j].second;
            ++j;
        }
        const std::size_t count = j - i;
        if (count >= 2) {
            const double mean = sum_a / static_cast<double>(count);
            double ss = 0.0;
            const double t_mean = sum_t / static_cast<double>(count);
            double tt = 0.0;
            for (std::size_t k = i; k < j; ++k) {
                ss += (samples[k].second - mean) * (samples[k].second - mean);
                tt += (samples[k].first - t_mean) * (samples[k].first - t_mean);
            }
            const double sd = std::sqrt(ss / static_cast<double>(count - 1));
            out.bin_centers.push_back(t_mean);
            out.means.push_back(mean);
            out.standard_errors.push_back(sd / std::sqrt(static_cast<double>(count)));
            out.counts.push_back(count);
            out.time_variances.push_back(tt / static_cast<double>(count));
        }
        i = j;
    }
    if (out.means.empty()) throw AnalysisError("binning", "insufficient data: every bin has fewer than 2 samples");
    return out;
}

// ---------------------------------------------------------------------------
// Fit

struct RingdownFit {
    double f0 = 0.0;   // Hz
    double tau = 0.0;  // s, amplitude 1/e time
    double q = 0.0;
    double q_rel_error = 0.0;
    double residual_norm = 0.0;  // sqrt(chi^2/dof) for weighted fits, rms log residual otherwise
    std::size_t n_bins = 0;
    double amplitude = 0.0;  // fitted envelope at t = 0
};

struct FitOptions {
    /// Weighted Gauss-Newton refinement of A exp(-t/tau) on the linear bin means.
    bool nonlinear_refine = false;
};

namespace detail {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double chi2 = 0.0;
    double stt = 0.0;  // weighted spread of the abscissa
};

inline LineFit weighted_line(std::span<const double> t, std::span<const double> y, std::span<const double> w)
{
    double sw = 0.0, st = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sw += w[i];
        st += w[i] * t[i];
        sy += w[i] * y[i];
    }
    const double t_bar = st / sw;
    const double y_bar = sy / sw;
    LineFit f;
    double sty = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        f.stt += w[i] * (t[i] - t_bar) * (t[i] - t_bar);
        sty += w[i] * (t[i] - t_bar) * (y[i] - y_bar);
    }
    if (!(f.stt > 0.0) || !std::isfinite(f.stt)) throw AnalysisError("fit", "degenerate fit: singular normal equations");
    f.slope = sty / f.stt;
    f.intercept = y_bar - f.slope * t_bar;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * t[i]);
        f.chi2 += w[i] * r * r;
    }
    return f;
}

}  // namespace detail

/// Weighted least squares of ln(mean) against time with weights from the
/// propagated standard errors (sigma_ln = SE/mean). The slope variance is
/// inflated by chi^2/dof when that exceeds one. Falls back to an unweighted
/// fit when any standard error is zero.
///
/// A bin mean of a decaying exponential sits above the curve at the bin's
/// mean time by 1 + var_t/(2 tau^2); that factor is removed iteratively so
/// bins of unequal span (a short final bin) do not bias tau.
inline RingdownFit fit_exponential(const BinnedEnvelope& binned, double f0, const FitOptions& opts = {})
{
    detail::require_positive(f0, "f0");
    const std::size_t n = binned.size();
    if (n < 5) throw AnalysisError("fit", "insufficient data: need at least 5 bins, have " + std::to_string(n));
    if (binned.bin_centers.size() != n || binned.standard_errors.size() != n) {
        throw DomainError("binned envelope fields have different lengths");
    }
    if (!binned.time_variances.empty() && binned.time_variances.size() != n) {
        throw DomainError("binned envelope time_variances has the wrong length");
    }
    for (double m : binned.means) {
        if (!(m > 0.0)) throw AnalysisError("fit", "non-positive bin mean; the exponential fit is undefined");
    }
    const bool weighted = std::all_of(binned.standard_errors.begin(), binned.standard_errors.end(),
                                      [](double s) { return s > 0.0; });
    auto time_variance = [&](std::size_t i) { return binned.time_variances.empty() ? 0.0 : binned.time_variances[i]; };

    const auto& t = binned.bin_centers;
    std::vector<double> log_mean(n);
    std::vector<double> w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        log_mean[i] = std::log(binned.means[i]);
        if (weighted) {
            const double s = binned.standard_errors[i] / binned.means[i];
            w[i] = 1.0 / (s * s);
        }
    }
    std::vector<double> y = log_mean;
    detail::LineFit line = detail::weighted_line(t, y, w);
    for (int iter = 0; iter < 20; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = log_mean[i] - std::log1p(0.5 * time_variance(i) * line.slope * line.slope);
        }
        const detail::LineFit next = detail::weighted_line(t, y, w);
        const bool converged = std::abs(next.slope - line.slope) <= 1e-15 * std::abs(line.slope);
        line = next;
        if (converged) break;
    }

    double slope = line.slope;
    double intercept = line.intercept;
    double chi2 = line.chi2;
    const double dof = static_cast<double>(n - 2);
    double slope_var = weighted ? (1.0 / line.stt) * std::max(1.0, chi2 / dof) : (chi2 / dof) / line.stt;

    if (opts.nonlinear_refine && weighted) {
        // Gauss-Newton on a(t) = A exp(b t) (1 + v b^2 / 2) with weights 1/SE^2.
        double amp = std::exp(intercept);
        double b = slope;
        double jtj00 = 0, jtj01 = 0, jtj11 = 0;
        double chi2_lin = 0.0;
        for (int iter = 0; iter < 20; ++iter) {
            jtj00 = jtj01 = jtj11 = 0.0;
            double g0 = 0.0, g1 = 0.0;
            chi2_lin = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double v = time_variance(i);
                const double e = std::exp(b * t[i]);
                const double c = 1.0 + 0.5 * v * b * b;
                const double model = amp * e * c;
                const double wi = 1.0 / (binned.standard_errors[i] * binned.standard_errors[i]);
                const double r = binned.means[i] - model;
                const double j0 = e * c;
                const double j1 = amp * e * (t[i] * c + v * b);
                jtj00 += wi * j0 * j0;
                jtj01 += wi * j0 * j1;
                jtj11 += wi * j1 * j1;
                g0 += wi * j0 * r;
                g1 += wi * j1 * r;
                chi2_lin += wi * r * r;
            }
            const double det = jtj00 * jtj11 - jtj01 * jtj01;
            if (!(det > 0.0)) throw AnalysisError("fit", "degenerate fit: singular Gauss-Newton step");
            const double da = (jtj11 * g0 - jtj01 * g1) / det;
            const double db = (jtj00 * g1 - jtj01 * g0) / det;
            amp += da;
            b += db;
            if (std::abs(db) <= 1e-14 * std::abs(b) && std::abs(da) <= 1e-14 * std::abs(amp)) break;
        }
        const double det = jtj00 * jtj11 - jtj01 * jtj01;
        slope = b;
        intercept = std::log(amp);
        chi2 = chi2_lin;
        slope_var = jtj00 / det * std::max(1.0, chi2 / dof);
    }

    if (!(slope < 0.0)) throw AnalysisError("fit", "envelope does not decay");
    RingdownFit fit;
    fit.f0 = f0;
    fit.tau = -1.0 / slope;
    fit.q = constants::pi * f0 * fit.tau;
    fit.q_rel_error = std::max(std::sqrt(slope_var) / std::abs(slope), std::numeric_limits<double>::epsilon());
    fit.residual_norm = std::sqrt(chi2 / dof);
    fit.n_bins = n;
    fit.amplitude = std::exp(intercept);
    return fit;
}

// ---------------------------------------------------------------------------
// Full pipeline

struct MeasureOptions {
    EnvelopeOptions envelope;
    FitOptions fit;
};

/// Envelope of one trace after band-passing, on a time axis relative to the trace start.
/// Unless set, the settling cut covers both the band-pass and the low-pass ring-up.
inline Envelope filtered_envelope(const RingdownTrace& trace, double f0, double bandwidth, const EnvelopeOptions& opts)
{
    RingdownTrace filtered;
    try {
        validate(trace);
        require_cycles(trace, f0);
        filtered = bandpass(trace, f0, bandwidth);
    } catch (const DomainError& e) {
        throw AnalysisError("bandpass", e.what());
    }
    filtered.start_time = 0.0;
    EnvelopeOptions env_opts = opts;
    if (!env_opts.settle_seconds) {
        env_opts.settle_seconds = 4.0 / (opts.lowpass_fraction * f0) + bandpass_settle_time(bandwidth);
    }
    Envelope env;
    try {
        env = envelope(filtered, f0, env_opts);
    } catch (const DomainError& e) {
        throw AnalysisError("envelope", e.what());
    }
    if (env.times.empty()) throw AnalysisError("envelope", "insufficient data: record shorter than filter settling");
    if (std::all_of(env.amplitudes.begin(), env.amplitudes.end(), [](double a) { return a == 0.0; })) {
        throw AnalysisError("envelope", "insufficient data: no signal in the pass band");
    }
    return env;
}

/// Band-pass, demodulate, bin and fit. Multiple traces are aggregated by time
/// since their own start before binning. Unless set explicitly, envelope
/// samples are spaced 1/bandwidth apart so noise in them is nearly independent.
inline RingdownFit measure_q(std::span<const RingdownTrace> traces, double f0, double bandwidth, double bin_seconds,
                             const MeasureOptions& opts = {})
{
    if (traces.empty()) throw AnalysisError("input", "no traces");
    EnvelopeOptions env_opts = opts.envelope;
    if (!env_opts.sample_spacing && bandwidth > 0.0) env_opts.sample_spacing = 1.0 / bandwidth;
    Envelope merged;
    for (const auto& trace : traces) {
        Envelope env = filtered_envelope(trace, f0, bandwidth, env_opts);
        merged.times.insert(merged.times.end(), env.times.begin(), env.times.end());
        merged.amplitudes.insert(merged.amplitudes.end(), env.amplitudes.begin(), env.amplitudes.end());
    }
    const BinnedEnvelope binned = bin_average(merged, bin_seconds);
    return fit_exponential(binned, f0, opts.fit);
}

inline RingdownFit measure_q(const RingdownTrace& trace, double f0, double bandwidth, double bin_seconds,
                             const MeasureOptions& opts = {})
{
    return measure_q(std::span<const RingdownTrace>(&trace, 1), f0, bandwidth, bin_seconds, opts);
}

}  // namespace mgpend

#endif
