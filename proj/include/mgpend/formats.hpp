#ifndef MGPEND_FORMATS_HPP
#define MGPEND_FORMATS_HPP

// Serialization: spectra as CSV/JSON, requirement reports and ring-down fits
// as JSON, ring-down traces as CSV. Numbers are written locale-independently
// in scientific notation with 9 significant digits.

#include "mgpend/budget.hpp"
#include "mgpend/config.hpp"
#include "mgpend/requirements.hpp"
#include "mgpend/ringdown.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace mgpend {

/// Raised when a file cannot be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 8);
    return {buf, res.ptr};
}

inline double parse_number(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw DomainError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

// ---------------------------------------------------------------------------
// Spectra

/// Long-format CSV: frequency_hz,asd_m_per_sqrthz,label; components, then
/// the total, then the SQL.
inline std::string budget_to_csv(const Budget& b)
{
    std::string out = "frequency_hz,asd_m_per_sqrthz,label\n";
    auto emit = [&](const NoiseSpectrum& s) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            out += format_number(s.frequencies[i]);
            out += ',';
            out += format_number(s.asd[i]);
            out += ',';
            out += s.label;
            out += '\n';
        }
    };
    for (const auto& c : b.components) emit(c);
    if (b.total) emit(*b.total);
    emit(b.sql);
    return out;
}

inline json spectrum_to_json(const NoiseSpectrum& s)
{
    return {{"label", s.label}, {"kind", to_string(s.kind)}, {"asd_m_per_sqrthz", s.asd}};
}

inline json intervals_to_json(const std::vector<Interval>& v)
{
    json arr = json::array();
    for (const auto& i : v) arr.push_back({{"lo_hz", i.lo}, {"hi_hz", i.hi}});
    return arr;
}

inline std::vector<Interval> intervals_from_json(const json& arr)
{
    std::vector<Interval> out;
    for (const auto& i : arr) out.push_back({i.at("lo_hz").get<double>(), i.at("hi_hz").get<double>()});
    return out;
}

inline json budget_to_json(const Budget& b)
{
    json doc;
    doc["frequency_hz"] = b.grid();
    doc["components"] = json::array();
    for (const auto& c : b.components) doc["components"].push_back(spectrum_to_json(c));
    doc["total"] = b.total ? spectrum_to_json(*b.total) : json(nullptr);
    doc["sql"] = spectrum_to_json(b.sql);
    doc["sub_sql_band_thermal"] = intervals_to_json(sub_sql_band(b, BandSelection::ThermalOnly));
    doc["sub_sql_band_total"] = intervals_to_json(sub_sql_band(b, BandSelection::Total));
    return doc;
}

// ---------------------------------------------------------------------------
// Requirement report

inline json report_to_json(const RequirementReport& r)
{
    const EffectiveOscillator& e = r.effective;
    return {
        {"temperature_k", r.temperature},
        {"eq1", {{"lhs", r.eq1.lhs}, {"rhs", r.eq1.rhs}, {"pass", r.eq1.pass}, {"margin", r.eq1.margin}}},
        {"eq2_edge_hz", r.eq2_edge_hz},
        {"eq2_pass", r.eq2_pass},
        {"sub_sql_band", intervals_to_json(r.sub_sql_band)},
        {"band_overlap", intervals_to_json(r.band_overlap)},
        {"effective",
         {{"omega_m", e.omega_m},
          {"q_m", e.q_m},
          {"omega_opt", e.omega_opt},
          {"omega_eff", e.omega_eff},
          {"q_eff", e.q_eff},
          {"k_opt", e.k_opt},
          {"k_g", e.k_g},
          {"spring_ratio", e.spring_ratio}}},
        {"pass", r.pass()},
    };
}

inline RequirementReport report_from_json(const json& doc)
{
    RequirementReport r;
    r.temperature = doc.at("temperature_k").get<double>();
    const json& eq1 = doc.at("eq1");
    r.eq1 = {eq1.at("lhs").get<double>(), eq1.at("rhs").get<double>(), eq1.at("pass").get<bool>(),
             eq1.at("margin").get<double>()};
    r.eq2_edge_hz = doc.at("eq2_edge_hz").get<double>();
    r.eq2_pass = doc.at("eq2_pass").get<bool>();
    r.sub_sql_band = intervals_from_json(doc.at("sub_sql_band"));
    r.band_overlap = intervals_from_json(doc.at("band_overlap"));
    const json& e = doc.at("effective");
    EffectiveOscillator& eff = r.effective;
    eff.omega_m = e.at("omega_m").get<double>();
    eff.q_m = e.at("q_m").get<double>();
    eff.omega_opt = e.at("omega_opt").get<double>();
    eff.omega_eff = e.at("omega_eff").get<double>();
    eff.q_eff = e.at("q_eff").get<double>();
    eff.k_opt = e.at("k_opt").get<double>();
    eff.k_g = e.at("k_g").get<double>();
    eff.spring_ratio = e.at("spring_ratio").get<double>();
    return r;
}

inline std::string report_to_text(const RequirementReport& r)
{
    std::ostringstream os;
    auto bands = [](const std::vector<Interval>& v) {
        if (v.empty()) return std::string("none");
        std::string s;
        for (const auto& i : v) {
            if (!s.empty()) s += ", ";
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.0f-%.0f Hz", i.lo, i.hi);
            s += buf;
        }
        return s;
    };
    const EffectiveOscillator& e = r.effective;
    os << "temperature            " << format_number(r.temperature) << " K\n";
    os << "pendulum mode          f_m = " << format_number(to_hz(e.omega_m)) << " Hz, Q_m = " << format_number(e.q_m)
       << "\n";
    os << "effective oscillator   f_eff = " << format_number(to_hz(e.omega_eff))
       << " Hz, Q_eff = " << format_number(e.q_eff) << ", k_opt/k_g = " << format_number(e.spring_ratio) << "\n";
    os << "Qf product             Q_eff f_eff = " << format_number(e.qf_product_hz()) << " Hz\n";
    os << "Qf requirement         " << format_number(r.eq1.lhs) << " vs " << format_number(r.eq1.rhs)
       << " rad/s, margin " << format_number(r.eq1.margin) << (r.eq1.pass ? "  PASS" : "  FAIL") << "\n";
    os << "measurement-rate edge  " << format_number(r.eq2_edge_hz) << " Hz"
       << (r.eq2_pass ? "  PASS (band reaches below the SQL)" : "  FAIL (no sub-SQL region above the edge)") << "\n";
    os << "thermal below SQL      " << bands(r.sub_sql_band) << "\n";
    os << "usable band            " << bands(r.band_overlap) << "\n";
    os << "overall                " << (r.pass() ? "PASS" : "FAIL") << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Ring-down

inline json fit_to_json(const RingdownFit& f)
{
    return {{"f0_hz", f.f0},         {"tau_s", f.tau},
            {"q", f.q},              {"q_rel_error", f.q_rel_error},
            {"residual_norm", f.residual_norm}, {"n_bins", f.n_bins}};
}

inline std::string trace_to_csv(const RingdownTrace& t)
{
    std::string out = "time_s,value\n";
    out.reserve(out.size() + t.samples.size() * 32);
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
        out += format_number(t.time_at(i));
        out += ',';
        out += format_number(t.samples[i]);
        out += '\n';
    }
    return out;
}

/// Parses time_s,value CSV with a one-line header. The sample rate comes from
/// the mean spacing; spacing must be uniform to 1e-4 of the step (plus the
/// 9-digit rounding of the time column).
inline RingdownTrace trace_from_csv(const std::string& text, const std::string& origin = "trace")
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DomainError(origin + ": empty file");
    std::vector<double> times;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DomainError(origin + ":" + std::to_string(line_no) + ": expected two columns");
        try {
            times.push_back(parse_number(std::string_view(line).substr(0, comma)));
            values.push_back(parse_number(std::string_view(line).substr(comma + 1)));
        } catch (const DomainError& e) {
            throw DomainError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (times.size() < 2) throw DomainError(origin + ": need at least two samples");
    const double step = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(step > 0.0)) throw DomainError(origin + ": time column must increase");
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double tol = 1e-4 * step + 1e-8 * std::abs(times[i]);
        if (std::abs(times[i] - times[i - 1] - step) > tol) {
            throw DomainError(origin + ": non-uniform sampling near t = " + format_number(times[i]));
        }
    }
    return RingdownTrace{1.0 / step, std::move(values), times.front()};
}

}  // namespace mgpend

#endif
