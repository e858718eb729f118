#include "fsep/signal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fsep/freqset.hpp"

namespace fsep {

namespace {

// Trapezoid weights: dt on interior samples, dt/2 on the ends, so that the
// weighted sum equals the trapezoidal integral over [start, start + T].
double trapezoid_integral(std::span<const double> x, double dt) {
    double acc = 0.5 * (x.front() + x.back());
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        acc += x[i];
    }
    return acc * dt;
}

// (1/T) \int x(t) e^{-j w t} dt via trapezoidal quadrature. The phasor is
// advanced by multiplication and re-anchored with an exact polar evaluation
// every 1024 samples, which keeps the accumulated rounding drift below
// ~1e-13 while avoiding a sin/cos per sample.
Complex projection(const SampledRecord& record, double omega) {
    const std::size_t n = record.count();
    const double dt = record.sample_period;
    const Complex rot = std::polar(1.0, -omega * dt);
    Complex phasor = std::polar(1.0, -omega * record.start_time);

    Complex acc = 0.5 * record.samples[0] * phasor;
    for (std::size_t i = 1; i < n; ++i) {
        if ((i & 1023u) == 0u) {
            phasor = std::polar(1.0, -omega * record.time_at(i));
        } else {
            phasor *= rot;
        }
        const double w = (i + 1 == n) ? 0.5 : 1.0;
        acc += w * record.samples[i] * phasor;
    }
    return acc * (dt / record.duration());
}

}  // namespace

std::vector<double> SampledRecord::time_grid() const {
    std::vector<double> t(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        t[i] = time_at(i);
    }
    return t;
}

void SampledRecord::validate() const {
    require(!samples.empty(), "record '" + channel_id + "': no samples");
    require(samples.size() >= 2, "degenerate record '" + channel_id + "': fewer than 2 samples");
    require(std::isfinite(sample_period) && sample_period > 0.0,
            "record '" + channel_id + "': sample_period must be finite and positive");
    require(std::isfinite(start_time), "record '" + channel_id + "': start_time must be finite");
    for (double v : samples) {
        require(std::isfinite(v), "record '" + channel_id + "': non-finite sample");
    }
}

void HarmonicComponent::validate() const {
    require(std::isfinite(omega) && omega >= 0.0, "harmonic component: omega must be finite and >= 0");
    require(std::isfinite(amplitude.real()) && std::isfinite(amplitude.imag()),
            "harmonic component: non-finite amplitude");
    if (omega == 0.0) {
        require(amplitude.imag() == 0.0, "harmonic component: the omega = 0 line must be real");
    }
}

double LineSpectrum::power_norm() const {
    double acc = 0.0;
    for (const auto& c : components) {
        acc += std::norm(c.amplitude);
    }
    return acc;
}

double LineSpectrum::max_omega() const {
    return components.empty() ? 0.0 : components.back().omega;
}

void LineSpectrum::validate() const {
    for (std::size_t i = 0; i < components.size(); ++i) {
        components[i].validate();
        if (i > 0) {
            require(components[i].omega > components[i - 1].omega,
                    "line spectrum: omegas must be strictly increasing");
        }
    }
}

void CorrelationEstimate::validate() const {
    require(lags.size() == values.size(), "correlation estimate: lags/values length mismatch");
    require(std::isfinite(tolerance) && tolerance >= 0.0, "correlation estimate: bad tolerance");
    if (values.empty()) {
        return;
    }
    double peak = 0.0;
    for (double v : values) {
        peak = std::max(peak, std::abs(v));
    }
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (lags[i] == 0.0) {
            require(std::abs(values[i]) >= peak - tolerance,
                    "correlation estimate: zero-lag value is not the peak within tolerance");
        }
        for (std::size_t j = i + 1; j < lags.size(); ++j) {
            if (lags[j] == -lags[i]) {
                require(std::abs(values[i] - values[j]) <= tolerance,
                        "correlation estimate: even symmetry violated beyond tolerance");
            }
        }
    }
}

double besicovitch_mean(const SampledRecord& record) {
    record.validate();
    return trapezoid_integral(record.samples, record.sample_period) / record.duration();
}

Complex bohr_coefficient(const SampledRecord& record, double omega) {
    record.validate();
    require(std::isfinite(omega) && omega >= 0.0, "bohr_coefficient: omega must be finite and >= 0");
    if (omega == 0.0) {
        return Complex(besicovitch_mean(record), 0.0);
    }
    return projection(record, omega);
}

LineSpectrum project_onto(const SampledRecord& record, const FrequencySet& freqs) {
    require(!freqs.empty(), "project_onto: empty frequency set");
    LineSpectrum out;
    out.components.reserve(freqs.size());
    for (double w : freqs.freqs()) {
        HarmonicComponent c;
        c.omega = w;
        c.amplitude = (w == 0.0) ? Complex(besicovitch_mean(record), 0.0) : bohr_coefficient(record, w);
        out.components.push_back(c);
    }
    return out;
}

std::vector<double> reconstruct(const LineSpectrum& spectrum, std::span<const double> times) {
    spectrum.validate();
    std::vector<double> out(times.size(), 0.0);
    for (const auto& c : spectrum.components) {
        if (c.omega == 0.0) {
            for (double& v : out) {
                v += c.amplitude.real();
            }
        } else {
            for (std::size_t i = 0; i < times.size(); ++i) {
                out[i] += 2.0 * (c.amplitude * std::polar(1.0, c.omega * times[i])).real();
            }
        }
    }
    return out;
}

CorrelationEstimate autocorrelation_single(const SampledRecord& record, std::span<const double> lags) {
    record.validate();
    const double dt = record.sample_period;
    const double duration = record.duration();
    const std::size_t n = record.count();

    const double mean = besicovitch_mean(record);
    std::vector<double> centered(record.samples);
    for (double& v : centered) {
        v -= mean;
    }

    CorrelationEstimate est;
    est.lags.reserve(lags.size());
    est.values.reserve(lags.size());
    for (double tau : lags) {
        require(std::isfinite(tau) && std::abs(tau) < 0.5 * duration,
                "autocorrelation_single: lag exceeds half the record duration");
        // snap to the sample grid; the reported lag is the snapped one
        const auto shift = static_cast<std::size_t>(std::llround(std::abs(tau) / dt));
        require(shift + 2 <= n, "autocorrelation_single: lag leaves fewer than 2 overlapping samples");
        std::vector<double> prod(n - shift);
        for (std::size_t i = 0; i < prod.size(); ++i) {
            prod[i] = centered[i] * centered[i + shift];
        }
        const double overlap = static_cast<double>(prod.size() - 1) * dt;
        double value = trapezoid_integral(prod, dt) / overlap;
        est.lags.push_back(std::copysign(static_cast<double>(shift) * dt, tau));
        est.values.push_back(value);
    }

    double peak = 0.0;
    for (double v : est.values) {
        peak = std::max(peak, std::abs(v));
    }
    // finite-record cross terms decay like 1/T; 5% of the peak is the
    // declared accuracy for the invariant audit
    est.tolerance = 0.05 * peak + 1e-12;
    est.validate();
    return est;
}

CorrelationEstimate correlation_from_spectrum(const LineSpectrum& weights, std::span<const double> lags) {
    weights.validate();
    CorrelationEstimate est;
    est.lags.assign(lags.begin(), lags.end());
    est.values.reserve(lags.size());
    for (double tau : lags) {
        double acc = 0.0;
        for (const auto& c : weights.components) {
            acc += c.amplitude.real() * std::cos(c.omega * tau);
        }
        est.values.push_back(acc);
    }
    double peak = 0.0;
    for (double v : est.values) {
        peak = std::max(peak, std::abs(v));
    }
    est.tolerance = 1e-12 * std::max(1.0, peak);
    est.validate();
    return est;
}

}  // namespace fsep
