#pragma once

// Test-side oracles, independent of the library's computation paths:
// direct trigonometric synthesis, the closed-form finite-T projection of a
// cosine, and rigorous leakage/quadrature bounds.

#include <cmath>
#include <complex>
#include <vector>

#include "fsep/signal.hpp"

namespace oracles {

using fsep::Complex;

struct Tone {
    double omega;      // rad/s, > 0
    double amplitude;  // peak amplitude A of A cos(wt + phi)
    double phase;      // rad
};

/// Direct sample-by-sample synthesis of mean + sum A cos(wt + phi).
inline fsep::SampledRecord synth(const std::vector<Tone>& tones, double mean, double duration,
                                 double dt, const std::string& label = "oracle") {
    fsep::SampledRecord r;
    r.sample_period = dt;
    r.channel_id = label;
    const auto n = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
    r.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        double v = mean;
        for (const auto& tone : tones) {
            v += tone.amplitude * std::cos(tone.omega * t + tone.phase);
        }
        r.samples[i] = v;
    }
    return r;
}

/// The construction coefficient C = (A/2) e^{j phi} of a tone.
inline Complex construction_coefficient(const Tone& t) {
    return std::polar(0.5 * t.amplitude, t.phase);
}

/// Exact (1/T) \int_0^T e^{j d t} dt.
inline Complex dirichlet(double d, double duration) {
    if (d == 0.0) {
        return {1.0, 0.0};
    }
    const Complex jd(0.0, d);
    return (std::exp(jd * duration) - 1.0) / (jd * duration);
}

/// Exact continuous-time value of (1/T) \int x(t) e^{-j w t} dt for the
/// synthesized signal: every tone contributes both rotating terms, the mean
/// contributes dirichlet(-w).
inline Complex exact_projection(const std::vector<Tone>& tones, double mean, double probe,
                                double duration) {
    Complex acc = mean * dirichlet(-probe, duration);
    for (const auto& t : tones) {
        const Complex c = construction_coefficient(t);
        acc += c * dirichlet(t.omega - probe, duration);
        acc += std::conj(c) * dirichlet(-t.omega - probe, duration);
    }
    return acc;
}

/// Rigorous leakage bound at the probe frequency: co- and counter-rotating
/// term of every tone that is not exactly at the probe, plus the mean line.
inline double leakage_bound(const std::vector<Tone>& tones, double mean, double probe,
                            double duration) {
    double bound = 0.0;
    auto term = [&](double c_mag, double gap) {
        if (gap == 0.0) {
            bound += c_mag;  // a second line exactly at the probe
        } else {
            bound += std::min(c_mag, 2.0 * c_mag / (duration * std::abs(gap)));
        }
    };
    for (const auto& t : tones) {
        const double c_mag = 0.5 * t.amplitude;
        if (t.omega != probe) {
            term(c_mag, t.omega - probe);
        }
        term(c_mag, -t.omega - probe);
    }
    if (mean != 0.0 && probe != 0.0) {
        term(std::abs(mean), -probe);
    }
    return bound;
}

/// Trapezoid-rule error allowance for the same projection: the leading
/// Euler-Maclaurin term per rotating component, doubled for slack, plus a
/// roundoff floor.
inline double quadrature_allowance(const std::vector<Tone>& tones, double mean, double probe,
                                   double duration, double dt) {
    double bound = 1e-10;
    for (const auto& t : tones) {
        const double c_mag = 0.5 * t.amplitude;
        bound += c_mag * dt * dt * (std::abs(t.omega - probe) + (t.omega + probe)) / (3.0 * duration);
    }
    bound += std::abs(mean) * dt * dt * probe / (3.0 * duration);
    return bound;
}

inline double relative_rms(std::span<const double> a, std::span<const double> b) {
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        err += (a[i] - b[i]) * (a[i] - b[i]);
        ref += b[i] * b[i];
    }
    return ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err);
}

}  // namespace oracles
