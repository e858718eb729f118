#include "fsep/spectrum.hpp"

#include <algorithm>
#include <cmath>

namespace fsep {

void SpectrumScan::validate() const {
    require(grid.size() == amplitudes.size(), "spectrum scan: grid/amplitude length mismatch");
    require(grid.size() >= 2, "spectrum scan: empty or single-point grid");
    require(coincidence_delta > 0.0, "spectrum scan: missing coincidence delta");
    const double h = step();
    require(h > 0.0, "spectrum scan: grid must be increasing");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        require(std::abs((grid[i] - grid[i - 1]) - h) <= 1e-9 * h, "spectrum scan: grid step not uniform");
    }
    require(h <= 0.25 * coincidence_delta * (1.0 + 1e-12),
            "spectrum scan: grid step must be at most delta/4");
    for (double a : amplitudes) {
        require(std::isfinite(a) && a >= 0.0, "spectrum scan: amplitudes must be finite and >= 0");
    }
}

double default_grid_step(const SampledRecord& record) {
    record.validate();
    return 0.5 * kPi / record.duration();  // delta/4 with delta = 2*pi/T
}

SpectrumScan scan_spectrum(const SampledRecord& record, double omega_min, double omega_max,
                           double delta_omega) {
    record.validate();
    require(delta_omega > 0.0, "scan_spectrum: delta_omega must be positive");
    require(omega_min >= 0.0 && omega_min < omega_max, "scan_spectrum: need 0 <= omega_min < omega_max");
    require(omega_max <= record.nyquist() * (1.0 + 1e-12),
            "scan_spectrum: grid extends above the Nyquist frequency");

    const double duration = record.duration();
    const double delta = kTwoPi / duration;
    require(delta_omega <= 0.25 * delta * (1.0 + 1e-12),
            "scan_spectrum: grid step coarser than delta/4 cannot resolve coincidences");

    const auto count = static_cast<std::size_t>(std::floor((omega_max - omega_min) / delta_omega)) + 1;
    require(count >= 2, "scan_spectrum: grid has fewer than 2 points");

    // mean removal keeps the w = 0 line from masking low-frequency peaks
    SampledRecord centered = record;
    const double mean = besicovitch_mean(record);
    for (double& v : centered.samples) {
        v -= mean;
    }

    SpectrumScan scan;
    scan.grid.resize(count);
    scan.amplitudes.resize(count);
    scan.coincidence_delta = delta;
    scan.source_label = record.channel_id;
    for (std::size_t m = 0; m < count; ++m) {
        const double w = omega_min + static_cast<double>(m) * delta_omega;
        scan.grid[m] = w;
        scan.amplitudes[m] = std::abs(bohr_coefficient(centered, w));
    }
    return scan;
}

FrequencySet detect_frequencies(const SpectrumScan& scan, const PeakParams& params) {
    scan.validate();
    if (params.threshold_mode == PeakParams::Threshold::relative_to_max) {
        require(params.threshold_value >= 0.0 && params.threshold_value <= 1.0,
                "detect_frequencies: relative threshold must lie in [0, 1]");
    } else {
        require(params.threshold_value >= 0.0, "detect_frequencies: absolute threshold must be >= 0");
    }

    const double h = scan.step();
    const double min_sep =
        params.min_separation < 0.0 ? 3.5 * scan.coincidence_delta : params.min_separation;

    double top = 0.0;
    for (double a : scan.amplitudes) {
        top = std::max(top, a);
    }
    const double threshold = params.threshold_mode == PeakParams::Threshold::relative_to_max
                                 ? params.threshold_value * top
                                 : params.threshold_value;

    struct Peak {
        double omega;
        double amplitude;
    };
    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < scan.grid.size(); ++i) {
        const double y0 = scan.amplitudes[i - 1];
        const double y1 = scan.amplitudes[i];
        const double y2 = scan.amplitudes[i + 1];
        if (!(y1 > y0 && y1 > y2) || y1 < threshold) {
            continue;
        }
        double omega = scan.grid[i];
        if (params.refine) {
            const double denom = y0 - 2.0 * y1 + y2;
            if (denom < 0.0) {
                double shift = 0.5 * (y0 - y2) / denom;
                shift = std::clamp(shift, -0.5, 0.5);
                omega += shift * h;
            }
        }
        peaks.push_back({omega, y1});
    }

    // thin: larger peaks win; ties resolve toward the lower frequency
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        if (a.amplitude != b.amplitude) return a.amplitude > b.amplitude;
        return a.omega < b.omega;
    });
    std::vector<Peak> kept;
    for (const auto& p : peaks) {
        bool clear = true;
        for (const auto& k : kept) {
            if (std::abs(p.omega - k.omega) < min_sep) {
                clear = false;
                break;
            }
        }
        if (clear) {
            kept.push_back(p);
        }
    }

    std::vector<double> freqs;
    freqs.reserve(kept.size());
    for (const auto& p : kept) {
        freqs.push_back(p.omega);
    }
    std::sort(freqs.begin(), freqs.end());
    return FrequencySet(std::move(freqs), scan.coincidence_delta, scan.source_label);
}

}  // namespace fsep
