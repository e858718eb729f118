#pragma once

#include <vector>

#include "fsep/freqset.hpp"
#include "fsep/signal.hpp"

namespace fsep {

/// Current amplitude spectrum |(1/T) \int x e^{-jwt} dt| of one record on a
/// uniform frequency grid. The grid must resolve the coincidence tolerance
/// delta = 2*pi/T of the analyzed record: step <= delta/4.
struct SpectrumScan {
    std::vector<double> grid;        ///< rad/s, strictly increasing, uniform step
    std::vector<double> amplitudes;  ///< >= 0, same length
    double coincidence_delta = 0.0;  ///< 2*pi/T of the scanned record
    std::string source_label;

    double step() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
    void validate() const;
};

struct PeakParams {
    enum class Threshold { relative_to_max, absolute };
    Threshold threshold_mode = Threshold::relative_to_max;
    double threshold_value = 0.1;  ///< in [0,1] when relative
    /// rad/s; < 0 means 3.5x the scan's delta. The rectangular-window line
    /// shape carries sidelobes at 1.43 and 2.46 delta whose amplitudes
    /// (0.22, 0.13 of the peak) clear the default threshold; a separation
    /// radius of delta would keep them as spurious detections.
    double min_separation = -1.0;
    bool refine = true;  ///< 3-point quadratic apex interpolation
};

/// Default grid step for a record of duration T: delta/4 = pi/(2T).
double default_grid_step(const SampledRecord& record);

/// Evaluates the amplitude spectrum of the mean-removed record at every
/// grid point omega_min, omega_min + step, ... <= omega_max. The grid must
/// stay at or below Nyquist and the step must resolve delta/4.
SpectrumScan scan_spectrum(const SampledRecord& record, double omega_min, double omega_max,
                           double delta_omega);

/// Frequencies of strict local maxima that pass the threshold, thinned so
/// no two survivors are closer than min_separation (the larger amplitude
/// wins). The returned set carries tolerance delta = 2*pi/T.
FrequencySet detect_frequencies(const SpectrumScan& scan, const PeakParams& params);

}  // namespace fsep
