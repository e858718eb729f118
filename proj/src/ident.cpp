#include "fsep/ident.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace fsep {

namespace {

Complex polynomial_at(std::span<const double> coeffs, Complex x) {
    Complex acc{0.0, 0.0};
    for (std::size_t i = coeffs.size(); i-- > 0;) {
        acc = acc * x + coeffs[i];
    }
    return acc;
}

std::string column_name(std::size_t col, int order_m) {
    std::ostringstream os;
    if (col <= static_cast<std::size_t>(order_m)) {
        os << 'b' << col;
    } else {
        os << 'a' << (col - static_cast<std::size_t>(order_m) - 1);
    }
    return os.str();
}

}  // namespace

Complex RationalModel::evaluate(double nu) const {
    const Complex x(0.0, nu);
    return polynomial_at(numerator, x) / polynomial_at(denominator, x);
}

void RationalModel::validate() const {
    require(!numerator.empty() && !denominator.empty(), "rational model: empty coefficient vector");
    require(astatism >= 0, "rational model: astatism must be >= 0");
    require(order_n() >= order_m(), "rational model: must be proper (n >= m)");
    require(astatism <= order_n(), "rational model: astatism exceeds denominator order");
    require(denominator.back() == 1.0, "rational model: denominator must be normalized (a_n = 1)");
    for (int k = 0; k < astatism; ++k) {
        require(denominator[static_cast<std::size_t>(k)] == 0.0,
                "rational model: astatism s requires a_0..a_{s-1} = 0");
    }
    if (!degenerate && astatism < order_n()) {
        require(denominator[static_cast<std::size_t>(astatism)] != 0.0,
                "rational model: reduced denominator must satisfy A(0) != 0");
    }
    for (double c : numerator) {
        require(std::isfinite(c), "rational model: non-finite numerator coefficient");
    }
    for (double c : denominator) {
        require(std::isfinite(c), "rational model: non-finite denominator coefficient");
    }
}

RationalModel RationalModel::from_factored(std::vector<double> b, std::vector<double> a_reduced,
                                           int astatism) {
    require(!a_reduced.empty(), "rational model: reduced denominator is empty");
    require(a_reduced.back() != 0.0, "rational model: reduced denominator has zero leading coefficient");
    require(astatism >= 0, "rational model: astatism must be >= 0");
    const double lead = a_reduced.back();
    RationalModel model;
    model.astatism = astatism;
    model.numerator = std::move(b);
    for (double& c : model.numerator) {
        c /= lead;
    }
    model.denominator.assign(static_cast<std::size_t>(astatism), 0.0);
    for (double c : a_reduced) {
        model.denominator.push_back(c / lead);
    }
    model.denominator.back() = 1.0;  // exact, not lead/lead
    model.validate();
    return model;
}

void ChannelEstimate::validate() const {
    for (std::size_t i = 1; i < points.size(); ++i) {
        require(points[i].nu > points[i - 1].nu, "channel estimate: points must be sorted by nu");
    }
    for (const auto& p : points) {
        require(std::isfinite(p.nu) && p.nu >= 0.0, "channel estimate: bad frequency");
        require(std::isfinite(p.response.real()) && std::isfinite(p.response.imag()),
                "channel estimate: non-finite response");
    }
}

FrequencySet select_channel_frequencies(const FrequencySet& input_set, const FrequencySet& output_set) {
    const MatchTable table = set_intersect(input_set, output_set);
    std::vector<double> mids = table.midpoints();
    std::sort(mids.begin(), mids.end());
    mids.erase(std::unique(mids.begin(), mids.end()), mids.end());
    std::string label = input_set.label();
    if (!output_set.label().empty()) {
        label += "~" + output_set.label();
    }
    return FrequencySet(std::move(mids), input_set.delta(), std::move(label));
}

ChannelEstimate estimate_response(const SampledRecord& input, const SampledRecord& output,
                                  const FrequencySet& nus, double guard_ratio) {
    input.validate();
    output.validate();
    require(guard_ratio >= 0.0, "estimate_response: guard_ratio must be >= 0");
    const double span = std::max(input.duration(), output.duration());
    require(std::abs(input.start_time - output.start_time) <= 1e-9 * span,
            "estimate_response: records do not share a start time");
    require(std::abs(input.duration() - output.duration()) <= 1e-9 * span,
            "estimate_response: records do not cover a common interval");
    const double nyquist = std::min(input.nyquist(), output.nyquist());
    for (double nu : nus.freqs()) {
        require(nu < nyquist, "estimate_response: frequency above Nyquist of the records");
    }

    std::vector<Complex> x_proj(nus.size()), y_proj(nus.size());
    double x_peak = 0.0;
    for (std::size_t k = 0; k < nus.size(); ++k) {
        x_proj[k] = bohr_coefficient(input, nus[k]);
        y_proj[k] = bohr_coefficient(output, nus[k]);
        x_peak = std::max(x_peak, std::abs(x_proj[k]));
    }

    ChannelEstimate est;
    est.input_label = input.channel_id;
    est.output_label = output.channel_id;
    const double guard = guard_ratio * x_peak;
    for (std::size_t k = 0; k < nus.size(); ++k) {
        const double mag = std::abs(x_proj[k]);
        if (mag <= 0.0 || mag < guard) {
            std::ostringstream os;
            os << "input projection " << mag << " below guard " << guard;
            est.excluded.push_back({nus[k], os.str()});
            continue;
        }
        est.points.push_back({nus[k], y_proj[k] / x_proj[k]});
    }
    if (!nus.empty() && est.points.empty()) {
        std::ostringstream os;
        os << "estimate_response(" << est.input_label << " -> " << est.output_label
           << "): all " << nus.size() << " points excluded; peak input projection " << x_peak;
        fail(os.str());
    }
    est.validate();
    return est;
}

std::vector<double> filter_record(const SampledRecord& record, const FrequencySet& nus,
                                  std::span<const double> times) {
    if (nus.empty()) {
        return std::vector<double>(times.size(), 0.0);
    }
    return reconstruct(project_onto(record, nus), times);
}

FitResult fit_rational(const ChannelEstimate& points, int order_n, int order_m, int astatism,
                       const FitOptions& options) {
    points.validate();
    require(order_n >= 0 && order_m >= 0, "fit_rational: orders must be >= 0");
    require(order_n >= order_m, "fit_rational: improper model requested (m > n)");
    require(astatism >= 0 && astatism <= order_n, "fit_rational: astatism must lie in [0, n]");
    const std::size_t d = points.points.size();
    require(2 * d >= static_cast<std::size_t>(order_m + 1 + order_n + 1),
            "fit_rational: identifiability requires 2*points >= (m+1) + n + 1; have " +
                std::to_string(2 * d) + " real equations");

    const int na = order_n - astatism;  // degree of the reduced denominator A

    bool all_zero = true;
    for (const auto& p : points.points) {
        if (std::abs(p.response) > 0.0) {
            all_zero = false;
            break;
        }
    }
    if (all_zero) {
        // degenerate data: zero numerator, an arbitrary valid denominator
        FitResult fit;
        fit.model.astatism = astatism;
        fit.model.degenerate = true;
        fit.model.numerator.assign(static_cast<std::size_t>(order_m) + 1, 0.0);
        fit.model.denominator.assign(static_cast<std::size_t>(order_n) + 1, 0.0);
        fit.model.denominator.back() = 1.0;
        if (na > 0) {
            fit.model.denominator[static_cast<std::size_t>(astatism)] = 1.0;  // A(x) = x^na + 1
        }
        fit.model.validate();
        fit.residuals.assign(d, 0.0);
        return fit;
    }

    // frequency scaling x = j v / c tames the power-of-nu dynamic range
    double log_acc = 0.0;
    std::size_t nonzero = 0;
    for (const auto& p : points.points) {
        if (p.nu > 0.0) {
            log_acc += std::log(p.nu);
            ++nonzero;
        }
    }
    const double scale = nonzero > 0 ? std::exp(log_acc / static_cast<double>(nonzero)) : 1.0;

    const std::size_t cols = static_cast<std::size_t>(order_m + 1 + na);
    Eigen::MatrixXd system(2 * d, cols);
    Eigen::VectorXd rhs(2 * d);

    std::vector<double> weights(d, 1.0);
    std::vector<double> theta_prev;
    FitResult fit;

    for (int iter = 0; iter < std::max(1, options.max_iterations); ++iter) {
        fit.iterations = iter + 1;
        for (std::size_t k = 0; k < d; ++k) {
            const Complex x(0.0, points.points[k].nu / scale);
            const Complex w = points.points[k].response;
            Complex xp{1.0, 0.0};
            std::vector<Complex> powers(static_cast<std::size_t>(order_n) + 1);
            for (std::size_t j = 0; j < powers.size(); ++j) {
                powers[j] = xp;
                xp *= x;
            }
            const Complex xs = powers[static_cast<std::size_t>(astatism)];
            const double u = weights[k];
            for (int j = 0; j <= order_m; ++j) {
                const Complex v = u * powers[static_cast<std::size_t>(j)];
                system(2 * k, static_cast<std::size_t>(j)) = v.real();
                system(2 * k + 1, static_cast<std::size_t>(j)) = v.imag();
            }
            for (int j = 0; j < na; ++j) {
                const Complex v = -u * w * xs * powers[static_cast<std::size_t>(j)];
                system(2 * k, static_cast<std::size_t>(order_m + 1 + j)) = v.real();
                system(2 * k + 1, static_cast<std::size_t>(order_m + 1 + j)) = v.imag();
            }
            const Complex r = u * w * xs * powers[static_cast<std::size_t>(na)];
            rhs(2 * k) = r.real();
            rhs(2 * k + 1) = r.imag();
        }

        // column equilibration before the rank-revealing QR
        Eigen::VectorXd col_scale(cols);
        for (std::size_t j = 0; j < cols; ++j) {
            const double n2 = system.col(j).norm();
            col_scale(j) = n2 > 0.0 ? n2 : 1.0;
        }
        Eigen::MatrixXd scaled = system * col_scale.cwiseInverse().asDiagonal();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
        qr.setThreshold(1e-10);
        if (qr.rank() < static_cast<Eigen::Index>(cols)) {
            const auto perm = qr.colsPermutation().indices();
            std::ostringstream os;
            os << "fit_rational: ill-posed fit, rank " << qr.rank() << " of " << cols
               << "; dependent columns:";
            for (Eigen::Index j = qr.rank(); j < static_cast<Eigen::Index>(cols); ++j) {
                os << ' ' << column_name(static_cast<std::size_t>(perm(j)), order_m);
            }
            fail(os.str());
        }
        Eigen::VectorXd theta = col_scale.cwiseInverse().asDiagonal() * qr.solve(rhs);

        std::vector<double> theta_now(theta.data(), theta.data() + theta.size());
        bool converged = false;
        if (!theta_prev.empty()) {
            double diff = 0.0, norm = 0.0;
            for (std::size_t j = 0; j < theta_now.size(); ++j) {
                diff += (theta_now[j] - theta_prev[j]) * (theta_now[j] - theta_prev[j]);
                norm += theta_prev[j] * theta_prev[j];
            }
            converged = std::sqrt(diff) <= options.coefficient_tolerance * std::max(1e-300, std::sqrt(norm));
        }
        theta_prev = theta_now;

        // map scaled-domain coefficients back: multiply through by c^n
        std::vector<double> b(static_cast<std::size_t>(order_m) + 1);
        std::vector<double> a_full(static_cast<std::size_t>(order_n) + 1, 0.0);
        for (int j = 0; j <= order_m; ++j) {
            b[static_cast<std::size_t>(j)] =
                theta_now[static_cast<std::size_t>(j)] * std::pow(scale, order_n - j);
        }
        for (int j = 0; j < na; ++j) {
            a_full[static_cast<std::size_t>(astatism + j)] =
                theta_now[static_cast<std::size_t>(order_m + 1 + j)] * std::pow(scale, na - j);
        }
        a_full.back() = 1.0;

        fit.model.numerator = std::move(b);
        fit.model.denominator = std::move(a_full);
        fit.model.astatism = astatism;

        if (!options.iterative_reweighting || converged) {
            break;
        }
        // Sanathanan-Koerner reweighting by 1/|D_prev| in the scaled domain
        for (std::size_t k = 0; k < d; ++k) {
            const Complex x(0.0, points.points[k].nu / scale);
            Complex dpoly{0.0, 0.0};
            Complex xp{1.0, 0.0};
            std::vector<double> a_scaled(static_cast<std::size_t>(na) + 1);
            for (int j = 0; j <= na; ++j) {
                a_scaled[static_cast<std::size_t>(j)] =
                    j < na ? theta_now[static_cast<std::size_t>(order_m + 1 + j)] : 1.0;
            }
            dpoly = polynomial_at(a_scaled, x);
            for (int j = 0; j < astatism; ++j) {
                dpoly *= x;
            }
            weights[k] = 1.0 / std::max(std::abs(dpoly), 1e-12);
        }
    }

    fit.model.validate();
    fit.residuals.resize(d);
    fit.max_residual = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const auto& p = points.points[k];
        const Complex model_value = fit.model.evaluate(p.nu);
        const double denom = std::max(std::abs(p.response), 1e-300);
        fit.residuals[k] = std::abs(model_value - p.response) / denom;
        fit.max_residual = std::max(fit.max_residual, fit.residuals[k]);
    }
    return fit;
}

bool MimoResult::any_estimate() const {
    for (const auto& run : channels) {
        if (run.estimate.has_value()) {
            return true;
        }
    }
    return false;
}

MimoResult identify_mimo(const std::vector<SampledRecord>& inputs,
                         const std::vector<SampledRecord>& outputs, const MimoConfig& config) {
    require(!inputs.empty() && !outputs.empty(), "identify_mimo: need at least one input and one output");
    for (const auto& r : inputs) {
        r.validate();
    }
    for (const auto& r : outputs) {
        r.validate();
    }
    const SampledRecord& ref = inputs.front();
    auto check_common = [&](const SampledRecord& r) {
        require(std::abs(r.start_time - ref.start_time) <= 1e-9 * std::max(1.0, ref.duration()) &&
                    r.sample_period == ref.sample_period && r.count() == ref.count(),
                "identify_mimo: records are not sampled on a common grid ('" + r.channel_id + "')");
    };
    for (const auto& r : inputs) {
        check_common(r);
    }
    for (const auto& r : outputs) {
        check_common(r);
    }

    const double duration = ref.duration();
    const double delta = config.delta > 0.0 ? config.delta : kTwoPi / duration;
    const double step = config.grid_step > 0.0 ? config.grid_step : 0.25 * delta;
    const double omega_min = config.omega_min >= 0.0 ? config.omega_min : delta;
    const double omega_max = config.omega_max > 0.0 ? config.omega_max : 0.95 * ref.nyquist();
    require(omega_min < omega_max, "identify_mimo: empty scan band");

    MimoResult result;
    result.delta = delta;

    auto detect = [&](const SampledRecord& r) {
        SpectrumScan scan = scan_spectrum(r, omega_min, omega_max, step);
        scan.coincidence_delta = delta;  // honor an explicit tolerance override
        return detect_frequencies(scan, config.peaks);
    };

    for (const auto& r : inputs) {
        result.input_detected.push_back(detect(r));
    }
    for (const auto& r : outputs) {
        result.output_detected.push_back(detect(r));
    }

    if (inputs.size() >= 2) {
        DecorrelateResult dec = decorrelate(result.input_detected);
        result.input_decorrelated = std::move(dec.outputs);
        result.coupling = std::move(dec.coupling);
    } else {
        result.input_decorrelated = result.input_detected;
        result.coupling = FrequencySet({}, delta, "coupling");
    }

    for (std::size_t q = 0; q < inputs.size(); ++q) {
        for (std::size_t p = 0; p < outputs.size(); ++p) {
            ChannelRun run;
            run.input_index = q;
            run.output_index = p;
            run.match = set_intersect(result.input_decorrelated[q], result.output_detected[p]);
            std::vector<double> mids = run.match.midpoints();
            std::sort(mids.begin(), mids.end());
            mids.erase(std::unique(mids.begin(), mids.end()), mids.end());
            run.matched = FrequencySet(mids, delta,
                                       inputs[q].channel_id + "~" + outputs[p].channel_id);
            if (run.matched.empty()) {
                run.failure = "no common frequencies between input and output detections";
                result.channels.push_back(std::move(run));
                continue;
            }
            try {
                run.estimate = estimate_response(inputs[q], outputs[p], run.matched, config.guard_ratio);
            } catch (const Error& e) {
                run.failure = e.what();
                result.channels.push_back(std::move(run));
                continue;
            }

            std::optional<FitOrders> orders = config.fit_all;
            if (auto it = config.fit_overrides.find({q, p}); it != config.fit_overrides.end()) {
                orders = it->second;
            }
            if (orders) {
                try {
                    FitResult fr = fit_rational(*run.estimate, orders->n, orders->m, orders->astatism,
                                                config.fit_options);
                    run.fit_max_residual = fr.max_residual;
                    run.estimate->fit = std::move(fr.model);
                } catch (const Error& e) {
                    run.fit_error = e.what();
                }
            }
            result.channels.push_back(std::move(run));
        }
    }

    // classify every detected output line: exact (matched to an input),
    // coupling, or unexplained
    result.output_provenance.resize(outputs.size());
    for (std::size_t p = 0; p < outputs.size(); ++p) {
        for (double w : result.output_detected[p].freqs()) {
            ProvenanceEntry entry;
            entry.omega = w;
            for (std::size_t q = 0; q < inputs.size() && entry.kind == ProvenanceEntry::Kind::unexplained;
                 ++q) {
                const auto& run = result.channels[q * outputs.size() + p];
                for (double mid : run.matched.freqs()) {
                    if (std::abs(mid - w) <= delta) {
                        entry.kind = ProvenanceEntry::Kind::matched_input;
                        entry.detail = inputs[q].channel_id;
                        break;
                    }
                }
            }
            if (entry.kind == ProvenanceEntry::Kind::unexplained) {
                for (double c : result.coupling.freqs()) {
                    if (std::abs(c - w) <= delta) {
                        entry.kind = ProvenanceEntry::Kind::coupling;
                        break;
                    }
                }
            }
            result.output_provenance[p].push_back(entry);
        }
    }
    return result;
}

}  // namespace fsep
