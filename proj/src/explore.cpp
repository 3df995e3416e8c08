#include "fockpass/explore.hpp"

#include "fockpass/errors.hpp"
#include "fockpass/parallel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fockpass {

Plateau extract_plateau(const std::vector<double>& g_axis, const std::vector<double>& omega_axis,
                        const std::vector<double>& population_map, double level) {
    const std::size_t rows = g_axis.size();
    const std::size_t cols = omega_axis.size();
    if (population_map.size() != rows * cols)
        throw ConfigError("extract_plateau: map size does not match axes");

    // Maximal rectangle: per row, heights of consecutive qualifying points
    // ending at that row, then largest rectangle under the histogram.
    std::vector<std::size_t> height(cols, 0);
    std::size_t best_area = 0;
    Plateau best;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double p = population_map[r * cols + c];
            height[c] = (std::isfinite(p) && p > level) ? height[c] + 1 : 0;
        }
        std::vector<std::size_t> stack;
        for (std::size_t c = 0; c <= cols; ++c) {
            const std::size_t h = c < cols ? height[c] : 0;
            while (!stack.empty() && height[stack.back()] >= h) {
                const std::size_t top = stack.back();
                stack.pop_back();
                const std::size_t hgt = height[top];
                if (hgt == 0) continue;
                const std::size_t left = stack.empty() ? 0 : stack.back() + 1;
                const std::size_t width = c - left;
                const std::size_t area = hgt * width;
                if (area > best_area) {
                    best_area = area;
                    best.found = true;
                    best.ig_lo = r + 1 - hgt;
                    best.ig_hi = r;
                    best.io_lo = left;
                    best.io_hi = c - 1;
                }
            }
            stack.push_back(c);
        }
    }
    if (!best.found) return best;

    auto step = [](const std::vector<double>& axis) {
        return axis.size() > 1 ? (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1)
                               : 0.0;
    };
    best.g_lo = g_axis[best.ig_lo];
    best.g_hi = g_axis[best.ig_hi];
    best.omega_lo = omega_axis[best.io_lo];
    best.omega_hi = omega_axis[best.io_hi];
    best.g_extent = static_cast<double>(best.ig_hi - best.ig_lo + 1) * step(g_axis);
    best.omega_extent = static_cast<double>(best.io_hi - best.io_lo + 1) * step(omega_axis);
    best.center_g = 0.5 * (best.g_lo + best.g_hi);
    best.center_omega = 0.5 * (best.omega_lo + best.omega_hi);
    return best;
}

ScanResult robustness_scan(const ModelParams& params, const PulseSchedule& schedule_template,
                           const AxisRange& g_range, const AxisRange& omega_range, int target_n,
                           int workers, const PropagationOptions& options) {
    params.validate();
    schedule_template.validate();
    if (target_n < 0 || target_n > params.n_max)
        throw ConfigError("robustness_scan: target_n outside the truncated basis");

    ScanResult result;
    result.g_max_axis = g_range.samples();
    result.omega_max_axis = omega_range.samples();
    result.target_n = target_n;

    const std::size_t n_omega = result.omega_max_axis.size();
    const std::size_t points = result.g_max_axis.size() * n_omega;
    result.population_map.assign(points, std::numeric_limits<double>::quiet_NaN());
    result.predictor_map.assign(points, 0);

    double g_abs_max = 0.0, omega_abs_max = 0.0;
    for (double g : result.g_max_axis) g_abs_max = std::max(g_abs_max, std::abs(g));
    for (double o : result.omega_max_axis) omega_abs_max = std::max(omega_abs_max, std::abs(o));
    const auto thresholds = transfer_thresholds(params, 1.1 * g_abs_max + 0.1 * params.delta,
                                                1.1 * omega_abs_max + 0.1 * params.delta);

    const auto initial = StateVector::basis(params.n_max, {Atom::lower, 0});
    const auto target = static_cast<std::size_t>(BasisIndex{Atom::lower, target_n}.flat());
    std::vector<std::string> errors(points);

    parallel_for(points, workers, [&](std::size_t p) {
        const double g = result.g_max_axis[p / n_omega];
        const double omega = result.omega_max_axis[p % n_omega];
        result.predictor_map[p] = predict_transfer(thresholds, std::abs(g), std::abs(omega)).n;
        PulseSchedule schedule = schedule_template;
        schedule.g_max = g;
        schedule.omega_max = omega;
        try {
            const auto traj = propagate(params, schedule, initial, options);
            result.population_map[p] = traj.final_populations()[target];
        } catch (const NumericalError& e) {
            errors[p] = e.what();
        }
    });

    for (std::size_t p = 0; p < points; ++p)
        if (!errors[p].empty()) result.failures.push_back({p / n_omega, p % n_omega, errors[p]});

    result.plateau = extract_plateau(result.g_max_axis, result.omega_max_axis, result.population_map);
    return result;
}

// ---------------------------------------------------------------------------

namespace {

// Grows the search range until `count` thresholds are available or the
// range is clearly beyond what the basis can resolve.
std::vector<double> enough_thresholds(const ModelParams& params, Plane plane, std::size_t count) {
    double limit = (static_cast<double>(count) + 1.0) * params.delta + std::abs(params.delta_M);
    for (int attempt = 0; attempt < 6; ++attempt, limit *= 2.0) {
        const auto t = plane == Plane::omega_zero ? transfer_thresholds(params, limit, params.delta)
                                                  : transfer_thresholds(params, params.delta, limit);
        const auto& values = plane == Plane::omega_zero ? t.g_star : t.omega_star;
        if (values.size() >= count) return values;
    }
    return {};
}

}  // namespace

PulseDesign design_pulses(const ModelParams& params, int target_n, double t_int, double tau,
                          bool validate, const PropagationOptions& options) {
    params.validate();
    if (target_n < 1) throw ConfigError("design_pulses: target_n must be at least 1");
    if (params.n_max < target_n + 1) {
        std::ostringstream msg;
        msg << "design_pulses: n_max = " << params.n_max << " cannot resolve G*_" << target_n + 1
            << "; use n_max >= " << target_n + 6;
        throw ConfigError(msg.str());
    }

    const auto g_star = enough_thresholds(params, Plane::omega_zero, static_cast<std::size_t>(target_n) + 1);
    const auto omega_star = enough_thresholds(params, Plane::g_zero, static_cast<std::size_t>(target_n));
    if (g_star.size() < static_cast<std::size_t>(target_n) + 1 ||
        omega_star.size() < static_cast<std::size_t>(target_n))
        throw NumericalError("design_pulses: could not locate the intersections needed for the design");

    PulseDesign design;
    auto& why = design.rationale;
    why.target_n = target_n;
    why.g_star_lower = g_star[target_n - 1];
    why.g_star_upper = g_star[target_n];
    why.omega_star_target = omega_star[target_n - 1];

    const double g_max = std::sqrt(why.g_star_lower * why.g_star_upper);
    const double omega_max = why.omega_factor * why.omega_star_target;
    design.schedule = PulseSchedule::with_default_window(g_max, omega_max, t_int, tau);
    design.schedule.validate();

    why.predicted_n = predict_transfer(params, g_max, omega_max).n;
    if (why.predicted_n != target_n) {
        std::ostringstream msg;
        msg << "design_pulses: designed amplitudes predict n = " << why.predicted_n << " instead of "
            << target_n;
        throw NumericalError(msg.str());
    }
    why.adiabaticity = adiabaticity_metric(params, design.schedule);

    if (validate) {
        const auto traj = propagate(params, design.schedule,
                                    StateVector::basis(params.n_max, {Atom::lower, 0}), options);
        why.validation_population = traj.final_population({Atom::lower, target_n});
    }
    return design;
}

}  // namespace fockpass
