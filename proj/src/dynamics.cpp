#include "fockpass/dynamics.hpp"

#include "fockpass/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fockpass {

namespace {

const double kSqrtLn2 = std::sqrt(std::log(2.0));

std::vector<double> sample_times(const PulseSchedule& schedule, int samples) {
    if (samples < 2) throw ConfigError("propagation needs at least 2 output samples");
    std::vector<double> times(static_cast<std::size_t>(samples));
    const double dt = (schedule.t_end - schedule.t_start) / (samples - 1);
    for (int k = 0; k < samples; ++k) times[k] = schedule.t_start + dt * k;
    times.back() = schedule.t_end;
    return times;
}

// Runs the integrator over the schedule window, sampling populations.
TrajectoryRecord run_sampled(Rk853& stepper, const PulseSchedule& schedule,
                             const StateVector& initial, const PropagationOptions& options) {
    TrajectoryRecord record;
    record.times = sample_times(schedule, options.samples);
    record.populations.reserve(record.times.size());
    record.norm_drift.reserve(record.times.size());

    stepper.set_observer([&](double t, const Eigen::VectorXcd& y) {
        const double drift = std::abs(y.norm() - 1.0);
        if (drift > options.norm_drift_limit) {
            std::ostringstream msg;
            msg << "propagate: norm drift " << drift << " exceeds " << options.norm_drift_limit
                << " at t = " << t;
            throw NumericalError(msg.str());
        }
    });
    stepper.reset(schedule.t_start, initial.amplitudes());

    for (double t : record.times) {
        stepper.advance_to(t);
        const auto& y = stepper.state();
        std::vector<double> pops(static_cast<std::size_t>(y.size()));
        for (Eigen::Index i = 0; i < y.size(); ++i) pops[i] = std::norm(y[i]);
        record.populations.push_back(std::move(pops));
        record.norm_drift.push_back(std::abs(y.norm() - 1.0));
    }
    record.final_state = stepper.state();
    record.stats = stepper.stats();
    return record;
}

}  // namespace

// ---------------------------------------------------------------------------

PulseSchedule PulseSchedule::with_default_window(double g_max, double omega_max, double t_int,
                                                 double tau) {
    PulseSchedule s{g_max, omega_max, t_int, tau, 0.0, 0.0};
    s.t_start = -kWindowHalfWidths * t_int;
    s.t_end = tau + kWindowHalfWidths * t_int;
    return s;
}

double PulseSchedule::sigma() const { return t_int / (2.0 * kSqrtLn2); }

double PulseSchedule::tail_ratio() const {
    const double s = sigma();
    auto shape = [s](double x) { return std::exp(-(x / s) * (x / s)); };
    return std::max({shape(t_start), shape(t_end), shape(t_start - tau), shape(t_end - tau)});
}

void PulseSchedule::validate() const {
    for (double v : {g_max, omega_max, t_int, tau, t_start, t_end})
        if (!std::isfinite(v)) throw ConfigError("schedule: non-finite value");
    if (!(t_int > 0.0)) throw ConfigError("schedule: t_int must be positive");
    if (!(t_end > t_start)) throw ConfigError("schedule: t_end must exceed t_start");
    if (tail_ratio() >= kTailTolerance) {
        std::ostringstream msg;
        msg << "schedule: window too narrow, envelope tail " << tail_ratio() << " >= "
            << kTailTolerance << " of peak";
        throw ConfigError(msg.str());
    }
}

Envelope envelope(const PulseSchedule& schedule, double t) {
    const double s = schedule.sigma();
    const double xg = t / s;
    const double xo = (t - schedule.tau) / s;
    return {schedule.g_max * std::exp(-xg * xg), schedule.omega_max * std::exp(-xo * xo)};
}

// ---------------------------------------------------------------------------

StateVector::StateVector(Eigen::VectorXcd amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() == 0) throw ConfigError("state vector is empty");
    if (std::abs(amplitudes_.norm() - 1.0) > kNormTolerance)
        throw ConfigError("state vector is not normalized");
}

StateVector StateVector::basis(int n_max, BasisIndex index) {
    if (n_max < 1 || index.n < 0 || index.n > n_max)
        throw ConfigError("basis state outside the truncated basis");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * (n_max + 1));
    v[index.flat()] = 1.0;
    return StateVector(std::move(v));
}

double TrajectoryRecord::max_norm_drift() const {
    return norm_drift.empty() ? 0.0 : *std::max_element(norm_drift.begin(), norm_drift.end());
}

// ---------------------------------------------------------------------------

TrajectoryRecord propagate(const ModelParams& params, const PulseSchedule& schedule,
                           const StateVector& initial, const PropagationOptions& options) {
    params.validate();
    schedule.validate();
    if (initial.dim() != params.dim())
        throw ConfigError("propagate: initial state dimension does not match the basis");

    // Interaction frame of the field-free part D = H(0, 0), which is diagonal:
    // z = exp(iDt) y, dz/dt = -i exp(iDt) (G(t) dH/dG + Omega(t) dH/dOmega) exp(-iDt) z.
    const Eigen::VectorXd d = build_effective_hamiltonian(params, 0.0, 0.0).matrix().diagonal().real();
    const Eigen::MatrixXd cg = effective_coupling_g(params);
    const Eigen::MatrixXd co = effective_coupling_omega(params);
    struct Link {
        Eigen::Index row, col;
        double g, omega, freq;
    };
    std::vector<Link> links;
    for (Eigen::Index j = 0; j < cg.cols(); ++j)
        for (Eigen::Index i = 0; i < cg.rows(); ++i)
            if (cg(i, j) != 0.0 || co(i, j) != 0.0) links.push_back({i, j, cg(i, j), co(i, j), d[i] - d[j]});

    auto rhs = [&](double t, const Eigen::VectorXcd& z, Eigen::VectorXcd& dzdt) {
        const Envelope e = envelope(schedule, t);
        dzdt.setZero();
        for (const Link& l : links) {
            const double a = e.g * l.g + e.omega * l.omega;
            if (a == 0.0) continue;
            // -i a exp(i freq t)
            const double ph = l.freq * t;
            dzdt[l.row] += cplx(a * std::sin(ph), -a * std::cos(ph)) * z[l.col];
        }
    };
    auto to_frame = [&](double t, Eigen::VectorXcd v, double sign) {
        for (Eigen::Index k = 0; k < v.size(); ++k) v[k] *= std::polar(1.0, sign * d[k] * t);
        return v;
    };

    Rk853 stepper(rhs, {options.rtol, options.atol, options.h_max});
    const StateVector start(to_frame(schedule.t_start, initial.amplitudes(), 1.0));
    auto record = run_sampled(stepper, schedule, start, options);
    record.final_state = to_frame(schedule.t_end, record.final_state, -1.0);
    return record;
}

// ---------------------------------------------------------------------------

AdiabaticityReport adiabaticity_metric(const ModelParams& params, const PulseSchedule& schedule) {
    params.validate();
    AdiabaticityReport r;
    const double t = std::max(0.0, schedule.t_int);
    r.delta_m_product = std::abs(params.delta_M) * t;
    r.delta_c_product = std::abs(params.delta_C) * t;
    r.g_product = std::abs(schedule.g_max) * t;
    auto check = [&](double v, const char* name) {
        if (!(v > kAdiabaticityThreshold)) {
            std::ostringstream msg;
            msg << name << " = " << v << " is not >> 1 (threshold " << kAdiabaticityThreshold << ")";
            r.warnings.push_back(msg.str());
        }
    };
    check(r.delta_m_product, "|Delta_M| T_int");
    check(r.delta_c_product, "|Delta_C| T_int");
    check(r.g_product, "G_max T_int");
    r.pass = r.warnings.empty();
    return r;
}

double physical_adiabaticity_product(double rabi_hz, double t_int_s, RabiConvention convention) {
    const double rate =
        convention == RabiConvention::cyclic_times_2pi ? 2.0 * std::numbers::pi * rabi_hz : rabi_hz;
    return rate * t_int_s;
}

// ---------------------------------------------------------------------------

TrajectoryRecord propagate_semiclassical(const SemiclassicalParams& sc, const ModelParams& params,
                                         const PulseSchedule& schedule, const StateVector& initial,
                                         const SemiclassicalOptions& options) {
    params.validate();
    sc.check_consistent(params);
    schedule.validate();
    if (initial.dim() != params.dim())
        throw ConfigError("propagate_semiclassical: initial state dimension does not match the basis");
    if (options.steps_per_period < 1)
        throw ConfigError("propagate_semiclassical: steps_per_period must be positive");

    const double ratio = sc.rwa_ratio(schedule.g_max, schedule.omega_max);
    if (ratio >= kRwaRatioLimit) {
        std::ostringstream msg;
        msg << "rotating-wave approximation invalid: max(|G|, |Omega|) / omega_0 = " << ratio
            << " >= " << kRwaRatioLimit;
        throw ValidationError(msg.str());
    }

    const Eigen::MatrixXcd h0 = build_semiclassical_hamiltonian(sc, params, 0.0, 0.0, 0.0).matrix();
    const Eigen::MatrixXcd cg = effective_coupling_g(params).cast<cplx>();
    Eigen::MatrixXcd h(h0.rows(), h0.cols());
    const cplx minus_i{0.0, -1.0};
    const int n_max = params.n_max;

    auto rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dydt) {
        const Envelope e = envelope(schedule, t);
        h = h0 + e.g * cg;
        const cplx maser = 0.5 * e.omega * std::polar(1.0, -(sc.theta_0 + sc.omega_M * t));
        for (int n = 0; n <= n_max; ++n) {
            h(2 * n + 1, 2 * n) = maser;
            h(2 * n, 2 * n + 1) = std::conj(maser);
        }
        dydt.noalias() = h * y;
        dydt *= minus_i;
    };

    PropagationOptions prop = options.propagation;
    const double period_step = 2.0 * std::numbers::pi / sc.omega_M / options.steps_per_period;
    prop.h_max = prop.h_max > 0.0 ? std::min(prop.h_max, period_step) : period_step;

    Rk853 stepper(rhs, {prop.rtol, prop.atol, prop.h_max});
    TrajectoryRecord record = run_sampled(stepper, schedule, initial, prop);
    if (sc.omega_M < 100.0 * params.delta)
        record.warnings.push_back("omega_M < 100 delta: weak time-scale separation");
    return record;
}

// ---------------------------------------------------------------------------

TruncationReport truncation_check(const ModelParams& params, const PulseSchedule& schedule,
                                  const PropagationOptions& options) {
    params.validate();
    TruncationReport report;
    report.n_max = params.n_max;
    report.n_max_extended = params.n_max + kTruncationExtension;

    ModelParams extended = params;
    extended.n_max = report.n_max_extended;

    const auto start = BasisIndex{Atom::lower, 0};
    const auto small = propagate(params, schedule, StateVector::basis(params.n_max, start), options);
    const auto large =
        propagate(extended, schedule, StateVector::basis(extended.n_max, start), options);

    const auto& ps = small.final_populations();
    const auto& pl = large.final_populations();
    double diff = 0.0;
    for (std::size_t i = 0; i < pl.size(); ++i) {
        const double a = i < ps.size() ? ps[i] : 0.0;
        diff = std::max(diff, std::abs(a - pl[i]));
    }
    report.max_population_difference = diff;

    const auto lower_edge = static_cast<std::size_t>(BasisIndex{Atom::lower, params.n_max}.flat());
    const auto upper_edge = static_cast<std::size_t>(BasisIndex{Atom::upper, params.n_max}.flat());
    for (const auto& pops : small.populations)
        report.boundary_population =
            std::max({report.boundary_population, pops[lower_edge], pops[upper_edge]});

    report.converged = diff < kTruncationTolerance;
    if (report.boundary_population > kBoundaryPopulationLimit) {
        std::ostringstream msg;
        msg << "population " << report.boundary_population << " reaches the truncation boundary n = "
            << params.n_max;
        report.warnings.push_back(msg.str());
    }
    report.suggested_n_max = report.converged ? params.n_max : report.n_max_extended + kTruncationExtension;
    if (!report.converged) {
        std::ostringstream msg;
        msg << "not converged: final populations differ by " << diff << " between n_max = "
            << report.n_max << " and " << report.n_max_extended << "; try n_max >= "
            << report.suggested_n_max;
        report.warnings.push_back(msg.str());
    }
    return report;
}

}  // namespace fockpass
