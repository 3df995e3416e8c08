#include "fockpass/spectra.hpp"

#include "fockpass/errors.hpp"
#include "fockpass/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fockpass {

EigenSystem eigen_decompose(const HermitianOperator& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix());
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigen_decompose: eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

EigenSystem eigen_decompose(const Eigen::MatrixXcd& h) {
    return eigen_decompose(HermitianOperator(h));
}

// ---------------------------------------------------------------------------

std::vector<double> AxisRange::samples() const {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
        throw ConfigError("axis range must satisfy lo < hi");
    if (points < 2) throw ConfigError("axis range needs at least 2 points");
    std::vector<double> out(static_cast<std::size_t>(points));
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) out[i] = lo + step * i;
    out.back() = hi;
    return out;
}

SurfaceGrid surface_grid(const ModelParams& params, const AxisRange& g_range,
                         const AxisRange& omega_range, bool display_offset, int workers) {
    params.validate();
    SurfaceGrid grid;
    grid.g_axis = g_range.samples();
    grid.omega_axis = omega_range.samples();
    grid.sheet_count = params.dim();
    grid.display_offset_applied = display_offset;

    const std::size_t n_omega = grid.omega_axis.size();
    const std::size_t points = grid.g_axis.size() * n_omega;
    const auto sheets = static_cast<std::size_t>(grid.sheet_count);
    grid.sheets.assign(points * sheets, 0.0);

    parallel_for(points, workers, [&](std::size_t p) {
        const double g = grid.g_axis[p / n_omega];
        const double omega = grid.omega_axis[p % n_omega];
        const auto h = build_effective_hamiltonian(params, g, omega);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix(), Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success)
            throw NumericalError("surface_grid: eigensolver did not converge");
        const double offset = display_offset ? g : 0.0;
        for (std::size_t s = 0; s < sheets; ++s)
            grid.sheets[p * sheets + s] = solver.eigenvalues()[static_cast<Eigen::Index>(s)] + offset;
    });
    return grid;
}

// ---------------------------------------------------------------------------

std::string to_string(Plane plane) {
    return plane == Plane::omega_zero ? "omega=0" : "g=0";
}

Plane plane_from_string(const std::string& name) {
    if (name == "omega=0" || name == "omega0" || name == "omega_zero") return Plane::omega_zero;
    if (name == "g=0" || name == "g0" || name == "g_zero") return Plane::g_zero;
    throw ConfigError("unknown plane '" + name + "' (expected omega=0 or g=0)");
}

namespace {

constexpr int kScanSteps = 2000;
constexpr int kRefineSubsteps = 50;
constexpr double kBisectionResolution = 1e-10;
constexpr double kFlatGap = 1e-11;

// Eigen-decomposition along one axis of the (G, Omega) plane.
class PlaneCut {
public:
    PlaneCut(const ModelParams& params, Plane plane)
        : params_(params),
          plane_(plane),
          derivative_(plane == Plane::omega_zero ? effective_coupling_g(params)
                                                 : effective_coupling_omega(params)) {}

    EigenSystem at(double x) const {
        const double g = plane_ == Plane::omega_zero ? x : 0.0;
        const double omega = plane_ == Plane::omega_zero ? 0.0 : x;
        return eigen_decompose(build_effective_hamiltonian(params_, g, omega));
    }

    // d(lambda_{i+1} - lambda_i)/dx by Hellmann–Feynman.
    double gap_slope(const EigenSystem& es, int i) const {
        const auto upper = es.vectors.col(i + 1);
        const auto lower = es.vectors.col(i);
        const double d_upper = (upper.adjoint() * derivative_.cast<cplx>() * upper)(0, 0).real();
        const double d_lower = (lower.adjoint() * derivative_.cast<cplx>() * lower)(0, 0).real();
        return d_upper - d_lower;
    }

    Plane plane() const { return plane_; }

private:
    ModelParams params_;
    Plane plane_;
    Eigen::MatrixXd derivative_;
};

struct Refined {
    double x{};
    double gap{};
    double energy{};
};

// Bisection on the sign of the gap slope inside [lo, hi].
Refined refine_minimum(const PlaneCut& cut, int pair, double lo, double hi) {
    while (hi - lo > kBisectionResolution) {
        const double mid = 0.5 * (lo + hi);
        const auto es = cut.at(mid);
        if (cut.gap_slope(es, pair) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    Refined best{};
    best.gap = std::numeric_limits<double>::infinity();
    for (double x : {lo, 0.5 * (lo + hi), hi}) {
        const auto es = cut.at(x);
        const double gap = es.values[pair + 1] - es.values[pair];
        if (gap < best.gap) best = {x, gap, 0.5 * (es.values[pair + 1] + es.values[pair])};
    }
    return best;
}

// Indices k of local minima of samples[k] (interior and right end). Changes
// smaller than `flat` count as no change, so rounding noise on a constant gap
// does not produce spurious minima; a flat basin reports its first point.
std::vector<std::size_t> local_minima(const std::vector<double>& samples, double flat) {
    std::vector<std::size_t> out;
    int last_dir = 0;
    std::size_t basin = 0;
    for (std::size_t k = 1; k < samples.size(); ++k) {
        const double d = samples[k] - samples[k - 1];
        const int dir = d < -flat ? -1 : (d > flat ? 1 : 0);
        if (dir == 0) continue;
        if (dir > 0 && last_dir < 0) out.push_back(basin);
        if (dir < 0) basin = k;
        last_dir = dir;
    }
    if (last_dir < 0) out.push_back(basin);
    return out;
}

}  // namespace

IntersectionSearch locate_intersections(const ModelParams& params, Plane plane, double field_max) {
    params.validate();
    if (!std::isfinite(field_max) || !(field_max > 0.0))
        throw ConfigError("locate_intersections: field_max must be positive");

    const PlaneCut cut(params, plane);
    const int pairs = params.dim() - 1;
    const double step = field_max / kScanSteps;
    const double flat = kFlatGap * params.delta;

    std::vector<double> xs(kScanSteps + 1);
    std::vector<std::vector<double>> gaps(static_cast<std::size_t>(pairs),
                                          std::vector<double>(xs.size()));
    for (std::size_t k = 0; k < xs.size(); ++k) {
        xs[k] = step * static_cast<double>(k);
        const auto es = cut.at(xs[k]);
        for (int i = 0; i < pairs; ++i) gaps[i][k] = es.values[i + 1] - es.values[i];
    }

    IntersectionSearch result;
    auto record = [&](int pair, const Refined& r) {
        if (r.x <= 0.0 || r.x > field_max) return;
        result.records.push_back({plane, r.x, {pair, pair + 1}, r.gap, r.energy});
    };

    for (int i = 0; i < pairs; ++i) {
        for (std::size_t k : local_minima(gaps[i], flat)) {
            const double lo = xs[k - 1];
            const double hi = k + 1 < xs.size() ? xs[k + 1] : xs[k];
            const Refined r = refine_minimum(cut, i, lo, hi);
            if (r.gap < kDegeneracyGap) {
                record(i, r);
                continue;
            }
            // Either an avoided crossing or several touching points merged
            // within one scan step: look again on a finer grid.
            const double fine_step = (hi - lo) / kRefineSubsteps;
            std::vector<double> fine(kRefineSubsteps + 1);
            for (int j = 0; j <= kRefineSubsteps; ++j) {
                const auto es = cut.at(lo + fine_step * j);
                fine[j] = es.values[i + 1] - es.values[i];
            }
            int found = 0;
            for (std::size_t j : local_minima(fine, flat)) {
                const double flo = lo + fine_step * static_cast<double>(j - 1);
                const double fhi = lo + fine_step * static_cast<double>(std::min<std::size_t>(j + 1, kRefineSubsteps));
                const Refined fr = refine_minimum(cut, i, flo, fhi);
                if (fr.gap < kDegeneracyGap) {
                    record(i, fr);
                    ++found;
                }
            }
            if (found > 0) {
                std::ostringstream msg;
                msg << "sheets " << i << "/" << i + 1 << " near " << to_string(plane)
                    << " field " << xs[k] << ": degeneracies closer than the scan step, refined ("
                    << found << " found)";
                result.warnings.push_back(msg.str());
            }
        }
    }

    std::sort(result.records.begin(), result.records.end(),
              [](const IntersectionRecord& a, const IntersectionRecord& b) {
                  if (a.field_value != b.field_value) return a.field_value < b.field_value;
                  return a.surface_pair.first < b.surface_pair.first;
              });
    return result;
}

// ---------------------------------------------------------------------------

TransferThresholds transfer_thresholds(const ModelParams& params, double g_limit,
                                       double omega_limit) {
    TransferThresholds t;
    // At Omega = 0, |-,0> is an exact eigenvector with eigenvalue 0: its
    // crossings are the G* thresholds.
    for (const auto& r : locate_intersections(params, Plane::omega_zero, g_limit).records) {
        if (std::abs(r.energy) < 1e-7 * params.delta) t.g_star.push_back(r.field_value);
    }
    for (const auto& r : locate_intersections(params, Plane::g_zero, omega_limit).records) {
        if (t.omega_star.empty() || r.field_value - t.omega_star.back() > 1e-7 * params.delta)
            t.omega_star.push_back(r.field_value);
    }
    return t;
}

TransferPrediction predict_transfer(const TransferThresholds& thresholds, double g_max,
                                    double omega_max) {
    if (!std::isfinite(g_max) || !std::isfinite(omega_max) || g_max < 0.0 || omega_max < 0.0)
        throw ConfigError("predict_transfer: amplitudes must be finite and non-negative");

    TransferPrediction p;
    for (double g : thresholds.g_star) {
        if (g < g_max) ++p.g_crossings;
        if (std::abs(g_max - g) <= 0.05 * g) {
            std::ostringstream msg;
            msg << "g_max " << g_max << " within 5% of threshold G* = " << g
                << "; prediction unreliable";
            p.warnings.push_back(msg.str());
        }
    }
    for (double om : thresholds.omega_star)
        if (om < omega_max) ++p.omega_crossings;
    p.n = std::min(p.g_crossings, p.omega_crossings);
    if (!thresholds.g_star.empty() && p.g_crossings == static_cast<int>(thresholds.g_star.size()) &&
        g_max > thresholds.g_star.back())
        p.warnings.push_back("g_max beyond the last threshold resolved by the basis truncation");
    return p;
}

TransferPrediction predict_transfer(const ModelParams& params, double g_max, double omega_max) {
    if (!std::isfinite(g_max) || !std::isfinite(omega_max) || g_max < 0.0 || omega_max < 0.0)
        throw ConfigError("predict_transfer: amplitudes must be finite and non-negative");
    // Search beyond the amplitudes until a threshold above g_max shows up, so
    // near-threshold and end-of-ladder warnings see what lies just above.
    double g_limit = 1.1 * g_max + 0.1 * params.delta;
    const double omega_limit = 1.1 * omega_max + 0.1 * params.delta;
    auto t = transfer_thresholds(params, g_limit, omega_limit);
    for (int attempt = 0; attempt < 4 && (t.g_star.empty() || t.g_star.back() <= g_max); ++attempt) {
        g_limit *= 1.5;
        t.g_star = transfer_thresholds(params, g_limit, params.delta).g_star;
    }
    return predict_transfer(t, g_max, omega_max);
}

// ---------------------------------------------------------------------------

std::vector<TrackedPoint> follow_adiabatic_state(const ModelParams& params,
                                                 const std::vector<std::pair<double, double>>& path,
                                                 int start_sheet) {
    if (path.empty()) return {};
    if (start_sheet < 0 || start_sheet >= params.dim())
        throw ConfigError("follow_adiabatic_state: start sheet out of range");

    auto gap_of = [](const Eigen::VectorXd& values, int s) {
        double gap = std::numeric_limits<double>::infinity();
        if (s > 0) gap = std::min(gap, values[s] - values[s - 1]);
        if (s + 1 < values.size()) gap = std::min(gap, values[s + 1] - values[s]);
        return gap;
    };

    std::vector<TrackedPoint> out;
    out.reserve(path.size());
    auto es = eigen_decompose(build_effective_hamiltonian(params, path[0].first, path[0].second));
    Eigen::VectorXcd current = es.vectors.col(start_sheet);
    out.push_back({start_sheet, 1.0, gap_of(es.values, start_sheet)});

    for (std::size_t k = 1; k < path.size(); ++k) {
        es = eigen_decompose(build_effective_hamiltonian(params, path[k].first, path[k].second));
        const Eigen::VectorXd overlaps = (es.vectors.adjoint() * current).cwiseAbs();
        Eigen::Index best = 0;
        overlaps.maxCoeff(&best);
        current = es.vectors.col(best);
        out.push_back({static_cast<int>(best), overlaps[best], gap_of(es.values, static_cast<int>(best))});
    }
    return out;
}

}  // namespace fockpass
