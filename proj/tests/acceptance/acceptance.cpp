// End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero exit
// status if any criterion fails.

#include "support.hpp"

#include "fockpass/config.hpp"
#include "fockpass/dynamics.hpp"
#include "fockpass/explore.hpp"
#include "fockpass/io.hpp"
#include "fockpass/parallel.hpp"
#include "fockpass/spectra.hpp"

#include <json.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fockpass;

namespace {

const fs::path kFixtures = FOCKPASS_FIXTURE_DIR;
const fs::path kWork = fs::temp_directory_path() / "fockpass_acceptance";

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << detail << std::endl;
}

// Runs a criterion body; exceptions count as failures.
template <class F>
void criterion(int id, const std::string& name, F body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream s;
    s << detail << " (" << std::fixed;
    s.precision(1);
    s << secs << " s)";
    report(id, name, pass, s.str());
}

std::string fmt(double v) { return io::format_double(v); }

RunConfig load_fixture(const std::string& name) {
    return parse_config(json::parse(testing::slurp((kFixtures / name).string())));
}

double final_lower(const RunConfig& cfg, const PulseSchedule& s, int n) {
    const auto r = propagate(cfg.model, s, StateVector::basis(cfg.model.n_max, {Atom::lower, 0}));
    return r.final_population({Atom::lower, n});
}

// The 32 x 32 scan through the command-line tool, as a user would run it.
json cli_scan(int target_n) {
    const fs::path out = kWork / ("scan_" + std::to_string(target_n));
    fs::remove_all(out);
    fs::create_directories(out);
    const fs::path config = kWork / "defaults.json";
    io::write_atomic(config, "{\"schema\": 1}\n");
    const std::string cmd = std::string("\"") + FOCKPASS_CLI_PATH + "\" scan --config \"" + config.string() +
                            "\" --out \"" + out.string() + "\" --set scan.target_n=" + std::to_string(target_n) +
                            " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) throw std::runtime_error("scan command failed: " + cmd);
    return json::parse(testing::slurp((out / "scan_summary.json").string()));
}

bool transfer_at_center(const json& summary, int n, double bound, std::string& detail) {
    const auto plateau = io::plateau_from_json(summary.at("plateau"));
    if (!plateau.found) {
        detail = "no plateau above " + fmt(kPlateauLevel);
        return false;
    }
    const RunConfig cfg = parse_config(json{{"schema", 1}});
    const auto s = PulseSchedule::with_default_window(plateau.center_g, plateau.center_omega, 66.0, 57.0);
    const double p = final_lower(cfg, s, n);
    detail = "center (G, Omega) = (" + fmt(plateau.center_g) + ", " + fmt(plateau.center_omega) + "), P(-," +
             std::to_string(n) + ") = " + fmt(p) + ", required >= " + fmt(bound);
    return p >= bound;
}

double max_asymmetry(const Eigen::MatrixXcd& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

}  // namespace

int main() {
    fs::create_directories(kWork);
    json scan1, scan2;

    criterion(1, "one-photon transfer at the target_n=1 plateau center", [&](std::string& d) {
        scan1 = cli_scan(1);
        return transfer_at_center(scan1, 1, 0.98, d);
    });

    criterion(2, "two-photon transfer at the target_n=2 plateau center", [&](std::string& d) {
        scan2 = cli_scan(2);
        return transfer_at_center(scan2, 2, 0.97, d);
    });

    criterion(3, "adiabaticity metric of the fixture", [&](std::string& d) {
        const auto cfg = load_fixture("path_a.json");
        const auto r = adiabaticity_metric(cfg.model, *cfg.schedule);
        d = "|Delta_M| T_int = " + fmt(r.delta_m_product) + ", required == 33";
        return r.delta_m_product == 33.0;
    });

    criterion(4, "intersection closed forms, spacing and the empty (0,1) pair", [&](std::string& d) {
        double worst = 0.0;
        bool spacing = true, empty_pair = true, counts = true;
        for (double dm : {0.3, 0.5, 0.8}) {
            const auto p = ModelParams::from_detuning(1.0, dm, 7);
            const auto t = transfer_thresholds(p, 2.5, 4.0);
            if (t.g_star.size() < 3 || t.omega_star.size() < 3) {
                counts = false;
                continue;
            }
            for (int n = 1; n <= 3; ++n) {
                const double g2 = (n - 1) + dm;
                const double o2 = n * n - dm * dm;
                worst = std::max(worst, std::abs(t.g_star[n - 1] * t.g_star[n - 1] - g2));
                worst = std::max(worst, std::abs(t.omega_star[n - 1] * t.omega_star[n - 1] - o2));
            }
            for (std::size_t k = 2; k < t.g_star.size(); ++k)
                spacing = spacing && (t.g_star[k] - t.g_star[k - 1] < t.g_star[k - 1] - t.g_star[k - 2]);
            for (const auto& rec : locate_intersections(p, Plane::g_zero, 4.0).records)
                empty_pair = empty_pair && rec.surface_pair != std::pair{0, 1};
            // independent check: the lowest gap on G = 0 stays open
            double min_gap = INFINITY;
            for (int k = 0; k <= 4000; ++k) {
                const auto e = eigen_decompose(build_effective_hamiltonian(p, 0.0, 4.0 * k / 4000)).values;
                min_gap = std::min(min_gap, e[1] - e[0]);
            }
            empty_pair = empty_pair && min_gap > kDegeneracyGap;
        }
        d = "max closed-form residual " + fmt(worst) + " (<= 1e-8), spacing decreasing " +
            (spacing ? "yes" : "no") + ", (0,1) pair empty on G=0 " + (empty_pair ? "yes" : "no");
        return counts && worst <= 1e-8 && spacing && empty_pair;
    });

    criterion(5, "robustness anisotropy of the target_n=1 plateau", [&](std::string& d) {
        if (scan1.is_null()) scan1 = cli_scan(1);
        const auto plateau = io::plateau_from_json(scan1.at("plateau"));
        d = "Omega extent " + fmt(plateau.omega_extent) + " vs G extent " + fmt(plateau.g_extent);
        return plateau.found && plateau.omega_extent > plateau.g_extent;
    });

    criterion(6, "semiclassical oracle agreement and theta_0 independence", [&](std::string& d) {
        double worst_diff = 0.0, worst_spread = 0.0;
        for (const char* name : {"path_a.json", "path_b.json"}) {
            const auto cfg = load_fixture(name);
            const auto init = StateVector::basis(cfg.model.n_max, {Atom::lower, 0});
            const auto eff = propagate(cfg.model, *cfg.schedule, init);
            std::vector<std::vector<double>> finals;
            for (double theta : {0.0, std::numbers::pi / 2, std::numbers::pi}) {
                const auto sc = SemiclassicalParams::from_model(cfg.model, 200.0, theta);
                const auto r = propagate_semiclassical(sc, cfg.model, *cfg.schedule, init);
                finals.push_back(r.populations.back());
                for (std::size_t k = 0; k < finals.back().size(); ++k)
                    worst_diff = std::max(worst_diff, std::abs(finals.back()[k] - eff.populations.back()[k]));
            }
            for (std::size_t k = 0; k < finals[0].size(); ++k) {
                const auto [lo, hi] = std::minmax({finals[0][k], finals[1][k], finals[2][k]});
                worst_spread = std::max(worst_spread, hi - lo);
            }
        }
        d = "max |dP| " + fmt(worst_diff) + " (<= 0.02), theta_0 spread " + fmt(worst_spread) + " (<= 0.01)";
        return worst_diff <= 0.02 && worst_spread <= 0.01;
    });

    criterion(7, "property suites", [&](std::string& d) {
        testing::Gen gen(7);
        std::vector<std::string> bad;

        double herm = 0.0, zero_field = 0.0;
        for (int trial = 0; trial < 200; ++trial) {
            const auto p = gen.params(1, 10);
            herm = std::max(herm, max_asymmetry(
                                      build_effective_hamiltonian(p, gen.uniform(-3, 3), gen.uniform(-3, 3)).matrix()));
            const auto sc = SemiclassicalParams::from_model(p, gen.uniform(50, 300), gen.uniform(0, 6.3));
            herm = std::max(herm, max_asymmetry(build_semiclassical_hamiltonian(sc, p, gen.uniform(-3, 3),
                                                                                gen.uniform(-3, 3),
                                                                                gen.uniform(-100, 100))
                                                    .matrix()));
            std::vector<double> expected;
            for (int n = 0; n <= p.n_max; ++n) {
                expected.push_back(p.delta * n);
                expected.push_back(p.delta * n + p.delta_M);
            }
            std::sort(expected.begin(), expected.end());
            const auto e = eigen_decompose(build_effective_hamiltonian(p, 0.0, 0.0)).values;
            for (std::size_t k = 0; k < expected.size(); ++k)
                zero_field = std::max(zero_field, std::abs(e[k] - expected[k]) / (1.0 + std::abs(expected[k])));
        }
        if (herm > 1e-12) bad.push_back("hermiticity");
        if (zero_field > 1e-12) bad.push_back("zero-field spectrum");

        // 16 x 16 grid over the scan domain: drift, population sum, predictor
        const auto p = ModelParams::reference();
        const auto thresholds = transfer_thresholds(p, 3.0, 4.5);
        const auto gs = AxisRange{0.0, 2.5, 16}.samples();
        const auto os = AxisRange{0.0, 4.0, 16}.samples();
        const std::size_t cells = gs.size() * os.size();
        std::vector<double> drift(cells), sum_defect(cells), best(cells);
        std::vector<int> argmax(cells), predicted(cells);
        parallel_for(cells, default_workers(), [&](std::size_t k) {
            const double g = gs[k / os.size()], o = os[k % os.size()];
            const auto r = propagate(p, testing::path_schedule(g, o), StateVector::basis(7, {Atom::lower, 0}));
            drift[k] = r.max_norm_drift();
            for (const auto& row : r.populations) {
                double s = 0.0;
                for (double v : row) s += v;
                sum_defect[k] = std::max(sum_defect[k], std::abs(s - 1.0));
            }
            int arg = 0;
            for (int n = 1; n <= p.n_max; ++n)
                if (r.final_population({Atom::lower, n}) > r.final_population({Atom::lower, arg})) arg = n;
            argmax[k] = arg;
            predicted[k] = predict_transfer(thresholds, g, o).n;
            best[k] = r.final_population({Atom::lower, predicted[k]});
        });
        const double max_drift = *std::max_element(drift.begin(), drift.end());
        const double max_sum = *std::max_element(sum_defect.begin(), sum_defect.end());
        if (max_drift >= 1e-6) bad.push_back("norm drift");
        if (max_sum >= 1e-8) bad.push_back("population sum");
        int eligible = 0, agree = 0;
        for (std::size_t k = 0; k < cells; ++k) {
            const double g = gs[k / os.size()];
            const bool far = std::all_of(thresholds.g_star.begin(), thresholds.g_star.end(),
                                         [g](double t) { return std::abs(g - t) >= 0.1 * t; });
            if (!far || best[k] <= 0.9) continue;
            ++eligible;
            agree += argmax[k] == predicted[k];
        }
        const double agreement = eligible ? static_cast<double>(agree) / eligible : 0.0;
        if (agreement < 0.9) bad.push_back("predictor agreement");

        // envelope sign flips
        double flip = 0.0;
        for (int trial = 0; trial < 4; ++trial) {
            const double g = gen.uniform(0.3, 2.0), o = gen.uniform(0.3, 3.5);
            PropagationOptions opt;
            opt.samples = 2;
            const auto init = StateVector::basis(7, {Atom::lower, 0});
            const auto a = propagate(p, testing::path_schedule(g, o), init, opt);
            for (auto [sg, so] : {std::pair{-1.0, 1.0}, {1.0, -1.0}, {-1.0, -1.0}}) {
                const auto b = propagate(p, testing::path_schedule(sg * g, so * o), init, opt);
                for (std::size_t k = 0; k < a.populations.back().size(); ++k)
                    flip = std::max(flip, std::abs(a.populations.back()[k] - b.populations.back()[k]));
            }
        }
        if (flip > 1e-10) bad.push_back("sign flip");

        // truncation n_max vs n_max + 4 on both fixtures
        double trunc = 0.0;
        for (const char* name : {"path_a.json", "path_b.json"}) {
            const auto cfg = load_fixture(name);
            trunc = std::max(trunc, truncation_check(cfg.model, *cfg.schedule).max_population_difference);
        }
        if (trunc > 1e-6) bad.push_back("truncation");

        std::ostringstream s;
        s << "hermiticity " << fmt(herm) << ", zero-field " << fmt(zero_field) << ", max drift " << fmt(max_drift)
          << ", max |sum P - 1| " << fmt(max_sum) << ", sign flip " << fmt(flip) << ", truncation " << fmt(trunc)
          << ", predictor " << agree << "/" << eligible;
        if (!bad.empty()) {
            s << "; failing:";
            for (const auto& b : bad) s << ' ' << b;
        }
        d = s.str();
        return bad.empty();
    });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
