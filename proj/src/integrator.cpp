#include "fockpass/integrator.hpp"

#include "fockpass/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fockpass {

namespace {

// Dormand–Prince 8(5,3) tableau (Hairer, Nørsett & Wanner, DOP853).
constexpr double c2 = 0.526001519587677318785587544488E-01;
constexpr double c3 = 0.789002279381515978178381316732E-01;
constexpr double c4 = 0.118350341907227396726757197510E+00;
constexpr double c5 = 0.281649658092772603273242802490E+00;
constexpr double c6 = 0.333333333333333333333333333333E+00;
constexpr double c7 = 0.25E+00;
constexpr double c8 = 0.307692307692307692307692307692E+00;
constexpr double c9 = 0.651282051282051282051282051282E+00;
constexpr double c10 = 0.6E+00;
constexpr double c11 = 0.857142857142857142857142857142E+00;

constexpr double b1 = 5.42937341165687622380535766363E-2;
constexpr double b6 = 4.45031289275240888144113950566E0;
constexpr double b7 = 1.89151789931450038304281599044E0;
constexpr double b8 = -5.8012039600105847814672114227E0;
constexpr double b9 = 3.1116436695781989440891606237E-1;
constexpr double b10 = -1.52160949662516078556178806805E-1;
constexpr double b11 = 2.01365400804030348374776537501E-1;
constexpr double b12 = 4.47106157277725905176885569043E-2;

constexpr double a21 = 5.26001519587677318785587544488E-2;
constexpr double a31 = 1.97250569845378994544595329183E-2;
constexpr double a32 = 5.91751709536136983633785987549E-2;
constexpr double a41 = 2.95875854768068491816892993775E-2;
constexpr double a43 = 8.87627564304205475450678981324E-2;
constexpr double a51 = 2.41365134159266685502369798665E-1;
constexpr double a53 = -8.84549479328286085344864962717E-1;
constexpr double a54 = 9.24834003261792003115737966543E-1;
constexpr double a61 = 3.7037037037037037037037037037E-2;
constexpr double a64 = 1.70828608729473871279604482173E-1;
constexpr double a65 = 1.25467687566822425016691814123E-1;
constexpr double a71 = 3.7109375E-2;
constexpr double a74 = 1.70252211019544039314978060272E-1;
constexpr double a75 = 6.02165389804559606850219397283E-2;
constexpr double a76 = -1.7578125E-2;
constexpr double a81 = 3.70920001185047927108779319836E-2;
constexpr double a84 = 1.70383925712239993810214054705E-1;
constexpr double a85 = 1.07262030446373284651809199168E-1;
constexpr double a86 = -1.53194377486244017527936158236E-2;
constexpr double a87 = 8.27378916381402288758473766002E-3;
constexpr double a91 = 6.24110958716075717114429577812E-1;
constexpr double a94 = -3.36089262944694129406857109825E0;
constexpr double a95 = -8.68219346841726006818189891453E-1;
constexpr double a96 = 2.75920996994467083049415600797E1;
constexpr double a97 = 2.01540675504778934086186788979E1;
constexpr double a98 = -4.34898841810699588477366255144E1;
constexpr double a101 = 4.77662536438264365890433908527E-1;
constexpr double a104 = -2.48811461997166764192642586468E0;
constexpr double a105 = -5.90290826836842996371446475743E-1;
constexpr double a106 = 2.12300514481811942347288949897E1;
constexpr double a107 = 1.52792336328824235832596922938E1;
constexpr double a108 = -3.32882109689848629194453265587E1;
constexpr double a109 = -2.03312017085086261358222928593E-2;
constexpr double a111 = -9.3714243008598732571704021658E-1;
constexpr double a114 = 5.18637242884406370830023853209E0;
constexpr double a115 = 1.09143734899672957818500254654E0;
constexpr double a116 = -8.14978701074692612513997267357E0;
constexpr double a117 = -1.85200656599969598641566180701E1;
constexpr double a118 = 2.27394870993505042818970056734E1;
constexpr double a119 = 2.49360555267965238987089396762E0;
constexpr double a1110 = -3.0467644718982195003823669022E0;
constexpr double a121 = 2.27331014751653820792359768449E0;
constexpr double a124 = -1.05344954667372501984066689879E1;
constexpr double a125 = -2.00087205822486249909675718444E0;
constexpr double a126 = -1.79589318631187989172765950534E1;
constexpr double a127 = 2.79488845294199600508499808837E1;
constexpr double a128 = -2.85899827713502369474065508674E0;
constexpr double a129 = -8.87285693353062954433549289258E0;
constexpr double a1210 = 1.23605671757943030647266201528E1;
constexpr double a1211 = 6.43392746015763530355970484046E-1;

constexpr double bhh1 = 0.244094488188976377952755905512E+00;
constexpr double bhh2 = 0.733846688281611857341361741547E+00;
constexpr double bhh3 = 0.220588235294117647058823529412E-01;

constexpr double er1 = 0.1312004499419488073250102996E-01;
constexpr double er6 = -0.1225156446376204440720569753E+01;
constexpr double er7 = -0.4957589496572501915214079952E+00;
constexpr double er8 = 0.1664377182454986536961530415E+01;
constexpr double er9 = -0.3503288487499736816886487290E+00;
constexpr double er10 = 0.3341791187130174790297318841E+00;
constexpr double er11 = 0.8192320648511571246570742613E-01;
constexpr double er12 = -0.2235530786388629525884427845E-01;

// Step-size controller (no Lund stabilization).
constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.333;  // hnew >= h * kFacMin
constexpr double kFacMax = 6.0;    // hnew <= h * kFacMax

}  // namespace

Rk853::Rk853(Rhs rhs, IntegratorOptions options) : rhs_(std::move(rhs)), options_(options) {
    if (!(options_.rtol > 0.0) || !(options_.atol > 0.0))
        throw ConfigError("integrator: tolerances must be positive");
}

void Rk853::reset(double t0, State y0) {
    t_ = t0;
    y_ = std::move(y0);
    const auto n = y_.size();
    for (State* v : {&y_new_, &tmp_, &k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &k8_, &k9_, &k10_,
                     &k11_, &k12_})
        v->resize(n);
    h_ = 0.0;
    have_k1_ = false;
    stats_ = {};
}

double Rk853::attempt(double h) {
    const double t = t_;
    const State& y = y_;

    tmp_ = y + h * a21 * k1_;
    rhs_(t + c2 * h, tmp_, k2_);
    tmp_ = y + h * (a31 * k1_ + a32 * k2_);
    rhs_(t + c3 * h, tmp_, k3_);
    tmp_ = y + h * (a41 * k1_ + a43 * k3_);
    rhs_(t + c4 * h, tmp_, k4_);
    tmp_ = y + h * (a51 * k1_ + a53 * k3_ + a54 * k4_);
    rhs_(t + c5 * h, tmp_, k5_);
    tmp_ = y + h * (a61 * k1_ + a64 * k4_ + a65 * k5_);
    rhs_(t + c6 * h, tmp_, k6_);
    tmp_ = y + h * (a71 * k1_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    rhs_(t + c7 * h, tmp_, k7_);
    tmp_ = y + h * (a81 * k1_ + a84 * k4_ + a85 * k5_ + a86 * k6_ + a87 * k7_);
    rhs_(t + c8 * h, tmp_, k8_);
    tmp_ = y + h * (a91 * k1_ + a94 * k4_ + a95 * k5_ + a96 * k6_ + a97 * k7_ + a98 * k8_);
    rhs_(t + c9 * h, tmp_, k9_);
    tmp_ = y + h * (a101 * k1_ + a104 * k4_ + a105 * k5_ + a106 * k6_ + a107 * k7_ + a108 * k8_ +
                    a109 * k9_);
    rhs_(t + c10 * h, tmp_, k10_);
    tmp_ = y + h * (a111 * k1_ + a114 * k4_ + a115 * k5_ + a116 * k6_ + a117 * k7_ + a118 * k8_ +
                    a119 * k9_ + a1110 * k10_);
    rhs_(t + c11 * h, tmp_, k11_);
    tmp_ = y + h * (a121 * k1_ + a124 * k4_ + a125 * k5_ + a126 * k6_ + a127 * k7_ + a128 * k8_ +
                    a129 * k9_ + a1210 * k10_ + a1211 * k11_);
    rhs_(t + h, tmp_, k12_);
    stats_.evaluations += 11;

    // tmp_ now holds the weighted slope of the 8th-order solution.
    tmp_ = b1 * k1_ + b6 * k6_ + b7 * k7_ + b8 * k8_ + b9 * k9_ + b10 * k10_ + b11 * k11_ + b12 * k12_;
    y_new_ = y + h * tmp_;

    double err = 0.0;
    double err2 = 0.0;
    const auto n = y.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sk =
            1.0 / (options_.atol + options_.rtol * std::max(std::abs(y[i]), std::abs(y_new_[i])));
        const double e3 = std::abs(tmp_[i] - bhh1 * k1_[i] - bhh2 * k9_[i] - bhh3 * k12_[i]) * sk;
        const double e5 = std::abs(er1 * k1_[i] + er6 * k6_[i] + er7 * k7_[i] + er8 * k8_[i] +
                                   er9 * k9_[i] + er10 * k10_[i] + er11 * k11_[i] + er12 * k12_[i]) *
                          sk;
        // max over components: an RMS average lets sparse states drift
        err2 = std::max(err2, e3 * e3);
        err = std::max(err, e5 * e5);
    }
    const double denom = err + 0.01 * err2;
    return std::abs(h) * err * std::sqrt(1.0 / (denom <= 0.0 ? 1.0 : denom));
}

double Rk853::initial_step(double span) {
    auto scaled_norm = [&](const State& v) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double sk = options_.atol + options_.rtol * std::abs(y_[i]);
            s += std::norm(v[i]) / (sk * sk);
        }
        return std::sqrt(s / static_cast<double>(v.size()));
    };
    const double dny = scaled_norm(y_);
    const double dnf = scaled_norm(k1_);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h = std::min(h, span);
    if (options_.h_max > 0.0) h = std::min(h, options_.h_max);

    tmp_ = y_ + h * k1_;
    rhs_(t_ + h, tmp_, k2_);
    ++stats_.evaluations;
    const double der2 = scaled_norm(State(k2_ - k1_)) / h;
    const double der12 = std::max(der2, dnf);
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
    h = std::min({100.0 * h, h1, span});
    if (options_.h_max > 0.0) h = std::min(h, options_.h_max);
    return h;
}

void Rk853::advance_to(double t_end) {
    if (t_end < t_) throw ConfigError("integrator: cannot integrate backwards");
    if (t_end == t_) return;

    if (!have_k1_) {
        rhs_(t_, y_, k1_);
        ++stats_.evaluations;
        have_k1_ = true;
    }
    if (h_ <= 0.0) h_ = initial_step(t_end - t_);

    const double uround = std::numeric_limits<double>::epsilon();
    bool rejected_last = false;
    while (t_ < t_end) {
        if (stats_.accepted + stats_.rejected >= options_.max_steps) {
            std::ostringstream msg;
            msg << "integrator: step budget exhausted at t = " << t_;
            throw NumericalError(msg.str());
        }
        double h = h_;
        if (options_.h_max > 0.0) h = std::min(h, options_.h_max);
        if (0.1 * h <= std::abs(t_) * uround || h <= std::numeric_limits<double>::min()) {
            std::ostringstream msg;
            msg << "integrator: step size underflow at t = " << t_;
            throw NumericalError(msg.str());
        }
        // Land exactly on t_end; do not keep the clipped size for later.
        bool clipped = false;
        if (t_ + 1.01 * h >= t_end) {
            h = t_end - t_;
            clipped = true;
        }

        const double err = attempt(h);
        const double fac11 = std::pow(err, 1.0 / 8.0);
        double fac = std::clamp(fac11 / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);

        if (err <= 1.0) {
            ++stats_.accepted;
            t_ = clipped ? t_end : t_ + h;
            y_.swap(y_new_);
            rhs_(t_, y_, k1_);
            ++stats_.evaluations;
            if (observer_) observer_(t_, y_);

            double h_new = h / fac;
            if (rejected_last) h_new = std::min(h_new, h);
            rejected_last = false;
            // A step shortened only to hit t_end says nothing about the
            // natural step size.
            h_ = clipped ? std::max(h_, h_new) : h_new;
        } else {
            ++stats_.rejected;
            rejected_last = true;
            h_ = h / std::min(1.0 / kFacMin, fac11 / kSafety);
        }
    }
}

void Rk853::fixed_step(double h) {
    if (!have_k1_) {
        rhs_(t_, y_, k1_);
        ++stats_.evaluations;
        have_k1_ = true;
    }
    attempt(h);
    t_ += h;
    y_.swap(y_new_);
    rhs_(t_, y_, k1_);
    ++stats_.evaluations;
    ++stats_.accepted;
}

}  // namespace fockpass
