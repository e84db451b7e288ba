#include "cauchy_im/quadrature.hpp"

#include "cauchy_im/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cauchy_im {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfPi = std::numbers::pi / 2.0;

// 21-point Kronrod abscissae on [-1, 1] (non-negative half) and weights; the odd entries are
// the 10-point Gauss abscissae.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452, 0.930157491355708226001207180059508,
    0.865063366688984510732096688423493, 0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784, 0.294392862701460198131126603103866,
    0.148874338981631210884826001129720, 0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390, 0.054755896574351996031381300244580,
    0.075039674810919952767043140916190, 0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525452334, 0.134709217311473325928054001771707, 0.142775938577060080797094273138717,
    0.147739104901338491374841515972068, 0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
                                       0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
                                       0.295524224714752870173892994651338};

// Node i of the 21-point rule in increasing order, as an offset in [-1, 1], and its weight.
constexpr double node_offset(int i) { return i < 10 ? -kXgk[i] : (i == 10 ? 0.0 : kXgk[20 - i]); }
constexpr double node_weight(int i) { return i <= 10 ? kWgk[i] : kWgk[20 - i]; }

struct Sample {
    double value;  // integrand value
    double aux;    // caller-defined (log-density for GridDensity)
};

struct RawPanel {
    double a = 0.0, b = 0.0;
    double integral = 0.0, error = 0.0, abs_integral = 0.0;
    std::array<double, 21> aux{};
};

template <class Eval>
RawPanel kronrod21(Eval& eval, double a, double b) {
    RawPanel p;
    p.a = a;
    p.b = b;
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::array<double, 21> fv{};
    for (int i = 0; i < 21; ++i) {
        const Sample s = eval(center + half * node_offset(i));
        fv[i] = s.value;
        p.aux[i] = s.aux;
    }
    double resk = 0.0, resg = 0.0, resabs = 0.0;
    for (int i = 0; i < 21; ++i) {
        resk += node_weight(i) * fv[i];
        resabs += node_weight(i) * std::abs(fv[i]);
    }
    for (int j = 0; j < 5; ++j) {
        const int k = 2 * j + 1;  // Gauss nodes sit at odd Kronrod indices
        resg += kWg[j] * (fv[k] + fv[20 - k]);
    }
    const double mean = 0.5 * resk;
    double resasc = 0.0;
    for (int i = 0; i < 21; ++i) {
        resasc += node_weight(i) * std::abs(fv[i] - mean);
    }
    resk *= half;
    resg *= half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs(resk - resg);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
        err = std::max(50.0 * kEps * resabs, err);
    }
    p.integral = resk;
    p.error = err;
    p.abs_integral = resabs;
    return p;
}

struct Adaptive {
    std::vector<RawPanel> panels;  // sorted by a
    double value = 0.0;
    double error = 0.0;
    double abs_value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

template <class Eval>
Adaptive adaptive_gk(Eval& eval, const std::vector<double>& breaks, double rel_tol, double abs_tol, int max_sub) {
    auto by_error = [](const RawPanel& x, const RawPanel& y) { return x.error < y.error; };
    std::vector<RawPanel> heap;
    std::vector<RawPanel> frozen;
    Adaptive out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] > breaks[i]) {
            heap.push_back(kronrod21(eval, breaks[i], breaks[i + 1]));
            out.evaluations += 21;
        }
    }
    std::make_heap(heap.begin(), heap.end(), by_error);
    auto totals = [&]() {
        double v = 0.0, e = 0.0, a = 0.0;
        for (const auto& p : heap) {
            v += p.integral;
            e += p.error;
            a += p.abs_integral;
        }
        for (const auto& p : frozen) {
            v += p.integral;
            e += p.error;
            a += p.abs_integral;
        }
        return std::array<double, 3>{v, e, a};
    };
    auto [value, error, abs_value] = totals();
    int subdivisions = static_cast<int>(heap.size());
    while (true) {
        const double tol = std::max({abs_tol, rel_tol * std::abs(value), 100.0 * kEps * abs_value});
        if (error <= tol) {
            out.converged = true;
            break;
        }
        if (heap.empty() || subdivisions >= max_sub) {
            break;
        }
        std::pop_heap(heap.begin(), heap.end(), by_error);
        RawPanel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 8.0 * kEps * (std::abs(worst.a) + std::abs(worst.b))) {
            frozen.push_back(worst);
            continue;
        }
        RawPanel left = kronrod21(eval, worst.a, mid);
        RawPanel right = kronrod21(eval, mid, worst.b);
        out.evaluations += 42;
        ++subdivisions;
        value += left.integral + right.integral - worst.integral;
        error += left.error + right.error - worst.error;
        abs_value += left.abs_integral + right.abs_integral - worst.abs_integral;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_error);
        if (subdivisions % 64 == 0) {
            // Re-sum to stop drift in the running totals.
            std::tie(value, error, abs_value) = std::tuple{totals()[0], totals()[1], totals()[2]};
        }
    }
    out.panels = std::move(heap);
    out.panels.insert(out.panels.end(), frozen.begin(), frozen.end());
    std::sort(out.panels.begin(), out.panels.end(), [](const RawPanel& x, const RawPanel& y) { return x.a < y.a; });
    const auto t = totals();
    out.value = 0.0;
    out.error = 0.0;
    out.abs_value = 0.0;
    for (const auto& p : out.panels) {
        out.value += p.integral;
        out.error += p.error;
        out.abs_value += p.abs_integral;
    }
    (void)t;
    return out;
}

std::vector<double> make_breaks(const detail::AnchoredMap& map, int initial_panels) {
    std::vector<double> vb = map.boundaries();
    vb.erase(std::unique(vb.begin(), vb.end()), vb.end());
    // Split the widest segments until the requested minimum panel count is reached.
    while (static_cast<int>(vb.size()) - 1 < initial_panels) {
        std::size_t widest = 0;
        for (std::size_t i = 1; i + 1 < vb.size(); ++i) {
            if (vb[i + 1] - vb[i] > vb[widest + 1] - vb[widest]) {
                widest = i;
            }
        }
        vb.insert(vb.begin() + static_cast<std::ptrdiff_t>(widest) + 1, 0.5 * (vb[widest] + vb[widest + 1]));
    }
    return vb;
}

QuadratureResult integrate_mapped(const RealFunction& f, const detail::AnchoredMap& map, const QuadratureOptions& opts) {
    auto eval = [&](double v) {
        const double x = map.x(v);
        const double value = f(x) * map.jacobian(v);
        return Sample{std::isfinite(value) ? value : (std::isnan(value) ? 0.0 : value), 0.0};
    };
    const auto breaks = make_breaks(map, opts.initial_panels);
    Adaptive res = adaptive_gk(eval, breaks, opts.rel_tol, opts.abs_tol, opts.max_subdivisions);
    if (!res.converged || !std::isfinite(res.value)) {
        throw AccuracyError("adaptive quadrature did not converge", res.value, res.error);
    }
    return {res.value, res.error, res.evaluations};
}

struct ShiftTooSmall {
    double log_value;
};

double log_integrate_mapped(const RealFunction& log_f, const detail::AnchoredMap& map, const QuadratureOptions& opts) {
    // Probe for a shift so the shifted integrand peaks near 1.
    double shift = -kInf;
    std::vector<double> probes = opts.breakpoints;
    probes.push_back(opts.center);
    for (int i = 1; i < 16; ++i) {
        probes.push_back(map.x(map.v_end() * i / 16.0));
    }
    for (double x : probes) {
        if (x >= map.lower() && x <= map.upper() && std::isfinite(x)) {
            const double lf = log_f(x);
            if (std::isfinite(lf) || lf > 0) {
                shift = std::max(shift, lf);
            }
        }
    }
    if (shift == kInf) {
        return kInf;
    }
    if (shift == -kInf) {
        shift = 0.0;
    }
    for (int attempt = 0; attempt < 6; ++attempt) {
        try {
            auto f = [&](double x) {
                const double lf = log_f(x);
                if (lf - shift > 600.0) {
                    throw ShiftTooSmall{lf};
                }
                return std::exp(lf - shift);
            };
            QuadratureOptions o = opts;
            const QuadratureResult r = integrate_mapped(f, map, o);
            if (r.value <= 0.0) {
                return -kInf;
            }
            return shift + std::log(r.value);
        } catch (const ShiftTooSmall& s) {
            shift = s.log_value;
        }
    }
    throw AccuracyError("log-integration: could not stabilize the integrand scale", shift, kInf);
}

}  // namespace

QuadratureResult integrate_interval(const RealFunction& f, double a, double b, const QuadratureOptions& opts) {
    if (std::isnan(a) || std::isnan(b)) {
        throw DomainError("integrate_interval: NaN bound");
    }
    if (a == b) {
        return {};
    }
    if (a > b) {
        QuadratureResult r = integrate_interval(f, b, a, opts);
        r.value = -r.value;
        return r;
    }
    return integrate_mapped(f, detail::AnchoredMap(a, b, opts.breakpoints, opts.center, opts.scale), opts);
}

QuadratureResult integrate_real_line(const RealFunction& f, const QuadratureOptions& opts) {
    return integrate_mapped(f, detail::AnchoredMap(-kInf, kInf, opts.breakpoints, opts.center, opts.scale), opts);
}

QuadratureResult integrate_half_line(const RealFunction& f, const QuadratureOptions& opts) {
    return integrate_mapped(f, detail::AnchoredMap(0.0, kInf, opts.breakpoints, 0.0, opts.scale), opts);
}

double log_integrate_interval(const RealFunction& log_f, double a, double b, const QuadratureOptions& opts) {
    if (!(a < b)) {
        throw DomainError("log_integrate_interval: need a < b");
    }
    return log_integrate_mapped(log_f, detail::AnchoredMap(a, b, opts.breakpoints, opts.center, opts.scale), opts);
}

double log_integrate_real_line(const RealFunction& log_f, const QuadratureOptions& opts) {
    return log_integrate_mapped(log_f, detail::AnchoredMap(-kInf, kInf, opts.breakpoints, opts.center, opts.scale), opts);
}

double log_integrate_half_line(const RealFunction& log_f, const QuadratureOptions& opts) {
    return log_integrate_mapped(log_f, detail::AnchoredMap(0.0, kInf, opts.breakpoints, 0.0, opts.scale), opts);
}

double invert_monotone(const RealFunction& g, double target, double lo, double hi, double x_tol) {
    double a = lo, b = hi;
    double fa = g(a) - target, fb = g(b) - target;
    if (fa == 0.0) {
        return a;
    }
    if (fb == 0.0) {
        return b;
    }
    if ((fa > 0) == (fb > 0)) {
        throw DomainError("invert_monotone: target outside the range of g on the bracket");
    }
    // Brent's zeroin: bisection safeguarding secant / inverse quadratic steps.
    double c = a, fc = fa, d = b - a, e = d;
    for (int iter = 0; iter < 300; ++iter) {
        if ((fb > 0) == (fc > 0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol = 2.0 * kEps * std::abs(b) + 0.5 * x_tol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) {
            return b;
        }
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) {
                q = -q;
            } else {
                p = -p;
            }
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol ? d : (m > 0 ? tol : -tol);
        fb = g(b) - target;
    }
    return b;
}

Maximum maximize_bracketed(const RealFunction& f, double lo, double hi, double x_tol) {
    // Brent's fmin applied to -f.
    constexpr double golden = 0.3819660112501051;
    double a = lo, b = hi;
    double x = a + golden * (b - a), w = x, v = x;
    double fx = -f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol = std::sqrt(kEps) * std::abs(x) + x_tol / 3.0;
        if (std::abs(x - m) <= 2.0 * tol - 0.5 * (b - a)) {
            break;
        }
        bool golden_step = true;
        if (std::abs(e) > tol) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0) {
                p = -p;
            } else {
                q = -q;
            }
            if (std::abs(p) < std::abs(0.5 * q * e) && p > q * (a - x) && p < q * (b - x)) {
                e = d;
                d = p / q;
                const double u = x + d;
                if (u - a < 2.0 * tol || b - u < 2.0 * tol) {
                    d = x < m ? tol : -tol;
                }
                golden_step = false;
            }
        }
        if (golden_step) {
            e = (x < m ? b : a) - x;
            d = golden * e;
        }
        const double u = x + (std::abs(d) >= tol ? d : (d > 0 ? tol : -tol));
        const double fu = -f(u);
        if (fu <= fx) {
            if (u < x) {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if (u < x) {
                a = u;
            } else {
                b = u;
            }
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }
    // Endpoints are not probed by fmin; a monotone function peaks there.
    const double flo = f(lo), fhi = f(hi);
    Maximum best{x, -fx};
    if (flo > best.value) {
        best = {lo, flo};
    }
    if (fhi > best.value) {
        best = {hi, fhi};
    }
    return best;
}

// ---------------------------------------------------------------------------------------
// AnchoredMap

namespace detail {

AnchoredMap::AnchoredMap(double a, double b, const std::vector<double>& breakpoints, double center, double scale)
    : a_(a), b_(b) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw DomainError("quadrature: scale must be positive and finite");
    }
    if (!(a < b)) {
        throw DomainError("quadrature: empty range");
    }
    std::vector<double> anchors;
    for (double x : breakpoints) {
        if (std::isfinite(x) && x > a && x < b) {
            anchors.push_back(x);
        }
    }
    if (std::isfinite(a)) {
        anchors.push_back(a);
    }
    if (std::isfinite(b)) {
        anchors.push_back(b);
    }
    if (anchors.empty()) {
        anchors.push_back(std::isfinite(center) ? center : 0.0);
    }
    std::sort(anchors.begin(), anchors.end());
    anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
    // Anchors closer than `scale` share one neighbourhood; finite ends always stay.
    std::vector<double> kept;
    for (double x : anchors) {
        const bool is_end = x == a || x == b;
        if (kept.empty() || x - kept.back() >= scale) {
            kept.push_back(x);
        } else if (is_end) {
            if (kept.size() == 1 && kept.back() == a) {
                kept.push_back(x);
            } else {
                kept.back() = x;
            }
        }
    }
    anchors = std::move(kept);

    double v = 0.0;
    auto add = [&](double anchor, bool from_left, bool tail, double sc, double width, double x_lo, double x_hi) {
        if (width > 0.0) {
            pieces_.push_back({v, width, anchor, from_left, tail, sc, x_lo, x_hi});
            v += width;
        }
    };
    const double reach = std::max(scale, anchors.back() - anchors.front());
    if (!std::isfinite(a)) {
        const double edge = anchors.front() - reach;
        add(edge, false, true, reach, kHalfPi, -kInf, edge);
        add(anchors.front(), false, false, scale, std::log1p(reach / scale), edge, anchors.front());
    }
    for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
        const double p = anchors[i], q = anchors[i + 1];
        const double mid = p + 0.5 * (q - p);
        add(p, true, false, scale, std::log1p((mid - p) / scale), p, mid);
        add(q, false, false, scale, std::log1p((q - mid) / scale), mid, q);
    }
    if (!std::isfinite(b)) {
        const double edge = anchors.back() + reach;
        add(anchors.back(), true, false, scale, std::log1p(reach / scale), anchors.back(), edge);
        add(edge, true, true, reach, kHalfPi, edge, kInf);
    }
    if (pieces_.empty()) {
        throw DomainError("quadrature: range too narrow to map");
    }
}

std::size_t AnchoredMap::piece_of_v(double v) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), v, [](double value, const Piece& p) { return value < p.v0; });
    return it == pieces_.begin() ? 0 : static_cast<std::size_t>(std::distance(pieces_.begin(), it)) - 1;
}

double AnchoredMap::x(double v) const {
    const Piece& p = pieces_[piece_of_v(v)];
    const double u = std::clamp(v - p.v0, 0.0, p.width);
    const double w = p.from_left ? u : p.width - u;
    double g;
    if (p.tail) {
        g = w >= kHalfPi ? kInf : std::tan(w);
    } else {
        g = std::expm1(w);
    }
    const double x = p.from_left ? p.anchor + p.scale * g : p.anchor - p.scale * g;
    return std::clamp(x, p.x_lo, p.x_hi);
}

double AnchoredMap::v(double x) const {
    if (x <= a_) {
        return 0.0;
    }
    if (x >= b_) {
        return v_end();
    }
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), x, [](const Piece& p, double value) { return p.x_hi < value; });
    if (it == pieces_.end()) {
        return v_end();
    }
    const Piece& p = *it;
    const double d = std::abs(x - p.anchor) / p.scale;
    const double w = p.tail ? std::atan(d) : std::log1p(d);
    const double u = p.from_left ? w : p.width - w;
    return p.v0 + std::clamp(u, 0.0, p.width);
}

double AnchoredMap::jacobian(double v) const {
    const Piece& p = pieces_[piece_of_v(v)];
    const double u = std::clamp(v - p.v0, 0.0, p.width);
    const double w = p.from_left ? u : p.width - u;
    if (!p.tail) {
        return p.scale * std::exp(w);
    }
    const double c = std::cos(w);
    return p.scale / (c * c);
}

std::vector<double> AnchoredMap::boundaries() const {
    std::vector<double> out;
    for (const auto& p : pieces_) {
        out.push_back(p.v0);
    }
    out.push_back(v_end());
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------------------
// GridDensity

double GridDensity::log_density_v(double v) const {
    return log_f_(to_x(v)) - log_norm_ + std::log(jacobian(v));
}

double GridDensity::lower() const { return domain_ == Domain::real_line ? -kInf : 0.0; }
double GridDensity::upper() const { return kInf; }

double GridDensity::log_pdf(double x) const {
    if (domain_ == Domain::positive_half_line && x < 0.0) {
        return -kInf;
    }
    if (std::isinf(x)) {
        return -kInf;
    }
    const double lf = log_f_(x);
    return std::isnan(lf) ? -kInf : lf - log_norm_;
}

std::size_t GridDensity::panel_index(double v) const {
    auto it = std::upper_bound(panels_.begin(), panels_.end(), v, [](double value, const Panel& p) { return value < p.v_lo; });
    if (it == panels_.begin()) {
        return 0;
    }
    return static_cast<std::size_t>(std::distance(panels_.begin(), it)) - 1;
}

double GridDensity::partial_mass(const Panel& p, double v) const {
    if (v <= p.v_lo) {
        return 0.0;
    }
    if (v >= p.v_hi) {
        return p.mass;
    }
    auto segment = [&](double a, double b) {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double sum = 0.0;
        for (int i = 0; i < 21; ++i) {
            const double lv = log_density_v(c + h * node_offset(i));
            if (std::isfinite(lv)) {
                sum += node_weight(i) * std::exp(lv);
            }
        }
        return sum * h;
    };
    const double m = (v - p.v_lo <= p.v_hi - v) ? segment(p.v_lo, v) : p.mass - segment(v, p.v_hi);
    return std::clamp(m, 0.0, p.mass);
}

double GridDensity::cdf_v(double v) const {
    if (v <= panels_.front().v_lo) {
        return 0.0;
    }
    if (v >= panels_.back().v_hi) {
        return 1.0;
    }
    const Panel& p = panels_[panel_index(v)];
    return std::clamp(p.cum_lo + partial_mass(p, v), 0.0, 1.0);
}

double GridDensity::cdf(double x) const {
    if (std::isnan(x)) {
        throw DomainError("GridDensity::cdf: NaN argument");
    }
    if (x == kInf) {
        return 1.0;
    }
    if (x == -kInf || (domain_ == Domain::positive_half_line && x <= 0.0)) {
        return 0.0;
    }
    return cdf_v(to_v(x));
}

double GridDensity::quantile(double prob) const {
    if (!(prob > 0.0 && prob < 1.0)) {
        throw DomainError("GridDensity::quantile requires 0 < p < 1");
    }
    auto it = std::upper_bound(panels_.begin(), panels_.end(), prob, [](double value, const Panel& p) { return value < p.cum_lo; });
    std::size_t k = it == panels_.begin() ? 0 : static_cast<std::size_t>(std::distance(panels_.begin(), it)) - 1;
    while (k + 1 < panels_.size() && panels_[k].mass <= 0.0) {
        ++k;
    }
    const Panel& p = panels_[k];
    const double target = std::clamp(prob - p.cum_lo, 0.0, p.mass);
    double lo = p.v_lo, hi = p.v_hi;
    double v = p.mass > 0 ? p.v_lo + (p.v_hi - p.v_lo) * target / p.mass : 0.5 * (lo + hi);
    for (int iter = 0; iter < 100; ++iter) {
        const double r = partial_mass(p, v) - target;
        if (r > 0) {
            hi = v;
        } else {
            lo = v;
        }
        const double dens = std::exp(log_density_v(v));
        double next = (dens > 0 && std::isfinite(dens)) ? v - r / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - v) <= 1e-15 * (1.0 + std::abs(v)) || hi - lo <= 4.0 * kEps * (1.0 + std::abs(v))) {
            v = next;
            break;
        }
        v = next;
    }
    return to_x(v);
}

double GridDensity::mean() const {
    double sum = 0.0;
    for (const auto& p : panels_) {
        const double h = 0.5 * (p.v_hi - p.v_lo);
        for (int i = 0; i < 21; ++i) {
            const double v = p.node_v[i];
            if (std::isfinite(p.node_log_f[i])) {
                sum += node_weight(i) * h * to_x(v) * std::exp(p.node_log_f[i] - log_norm_) * jacobian(v);
            }
        }
    }
    return sum;
}

double GridDensity::mode() const {
    double best_v = maxima_.front().v, best = maxima_.front().log_f;
    for (const auto& m : maxima_) {
        if (m.log_f > best) {
            best = m.log_f;
            best_v = m.v;
        }
    }
    return to_x(best_v);
}

std::vector<double> GridDensity::nodes() const {
    std::vector<double> out;
    out.reserve(panels_.size() + 1);
    for (const auto& p : panels_) {
        out.push_back(to_x(p.v_lo));
    }
    out.push_back(to_x(panels_.back().v_hi));
    return out;
}

std::vector<double> GridDensity::log_values() const {
    std::vector<double> out;
    for (double x : nodes()) {
        out.push_back(std::isfinite(x) && !(domain_ == Domain::positive_half_line && x <= 0.0) ? log_f_(x) : -kInf);
    }
    return out;
}

double GridDensity::sup_log_pdf(const Interval& range) const {
    const double a = std::max(range.lower, lower());
    const double b = std::min(range.upper, upper());
    if (a > b) {
        return -kInf;
    }
    double best = -kInf;
    auto consider = [&](double x, double lf) {
        if (x >= a && x <= b && !std::isnan(lf)) {
            best = std::max(best, lf);
        }
    };
    if (std::isfinite(a)) {
        consider(a, log_f_(a));
    }
    if (std::isfinite(b)) {
        consider(b, log_f_(b));
    }
    for (const auto& p : panels_) {
        for (int i = 0; i < 21; ++i) {
            consider(to_x(p.node_v[i]), p.node_log_f[i]);
        }
    }
    for (const auto& m : maxima_) {
        consider(to_x(m.v), m.log_f);
    }
    return best - log_norm_;
}

IntervalSet GridDensity::level_set(double log_level) const {
    const double level = log_level + log_norm_;  // compare on the unnormalized scale
    const double v_min = panels_.front().v_lo, v_max = panels_.back().v_hi;
    struct Point {
        double v, lf;
    };
    std::vector<Point> pts;
    pts.reserve(panels_.size() * 21 + maxima_.size() + 2);
    double boundary_lf = -kInf;
    if (domain_ == Domain::positive_half_line) {
        const double lf0 = log_f_(0.0);
        boundary_lf = std::isnan(lf0) ? -kInf : lf0;
    }
    pts.push_back({v_min, boundary_lf});
    for (const auto& p : panels_) {
        for (int i = 0; i < 21; ++i) {
            pts.push_back({p.node_v[i], std::isnan(p.node_log_f[i]) ? -kInf : p.node_log_f[i]});
        }
    }
    for (const auto& m : maxima_) {
        pts.push_back({m.v, m.log_f});
    }
    pts.push_back({v_max, -kInf});
    std::sort(pts.begin(), pts.end(), [](const Point& x, const Point& y) { return x.v < y.v; });

    auto crossing = [&](double va, double vb) {
        auto g = [&](double v) {
            const double lf = log_f_(to_x(v));
            return std::isnan(lf) ? -kInf : lf;
        };
        auto clipped = [&](double v) { return std::clamp(g(v) - level, -1e300, 1e300); };
        return invert_monotone(clipped, 0.0, va, vb, 1e-14);
    };

    std::vector<Interval> parts;
    bool inside = pts.front().lf >= level;
    double start_v = v_min;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const bool now = pts[i].lf >= level;
        if (now != inside) {
            double vc;
            if (pts[i - 1].v == v_min && domain_ == Domain::positive_half_line && !std::isfinite(pts[i - 1].lf) &&
                pts[i - 1].lf > 0) {
                vc = v_min;
            } else {
                vc = pts[i].v > pts[i - 1].v ? crossing(pts[i - 1].v, pts[i].v) : pts[i].v;
            }
            if (now) {
                start_v = vc;
            } else {
                parts.push_back({to_x(start_v), to_x(vc)});
            }
            inside = now;
        }
    }
    if (inside) {
        parts.push_back({to_x(start_v), upper()});
    }
    for (auto& part : parts) {
        if (domain_ == Domain::positive_half_line) {
            part.lower = std::max(part.lower, 0.0);
        }
    }
    return IntervalSet(std::move(parts));
}

double GridDensity::mass(const IntervalSet& set) const {
    double total = 0.0;
    const IntervalSet clipped = set.intersect(support());
    for (const auto& p : clipped.parts()) {
        total += cdf(p.upper) - cdf(p.lower);
    }
    return std::clamp(total, 0.0, 1.0);
}

GridDensity normalize(RealFunction log_f, Domain domain, const DensityOptions& opts) {
    if (!(opts.scale > 0.0) || !std::isfinite(opts.center)) {
        throw DomainError("normalize: scale must be positive and center finite");
    }
    GridDensity g;
    g.log_f_ = std::move(log_f);
    g.domain_ = domain;
    g.map_ = domain == Domain::real_line ? detail::AnchoredMap(-kInf, kInf, opts.breakpoints, opts.center, opts.scale)
                                         : detail::AnchoredMap(0.0, kInf, opts.breakpoints, 0.0, opts.scale);
    const auto breaks = make_breaks(g.map_, opts.initial_panels);

    double shift = -kInf;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        for (int j = 1; j < 4; ++j) {
            const double lf = g.log_f_(g.to_x(breaks[i] + (breaks[i + 1] - breaks[i]) * j / 4.0));
            if (!std::isnan(lf) && std::isfinite(lf)) {
                shift = std::max(shift, lf);
            }
        }
    }
    for (double x : opts.breakpoints) {
        if (std::isfinite(x) && (domain == Domain::real_line || x > 0.0)) {
            const double lf = g.log_f_(x);
            if (std::isfinite(lf)) {
                shift = std::max(shift, lf);
            }
        }
    }
    if (!std::isfinite(shift)) {
        shift = 0.0;
    }

    Adaptive res;
    for (int attempt = 0;; ++attempt) {
        try {
            auto eval = [&](double v) {
                const double lf = g.log_f_(g.to_x(v));
                if (std::isnan(lf)) {
                    return Sample{0.0, -kInf};
                }
                if (lf - shift > 600.0) {
                    throw ShiftTooSmall{lf};
                }
                return Sample{std::exp(lf - shift) * g.jacobian(v), lf};
            };
            res = adaptive_gk(eval, breaks, opts.rel_tol, 0.0, opts.max_subdivisions);
            break;
        } catch (const ShiftTooSmall& s) {
            if (attempt > 6) {
                throw AccuracyError("normalize: density scale could not be stabilized", 0.0, kInf);
            }
            shift = s.log_value;
        }
    }
    if (!res.converged || !(res.value > 0.0) || !std::isfinite(res.value)) {
        throw AccuracyError("normalize: refinement did not converge (density may not be integrable)", res.value,
                            res.error);
    }
    g.log_norm_ = shift + std::log(res.value);
    double cum = 0.0;
    g.panels_.reserve(res.panels.size());
    for (const auto& rp : res.panels) {
        GridDensity::Panel p;
        p.v_lo = rp.a;
        p.v_hi = rp.b;
        p.mass = std::max(rp.integral / res.value, 0.0);
        p.cum_lo = cum;
        cum += p.mass;
        const double c = 0.5 * (rp.a + rp.b), h = 0.5 * (rp.b - rp.a);
        for (int i = 0; i < 21; ++i) {
            p.node_v[i] = c + h * node_offset(i);
            p.node_log_f[i] = rp.aux[i];
        }
        g.panels_.push_back(p);
    }
    // Renormalize cumulative masses so the last boundary is exactly 1.
    for (auto& p : g.panels_) {
        p.cum_lo /= cum;
        p.mass /= cum;
    }

    // Local maxima of log f, located on the node sequence and refined.
    std::vector<std::pair<double, double>> seq;
    for (const auto& p : g.panels_) {
        for (int i = 0; i < 21; ++i) {
            seq.emplace_back(p.node_v[i], std::isnan(p.node_log_f[i]) ? -kInf : p.node_log_f[i]);
        }
    }
    auto lf_v = [&](double v) {
        const double lf = g.log_f_(g.to_x(v));
        return std::isnan(lf) ? -kInf : lf;
    };
    const double v_min = g.panels_.front().v_lo, v_max = g.panels_.back().v_hi;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const double left = i == 0 ? -kInf : seq[i - 1].second;
        const double right = i + 1 == seq.size() ? -kInf : seq[i + 1].second;
        if (seq[i].second >= left && seq[i].second > right && std::isfinite(seq[i].second)) {
            const double a = i == 0 ? v_min : seq[i - 1].first;
            const double b = i + 1 == seq.size() ? v_max : seq[i + 1].first;
            const double lo = std::nextafter(a, b), hi = std::nextafter(b, a);
            Maximum m = maximize_bracketed(lf_v, lo, hi, 1e-13);
            if (m.value < seq[i].second) {
                m = {seq[i].first, seq[i].second};
            }
            g.maxima_.push_back({m.x, m.value});
        }
    }
    if (g.maxima_.empty()) {
        auto best = std::max_element(seq.begin(), seq.end(), [](auto& x, auto& y) { return x.second < y.second; });
        g.maxima_.push_back({best->first, best->second});
    }
    return g;
}

// ---------------------------------------------------------------------------------------
// GridDensity2D

GridDensity2D::GridDensity2D(LogKernel log_kernel, InnerBreakpoints breakpoints, const Options& opts)
    : log_kernel_(std::move(log_kernel)), breakpoints_(std::move(breakpoints)), opts_(opts) {
    QuadratureOptions outer;
    outer.rel_tol = opts_.rel_tol;
    outer.scale = opts_.s_scale;
    outer.initial_panels = 8;
    log_norm_ = 0.0;
    log_norm_ = log_integrate_half_line([this](double s) { return log_inner(s); }, outer);
    if (!std::isfinite(log_norm_)) {
        throw AccuracyError("GridDensity2D: kernel is not integrable", log_norm_, kInf);
    }
}

QuadratureOptions GridDensity2D::inner_options(double s) const {
    QuadratureOptions o;
    o.rel_tol = opts_.rel_tol;
    o.breakpoints = breakpoints_(s);
    if (!o.breakpoints.empty()) {
        auto bp = o.breakpoints;
        std::nth_element(bp.begin(), bp.begin() + static_cast<std::ptrdiff_t>(bp.size() / 2), bp.end());
        o.center = bp[bp.size() / 2];
    }
    o.scale = opts_.inner_scale;
    o.initial_panels = 2;
    return o;
}

double GridDensity2D::log_inner(double s) const {
    if (!(s > 0.0) || !std::isfinite(s)) {
        return -kInf;
    }
    return log_integrate_real_line([this, s](double t) { return log_kernel_(t, s); }, inner_options(s));
}

double GridDensity2D::pdf(double t, double s) const { return std::exp(log_pdf(t, s)); }

double GridDensity2D::marginal_s_pdf(double s) const { return std::exp(log_inner(s) - log_norm_); }

double GridDensity2D::rectangle_probability(double t_lo, double t_hi, double s_lo, double s_hi) const {
    if (!(t_lo <= t_hi) || !(s_lo <= s_hi)) {
        throw DomainError("rectangle_probability: malformed rectangle");
    }
    s_lo = std::max(s_lo, 0.0);
    if (s_lo >= s_hi || t_lo == t_hi) {
        return 0.0;
    }
    auto inner = [&](double s) {
        if (!(s > 0.0)) {
            return 0.0;
        }
        QuadratureOptions o = inner_options(s);
        o.rel_tol = opts_.query_rel_tol;
        o.abs_tol = 1e-14;
        return integrate_interval([&](double t) { return std::exp(log_kernel_(t, s) - log_norm_); }, t_lo, t_hi, o).value;
    };
    QuadratureOptions outer;
    outer.rel_tol = opts_.query_rel_tol;
    outer.abs_tol = 1e-13;
    outer.scale = opts_.s_scale;
    outer.center = opts_.s_scale;
    outer.initial_panels = 8;
    return std::clamp(integrate_interval(inner, s_lo, s_hi, outer).value, 0.0, 1.0);
}

std::vector<double> GridDensity2D::inner_samples(double s, const Interval& range) const {
    std::vector<double> centers = breakpoints_(s);
    std::sort(centers.begin(), centers.end());
    std::vector<double> pts;
    const double w = opts_.inner_scale;
    if (!centers.empty()) {
        for (std::size_t i = 0; i < centers.size(); ++i) {
            pts.push_back(centers[i]);
            if (i + 1 < centers.size()) {
                const double gap = centers[i + 1] - centers[i];
                const int k = gap > 8.0 * w ? 16 : 8;
                for (int j = 1; j < k; ++j) {
                    pts.push_back(centers[i] + gap * j / k);
                }
            }
        }
        for (double d : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0}) {
            pts.push_back(centers.front() - d * w);
            pts.push_back(centers.back() + d * w);
        }
    } else {
        for (int j = -16; j <= 16; ++j) {
            pts.push_back(w * std::tan(j * kHalfPi / 17.0));
        }
    }
    if (std::isfinite(range.lower)) {
        pts.push_back(range.lower);
    }
    if (std::isfinite(range.upper)) {
        pts.push_back(range.upper);
    }
    std::erase_if(pts, [&](double t) { return t < range.lower || t > range.upper; });
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

Maximum GridDensity2D::inner_sup(double s, const Interval& range) const {
    const auto pts = inner_samples(s, range);
    if (pts.empty()) {
        return {std::numeric_limits<double>::quiet_NaN(), -kInf};
    }
    auto f = [&](double t) { return log_kernel_(t, s); };
    std::vector<double> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        vals[i] = f(pts[i]);
    }
    Maximum best{pts[0], vals[0]};
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double left = i == 0 ? -kInf : vals[i - 1];
        const double right = i + 1 == pts.size() ? -kInf : vals[i + 1];
        if (vals[i] >= left && vals[i] >= right) {
            const double a = i == 0 ? pts[i] : pts[i - 1];
            const double b = i + 1 == pts.size() ? pts[i] : pts[i + 1];
            Maximum m = a < b ? maximize_bracketed(f, a, b, 1e-12) : Maximum{pts[i], vals[i]};
            if (m.value < vals[i]) {
                m = {pts[i], vals[i]};
            }
            if (m.value > best.value) {
                best = m;
            }
        }
    }
    return best;
}

double GridDensity2D::inner_mass_above(double s, double log_level) const {
    const Interval all{-kInf, kInf};
    auto pts = inner_samples(s, all);
    auto f = [&](double t) { return log_kernel_(t, s); };
    std::vector<std::pair<double, double>> seq;
    seq.reserve(pts.size() + 8);
    for (double t : pts) {
        seq.emplace_back(t, f(t));
    }
    // Insert refined local maxima so every super-level region contains a sample.
    const std::size_t n = seq.size();
    bool any_above = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i == 0 ? -kInf : seq[i - 1].second;
        const double right = i + 1 == n ? -kInf : seq[i + 1].second;
        if (seq[i].second >= left && seq[i].second >= right && i > 0 && i + 1 < n) {
            const Maximum m = maximize_bracketed(f, seq[i - 1].first, seq[i + 1].first, 1e-12);
            if (m.value > seq[i].second) {
                seq.emplace_back(m.x, m.value);
                any_above = any_above || m.value > log_level;
            }
        }
        any_above = any_above || seq[i].second > log_level;
    }
    if (!any_above) {
        return 0.0;
    }
    std::sort(seq.begin(), seq.end());
    auto clipped = [&](double t) { return std::clamp(f(t) - log_level, -1e300, 1e300); };
    std::vector<Interval> parts;
    bool inside = false;
    double start = 0.0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const bool now = seq[i].second > log_level;
        if (now && !inside) {
            if (i == 0) {
                // Far tails decay, so the leftmost sample is never above a positive level
                // unless the level is below the tail; integrate from -inf.
                start = -kInf;
            } else {
                start = invert_monotone(clipped, 0.0, seq[i - 1].first, seq[i].first, 1e-13);
            }
        } else if (!now && inside) {
            parts.push_back({start, invert_monotone(clipped, 0.0, seq[i - 1].first, seq[i].first, 1e-13)});
        }
        inside = now;
    }
    if (inside) {
        parts.push_back({start, kInf});
    }
    double total = 0.0;
    QuadratureOptions o = inner_options(s);
    o.rel_tol = opts_.query_rel_tol;
    o.abs_tol = 1e-15;
    for (const auto& p : parts) {
        o.center = std::isfinite(p.lower) ? p.lower : (std::isfinite(p.upper) ? p.upper : o.center);
        total += integrate_interval([&](double t) { return std::exp(log_kernel_(t, s) - log_norm_); }, p.lower, p.upper, o)
                     .value;
    }
    return total;
}

double GridDensity2D::mass_above(double log_level) const {
    auto inner = [&](double s) { return s > 0.0 && std::isfinite(s) ? inner_mass_above(s, log_level) : 0.0; };
    QuadratureOptions outer;
    outer.rel_tol = opts_.query_rel_tol;
    outer.abs_tol = 1e-12;
    outer.scale = opts_.s_scale;
    outer.initial_panels = 8;
    return std::clamp(integrate_half_line(inner, outer).value, 0.0, 1.0);
}

double GridDensity2D::contour_plausibility(double t0, double s0) const {
    if (!(s0 > 0.0)) {
        throw DomainError("contour_plausibility: s must be positive");
    }
    return std::clamp(1.0 - mass_above(log_kernel_(t0, s0)), 0.0, 1.0);
}

double GridDensity2D::sup_log_kernel(double s_lo, double s_hi, const std::function<Interval(double)>& t_range) const {
    s_lo = std::max(s_lo, 0.0);
    if (!(s_lo <= s_hi)) {
        return -kInf;
    }
    auto profile = [&](double s) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            return -kInf;
        }
        return inner_sup(s, t_range(s)).value;
    };
    // Scan s on a tan grid over the range, then refine the best bracket.
    const double sc = opts_.s_scale;
    const double v_lo = std::atan(s_lo / sc), v_hi = std::atan(std::min(s_hi, 1e300) / sc);
    constexpr int kGrid = 48;
    std::vector<double> ss, vals;
    for (int i = 0; i <= kGrid; ++i) {
        double v = v_lo + (v_hi - v_lo) * i / kGrid;
        double s = sc * std::tan(v);
        if (i == 0) {
            s = std::max(s_lo, 1e-300);
        }
        if (i == kGrid) {
            s = std::min(s_hi, sc * std::tan(v_hi));
        }
        ss.push_back(s);
        vals.push_back(profile(s));
    }
    std::size_t best = static_cast<std::size_t>(std::distance(vals.begin(), std::max_element(vals.begin(), vals.end())));
    double result = vals[best];
    const double a = ss[best == 0 ? 0 : best - 1];
    const double b = ss[best + 1 == ss.size() ? best : best + 1];
    if (a < b) {
        result = std::max(result, maximize_bracketed(profile, a, b, 1e-12 * (1.0 + b)).value);
    }
    return result;
}

std::pair<double, double> GridDensity2D::mode() const {
    const Interval all{-kInf, kInf};
    auto profile = [&](double s) { return s > 0.0 ? inner_sup(s, all).value : -kInf; };
    const double sc = opts_.s_scale;
    constexpr int kGrid = 64;
    std::vector<double> ss, vals;
    for (int i = 1; i < kGrid; ++i) {
        const double s = sc * std::tan(kHalfPi * i / kGrid);
        ss.push_back(s);
        vals.push_back(profile(s));
    }
    const std::size_t best = static_cast<std::size_t>(std::distance(vals.begin(), std::max_element(vals.begin(), vals.end())));
    const double a = best == 0 ? ss[0] * 1e-6 : ss[best - 1];
    const double b = best + 1 == ss.size() ? ss[best] * 4.0 : ss[best + 1];
    const Maximum m = maximize_bracketed(profile, a, b, 1e-13 * b);
    const Maximum t = inner_sup(m.x, all);
    return {t.x, m.x};
}

}  // namespace cauchy_im
