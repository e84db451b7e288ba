#pragma once

#include "cauchy_im/distribution.hpp"

#include <array>
#include <functional>
#include <vector>

namespace cauchy_im {

using RealFunction = std::function<double(double)>;

/// Controls for the adaptive Gauss-Kronrod integrators.
///
/// Ranges are mapped piecewise around anchors: every breakpoint and finite end (`center` on a
/// real line without breakpoints). Infinite ends use x = anchor +- scale * tan(v). Integrands with algebraic
/// tails become bounded smooth functions of v; on an infinite end they must decay faster than
/// |x|^-1 or the mapped integrand is singular there. Breakpoints are where callers expect
/// peaks; each is resolved at length scale `scale` regardless of its distance to the others.
struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_subdivisions = 4000;
    int initial_panels = 4;
    double center = 0.0;
    double scale = 1.0;
    std::vector<double> breakpoints;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  ///< estimated absolute error bound
    int evaluations = 0;
};

QuadratureResult integrate_interval(const RealFunction& f, double a, double b, const QuadratureOptions& opts = {});
QuadratureResult integrate_real_line(const RealFunction& f, const QuadratureOptions& opts = {});
QuadratureResult integrate_half_line(const RealFunction& f, const QuadratureOptions& opts = {});

/// log ∫ exp(log_f) over the real line / positive half-line, immune to under- and overflow.
double log_integrate_real_line(const RealFunction& log_f, const QuadratureOptions& opts = {});
double log_integrate_half_line(const RealFunction& log_f, const QuadratureOptions& opts = {});
/// Same over [a, b]; either end may be infinite.
double log_integrate_interval(const RealFunction& log_f, double a, double b, const QuadratureOptions& opts = {});

/// Root of g(x) = target on a bracket where g is continuous and monotone (bisection with
/// secant steps). Throws DomainError if target is not between g(lo) and g(hi).
double invert_monotone(const RealFunction& g, double target, double lo, double hi, double x_tol = 1e-12);

/// Maximizer of f on [lo, hi] by golden-section search with parabolic steps (Brent).
struct Maximum {
    double x;
    double value;
};
Maximum maximize_bracketed(const RealFunction& f, double lo, double hi, double x_tol = 1e-12);

enum class Domain { real_line, positive_half_line };

namespace detail {

/// Increasing map from [0, v_end()] onto [a, b]. Breakpoints and finite ends are anchors; each
/// anchor owns the half-gaps on either side, traversed as x = anchor +- scale * expm1(u), so
/// quadrature nodes cluster around every anchor at resolution `scale` however far apart the
/// anchors are. An infinite end continues the outermost anchor with expm1 out to distance
/// D = max(scale, anchor spread) and then with x = +-D tan(u). With no anchor on an infinite
/// range, `center` is used.
class AnchoredMap {
public:
    AnchoredMap() = default;
    AnchoredMap(double a, double b, const std::vector<double>& breakpoints, double center, double scale);

    double x(double v) const;
    double v(double x) const;
    double jacobian(double v) const;
    double v_end() const noexcept { return pieces_.empty() ? 0.0 : pieces_.back().v0 + pieces_.back().width; }
    /// Piece boundaries in v, from 0 to v_end().
    std::vector<double> boundaries() const;
    double lower() const noexcept { return a_; }
    double upper() const noexcept { return b_; }

private:
    struct Piece {
        double v0, width;
        double anchor;
        bool from_left;  // x = anchor + scale g(u), else x = anchor - scale g(width - u)
        bool tail;       // g = tan on an infinite end, expm1 otherwise
        double scale;
        double x_lo, x_hi;
    };
    std::size_t piece_of_v(double v) const;

    double a_ = 0.0, b_ = 0.0;
    std::vector<Piece> pieces_;
};

}  // namespace detail

struct DensityOptions {
    double center = 0.0;
    double scale = 1.0;
    std::vector<double> breakpoints;
    double rel_tol = 1e-10;
    int initial_panels = 16;
    int max_subdivisions = 4000;
};

/// Normalized univariate density tabulated on an adaptive Gauss-Kronrod panel grid.
///
/// Built from an unnormalized log-density. Panel boundaries carry exact cumulative masses;
/// cdf inside a panel is one more Kronrod rule, quantile a safeguarded Newton solve inside
/// the bracketing panel. Node log-values are retained and drive level-set queries.
/// Immutable after construction; safe to share between threads.
class GridDensity final : public UnivariateDistribution {
public:
    double log_pdf(double x) const override;
    double cdf(double x) const override;
    double quantile(double p) const override;
    double lower() const override;
    double upper() const override;
    double sup_log_pdf(const Interval& range) const override;
    IntervalSet level_set(double log_level) const override;
    double mass(const IntervalSet& set) const override;

    Domain domain() const noexcept { return domain_; }
    double log_norm() const noexcept { return log_norm_; }
    /// Mean, when it exists (finite integral of x f(x)).
    double mean() const;
    /// Location of the global maximum of the density.
    double mode() const;

    /// Panel boundaries (strictly increasing, in x) and unnormalized log-density there.
    std::vector<double> nodes() const;
    std::vector<double> log_values() const;

    friend GridDensity normalize(RealFunction log_f, Domain domain, const DensityOptions& opts);

private:
    struct Panel {
        double v_lo, v_hi;     // transformed coordinates
        double mass;           // normalized mass of the panel
        double cum_lo;         // cumulative mass at v_lo
        std::array<double, 21> node_v;
        std::array<double, 21> node_log_f;  // unnormalized log f(x(v)) (no Jacobian)
    };
    struct LocalMax {
        double v;
        double log_f;
    };

    GridDensity() = default;

    double to_x(double v) const { return map_.x(v); }
    double to_v(double x) const { return map_.v(x); }
    double jacobian(double v) const { return map_.jacobian(v); }
    double log_density_v(double v) const;  // normalized log of f(x(v)) * dx/dv
    double partial_mass(const Panel& p, double v) const;
    double cdf_v(double v) const;
    std::size_t panel_index(double v) const;

    RealFunction log_f_;
    Domain domain_ = Domain::real_line;
    detail::AnchoredMap map_;
    double log_norm_ = 0.0;
    std::vector<Panel> panels_;
    std::vector<LocalMax> maxima_;
};

/// Normalizes exp(log_f) over the domain. Throws AccuracyError when refinement diverges.
GridDensity normalize(RealFunction log_f, Domain domain, const DensityOptions& opts = {});

/// Two-dimensional density on R x R+ handled as iterated one-dimensional integrals: inner
/// variable t over the real line, outer variable s over the positive half-line.
class GridDensity2D {
public:
    using LogKernel = std::function<double(double t, double s)>;
    /// Points in t near which the inner integrand may peak, for a given s.
    using InnerBreakpoints = std::function<std::vector<double>(double s)>;

    struct Options {
        double s_scale = 1.0;
        double inner_scale = 1.0;
        double rel_tol = 1e-10;
        /// Tolerance for region-probability queries (contours, rectangles).
        double query_rel_tol = 1e-9;
    };

    GridDensity2D(LogKernel log_kernel, InnerBreakpoints breakpoints, const Options& opts);

    double log_pdf(double t, double s) const { return log_kernel_(t, s) - log_norm_; }
    double pdf(double t, double s) const;
    double log_norm() const noexcept { return log_norm_; }

    /// log of the t-integrated kernel at s (unnormalized marginal of s).
    double log_inner(double s) const;
    /// Normalized marginal density of s.
    double marginal_s_pdf(double s) const;

    /// P(t_lo <= T <= t_hi, s_lo <= S <= s_hi).
    double rectangle_probability(double t_lo, double t_hi, double s_lo, double s_hi) const;

    /// P(pdf(T, S) <= pdf(t0, s0)): plausibility under the density-contour random set.
    double contour_plausibility(double t0, double s0) const;
    /// P(pdf(T, S) > exp(log_level)).
    double mass_above(double log_level) const;

    /// Global maximizer (t, s) of the density.
    std::pair<double, double> mode() const;

    /// Supremum of the log-kernel over {(t, s): s in [s_lo, s_hi], t in t_range(s)}.
    double sup_log_kernel(double s_lo, double s_hi, const std::function<Interval(double)>& t_range) const;

    /// Maximum over t of the log-kernel restricted to `range`, at fixed s.
    Maximum inner_sup(double s, const Interval& range) const;

    const Options& options() const noexcept { return opts_; }

private:
    QuadratureOptions inner_options(double s) const;
    double inner_mass_above(double s, double log_level) const;
    std::vector<double> inner_samples(double s, const Interval& range) const;

    LogKernel log_kernel_;
    InnerBreakpoints breakpoints_;
    Options opts_;
    double log_norm_ = 0.0;
};

}  // namespace cauchy_im
