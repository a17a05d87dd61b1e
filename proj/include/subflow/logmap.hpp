#pragma once

#include <algorithm>
#include <functional>
#include <mutex>
#include <optional>
#include <vector>

#include "subflow/geodesic.hpp"
#include "subflow/parallel.hpp"
#include "subflow/rng.hpp"

namespace subflow {

enum class LogSpace { full_cotangent, dual_subbundle };

struct LogOptions {
    LogSpace space = LogSpace::full_cotangent;
    double coarse_step = 1e-2;  // shooting resolution during optimization
    double fine_step = 1e-3;    // resolution of the reported residual
    int max_iterations = 200;
    double grad_tol = 1e-6;          // converged when ||g|| < tol * (1 + J)
    double objective_fd_rel = 1e-4;  // FD step through the shooting map
    // Weight of the Hamiltonian term in the objective. With equal weighting
    // the exact minimizer undershoots the target by a constant fraction of
    // the distance; a small weight keeps the term as a shortest-geodesic
    // tie-break while the endpoint mismatch dominates.
    double hamiltonian_weight = 1e-4;
    int random_restarts = 4;
    std::uint64_t seed = 0;
    // Two-stage mode: solve in the dual subbundle first, then refine the
    // result in the full cotangent space for a few iterations. Cuts the
    // number of FD shoots per gradient from 2d to 2k in the expensive stage.
    bool warm_start_dual = false;
    int full_refine_iterations = 2;
    // Bracket the covector length along the chord ray with a golden-section
    // search before descending. Pays off when the target is much farther
    // along the data than the chord projection suggests.
    bool chord_scale_search = false;
    // Final monotone refinement at fine_step resolution: rescan the ray
    // {t * eta_hat} against the recorded fine trajectory (time homogeneity)
    // and keep the best t. Removes the scale bias a coarse shooting step
    // leaves in the covector length.
    bool fine_ray_refine = true;
    int threads = 1;
    double integrator_fd_rel = 1e-5;
    Scheme scheme = Scheme::euler;
};

struct LogResult {
    Vec eta_hat;
    double residual = 0.0;     // ||sr_exp(p, eta_hat) - y|| at fine_step
    double hamiltonian = 0.0;  // H(p, eta_hat)
    double objective = 0.0;    // residual^2 + weight * H, at fine_step
    bool converged = false;
    int restarts_used = 0;
};

namespace detail {

struct BfgsOutcome {
    Vec x;
    double f = std::numeric_limits<double>::infinity();
    bool converged = false;
    bool made_progress = false;
    int iterations = 0;
};

/// Dense BFGS with backtracking Armijo line search and central-FD gradients.
/// Objective may return +inf to mark infeasible points.
inline BfgsOutcome bfgs_minimize(const std::function<double(const Vec&)>& f,
                                 Vec x0, int max_iterations, double grad_tol,
                                 double fd_rel) {
    BfgsOutcome out;
    out.x = std::move(x0);
    out.f = f(out.x);
    if (!std::isfinite(out.f)) return out;

    const Eigen::Index m = out.x.size();
    auto gradient = [&](const Vec& x) {
        const double h = fd_rel * (1.0 + x.norm());
        Vec g(m);
        Vec q = x;
        for (Eigen::Index i = 0; i < m; ++i) {
            q[i] = x[i] + h;
            const double fp = f(q);
            q[i] = x[i] - h;
            const double fm = f(q);
            q[i] = x[i];
            if (!std::isfinite(fp) || !std::isfinite(fm))
                return Vec(Vec::Constant(m, std::numeric_limits<double>::quiet_NaN()));
            g[i] = (fp - fm) / (2.0 * h);
        }
        return g;
    };

    Vec g = gradient(out.x);
    if (g.hasNaN()) return out;
    Mat B = Mat::Identity(m, m);  // inverse Hessian approximation
    bool scaled = false;

    for (int it = 0; it < max_iterations; ++it) {
        out.iterations = it;
        if (g.norm() < grad_tol * (1.0 + std::abs(out.f))) {
            out.converged = true;
            return out;
        }
        Vec dir = -(B * g);
        double slope = g.dot(dir);
        if (slope >= 0.0) {  // reset a corrupted curvature model
            B.setIdentity();
            dir = -g;
            slope = g.dot(dir);
            if (slope >= 0.0) return out;
        }
        double t = 1.0;
        double f_new = std::numeric_limits<double>::infinity();
        Vec x_new;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            x_new = out.x + t * dir;
            f_new = f(x_new);
            if (std::isfinite(f_new) && f_new <= out.f + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) return out;

        Vec g_new = gradient(x_new);
        if (g_new.hasNaN()) {
            out.x = std::move(x_new);
            out.f = f_new;
            out.made_progress = true;
            return out;
        }
        const Vec s = x_new - out.x;
        const Vec yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            if (!scaled) {  // standard initial scaling before the first update
                B = (sy / yv.squaredNorm()) * Mat::Identity(m, m);
                scaled = true;
            }
            const Vec By = B * yv;
            const double yBy = yv.dot(By);
            B += ((sy + yBy) / (sy * sy)) * (s * s.transpose()) -
                 (By * s.transpose() + s * By.transpose()) / sy;
        }
        out.x = std::move(x_new);
        out.f = f_new;
        g = std::move(g_new);
        out.made_progress = true;
    }
    out.converged = g.norm() < grad_tol * (1.0 + std::abs(out.f));
    return out;
}

}  // namespace detail

/// Approximate sub-Riemannian logarithm: minimize
///     || sr_exp_p(eta) - y ||^2 + w_H * H(p, eta)
/// over the requested covector space by multi-started quasi-Newton descent
/// with finite-difference gradients through the shooting map. The best
/// restart by (objective, restart index) wins. The dual-subbundle space is
/// parameterized as eta = F_p c, so feasibility is structural.
inline LogResult sr_log(const FrameField& field, const Vec& p, const Vec& y,
                        const LogOptions& opts) {
    field.geometry().check_point(p);
    field.geometry().check_point(y);
    const SubbundleFrame frame = field.at(p);  // throws if p is singular
    const int da = field.ambient_dim();
    const int m = opts.space == LogSpace::dual_subbundle ? frame.k : da;

    auto eta_of = [&](const Vec& x) -> Vec {
        if (opts.space == LogSpace::dual_subbundle) return frame.F * x;
        return x;
    };
    auto h_of = [&](const Vec& x) -> double {
        if (opts.space == LogSpace::dual_subbundle) return 0.5 * x.squaredNorm();
        return hamiltonian(frame, x);
    };

    IntegrateOptions shoot;
    shoot.step = opts.coarse_step;
    shoot.scheme = opts.scheme;
    shoot.record_states = false;
    shoot.fd_step_rel = opts.integrator_fd_rel;

    std::mutex failure_mutex;
    std::optional<std::string> first_failure;
    auto objective = [&](const Vec& x) -> double {
        const Vec eta = eta_of(x);
        if (eta.norm() == 0.0) return (p - y).squaredNorm();
        try {
            const Vec end = integrate(field, p, eta, 1.0, shoot).endpoint();
            return (end - y).squaredNorm() + opts.hamiltonian_weight * h_of(x);
        } catch (const Error& e) {
            std::lock_guard<std::mutex> lk(failure_mutex);
            if (!first_failure) first_failure = e.what();
            return std::numeric_limits<double>::infinity();
        }
    };

    // start points
    std::vector<Vec> starts;
    const double chord = (y - p).norm();
    Rng rng(opts.seed);
    auto random_unit = [&]() {
        Vec u(m);
        for (Eigen::Index i = 0; i < m; ++i) u[i] = rng.normal();
        const double n = u.norm();
        return n > 0 ? Vec(u / n) : Vec(Vec::Unit(m, 0));
    };
    if (opts.warm_start_dual && opts.space == LogSpace::full_cotangent) {
        LogOptions stage = opts;
        stage.space = LogSpace::dual_subbundle;
        stage.warm_start_dual = false;
        stage.threads = 1;
        const LogResult dual = sr_log(field, p, y, stage);
        starts.push_back(dual.eta_hat);
    } else {
        starts.push_back(1e-3 * std::max(chord, 1e-6) * random_unit());
        Vec chord_start = opts.space == LogSpace::dual_subbundle
                              ? Vec(frame.F.transpose() * (y - p))
                              : Vec(frame.F * (frame.F.transpose() * (y - p)));
        if (opts.chord_scale_search && chord_start.norm() > 1e-12) {
            // golden-section search for the covector length along the ray
            const Vec u = chord_start.normalized();
            const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
            double a = 0.25 * chord, b = 2.5 * chord;
            double s1 = b - ratio * (b - a), s2 = a + ratio * (b - a);
            double f1 = objective(s1 * u), f2 = objective(s2 * u);
            for (int it = 0; it < 12; ++it) {
                if (f1 < f2) {
                    b = s2;
                    s2 = s1;
                    f2 = f1;
                    s1 = b - ratio * (b - a);
                    f1 = objective(s1 * u);
                } else {
                    a = s1;
                    s1 = s2;
                    f1 = f2;
                    s2 = a + ratio * (b - a);
                    f2 = objective(s2 * u);
                }
            }
            const double s_best = 0.5 * (a + b);
            if (std::isfinite(objective(s_best * u))) chord_start = s_best * u;
        }
        starts.push_back(chord_start);
        for (int r = 0; r < opts.random_restarts; ++r)
            starts.push_back(chord * random_unit());
    }

    const int max_iters = (opts.warm_start_dual && opts.space == LogSpace::full_cotangent)
                              ? opts.full_refine_iterations
                              : opts.max_iterations;

    std::vector<detail::BfgsOutcome> outcomes(starts.size());
    parallel_for(int(starts.size()), opts.threads, [&](int i) {
        outcomes[std::size_t(i)] =
            detail::bfgs_minimize(objective, starts[std::size_t(i)], max_iters,
                                  opts.grad_tol, opts.objective_fd_rel);
    });

    int winner = -1;
    for (int i = 0; i < int(outcomes.size()); ++i) {
        if (!std::isfinite(outcomes[std::size_t(i)].f)) continue;
        if (winner < 0 || outcomes[std::size_t(i)].f < outcomes[std::size_t(winner)].f)
            winner = i;
    }
    if (winner < 0) {
        if (first_failure)
            throw SingularPointError("log shooting failed everywhere: " +
                                     *first_failure);
        throw NoDescentError("all restarts failed their line search");
    }
    const bool warm_started =
        opts.warm_start_dual && opts.space == LogSpace::full_cotangent;
    const bool any_progress_or_converged =
        std::any_of(outcomes.begin(), outcomes.end(), [](const auto& o) {
            return o.made_progress || o.converged;
        });
    // A warm-started refine that cannot improve simply keeps the staged
    // solution; without a warm start a total line-search failure is an error.
    if (!warm_started && !any_progress_or_converged &&
        outcomes[std::size_t(winner)].f > 0.0 && (p - y).norm() > 0.0)
        throw NoDescentError("all restarts failed their line search");

    const detail::BfgsOutcome& best = outcomes[std::size_t(winner)];
    LogResult res;
    res.eta_hat = eta_of(best.x);
    res.converged = best.converged;
    res.restarts_used = int(starts.size());
    res.hamiltonian = h_of(best.x);

    if (res.eta_hat.norm() == 0.0) {
        res.residual = (p - y).norm();
        res.objective = res.residual * res.residual;
        return res;
    }

    IntegrateOptions fine;
    fine.step = opts.fine_step;
    fine.scheme = opts.scheme;
    fine.record_states = opts.fine_ray_refine;
    fine.stop_on_error = opts.fine_ray_refine;
    const double horizon = opts.fine_ray_refine ? 1.25 : 1.0;
    const GeodesicPath path = integrate(field, p, res.eta_hat, horizon, fine);

    double t_star = 1.0;
    double best_residual =
        (path.states[std::min<std::size_t>(
                         std::size_t(std::lround(1.0 / opts.fine_step)),
                         path.states.size() - 1)]
             .p -
         y)
            .norm();
    if (opts.fine_ray_refine) {
        // gamma_{t eta}(1) = gamma_eta(t): the recorded trajectory scores
        // every rescaling of eta_hat at fine resolution in one pass
        std::size_t j_star = 0;
        double best_obj = std::numeric_limits<double>::infinity();
        std::vector<double> objs(path.states.size());
        for (std::size_t j = 0; j < path.states.size(); ++j) {
            const double t = double(j) * opts.fine_step;
            const double miss = (path.states[j].p - y).squaredNorm();
            objs[j] = miss + opts.hamiltonian_weight * res.hamiltonian * t * t;
            if (objs[j] < best_obj) {
                best_obj = objs[j];
                j_star = j;
            }
        }
        double t_refined = double(j_star) * opts.fine_step;
        if (j_star > 0 && j_star + 1 < objs.size()) {
            // parabolic touch-up between grid neighbours
            const double denom =
                objs[j_star - 1] - 2.0 * objs[j_star] + objs[j_star + 1];
            if (denom > 0.0)
                t_refined += opts.fine_step * 0.5 *
                             (objs[j_star - 1] - objs[j_star + 1]) / denom;
        }
        const double obj_at_one =
            best_residual * best_residual +
            opts.hamiltonian_weight * res.hamiltonian;
        if (best_obj < obj_at_one && t_refined > 0.0) {
            t_star = t_refined;
            best_residual = (path.states[j_star].p - y).norm();
        }
    }
    res.eta_hat *= t_star;
    res.hamiltonian *= t_star * t_star;
    res.residual = best_residual;
    res.objective =
        res.residual * res.residual + opts.hamiltonian_weight * res.hamiltonian;
    return res;
}

/// Sub-Riemannian distance estimate d(x, y) = sqrt(2 H(x, eta_hat)) with the
/// log searched over the full cotangent space. The symmetrized variant
/// averages the (x, y) and (y, x) runs.
inline double sr_distance(const FrameField& field, const Vec& x, const Vec& y,
                          LogOptions opts = {}, bool symmetrize = false) {
    opts.space = LogSpace::full_cotangent;
    const LogResult fwd = sr_log(field, x, y, opts);
    double d = std::sqrt(2.0 * fwd.hamiltonian);
    if (symmetrize) {
        const LogResult bwd = sr_log(field, y, x, opts);
        d = 0.5 * (d + std::sqrt(2.0 * bwd.hamiltonian));
    }
    return d;
}

}  // namespace subflow
