#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "subflow/subbundle.hpp"

namespace subflow {

struct CotangentState {
    Vec p;
    Vec eta;
};

enum class Scheme { euler, semi_implicit_euler };

struct IntegrateOptions {
    double step = 1e-3;
    Scheme scheme = Scheme::euler;
    double fd_step_rel = 1e-5;        // stencil for dH/dp
    double divergence_factor = 10.0;  // bound in units of the support radius
    bool record_states = true;        // false keeps only the endpoints
    // When set, numerical failures truncate the path instead of throwing.
    bool stop_on_error = false;
};

struct GeodesicPath {
    std::vector<CotangentState> states;
    double step = 0.0;
    std::vector<double> hamiltonian_trace;  // one value per stored state
    // sphere constraint diagnostics (residuals removed by renormalization)
    double max_norm_drift = 0.0;
    double max_cotangent_drift = 0.0;
    int truncated_at_step = -1;
    std::string truncation_reason;

    const Vec& endpoint() const { return states.back().p; }
    bool truncated() const { return truncated_at_step >= 0; }

    /// Max relative deviation of H from its initial value.
    double hamiltonian_drift() const {
        const double h0 = hamiltonian_trace.front();
        const double scale = std::max(std::abs(h0), 1e-300);
        double worst = 0.0;
        for (double h : hamiltonian_trace)
            worst = std::max(worst, std::abs(h - h0) / scale);
        return worst;
    }
};

/// Sub-Riemannian Hamiltonian H(p, eta) = 1/2 ||F(p)^T eta||^2.
inline double hamiltonian(const SubbundleFrame& frame, const Vec& eta) {
    return 0.5 * (frame.F.transpose() * eta).squaredNorm();
}

inline double hamiltonian(const FrameField& field, const Vec& p, const Vec& eta) {
    return hamiltonian(field.at(p), eta);
}

struct HamiltonianGradients {
    Vec dp;    // central finite differences
    Vec deta;  // g*_p eta, exact
    double value = 0.0;
};

/// dH/deta exactly (the projected covector); dH/dp by central finite
/// differences of H(., eta) with step fd_step_rel * max(1, ||p||).
inline HamiltonianGradients hamiltonian_gradients(const FrameField& field,
                                                  const Vec& p, const Vec& eta,
                                                  double fd_step_rel = 1e-5) {
    HamiltonianGradients g;
    const SubbundleFrame frame = field.at(p);
    g.deta = frame.F * (frame.F.transpose() * eta);
    g.value = hamiltonian(frame, eta);
    const double h = fd_step_rel * std::max(1.0, p.norm());
    g.dp.resize(p.size());
    Vec q = p;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        q[i] = p[i] + h;
        const double hp = hamiltonian(field, q, eta);
        q[i] = p[i] - h;
        const double hm = hamiltonian(field, q, eta);
        q[i] = p[i];
        g.dp[i] = (hp - hm) / (2.0 * h);
    }
    return g;
}

/// Integrate the Hamiltonian equations  dp = g* eta,  deta = -dH/dp  over
/// floor(T/step) steps. Velocities are built as g* eta, so the path is
/// horizontal by construction. Sphere geometries integrate extrinsically
/// with per-step renormalization of p and projection of eta; the removed
/// drift is recorded as a diagnostic.
inline GeodesicPath integrate(const FrameField& field, const Vec& p0,
                              const Vec& eta0, double T,
                              const IntegrateOptions& opts) {
    field.geometry().check_point(p0);
    field.geometry().check_point(eta0);
    if (!(T > 0.0) || !(opts.step > 0.0))
        throw ConfigError("integration needs T > 0 and step > 0");
    const int steps = int(std::floor(T / opts.step * (1.0 + 1e-12)));
    if (steps < 1) throw ConfigError("integration needs at least one step");

    const bool on_sphere = field.geometry().space == Space::sphere;
    const Vec center = field.support_center();
    const double bound = opts.divergence_factor * field.support_radius();

    GeodesicPath path;
    path.step = opts.step;

    Vec p = p0, eta = eta0;
    if (on_sphere) {
        p.normalize();
        eta -= eta.dot(p) * p;
    }
    path.states.push_back({p, eta});

    int j = 0;
    try {
        for (; j < steps; ++j) {
            const HamiltonianGradients g =
                hamiltonian_gradients(field, p, eta, opts.fd_step_rel);
            if (opts.record_states || j == 0)
                path.hamiltonian_trace.push_back(g.value);

            Vec p_next = p + opts.step * g.deta;
            Vec eta_next;
            if (opts.scheme == Scheme::euler) {
                eta_next = eta - opts.step * g.dp;
            } else {
                // position first, cotangent update at the updated position
                const HamiltonianGradients g2 =
                    hamiltonian_gradients(field, p_next, eta, opts.fd_step_rel);
                eta_next = eta - opts.step * g2.dp;
            }
            if (on_sphere) {
                path.max_norm_drift =
                    std::max(path.max_norm_drift, std::abs(p_next.norm() - 1.0));
                p_next.normalize();
                path.max_cotangent_drift = std::max(path.max_cotangent_drift,
                                                    std::abs(eta_next.dot(p_next)));
                eta_next -= eta_next.dot(p_next) * p_next;
            }
            if (std::isfinite(bound) && (p_next - center).norm() > bound)
                throw DivergenceError("trajectory left the data support", j);

            p = std::move(p_next);
            eta = std::move(eta_next);
            if (opts.record_states) path.states.push_back({p, eta});
        }
        if (!opts.record_states) path.states.push_back({p, eta});
        path.hamiltonian_trace.push_back(hamiltonian(field, p, eta));
    } catch (const Error& e) {
        if (!opts.stop_on_error) {
            if (auto* s = dynamic_cast<const SingularPointError*>(&e))
                throw SingularPointError(std::string(s->what()) +
                                             " (integration step " +
                                             std::to_string(j) + ")",
                                         j);
            throw;
        }
        path.truncated_at_step = j;
        path.truncation_reason = e.what();
        // keep states and trace aligned: drop whichever ran ahead
        while (path.states.size() > path.hamiltonian_trace.size())
            path.states.pop_back();
        while (path.hamiltonian_trace.size() > path.states.size())
            path.hamiltonian_trace.pop_back();
        if (path.states.empty()) {
            path.states.push_back({p, eta});
            path.hamiltonian_trace.push_back(0.0);
        }
    }
    return path;
}

/// Sub-Riemannian exponential: position at time 1 of the normal geodesic
/// launched by (p, eta). Scaling eta moves along the same geodesic.
inline Vec sr_exp(const FrameField& field, const Vec& p, const Vec& eta,
                  double delta, Scheme scheme = Scheme::euler) {
    if (eta.norm() == 0.0) return p;
    IntegrateOptions opts;
    opts.step = delta;
    opts.scheme = scheme;
    opts.record_states = false;
    return integrate(field, p, eta, 1.0, opts).endpoint();
}

}  // namespace subflow
