#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "subflow/logmap.hpp"

namespace subflow {

struct SubmanifoldPoint {
    int geodesic = -1;  // -1 for the base point itself
    int step = 0;
    double arclen = 0.0;
    Vec point;
    Vec chart;  // coefficients in the F_mu basis of the dual subbundle
};

struct TruncationEvent {
    int geodesic = -1;
    int step = 0;
    std::string reason;
};

/// Point-set representation of a principal submanifold: the base point plus
/// s*L grid points p_ij, the i-th unit-H covector integrated j steps.
struct PrincipalSubmanifold {
    Vec mu;
    Mat frame;  // F_mu, ambient x k
    double radius = 0.0;
    double delta = 0.0;
    int k = 0;
    int num_geodesics = 0;
    std::vector<Vec> covectors;  // ambient-dim initial covectors, H = 1/2
    std::vector<SubmanifoldPoint> points;
    std::vector<TruncationEvent> truncations;

    int steps_per_geodesic() const { return int(std::floor(radius / delta)); }
};

struct GenerateOptions {
    double radius = 1.0;
    int num_geodesics = 16;
    double step = 1e-3;
    Scheme scheme = Scheme::euler;
    double integrator_fd_rel = 1e-5;
    std::uint64_t seed = 0;  // used by the k >= 4 covector fallback
    int threads = 1;
};

namespace detail {

/// L unit vectors in R^k seeding the covector grid. k = 1 alternates the two
/// poles, k = 2 walks a uniform angular grid, k = 3 uses a Fibonacci spiral,
/// higher k falls back to seeded uniform directions.
inline std::vector<Vec> covector_directions(int k, int L, std::uint64_t seed) {
    std::vector<Vec> dirs;
    dirs.reserve(std::size_t(L));
    if (k == 1) {
        for (int i = 0; i < L; ++i) {
            Vec d(1);
            d[0] = (i % 2 == 0) ? 1.0 : -1.0;
            dirs.push_back(d);
        }
    } else if (k == 2) {
        for (int i = 0; i < L; ++i) {
            const double a = 2.0 * M_PI * double(i) / double(L);
            Vec d(2);
            d << std::cos(a), std::sin(a);
            dirs.push_back(d);
        }
    } else if (k == 3) {
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < L; ++i) {
            const double z = 1.0 - 2.0 * (double(i) + 0.5) / double(L);
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double a = golden * double(i);
            Vec d(3);
            d << r * std::cos(a), r * std::sin(a), z;
            dirs.push_back(d);
        }
    } else {
        Rng rng(seed);
        for (int i = 0; i < L; ++i) {
            Vec d(k);
            for (int c = 0; c < k; ++c) d[c] = rng.normal();
            dirs.push_back(d.normalized());
        }
    }
    return dirs;
}

}  // namespace detail

/// Build the point set of the principal submanifold at mu: L unit-speed
/// covectors on the unit sphere of the dual subbundle, each integrated
/// floor(r/step) steps. Geodesics hitting a singularity or the divergence
/// guard are truncated and logged; the full grid has s*L + 1 points.
inline PrincipalSubmanifold generate(const FrameField& field, const Vec& mu,
                                     const GenerateOptions& opts) {
    if (!(opts.radius > 0.0) || !(opts.step > 0.0) || opts.num_geodesics < 1)
        throw ConfigError("generate needs radius > 0, step > 0, L >= 1");
    const SubbundleFrame frame = field.at(mu);
    const int s = int(std::floor(opts.radius / opts.step * (1.0 + 1e-12)));
    if (s < 1) throw ConfigError("radius shorter than one step");

    PrincipalSubmanifold sm;
    sm.mu = frame.base;
    sm.frame = frame.F;
    sm.radius = opts.radius;
    sm.delta = opts.step;
    sm.k = frame.k;
    sm.num_geodesics = opts.num_geodesics;

    const std::vector<Vec> dirs =
        detail::covector_directions(frame.k, opts.num_geodesics, opts.seed);
    for (const Vec& c : dirs) sm.covectors.push_back(frame.F * c);

    IntegrateOptions iopts;
    iopts.step = opts.step;
    iopts.scheme = opts.scheme;
    iopts.fd_step_rel = opts.integrator_fd_rel;
    iopts.record_states = true;
    iopts.stop_on_error = true;

    std::vector<GeodesicPath> paths(dirs.size());
    parallel_for(int(dirs.size()), opts.threads, [&](int i) {
        paths[std::size_t(i)] = integrate(field, sm.mu, sm.covectors[std::size_t(i)],
                                          double(s) * opts.step, iopts);
    });

    SubmanifoldPoint base;
    base.geodesic = -1;
    base.step = 0;
    base.arclen = 0.0;
    base.point = sm.mu;
    base.chart = Vec::Zero(frame.k);
    sm.points.push_back(std::move(base));

    for (int i = 0; i < int(dirs.size()); ++i) {
        const GeodesicPath& path = paths[std::size_t(i)];
        if (path.truncated())
            sm.truncations.push_back(
                {i, path.truncated_at_step, path.truncation_reason});
        for (int j = 1; j < int(path.states.size()); ++j) {
            SubmanifoldPoint pt;
            pt.geodesic = i;
            pt.step = j;
            pt.arclen = double(j) * opts.step;
            pt.point = path.states[std::size_t(j)].p;
            pt.chart = pt.arclen * dirs[std::size_t(i)];
            sm.points.push_back(std::move(pt));
        }
    }
    return sm;
}

struct Projection {
    Vec point;
    Vec chart;
    double distance = 0.0;
    int geodesic = -1;
    int step = 0;
};

/// Nearest stored grid point by ambient distance; ties resolved by the
/// lowest (geodesic, step) index, the base point ranking lowest of all.
inline Projection project_discrete(const Vec& x, const PrincipalSubmanifold& sm) {
    if (sm.points.empty()) throw ConfigError("empty submanifold");
    const SubmanifoldPoint* best = nullptr;
    double best_sq = std::numeric_limits<double>::infinity();
    for (const SubmanifoldPoint& pt : sm.points) {
        const double d = (x - pt.point).squaredNorm();
        if (d < best_sq) {
            best_sq = d;
            best = &pt;
        }
    }
    return Projection{best->point, best->chart, std::sqrt(best_sq),
                      best->geodesic, best->step};
}

/// Continuous projection: exp of the dual-subbundle log. The chart
/// coordinates are the F_mu coefficients of the optimal covector.
inline Projection project_continuous(const FrameField& field, const Vec& mu,
                                     const Vec& x, LogOptions opts = {}) {
    opts.space = LogSpace::dual_subbundle;
    const SubbundleFrame frame = field.at(mu);
    const LogResult lr = sr_log(field, mu, x, opts);
    Projection pr;
    pr.point = lr.eta_hat.norm() == 0.0
                   ? frame.base
                   : sr_exp(field, frame.base, lr.eta_hat, opts.fine_step,
                            opts.scheme);
    pr.chart = frame.F.transpose() * lr.eta_hat;
    pr.distance = (x - pr.point).norm();
    return pr;
}

enum class BaseMetric { ambient, subriemannian };

/// Index of the within-sample Frechet mean: the observation minimizing the
/// mean distance to the others. Ties go to the lowest index.
inline Eigen::Index frechet_argmin(const PointCloud& cloud,
                                   BaseMetric metric = BaseMetric::ambient,
                                   const FrameField* field = nullptr,
                                   const LogOptions* log_opts = nullptr) {
    const Eigen::Index n = cloud.size();
    if (n == 0) throw ConfigError("empty cloud");
    Eigen::Index best = 0;
    double best_mean = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        double total = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            if (metric == BaseMetric::ambient) {
                total += geodesic_distance(cloud.geometry(), cloud.point(i),
                                           cloud.point(j));
            } else {
                if (!field) throw ConfigError("sub-Riemannian metric needs a frame field");
                LogOptions lo = log_opts ? *log_opts : LogOptions{};
                total += sr_distance(*field, cloud.point(i), cloud.point(j), lo);
            }
        }
        const double mean_dist = total / double(std::max<Eigen::Index>(1, n - 1));
        if (mean_dist < best_mean) {
            best_mean = mean_dist;
            best = i;
        }
    }
    return best;
}

/// Base-point choice: the local mean around the within-sample Frechet mean.
inline Vec frechet_base_point(const PointCloud& cloud, const KernelConfig& kernel,
                              BaseMetric metric = BaseMetric::ambient,
                              const FrameField* field = nullptr,
                              const LogOptions* log_opts = nullptr) {
    const Eigen::Index i = frechet_argmin(cloud, metric, field, log_opts);
    return local_mean(cloud, cloud.point(i), kernel);
}

/// Combine several submanifolds into one representation of x: project to
/// each, keep projections within epsilon, rescale the base distances through
/// the affine bijection s_j(t) = 1 - t/r_j, and average with Gaussian
/// weights centered at the SR-closest submanifold. sigma defaults to the
/// largest submanifold radius.
inline Vec combine(const std::vector<PrincipalSubmanifold>& subs, const Vec& x,
                   double epsilon, double sigma = -1.0) {
    if (subs.empty()) throw ConfigError("combine needs at least one submanifold");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (sigma <= 0.0) {
        sigma = 0.0;
        for (const auto& sm : subs) sigma = std::max(sigma, sm.radius);
    }

    struct Candidate {
        Vec proj;
        double ambient_dist;
        double base_dist;     // SR distance from the base point, = ||chart||
        double rescaled;      // d / s(d)
    };
    std::vector<Candidate> in_range;
    for (const auto& sm : subs) {
        const Projection pr = project_discrete(x, sm);
        if (pr.distance >= epsilon) continue;
        const double d = pr.chart.norm();
        const double s = std::max(1.0 - d / sm.radius, 1e-12);
        in_range.push_back({pr.point, pr.distance, d, d / s});
    }
    if (in_range.empty())
        throw NoSubmanifoldInRangeError(
            "no submanifold projection within epsilon");

    std::size_t star = 0;
    for (std::size_t j = 1; j < in_range.size(); ++j)
        if (in_range[j].base_dist < in_range[star].base_dist) star = j;

    double total = 0.0;
    Vec avg = Vec::Zero(x.size());
    for (const auto& c : in_range) {
        const double diff = c.rescaled - in_range[star].rescaled;
        const double w = std::exp(-diff * diff / (2.0 * sigma));
        total += w;
        avg += w * c.proj;
    }
    return avg / total;
}

// --- serialization ---------------------------------------------------------

/// CSV schema: i, j, arclen, point coordinates, chart coordinates.
inline void save_submanifold_csv(const std::string& path,
                                 const PrincipalSubmanifold& sm) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "i,j,arclen";
    for (Eigen::Index c = 0; c < sm.mu.size(); ++c) out << ",p" << c;
    for (int c = 0; c < sm.k; ++c) out << ",c" << c;
    out << "\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
    };
    for (const auto& pt : sm.points) {
        out << pt.geodesic << ',' << pt.step;
        std::snprintf(buf, sizeof buf, "%.17g", pt.arclen);
        out << ',' << buf;
        for (Eigen::Index c = 0; c < pt.point.size(); ++c) put(pt.point[c]);
        for (Eigen::Index c = 0; c < pt.chart.size(); ++c) put(pt.chart[c]);
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

namespace detail {

inline void write_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void write_f64(std::ofstream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline std::uint64_t read_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
inline double read_f64(std::ifstream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace detail

inline void save_submanifold_binary(const std::string& path,
                                    const PrincipalSubmanifold& sm) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write("SFSM0001", 8);
    detail::write_u64(out, std::uint64_t(sm.mu.size()));
    detail::write_u64(out, std::uint64_t(sm.k));
    detail::write_u64(out, std::uint64_t(sm.num_geodesics));
    detail::write_u64(out, std::uint64_t(sm.covectors.size()));
    detail::write_u64(out, std::uint64_t(sm.points.size()));
    detail::write_f64(out, sm.radius);
    detail::write_f64(out, sm.delta);
    for (Eigen::Index i = 0; i < sm.mu.size(); ++i) detail::write_f64(out, sm.mu[i]);
    for (int c = 0; c < sm.k; ++c)
        for (Eigen::Index r = 0; r < sm.frame.rows(); ++r)
            detail::write_f64(out, sm.frame(r, c));
    for (const Vec& eta : sm.covectors)
        for (Eigen::Index i = 0; i < eta.size(); ++i) detail::write_f64(out, eta[i]);
    for (const auto& pt : sm.points) {
        detail::write_u64(out, std::uint64_t(std::int64_t(pt.geodesic)));
        detail::write_u64(out, std::uint64_t(pt.step));
        detail::write_f64(out, pt.arclen);
        for (Eigen::Index i = 0; i < pt.point.size(); ++i)
            detail::write_f64(out, pt.point[i]);
        for (Eigen::Index i = 0; i < pt.chart.size(); ++i)
            detail::write_f64(out, pt.chart[i]);
    }
    if (!out) throw IoError("write failed: " + path);
}

inline PrincipalSubmanifold load_submanifold_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != "SFSM0001")
        throw IoError("not a submanifold cache: " + path);
    PrincipalSubmanifold sm;
    const auto dim = Eigen::Index(detail::read_u64(in));
    sm.k = int(detail::read_u64(in));
    sm.num_geodesics = int(detail::read_u64(in));
    const auto n_cov = detail::read_u64(in);
    const auto n_pts = detail::read_u64(in);
    sm.radius = detail::read_f64(in);
    sm.delta = detail::read_f64(in);
    sm.mu.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) sm.mu[i] = detail::read_f64(in);
    sm.frame.resize(dim, sm.k);
    for (int c = 0; c < sm.k; ++c)
        for (Eigen::Index r = 0; r < dim; ++r) sm.frame(r, c) = detail::read_f64(in);
    sm.covectors.resize(n_cov, Vec(dim));
    for (auto& eta : sm.covectors)
        for (Eigen::Index i = 0; i < dim; ++i) eta[i] = detail::read_f64(in);
    sm.points.resize(n_pts);
    for (auto& pt : sm.points) {
        pt.geodesic = int(std::int64_t(detail::read_u64(in)));
        pt.step = int(detail::read_u64(in));
        pt.arclen = detail::read_f64(in);
        pt.point.resize(dim);
        for (Eigen::Index i = 0; i < dim; ++i) pt.point[i] = detail::read_f64(in);
        pt.chart.resize(sm.k);
        for (int i = 0; i < sm.k; ++i) pt.chart[i] = detail::read_f64(in);
    }
    if (!in) throw IoError("truncated submanifold cache: " + path);
    return sm;
}

}  // namespace subflow
