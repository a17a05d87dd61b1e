// Command-line front end: data generators, frame/geodesic/log/distance
// queries, experiment runners and the kernel-range gap report.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 I/O error.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subflow/subflow.hpp"

using namespace subflow;

namespace {

Vec parse_vec(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ','))
        values.push_back(std::stod(field));
    Vec v(Eigen::Index(values.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = values[std::size_t(i)];
    return v;
}

Geometry parse_geometry(const std::string& name, int ambient_dim) {
    if (name == "euclidean") return Geometry::Euclidean(ambient_dim);
    if (name == "sphere") return Geometry::Sphere(ambient_dim - 1);
    throw ConfigError("unknown geometry: " + name);
}

PointCloud load_tagged_cloud(const std::string& path, const std::string& geometry) {
    PointCloud raw = load_cloud(path);
    if (geometry == "euclidean") return raw;
    return PointCloud(raw.points(), parse_geometry(geometry, raw.ambient_dim()));
}

nlohmann::json frame_to_json(const SubbundleFrame& f) {
    nlohmann::json j;
    j["base"] = std::vector<double>(f.base.data(), f.base.data() + f.base.size());
    j["eigenvalues"] = std::vector<double>(
        f.eigenvalues.data(), f.eigenvalues.data() + f.eigenvalues.size());
    j["gap"] = f.gap;
    j["k"] = f.k;
    std::vector<std::vector<double>> cols;
    for (int c = 0; c < f.k; ++c)
        cols.emplace_back(f.F.col(c).data(), f.F.col(c).data() + f.F.rows());
    j["frame_columns"] = cols;
    return j;
}

struct CommonFrameArgs {
    std::string cloud_path;
    std::string geometry = "euclidean";
    int k = 2;
    double alpha = 0.1;
    double cutoff = 1e-5;
    std::string mode = "centered_cheap";

    void attach(CLI::App* cmd) {
        cmd->add_option("--cloud", cloud_path, "point cloud file (csv or ply)")
            ->required();
        cmd->add_option("--geometry", geometry, "euclidean | sphere")
            ->check(CLI::IsMember({"euclidean", "sphere"}));
        cmd->add_option("--k", k, "subbundle rank")->required();
        cmd->add_option("--alpha", alpha, "kernel range")->required();
        cmd->add_option("--cutoff", cutoff, "normalized weight cutoff");
        cmd->add_option("--mode", mode,
                        "centered_cheap | centered_recomputed | uncentered");
    }

    PrincipalFrameField field() const {
        FrameOptions fo;
        fo.k = k;
        fo.kernel = KernelConfig::Gaussian(alpha, cutoff);
        fo.mode = detail::parse_moment_mode(mode);
        return PrincipalFrameField(load_tagged_cloud(cloud_path, geometry), fo);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"principal subbundles: learned sub-Riemannian geometry for "
                 "point clouds"};
    app.require_subcommand(1);

    // --- gen -----------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    std::string gen_kind = "sphere", gen_out = "cloud.csv", gen_truth;
    int gen_n = 1000, gen_d = 3, gen_ktrue = 2;
    double gen_sigma = 0.0;
    std::uint64_t gen_seed = 0;
    gen->add_option("--kind", gen_kind,
                    "s_surface | sphere | sphere_curve | bumpy_sphere")
        ->check(CLI::IsMember({"s_surface", "sphere", "sphere_curve",
                               "bumpy_sphere"}));
    gen->add_option("--n", gen_n, "number of points");
    gen->add_option("--d", gen_d, "embedding dimension");
    gen->add_option("--k-true", gen_ktrue, "intrinsic sphere dimension");
    gen->add_option("--sigma", gen_sigma, "noise scale");
    gen->add_option("--seed", gen_seed, "random seed")->required();
    gen->add_option("--out", gen_out, "output csv");
    gen->add_option("--truth-out", gen_truth,
                    "optional ground-truth csv (s_surface, sphere_curve)");

    // --- frame ---------------------------------------------------------
    auto* frame_cmd = app.add_subcommand("frame", "principal frame at a point");
    CommonFrameArgs frame_args;
    frame_args.attach(frame_cmd);
    std::string frame_point;
    frame_cmd->add_option("--point", frame_point, "query point 'x,y,...'")
        ->required();

    // --- geodesic ------------------------------------------------------
    auto* geo = app.add_subcommand("geodesic", "integrate a normal geodesic");
    CommonFrameArgs geo_args;
    geo_args.attach(geo);
    std::string geo_point, geo_eta, geo_out = "geodesic.csv";
    double geo_T = 1.0, geo_delta = 1e-3;
    std::string geo_scheme = "euler";
    geo->add_option("--point", geo_point, "start point")->required();
    geo->add_option("--eta", geo_eta, "initial covector")->required();
    geo->add_option("--T", geo_T, "duration");
    geo->add_option("--delta", geo_delta, "step size");
    geo->add_option("--scheme", geo_scheme, "euler | semi_implicit_euler");
    geo->add_option("--out", geo_out, "path csv");

    // --- submanifold ---------------------------------------------------
    auto* sub = app.add_subcommand("submanifold",
                                   "generate a principal submanifold");
    CommonFrameArgs sub_args;
    sub_args.attach(sub);
    std::string sub_mu, sub_out = "submanifold.csv", sub_cache;
    double sub_r = 0.5, sub_delta = 1e-3;
    int sub_L = 32;
    std::uint64_t sub_seed = 0;
    int sub_threads = 0;
    bool sub_frechet = false;
    sub->add_option("--mu", sub_mu, "base point 'x,y,...'");
    sub->add_flag("--frechet", sub_frechet,
                  "use the local mean at the within-sample Frechet mean");
    sub->add_option("--r", sub_r, "radius")->required();
    sub->add_option("--L", sub_L, "number of geodesics");
    sub->add_option("--delta", sub_delta, "step size");
    sub->add_option("--seed", sub_seed, "seed for the k >= 4 covector grid");
    sub->add_option("--threads", sub_threads, "worker threads (0 = all)");
    sub->add_option("--out", sub_out, "points csv");
    sub->add_option("--cache", sub_cache, "optional binary cache");

    // --- log -----------------------------------------------------------
    auto* log_cmd = app.add_subcommand("log", "approximate sub-Riemannian log");
    CommonFrameArgs log_args;
    log_args.attach(log_cmd);
    std::string log_from, log_to, log_space = "full_cotangent";
    double log_coarse = 1e-2, log_fine = 1e-3;
    int log_iters = 200, log_restarts = 4;
    bool log_warm = false;
    log_cmd->add_option("--from", log_from, "base point")->required();
    log_cmd->add_option("--to", log_to, "target point")->required();
    log_cmd->add_option("--space", log_space, "full_cotangent | dual_subbundle")
        ->check(CLI::IsMember({"full_cotangent", "dual_subbundle"}));
    log_cmd->add_option("--coarse-step", log_coarse, "shooting step while optimizing");
    log_cmd->add_option("--fine-step", log_fine, "shooting step for the report");
    log_cmd->add_option("--max-iterations", log_iters, "iterations per restart");
    log_cmd->add_option("--restarts", log_restarts, "random restarts");
    log_cmd->add_flag("--warm-start", log_warm,
                      "stage the solve through the dual subbundle");

    // --- distance ------------------------------------------------------
    auto* dist = app.add_subcommand("distance",
                                    "learned distance between two points");
    CommonFrameArgs dist_args;
    dist_args.attach(dist);
    std::string dist_x, dist_y;
    bool dist_sym = false, dist_warm = false;
    double dist_coarse = 1e-2;
    int dist_iters = 200;
    dist->add_option("--x", dist_x, "first point")->required();
    dist->add_option("--y", dist_y, "second point")->required();
    dist->add_flag("--symmetrize", dist_sym, "average both directions");
    dist->add_flag("--warm-start", dist_warm,
                   "stage the solve through the dual subbundle");
    dist->add_option("--coarse-step", dist_coarse, "shooting step while optimizing");
    dist->add_option("--max-iterations", dist_iters, "iterations per restart");

    // --- experiment ----------------------------------------------------
    auto* exp = app.add_subcommand("experiment", "run a named benchmark");
    std::string exp_id;
    std::uint64_t exp_seed = 0;
    bool exp_seed_set = false;
    std::string exp_out = "runs", exp_cloud;
    int exp_threads = 0, exp_n = -1, exp_L = -1, exp_reps = -1;
    double exp_alpha = -1, exp_delta = -1, exp_r = -1, exp_sigma = -1;
    exp->add_option("id", exp_id,
                    "sphere_geodesics | sphere_geodesics_noisy | "
                    "sphere_distance | sphere_distance_full | sphere_curves | "
                    "integrator_comparison | s_surface | surface_recon")
        ->required();
    exp->add_option("--seed", exp_seed, "random seed")
        ->each([&](const std::string&) { exp_seed_set = true; });
    exp->add_option("--out-dir", exp_out, "artifact directory");
    exp->add_option("--threads", exp_threads, "worker threads (0 = all)");
    exp->add_option("--n", exp_n, "override: points per dataset");
    exp->add_option("--alpha", exp_alpha, "override: kernel range");
    exp->add_option("--delta", exp_delta, "override: step size");
    exp->add_option("--r", exp_r, "override: submanifold radius");
    exp->add_option("--L", exp_L, "override: geodesic count");
    exp->add_option("--replicates", exp_reps, "override: replicate count");
    exp->add_option("--sigma", exp_sigma, "override: noise scale");
    exp->add_option("--cloud", exp_cloud, "external cloud (surface_recon)");

    // --- gap-report ----------------------------------------------------
    auto* gap = app.add_subcommand("gap-report",
                                   "mean eigenvalue gap per kernel range");
    std::string gap_cloud, gap_alphas, gap_geometry = "euclidean";
    std::string gap_mode = "centered_cheap";
    int gap_k = 2, gap_samples = 200;
    gap->add_option("--cloud", gap_cloud, "point cloud file")->required();
    gap->add_option("--geometry", gap_geometry, "euclidean | sphere");
    gap->add_option("--k", gap_k, "subbundle rank")->required();
    gap->add_option("--alphas", gap_alphas, "comma-separated kernel ranges")
        ->required();
    gap->add_option("--samples", gap_samples, "sampled observations");
    gap->add_option("--mode", gap_mode, "moment mode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return 2;
    }

    try {
        if (*gen) {
            if (gen_kind == "s_surface") {
                const SSurfaceData data =
                    gen_s_surface_with_truth(gen_n, gen_sigma, gen_d, gen_seed);
                save_cloud_csv(gen_out, data.points);
                if (!gen_truth.empty()) {
                    Mat truth(gen_n, 2);
                    truth.col(0) = data.t_param;
                    truth.col(1) = data.v_param;
                    save_cloud_csv(gen_truth, truth);
                }
            } else if (gen_kind == "sphere") {
                save_cloud_csv(gen_out, gen_sphere_cloud(gen_n, gen_ktrue, gen_d,
                                                         gen_sigma, gen_seed)
                                            .points());
            } else if (gen_kind == "sphere_curve") {
                const SphereCurveData data =
                    gen_sphere_curve_dataset(gen_seed, gen_n,
                                             gen_sigma > 0 ? gen_sigma : 5e-4);
                save_cloud_csv(gen_out, data.points);
                if (!gen_truth.empty()) save_cloud_csv(gen_truth, data.true_curve);
            } else {
                save_cloud_csv(gen_out, gen_bumpy_sphere(gen_n, 0.15, gen_sigma,
                                                         gen_seed)
                                            .points());
            }
            std::printf("wrote %s\n", gen_out.c_str());
        } else if (*frame_cmd) {
            const PrincipalFrameField field = frame_args.field();
            const SubbundleFrame f = field.at(parse_vec(frame_point));
            std::cout << frame_to_json(f).dump(2) << "\n";
        } else if (*geo) {
            const PrincipalFrameField field = geo_args.field();
            IntegrateOptions io;
            io.step = geo_delta;
            io.scheme = detail::parse_scheme(geo_scheme);
            const GeodesicPath path =
                integrate(field, parse_vec(geo_point), parse_vec(geo_eta), geo_T, io);
            detail::write_geodesic_paths(geo_out, {path}, 1);
            nlohmann::json j;
            j["steps"] = path.states.size() - 1;
            j["hamiltonian_drift"] = path.hamiltonian_drift();
            j["endpoint"] = std::vector<double>(
                path.endpoint().data(),
                path.endpoint().data() + path.endpoint().size());
            j["path_csv"] = geo_out;
            std::cout << j.dump(2) << "\n";
        } else if (*sub) {
            const PrincipalFrameField field = sub_args.field();
            Vec mu;
            if (sub_frechet) {
                mu = frechet_base_point(field.cloud(), field.options().kernel);
            } else if (!sub_mu.empty()) {
                mu = parse_vec(sub_mu);
            } else {
                throw ConfigError("need --mu or --frechet");
            }
            GenerateOptions go;
            go.radius = sub_r;
            go.num_geodesics = sub_L;
            go.step = sub_delta;
            go.seed = sub_seed;
            go.threads = sub_threads;
            const PrincipalSubmanifold sm = generate(field, mu, go);
            save_submanifold_csv(sub_out, sm);
            if (!sub_cache.empty()) save_submanifold_binary(sub_cache, sm);
            nlohmann::json j;
            j["points"] = sm.points.size();
            j["truncated_geodesics"] = sm.truncations.size();
            j["csv"] = sub_out;
            std::cout << j.dump(2) << "\n";
        } else if (*log_cmd) {
            const PrincipalFrameField field = log_args.field();
            LogOptions lo;
            lo.space = log_space == "dual_subbundle" ? LogSpace::dual_subbundle
                                                     : LogSpace::full_cotangent;
            lo.coarse_step = log_coarse;
            lo.fine_step = log_fine;
            lo.max_iterations = log_iters;
            lo.random_restarts = log_restarts;
            lo.warm_start_dual = log_warm;
            const LogResult lr =
                sr_log(field, parse_vec(log_from), parse_vec(log_to), lo);
            nlohmann::json j;
            j["eta_hat"] = std::vector<double>(
                lr.eta_hat.data(), lr.eta_hat.data() + lr.eta_hat.size());
            j["residual"] = lr.residual;
            j["hamiltonian"] = lr.hamiltonian;
            j["objective"] = lr.objective;
            j["converged"] = lr.converged;
            j["restarts_used"] = lr.restarts_used;
            std::cout << j.dump(2) << "\n";
        } else if (*dist) {
            const PrincipalFrameField field = dist_args.field();
            LogOptions lo;
            lo.coarse_step = dist_coarse;
            lo.max_iterations = dist_iters;
            lo.warm_start_dual = dist_warm;
            const double d = sr_distance(field, parse_vec(dist_x),
                                         parse_vec(dist_y), lo, dist_sym);
            nlohmann::json j;
            j["distance"] = d;
            std::cout << j.dump(2) << "\n";
        } else if (*exp) {
            ExperimentConfig cfg = default_config(exp_id);
            if (!exp_seed_set &&
                (exp_id != "surface_recon" || exp_cloud.empty()))
                throw ConfigError("--seed is required for stochastic runs");
            if (exp_seed_set) cfg.seed = exp_seed;
            cfg.out_dir = exp_out;
            cfg.threads = exp_threads;
            if (exp_n > 0) cfg.N = exp_n;
            if (exp_alpha > 0) cfg.alpha = exp_alpha;
            if (exp_delta > 0) cfg.delta = exp_delta;
            if (exp_r > 0) cfg.radius = exp_r;
            if (exp_L > 0) cfg.num_geodesics = exp_L;
            if (exp_reps > 0) cfg.replicates = exp_reps;
            if (exp_sigma >= 0) cfg.sigma = exp_sigma;
            if (!exp_cloud.empty()) cfg.cloud_path = exp_cloud;
            const RunReport report = run_experiment(cfg);
            nlohmann::json j = report;
            std::cout << j.dump(2) << "\n";
        } else if (*gap) {
            const PointCloud cloud = load_tagged_cloud(gap_cloud, gap_geometry);
            std::vector<double> alphas;
            {
                std::stringstream ss(gap_alphas);
                std::string field_text;
                while (std::getline(ss, field_text, ','))
                    alphas.push_back(std::stod(field_text));
            }
            const auto rows =
                eigen_gap_report(cloud, gap_k, alphas,
                                 detail::parse_moment_mode(gap_mode), gap_samples);
            std::printf("alpha,mean_relative_gap,n_failed\n");
            for (const auto& row : rows)
                std::printf("%.17g,%.17g,%d\n", row.alpha, row.mean_relative_gap,
                            row.n_failed);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const DimensionMismatchError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const Error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    }
    return 0;
}
