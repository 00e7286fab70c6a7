// topoadv: persistent-homology toolkit CLI.
//
// Subcommands: persistence, tc-loss, features, mmd-test, pcp (sim|sample),
// mixture-curve, dirichlet-fit, detect-study. All outputs are CSV or EMB1
// files; identical inputs and seeds give byte-identical outputs.
// Exit codes: 0 success, 2 input error, 3 numerical/convergence error.

#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "topoadv/errors.hpp"
#include "topoadv/grad.hpp"
#include "topoadv/harness.hpp"
#include "topoadv/io.hpp"
#include "topoadv/mmdtest.hpp"
#include "topoadv/pcp.hpp"
#include "topoadv/rng.hpp"

using namespace topoadv;

namespace {

TCMethod parse_tc_method(const std::string& name) {
    if (name == "tp") return TCMethod::TP;
    if (name == "mk") return TCMethod::MK;
    throw InputError("unknown TC method: " + name + " (expected tp|mk)");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write output file: " + path);
    out << content;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    if (out.empty()) throw InputError("empty numeric list");
    return out;
}

int run_persistence(const std::string& input, int max_dim, bool l2, const std::string& out) {
    const PointCloud cloud = load_cloud(input, l2);
    const PersistenceDiagram diagram = vr_persistence(pairwise_distances(cloud), max_dim);
    write_diagram_csv(out, diagram);
    return 0;
}

int run_tc_loss(const std::string& method, double alpha, double sigma, int max_dim,
                const std::string& x_path, const std::string& y_path, bool l2) {
    TCParams params;
    params.method = parse_tc_method(method);
    params.alpha = alpha;
    params.sigma = sigma;
    params.max_dim = max_dim;
    const PointCloud x = load_cloud(x_path, l2);
    const PointCloud y = load_cloud(y_path, l2);
    const double loss = tc_loss(vr_persistence(pairwise_distances(x), max_dim),
                                vr_persistence(pairwise_distances(y), max_dim), params);
    std::cout << format_double(loss) << "\n";
    return 0;
}

int run_features(const std::string& batch, const std::string& holdout, const std::string& text,
                 const std::string& method, double alpha, double sigma, int max_dim, bool l2,
                 const std::string& out) {
    TCParams params;
    params.method = parse_tc_method(method);
    params.alpha = alpha;
    params.sigma = sigma;
    params.max_dim = max_dim;
    const TopoFeatures features = batch_features(load_cloud(batch, l2), load_cloud(holdout, l2),
                                                 load_cloud(text, l2), params);
    write_emb(out, features.grads);
    return 0;
}

int run_mmd_test(const std::string& clean, const std::string& test, const std::string& clean_feats,
                 const std::string& test_feats, const std::string& kernel, double alpha,
                 int permutations, int trials, std::size_t batch, std::uint64_t seed, double eps0,
                 double sigma_nu, double sigma_tc, const std::string& out) {
    KernelParams params;
    params.method = kernel_method_from_string(kernel);
    params.eps0 = eps0;

    const PointCloud clean_pool = load_cloud(clean);
    const PointCloud test_pool = load_cloud(test);
    PointCloud cf, tf;
    if (params.method != KernelMethod::GAUSSIAN) {
        if (params.method == KernelMethod::SAMMD_EMB && clean_feats.empty()) {
            cf = clean_pool; // single-view fallback: both factors share the embeddings
            tf = test_pool;
        } else {
            if (clean_feats.empty() || test_feats.empty())
                throw InputError("mmd-test: kernel " + kernel +
                                 " needs --clean-feats and --test-feats");
            cf = load_cloud(clean_feats);
            tf = load_cloud(test_feats);
        }
        if (cf.n != clean_pool.n || tf.n != test_pool.n)
            throw InputError("mmd-test: feature rows must align with embedding rows");
    }
    if (clean_pool.n < batch || test_pool.n < batch)
        throw InputError("mmd-test: pools are smaller than the batch size");

    params.sigma_nu = sigma_nu > 0.0 ? sigma_nu : median_bandwidth(clean_pool, test_pool);
    params.sigma_tc = sigma_tc > 0.0
                          ? sigma_tc
                          : (params.method == KernelMethod::GAUSSIAN ? 1.0
                                                                     : median_bandwidth(cf, tf));

    std::vector<TrialResult> results;
    for (int t = 0; t < trials; ++t) {
        std::vector<std::size_t> ci(clean_pool.n), ti(test_pool.n);
        std::iota(ci.begin(), ci.end(), std::size_t{0});
        std::iota(ti.begin(), ti.end(), std::size_t{0});
        auto rng = substream(seed, 10000 + static_cast<std::uint64_t>(t));
        std::shuffle(ci.begin(), ci.end(), rng);
        std::shuffle(ti.begin(), ti.end(), rng);
        ci.resize(batch);
        ti.resize(batch);
        SampleSet sx{subcloud(clean_pool, ci), {}};
        SampleSet sy{subcloud(test_pool, ti), {}};
        if (params.method != KernelMethod::GAUSSIAN) {
            sx.feats = subcloud(cf, ci);
            sy.feats = subcloud(tf, ti);
        }
        const TestOutcome o = permutation_test(sx, sy, params, permutations, alpha,
                                               mix64(seed) + 20000 + static_cast<std::uint64_t>(t));
        results.push_back({t, o.statistic, o.threshold, o.p_value, o.reject});
    }
    write_text_file(out, results_csv(results));
    int rejects = 0;
    for (const TrialResult& r : results) rejects += r.reject ? 1 : 0;
    std::cout << "rejection_rate=" << format_double(static_cast<double>(rejects) / trials) << "\n";
    return 0;
}

int run_pcp_sim(int K, std::size_t n, const std::string& alpha_list, const std::string& ratio_list,
                int reps, std::uint64_t seed, const std::string& out) {
    const auto table = mst_length_study(parse_double_list(alpha_list), parse_double_list(ratio_list),
                                        n, K, reps, seed);
    std::ostringstream csv;
    csv << "alpha_small,ratio,mean_mst,std_mst,reps\n";
    for (const MstStudyRow& row : table)
        csv << format_double(row.alpha_small) << ',' << format_double(row.ratio) << ','
            << format_double(row.mean_mst) << ',' << format_double(row.std_mst) << ',' << row.reps
            << '\n';
    write_text_file(out, csv.str());
    return 0;
}

int run_pcp_sample(int K, std::size_t n, double alpha_small, double ratio, std::uint64_t seed,
                   const std::string& out, const std::string& lambdas_out) {
    PcpParams params;
    params.K = K;
    params.alpha_small = alpha_small;
    params.ratio = ratio;
    params.points_per_cluster = even_split(n, K);
    params.seed = seed;
    const PcpSample sample = sample_pcp(params, standard_simplex(K));
    write_emb(out, sample.points);
    if (!lambdas_out.empty()) {
        std::ostringstream csv;
        for (std::size_t i = 0; i < sample.barycentric.n; ++i) {
            for (std::size_t j = 0; j < sample.barycentric.d; ++j)
                csv << (j ? "," : "") << format_double(sample.barycentric.at(i, j));
            csv << '\n';
        }
        write_text_file(lambdas_out, csv.str());
    }
    return 0;
}

int run_mixture_curve(const std::string& clean, const std::string& adv, const std::string& text,
                      const std::string& method, double alpha, double sigma, int max_dim,
                      int steps, const std::string& seed_list, bool l2, const std::string& out) {
    TCParams params;
    params.method = parse_tc_method(method);
    params.alpha = alpha;
    params.sigma = sigma;
    params.max_dim = max_dim;
    std::vector<std::uint64_t> seeds;
    for (double v : parse_double_list(seed_list)) seeds.push_back(static_cast<std::uint64_t>(v));
    const MixtureCurve curve = mixture_curve(load_cloud(clean, l2), load_cloud(adv, l2),
                                             load_cloud(text, l2), steps, params, seeds);
    std::ostringstream csv;
    csv << "ratio,raw_loss,normalized_loss\n";
    for (std::size_t k = 0; k < curve.ratios.size(); ++k)
        csv << format_double(curve.ratios[k]) << ',' << format_double(curve.raw_loss[k]) << ','
            << format_double(curve.normalized_loss[k]) << '\n';
    write_text_file(out, csv.str());
    std::cout << "trend=" << trend_symbol(curve.trend) << "\n";
    return 0;
}

int run_dirichlet_fit(const std::string& input, const std::string& out) {
    const DirichletFit fit = dirichlet_mle(read_csv_cloud(input));
    std::ostringstream csv;
    csv << "component,alpha\n";
    for (std::size_t j = 0; j < fit.alpha.size(); ++j)
        csv << j << ',' << format_double(fit.alpha[j]) << '\n';
    write_text_file(out, csv.str());
    std::cout << "log_likelihood=" << format_double(fit.log_likelihood)
              << " iterations=" << fit.iterations << "\n";
    return 0;
}

int run_detect_study(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw InputError("cannot open config file: " + config_path);
    nlohmann::json cfg;
    try {
        in >> cfg;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad config JSON: ") + e.what());
    }

    const bool l2 = cfg.value("l2_normalize", false);
    const PointCloud clean = load_cloud(cfg.at("clean").get<std::string>(), l2);
    const PointCloud test = load_cloud(cfg.at("test").get<std::string>(), l2);
    const PointCloud holdout = load_cloud(cfg.at("holdout").get<std::string>(), l2);
    const PointCloud text = load_cloud(cfg.at("text").get<std::string>(), l2);

    DetectionSettings settings;
    settings.kernel = kernel_method_from_string(cfg.value("kernel", std::string("tpsammd")));
    settings.batch = cfg.value("batch", 50u);
    settings.trials = cfg.value("trials", 100);
    settings.permutations = cfg.value("permutations", 200);
    settings.alpha = cfg.value("alpha", 0.05);
    settings.seed = cfg.value("seed", 0u);
    settings.opt_steps = cfg.value("opt_steps", 50);
    settings.opt_lr = cfg.value("opt_lr", 0.05);
    settings.tc.alpha = cfg.value("tc_alpha", 1.0);
    settings.tc.sigma = cfg.value("tc_sigma", 1.0);
    settings.tc.max_dim = cfg.value("tc_max_dim", 0);

    const auto results = detection_study(clean, test, holdout, text, settings);
    std::ostringstream csv;
    csv << "# seed=" << settings.seed << " kernel=" << to_string(settings.kernel) << "\n"
        << results_csv(results);
    write_text_file(cfg.at("out").get<std::string>(), csv.str());
    int rejects = 0;
    for (const TrialResult& r : results) rejects += r.reject ? 1 : 0;
    std::cout << "rejection_rate="
              << format_double(static_cast<double>(rejects) / settings.trials) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"differentiable persistent-homology toolkit"};
    app.require_subcommand(1);

    std::string input, out, x_path, y_path, batch_path, holdout_path, text_path;
    std::string clean_path, adv_path, test_path, clean_feats, test_feats, lambdas_out, config_path;
    std::string method = "tp", kernel = "tpsammd", list_a = "1.0", list_r = "12", seed_list = "0";
    int max_dim = 1, steps = 11, permutations = 200, trials = 100, reps = 20, K = 2;
    std::size_t n_points = 100, batch_size = 50;
    double alpha = 1.0, sigma = 1.0, test_alpha = 0.05, alpha_small = 1.0, ratio = 12.0;
    double eps0 = 0.1, sigma_nu = 0.0, sigma_tc = 0.0;
    std::uint64_t seed = 0;
    bool l2 = false;

    auto* persistence_cmd = app.add_subcommand("persistence", "VR persistence diagram to CSV");
    persistence_cmd->add_option("--input", input)->required();
    persistence_cmd->add_option("--max-dim", max_dim);
    persistence_cmd->add_flag("--l2-normalize", l2);
    persistence_cmd->add_option("--out", out)->required();

    auto* tcloss_cmd = app.add_subcommand("tc-loss", "TC loss between two clouds");
    tcloss_cmd->add_option("--method", method);
    tcloss_cmd->add_option("--alpha", alpha);
    tcloss_cmd->add_option("--sigma", sigma);
    tcloss_cmd->add_option("--max-dim", max_dim);
    tcloss_cmd->add_option("--x", x_path)->required();
    tcloss_cmd->add_option("--y", y_path)->required();
    tcloss_cmd->add_flag("--l2-normalize", l2);

    auto* features_cmd = app.add_subcommand("features", "topological features of a batch");
    features_cmd->add_option("--batch", batch_path)->required();
    features_cmd->add_option("--holdout", holdout_path)->required();
    features_cmd->add_option("--text", text_path)->required();
    features_cmd->add_option("--method", method);
    features_cmd->add_option("--alpha", alpha);
    features_cmd->add_option("--sigma", sigma);
    features_cmd->add_option("--max-dim", max_dim);
    features_cmd->add_flag("--l2-normalize", l2);
    features_cmd->add_option("--out", out)->required();

    auto* mmd_cmd = app.add_subcommand("mmd-test", "kernel two-sample test over trials");
    mmd_cmd->add_option("--clean", clean_path)->required();
    mmd_cmd->add_option("--test", test_path)->required();
    mmd_cmd->add_option("--clean-feats", clean_feats);
    mmd_cmd->add_option("--test-feats", test_feats);
    mmd_cmd->add_option("--kernel", kernel);
    mmd_cmd->add_option("--alpha", test_alpha);
    mmd_cmd->add_option("--permutations", permutations);
    mmd_cmd->add_option("--trials", trials);
    mmd_cmd->add_option("--batch", batch_size);
    mmd_cmd->add_option("--seed", seed);
    mmd_cmd->add_option("--eps0", eps0);
    mmd_cmd->add_option("--sigma-nu", sigma_nu);
    mmd_cmd->add_option("--sigma-tc", sigma_tc);
    mmd_cmd->add_option("--out", out)->required();

    auto* pcp_cmd = app.add_subcommand("pcp", "Poisson-cluster-process simulator");
    pcp_cmd->require_subcommand(1);
    auto* sim_cmd = pcp_cmd->add_subcommand("sim", "MST length Monte Carlo over a grid");
    sim_cmd->add_option("--k", K);
    sim_cmd->add_option("--n", n_points);
    sim_cmd->add_option("--alpha-small", list_a);
    sim_cmd->add_option("--ratio", list_r);
    sim_cmd->add_option("--reps", reps);
    sim_cmd->add_option("--seed", seed);
    sim_cmd->add_option("--out", out)->required();
    auto* sample_cmd = pcp_cmd->add_subcommand("sample", "draw one PCP cloud");
    sample_cmd->add_option("--k", K);
    sample_cmd->add_option("--n", n_points);
    sample_cmd->add_option("--alpha-small", alpha_small);
    sample_cmd->add_option("--ratio", ratio);
    sample_cmd->add_option("--seed", seed);
    sample_cmd->add_option("--out", out)->required();
    sample_cmd->add_option("--lambdas-out", lambdas_out);

    auto* mix_cmd = app.add_subcommand("mixture-curve", "loss vs adversarial fraction");
    mix_cmd->add_option("--clean", clean_path)->required();
    mix_cmd->add_option("--adv", adv_path)->required();
    mix_cmd->add_option("--text", text_path)->required();
    mix_cmd->add_option("--method", method);
    mix_cmd->add_option("--alpha", alpha);
    mix_cmd->add_option("--sigma", sigma);
    mix_cmd->add_option("--max-dim", max_dim);
    mix_cmd->add_option("--steps", steps);
    mix_cmd->add_option("--seeds", seed_list);
    mix_cmd->add_flag("--l2-normalize", l2);
    mix_cmd->add_option("--out", out)->required();

    auto* fit_cmd = app.add_subcommand("dirichlet-fit", "Dirichlet MLE from barycentric rows");
    fit_cmd->add_option("--input", input)->required();
    fit_cmd->add_option("--out", out)->required();

    auto* study_cmd = app.add_subcommand("detect-study", "power / Type-I study from a config");
    study_cmd->add_option("--config", config_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (persistence_cmd->parsed()) return run_persistence(input, max_dim, l2, out);
        if (tcloss_cmd->parsed())
            return run_tc_loss(method, alpha, sigma, max_dim, x_path, y_path, l2);
        if (features_cmd->parsed())
            return run_features(batch_path, holdout_path, text_path, method, alpha, sigma,
                                max_dim, l2, out);
        if (mmd_cmd->parsed())
            return run_mmd_test(clean_path, test_path, clean_feats, test_feats, kernel, test_alpha,
                                permutations, trials, batch_size, seed, eps0, sigma_nu, sigma_tc,
                                out);
        if (sim_cmd->parsed()) return run_pcp_sim(K, n_points, list_a, list_r, reps, seed, out);
        if (sample_cmd->parsed())
            return run_pcp_sample(K, n_points, alpha_small, ratio, seed, out, lambdas_out);
        if (mix_cmd->parsed())
            return run_mixture_curve(clean_path, adv_path, text_path, method, alpha, sigma,
                                     max_dim, steps, seed_list, l2, out);
        if (fit_cmd->parsed()) return run_dirichlet_fit(input, out);
        if (study_cmd->parsed()) return run_detect_study(config_path);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
