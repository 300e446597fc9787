#include "splitfactor/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

namespace splitfactor {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

TestReport runtime_report(const std::string& name, double elapsed, double budget) {
    TestReport r;
    r.name = name + "_runtime";
    r.statistic = elapsed;
    r.threshold = budget;
    r.pass = elapsed < budget;
    r.samples = 1;
    return r;
}

TestReport exact_report(const std::string& name, std::uint64_t exceptions, std::uint64_t samples,
                        const std::string& detail = "") {
    TestReport r;
    r.name = name;
    r.statistic = static_cast<double>(exceptions);
    r.threshold = 0.0;
    r.pass = exceptions == 0;
    r.samples = samples;
    r.detail = detail;
    return r;
}

// --------------------------------------------------------------------------
// Criterion 1: coupling exactness at alpha in {0.25, 0.5, 0.75}.

std::vector<TestReport> criterion_coupling_exact(UnitValue seed) {
    auto t0 = Clock::now();
    std::vector<TestReport> out;
    for (double alpha : {0.25, 0.5, 0.75}) {
        double lambda = min_lambda_nonneg(alpha) + 5.0;
        CouplingMatrix q = build_coupling(alpha, lambda, default_truncation(lambda));

        TestReport marg;
        marg.name = "c1_marginals_alpha_" + std::to_string(alpha);
        marg.statistic = q.marginal_defect();
        marg.threshold = 1e-10;
        marg.pass = marg.statistic < 1e-10;
        marg.samples = (q.truncation + 1) * (q.truncation + 1);
        marg.seed = seed;
        marg.detail = "lambda=" + std::to_string(lambda);
        out.push_back(marg);

        std::uint64_t bad_zero = 0;
        if (q.at(0, 1) != 0.0) ++bad_zero;
        if (q.at(1, 1) != 0.0) ++bad_zero;
        if (q.at(2, 0) != 0.0) ++bad_zero;
        out.push_back(exact_report("c1_zero_cells_alpha_" + std::to_string(alpha), bad_zero, 3));
    }
    out.push_back(runtime_report("c1", seconds_since(t0), 1.0));
    return out;
}

// --------------------------------------------------------------------------
// Criterion 2: split-count law, 1e6 draws.

std::vector<TestReport> criterion_split_count(UnitValue seed) {
    auto t0 = Clock::now();
    const double alpha = 0.5;
    const double lambda = min_lambda_nonneg(alpha) + 5.0;
    CouplingMatrix q = build_coupling(alpha, lambda, default_truncation(lambda));
    PoissonTable table(lambda);

    const std::uint64_t draws = 1000000;
    std::vector<std::uint64_t> ms, rest;
    ms.reserve(draws);
    rest.reserve(draws);
    for (std::uint64_t k = 0; k < draws; ++k) {
        std::uint64_t n = table.sample(reproduce(seed, 2 * k));
        std::uint64_t m = split_count(n, reproduce(seed, 2 * k + 1), q);
        ms.push_back(m);
        rest.push_back(n - m);
    }

    std::vector<TestReport> out;
    TestReport a = gof_poisson_counts(ms, alpha * lambda, 0.01);
    a.name = "c2_first_marginal";
    a.seed = seed;
    out.push_back(a);
    TestReport b = gof_poisson_counts(rest, (1.0 - alpha) * lambda, 0.01);
    b.name = "c2_second_marginal";
    b.seed = seed;
    out.push_back(b);

    std::uint64_t exceptions = 0;
    for (std::uint64_t k = 0; k < 10000; ++k) {
        UnitValue u = reproduce(add_mod1(seed, 0.375), k);
        if (split_count(1, u, q) != 1) ++exceptions;
        if (split_count(2, u, q) != 0) ++exceptions;
    }
    out.push_back(exact_report("c2_deterministic_cases", exceptions, 20000));
    out.push_back(runtime_report("c2", seconds_since(t0), 30.0));
    return out;
}

// --------------------------------------------------------------------------
// Criterion 3: finite-volume splitting law.

std::vector<TestReport> criterion_finite_volume(UnitValue seed) {
    auto t0 = Clock::now();
    const double lambda = 2.0;
    const double lambda_prime = 1.0;  // ratio 0.5, region mean 20
    Box region{{0.0}, {10.0}};
    const double mean = lambda * region.volume();
    const double alpha_blue = 1.0 - lambda_prime / lambda;
    CouplingMatrix q = build_coupling(alpha_blue, mean, default_truncation(mean));

    const std::uint64_t runs = 100000;
    std::vector<std::uint64_t> red_counts, blue_counts;
    red_counts.reserve(runs);
    blue_counts.reserve(runs);
    std::vector<std::uint64_t> location_cells(10, 0);
    std::uint64_t exceptions = 0;

    for (std::uint64_t k = 0; k < runs; ++k) {
        PointSet mu = sample_poisson(region, lambda, reproduce(seed, 2 * k));
        SplitResult s = gamma_split(region, mu, reproduce(seed, 2 * k + 1), q);
        red_counts.push_back(s.red.size());
        blue_counts.push_back(s.blue.size());
        for (const auto& p : s.red.points) {
            int cell = std::min(9, static_cast<int>(p[0]));
            location_cells[static_cast<std::size_t>(cell)] += 1;
        }
        // Monotonicity / union and the deterministic one- and two-point cases.
        if (s.red.size() + s.blue.size() != mu.size()) ++exceptions;
        if (mu.size() == 1 && s.red.size() != 0) ++exceptions;
        if (mu.size() == 2 && s.red.size() != 2) ++exceptions;
    }

    std::vector<TestReport> out;
    TestReport a = gof_poisson_counts(red_counts, lambda_prime * region.volume(), 0.01);
    a.name = "c3_red_counts";
    a.seed = seed;
    out.push_back(a);
    TestReport b = gof_poisson_counts(blue_counts, (lambda - lambda_prime) * region.volume(), 0.01);
    b.name = "c3_blue_counts";
    b.seed = seed;
    out.push_back(b);

    GofResult loc = chi2_uniform_cells(location_cells, 0.01);
    TestReport locrep;
    locrep.name = "c3_red_location_uniformity";
    locrep.statistic = loc.statistic;
    locrep.threshold = 0.01;
    locrep.p_value = loc.p_value;
    locrep.pass = loc.pass;
    locrep.samples = runs;
    out.push_back(locrep);

    out.push_back(exact_report("c3_exact_cases", exceptions, runs));
    out.push_back(runtime_report("c3", seconds_since(t0), 120.0));
    return out;
}

// --------------------------------------------------------------------------
// Criterion 4: key-equality surrogate on the desk selection profile.

std::vector<TestReport> criterion_key_equality(UnitValue seed) {
    auto t0 = Clock::now();
    SelectionConfig cfg = SelectionConfig::desk_selection(1);
    const double lambda = 6.0;
    Box window{{-200.0}, {200.0}};
    const double globe_mean = lambda * 2.0 * cfg.R;

    const std::uint64_t samples = 10000;
    std::vector<std::uint64_t> globe_counts;
    std::vector<double> first_globe;
    std::vector<std::vector<double>> probe_counts(3);
    const double probe_lo[3] = {-150.0, -5.0, 140.0};
    const double probe_hi[3] = {-140.0, 5.0, 150.0};

    for (std::uint64_t k = 0; k < samples; ++k) {
        PointSet mu = sample_poisson(window, lambda, reproduce(seed, k));
        SelectionOutcome outcome = select_globes(mu, cfg);
        if (outcome.globes.empty()) continue;
        for (const auto& g : outcome.globes) globe_counts.push_back(g.count);

        first_globe.push_back(static_cast<double>(outcome.globes.front().count));
        for (int j = 0; j < 3; ++j) {
            std::uint64_t c = 0;
            for (std::size_t i : outcome.ether_indices) {
                double x = mu.points[i][0];
                if (x >= probe_lo[j] && x <= probe_hi[j]) ++c;
            }
            probe_counts[j].push_back(static_cast<double>(c));
        }
    }

    std::vector<TestReport> out;
    TestReport g = gof_poisson_counts(globe_counts, globe_mean, 0.01);
    g.name = "c4_globe_counts_poisson";
    g.seed = seed;
    g.detail = "globes=" + std::to_string(globe_counts.size());
    out.push_back(g);

    double worst = 0.0;
    for (int j = 0; j < 3; ++j)
        worst = std::max(worst, std::abs(pearson_correlation(first_globe, probe_counts[j])));
    TestReport corr;
    corr.name = "c4_globe_ether_correlation";
    corr.statistic = worst;
    corr.threshold = 0.03;
    corr.pass = worst < 0.03;
    corr.samples = first_globe.size();
    corr.seed = seed;
    out.push_back(corr);

    out.push_back(runtime_report("c4", seconds_since(t0), 600.0));
    return out;
}

// --------------------------------------------------------------------------
// Criterion 5: splitting-factor marginals on the desk factor profile.

// Probe intervals sit in the deep interior so that nearly every key there is
// window-determined; keys outside the margin protocol are never evaluated.
struct ProbeLayout {
    std::vector<double> lo, hi;
    explicit ProbeLayout(int n = 20, double start = -475.0, double step = 50.0,
                         double half_len = 1.0) {
        for (int j = 0; j < n; ++j) {
            double c = start + step * j;
            lo.push_back(c - half_len);
            hi.push_back(c + half_len);
        }
    }
};

std::vector<TestReport> criterion_factor_marginals(UnitValue seed) {
    auto t0 = Clock::now();
    FactorConfig cfg = FactorConfig::desk_split(1);
    Box window{{-1000.0}, {1000.0}};
    const std::uint64_t n_seeds = 400;
    ProbeLayout probes;

    std::vector<std::vector<std::uint64_t>> red(probes.lo.size()), blue(probes.lo.size());
    std::uint64_t exact_exceptions = 0;
    std::uint64_t probes_total = 0, probes_kept = 0;
    std::uint64_t no_special_samples = 0;
    bool determinism_ok = true;

    for (std::uint64_t k = 0; k < n_seeds; ++k) {
        PointSet mu = sample_poisson(window, cfg.lambda, reproduce(seed, k));
        SplitResult s = splitting_factor(mu, cfg);
        if (s.no_specials) ++no_special_samples;

        if (k == 0) {
            SplitResult again = splitting_factor(mu, cfg);
            determinism_ok = again.red.points == s.red.points && again.blue.points == s.blue.points;
        }

        // Exact union / monotonicity and the deterministic special cases.
        if (s.red.size() + s.blue.size() != mu.size()) ++exact_exceptions;
        std::map<int, std::vector<std::size_t>> by_globe;
        for (std::size_t i = 0; i < mu.points.size(); ++i)
            if (s.provenance[i].in_globe) by_globe[s.provenance[i].globe_index].push_back(i);
        for (const auto& [gidx, pts] : by_globe) {
            if (pts.size() == 1 && s.provenance[pts[0]].red) ++exact_exceptions;
            if (pts.size() == 2 && (!s.provenance[pts[0]].red || !s.provenance[pts[1]].red))
                ++exact_exceptions;
        }

        for (std::size_t j = 0; j < probes.lo.size(); ++j) {
            ++probes_total;
            bool kept = true;
            std::uint64_t nred = 0, nblue = 0;
            for (std::size_t i = 0; i < mu.points.size(); ++i) {
                double x = mu.points[i][0];
                if (x < probes.lo[j] || x > probes.hi[j]) continue;
                if (!s.provenance[i].determined) {
                    kept = false;
                    break;
                }
                (s.provenance[i].red ? nred : nblue) += 1;
            }
            if (!kept) continue;
            ++probes_kept;
            red[j].push_back(nred);
            blue[j].push_back(nblue);
        }
    }

    std::vector<TestReport> out;
    const double probe_len = probes.hi[0] - probes.lo[0];
    const double level = 0.01 / static_cast<double>(probes.lo.size());  // Bonferroni
    double worst_red_p = 1.0, worst_blue_p = 1.0;
    bool red_pass = true, blue_pass = true;
    for (std::size_t j = 0; j < probes.lo.size(); ++j) {
        GofResult gr = chi2_poisson_gof(red[j], cfg.lambda_prime * probe_len, level);
        GofResult gb = chi2_poisson_gof(blue[j], (cfg.lambda - cfg.lambda_prime) * probe_len, level);
        worst_red_p = std::min(worst_red_p, gr.p_value);
        worst_blue_p = std::min(worst_blue_p, gb.p_value);
        red_pass = red_pass && gr.pass;
        blue_pass = blue_pass && gb.pass;
    }

    TestReport rr;
    rr.name = "c5_red_probe_gof";
    rr.statistic = worst_red_p;
    rr.threshold = level;
    rr.pass = red_pass;
    rr.samples = n_seeds;
    rr.seed = seed;
    rr.detail = "kept=" + std::to_string(probes_kept) + "/" + std::to_string(probes_total) +
                " no_special_samples=" + std::to_string(no_special_samples);
    out.push_back(rr);

    TestReport rb = rr;
    rb.name = "c5_blue_probe_gof";
    rb.statistic = worst_blue_p;
    rb.pass = blue_pass;
    out.push_back(rb);

    out.push_back(exact_report("c5_union_monotone_special_cases", exact_exceptions, n_seeds));
    out.push_back(exact_report("c5_determinism", determinism_ok ? 0 : 1, 1));
    out.push_back(runtime_report("c5", seconds_since(t0), 1800.0));
    return out;
}

// --------------------------------------------------------------------------
// Criterion 6: equivariance.

std::vector<TestReport> criterion_equivariance(UnitValue seed) {
    auto t0 = Clock::now();
    std::vector<TestReport> out;

    // (a) splitting factor under grid translations: exact match.
    {
        FactorConfig cfg = FactorConfig::desk_split(1);
        Box window{{-1000.0}, {1000.0}};
        PointSet mu = sample_poisson(window, cfg.lambda, reproduce(seed, 1));
        std::vector<Isometry> isos;
        for (double t : {-37.0, 16.0, 101.0, -256.0, 1.0}) isos.push_back(Isometry::translate({t}));
        TestReport r = equivariance_report(
            [&](const PointSet& m) { return splitting_factor(m, cfg).red; }, mu, isos, 0.0);
        r.name = "c6_split_translation_exact";
        r.seed = seed;
        out.push_back(r);
    }

    // (b) homomorphism under random 1-d isometries (reflections and integer
    // translations): counts exact, positions within 2 * scan_resolution.
    {
        FactorConfig cfg = FactorConfig::desk_thicken(1);
        Box window{{-1000.0}, {1000.0}};
        PointSet mu = sample_poisson(window, cfg.lambda, reproduce(seed, 2));
        std::vector<Isometry> isos;
        UnitValue istream = reproduce(seed, 3);
        for (int k = 0; k < 20; ++k) {
            double pick = reproduce(istream, 2 * k);
            double sign = pick <= 0.5 ? 1.0 : -1.0;
            double t = std::floor(reproduce(istream, 2 * k + 1) * 1000.0) - 500.0;
            Isometry iso = Isometry::identity(1);
            iso.rotation(0, 0) = sign;
            iso.translation = {t};
            isos.push_back(iso);
        }
        TestReport r = equivariance_report(
            [&](const PointSet& m) { return homomorphism_factor(m, cfg).output; }, mu, isos,
            2.0 * cfg.selection.scan_resolution);
        r.name = "c6_homomorphism_isometries";
        r.seed = seed;
        out.push_back(r);
    }

    out.push_back(runtime_report("c6", seconds_since(t0), 600.0));
    return out;
}

// --------------------------------------------------------------------------
// Criterion 7: homomorphism (thickening) marginals.

std::vector<TestReport> criterion_thickening(UnitValue seed) {
    auto t0 = Clock::now();
    FactorConfig cfg = FactorConfig::desk_thicken(1);
    Box window{{-1000.0}, {1000.0}};
    const std::uint64_t n_seeds = 400;
    ProbeLayout probes;

    std::vector<std::vector<std::uint64_t>> counts(probes.lo.size());
    std::uint64_t probes_total = 0, probes_kept = 0, no_globe_samples = 0;

    for (std::uint64_t k = 0; k < n_seeds; ++k) {
        PointSet mu = sample_poisson(window, cfg.lambda, reproduce(seed, k));
        HomomorphismResult h;
        try {
            h = homomorphism_factor(mu, cfg);
        } catch (const NoGlobes&) {
            ++no_globe_samples;
            continue;
        }

        for (std::size_t j = 0; j < probes.lo.size(); ++j) {
            ++probes_total;
            bool kept = true;
            for (std::size_t g = 0; g < h.cells_1d.size(); ++g) {
                const Box& cell = h.cells_1d[g];
                if (cell.hi[0] < probes.lo[j] || cell.lo[0] > probes.hi[j]) continue;
                if (!h.cell_determined[g]) {
                    kept = false;
                    break;
                }
            }
            if (!kept) continue;
            ++probes_kept;
            std::uint64_t c = 0;
            for (const auto& p : h.output.points)
                if (p[0] >= probes.lo[j] && p[0] <= probes.hi[j]) ++c;
            counts[j].push_back(c);
        }
    }

    const double probe_len = probes.hi[0] - probes.lo[0];
    const double level = 0.01 / static_cast<double>(probes.lo.size());
    double worst_p = 1.0;
    bool pass = true;
    for (std::size_t j = 0; j < probes.lo.size(); ++j) {
        GofResult g = chi2_poisson_gof(counts[j], cfg.lambda_prime * probe_len, level);
        worst_p = std::min(worst_p, g.p_value);
        pass = pass && g.pass;
    }

    std::vector<TestReport> out;
    TestReport r;
    r.name = "c7_thicken_probe_gof";
    r.statistic = worst_p;
    r.threshold = level;
    r.pass = pass;
    r.samples = n_seeds;
    r.seed = seed;
    r.detail = "kept=" + std::to_string(probes_kept) + "/" + std::to_string(probes_total) +
               " no_globe_samples=" + std::to_string(no_globe_samples);
    out.push_back(r);
    out.push_back(runtime_report("c7", seconds_since(t0), 1800.0));
    return out;
}

// --------------------------------------------------------------------------
// Criterion 8: finitary radius.

std::vector<TestReport> criterion_finitary(UnitValue seed) {
    auto t0 = Clock::now();
    FactorConfig cfg = FactorConfig::desk_split(1);
    Box window{{-1100.0}, {1100.0}};
    const std::uint64_t n_samples = 200;
    const double n_max = 1000.0;

    std::uint64_t exhausted = 0, bound_violations = 0, finite_bounds = 0;
    std::vector<double> radii;
    for (std::uint64_t k = 0; k < n_samples; ++k) {
        PointSet mu = sample_poisson(window, cfg.lambda, reproduce(seed, k));
        FinitaryEstimate est =
            finitary_radius(mu, cfg, reproduce(seed, 5000 + k), n_max);
        if (est.flagged_infinite) {
            ++exhausted;
            continue;
        }
        radii.push_back(est.radii.front());
        double bound = est.bounds.front();
        if (std::isfinite(bound)) {
            ++finite_bounds;
            if (est.radii.front() > bound) ++bound_violations;
        }
    }

    double mean = 0.0;
    for (double r : radii) mean += r;
    if (!radii.empty()) mean /= static_cast<double>(radii.size());

    std::vector<TestReport> out;
    TestReport fin;
    fin.name = "c8_finite_fraction";
    fin.statistic = static_cast<double>(exhausted) / static_cast<double>(n_samples);
    fin.threshold = 0.05;
    fin.pass = fin.statistic <= 0.05 && !radii.empty() && std::isfinite(mean);
    fin.samples = n_samples;
    fin.seed = seed;
    fin.detail = "mean_radius=" + std::to_string(mean) +
                 " finite_bounds=" + std::to_string(finite_bounds);
    out.push_back(fin);

    out.push_back(exact_report("c8_estimate_le_bound", bound_violations, n_samples - exhausted,
                               "finite bounds only; window-exhausted counters give +inf"));
    out.push_back(runtime_report("c8", seconds_since(t0), 1800.0));
    return out;
}

}  // namespace

std::vector<TestReport> run_criterion(int which, UnitValue master_seed) {
    UnitValue seed = reproduce(master_seed, 1000 + static_cast<std::uint64_t>(which));
    switch (which) {
        case 1: return criterion_coupling_exact(seed);
        case 2: return criterion_split_count(seed);
        case 3: return criterion_finite_volume(seed);
        case 4: return criterion_key_equality(seed);
        case 5: return criterion_factor_marginals(seed);
        case 6: return criterion_equivariance(seed);
        case 7: return criterion_thickening(seed);
        case 8: return criterion_finitary(seed);
        default: throw std::invalid_argument("run_criterion: criterion must be 1..8");
    }
}

std::vector<int> criteria_for_suite(const std::string& suite) {
    if (suite == "coupling") return {1, 2};
    if (suite == "finite") return {3};
    if (suite == "factor") return {4, 5, 6};
    if (suite == "homomorphism") return {7};
    if (suite == "finitary") return {8};
    if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8};
    throw std::invalid_argument("unknown suite: " + suite);
}

}  // namespace splitfactor
