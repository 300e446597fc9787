#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "splitfactor/acceptance.hpp"
#include "splitfactor/factor.hpp"
#include "splitfactor/point_process.hpp"

namespace sf = splitfactor;
using nlohmann::json;

namespace {

struct ConfigFile {
    int dim = 1;
    double lambda = 6.0;
    double lambda_prime = 3.75;
    std::vector<double> window_lo{-1000.0};
    std::vector<double> window_hi{1000.0};
    std::string selection_profile = "desk_factor";
    sf::SelectionConfig selection = sf::SelectionConfig::desk_factor(1);
    double margin = 200.0;
    double master_seed = 0.123456789;
};

sf::SelectionConfig profile_by_name(const std::string& name, int dim, double paper_R) {
    if (name == "desk") return sf::SelectionConfig::desk_selection(dim);
    if (name == "desk_factor") return sf::SelectionConfig::desk_factor(dim);
    if (name == "paper") return sf::SelectionConfig::paper_profile(dim, paper_R);
    throw CLI::ValidationError("unknown selection profile: " + name);
}

ConfigFile load_config(const std::string& path) {
    ConfigFile c;
    if (path.empty()) return c;
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("cannot open config: " + path);
    json j;
    in >> j;
    if (j.contains("dim")) c.dim = j["dim"].get<int>();
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
    if (j.contains("lambda_prime")) c.lambda_prime = j["lambda_prime"].get<double>();
    if (j.contains("window_lo")) c.window_lo = j["window_lo"].get<std::vector<double>>();
    if (j.contains("window_hi")) c.window_hi = j["window_hi"].get<std::vector<double>>();
    if (j.contains("margin")) c.margin = j["margin"].get<double>();
    if (j.contains("master_seed")) c.master_seed = j["master_seed"].get<double>();
    if (j.contains("selection_profile")) c.selection_profile = j["selection_profile"].get<std::string>();
    c.selection = profile_by_name(c.selection_profile, c.dim, 1.0);
    if (j.contains("selection")) {
        const json& s = j["selection"];
        if (s.contains("R")) c.selection.R = s["R"].get<double>();
        if (s.contains("halo_in")) c.selection.r_halo_in = s["halo_in"].get<double>();
        if (s.contains("halo_out")) c.selection.r_halo_out = s["halo_out"].get<double>();
        if (s.contains("shell_out")) c.selection.r_shell_out = s["shell_out"].get<double>();
        if (s.contains("density_radius")) c.selection.density_radius = s["density_radius"].get<double>();
        if (s.contains("scan_resolution")) c.selection.scan_resolution = s["scan_resolution"].get<double>();
    }
    c.selection.dim = c.dim;
    return c;
}

sf::FactorConfig factor_config(const ConfigFile& c, sf::FactorMode mode) {
    sf::FactorConfig f;
    f.lambda = c.lambda;
    f.lambda_prime = c.lambda_prime;
    f.selection = c.selection;
    f.mode = mode;
    f.margin = c.margin;
    return f;
}

json globes_json(const sf::SelectionOutcome& outcome) {
    json j;
    j["empty_selection"] = outcome.empty_selection;
    j["globes"] = json::array();
    for (const auto& g : outcome.globes) {
        json jg;
        jg["seed"] = g.center;
        jg["radius"] = g.radius;
        jg["count"] = g.count;
        jg["special"] = g.special == sf::SpecialClass::one   ? "one"
                        : g.special == sf::SpecialClass::two ? "two"
                                                             : "none";
        jg["point_indices"] = g.point_indices;
        j["globes"].push_back(jg);
    }
    j["ether_indices"] = outcome.ether_indices;
    return j;
}

json assignment_dump(const sf::PointSet& mu, const sf::SelectionOutcome& outcome,
                     const sf::SelectionConfig& cfg) {
    sf::Assignment assignment(mu, outcome, cfg);
    json j = json::array();
    auto emit = [&](const sf::AssignmentKey& key, const std::string& kind, std::size_t idx) {
        sf::PartnerRank pr = assignment.partner_rank(key);
        json e;
        e["kind"] = kind;
        e["index"] = idx;
        e["one_partner"] = pr.one_partner;
        e["two_partner"] = pr.two_partner;
        e["one_rank"] = pr.one_rank;
        e["two_rank"] = pr.two_rank;
        e["degenerate"] = pr.degenerate;
        e["value"] = assignment.value(key);
        e["determined"] = assignment.determined(key);
        j.push_back(e);
    };
    for (std::size_t g = 0; g < outcome.globes.size(); ++g)
        emit(sf::AssignmentKey::for_globe(g), "globe", g);
    for (std::size_t i : outcome.ether_indices)
        emit(sf::AssignmentKey::for_point(i), "ether_point", i);
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"splitfactor: deterministic equivariant Poisson splitting"};
    app.require_subcommand(1);

    std::string config_path, in_path, out_path, out_red, out_blue, dump_assignment;
    std::string mode_str = "factor", suite = "all";
    int dim = 1;
    double lambda = 6.0, lambda_prime = -1.0, alpha = 0.5, cli_seed = -1.0, truncation = -1.0;
    std::vector<double> window_flat;

    auto* sim = app.add_subcommand("simulate", "sample a homogeneous Poisson configuration");
    sim->add_option("--dim", dim);
    sim->add_option("--lambda", lambda);
    sim->add_option("--window", window_flat, "lo coords then hi coords")->expected(-2);
    sim->add_option("--seed", cli_seed)->required();
    sim->add_option("--out", out_path)->required();

    auto* glb = app.add_subcommand("globes", "run the selection rule");
    glb->add_option("--in", in_path)->required();
    glb->add_option("--config", config_path);
    glb->add_option("--out", out_path)->required();

    auto* spl = app.add_subcommand("split", "split a configuration into red and blue");
    spl->add_option("--mode", mode_str, "factor | randomized | finite");
    spl->add_option("--in", in_path)->required();
    spl->add_option("--config", config_path);
    spl->add_option("--seed", cli_seed, "external uniform for randomized/finite modes");
    spl->add_option("--lambda-prime", lambda_prime);
    spl->add_option("--out-red", out_red)->required();
    spl->add_option("--out-blue", out_blue)->required();
    spl->add_option("--dump-assignment", dump_assignment);

    auto* thk = app.add_subcommand("thicken", "generate a fresh Poisson configuration as a factor");
    thk->add_option("--mode", mode_str, "iso | translation");
    thk->add_option("--in", in_path)->required();
    thk->add_option("--config", config_path);
    thk->add_option("--lambda-prime", lambda_prime);
    thk->add_option("--out", out_path)->required();

    auto* cpl = app.add_subcommand("coupling", "emit the split coupling matrix as CSV");
    cpl->add_option("--alpha", alpha)->required();
    cpl->add_option("--lambda", lambda)->required();
    cpl->add_option("--truncation", truncation);
    cpl->add_option("--out", out_path)->required();

    auto* ver = app.add_subcommand("verify", "run a verification suite");
    ver->add_option("--suite", suite, "coupling | finite | factor | homomorphism | finitary | all");
    ver->add_option("--seed", cli_seed);
    ver->add_option("--out", out_path);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            if (window_flat.size() != static_cast<std::size_t>(2 * dim))
                throw CLI::ValidationError("--window needs dim lo values then dim hi values");
            sf::Box window;
            window.lo.assign(window_flat.begin(), window_flat.begin() + dim);
            window.hi.assign(window_flat.begin() + dim, window_flat.end());
            sf::PointSet ps = sf::sample_poisson(window, lambda, cli_seed);
            sf::save_point_set(ps, out_path);
            std::cout << "points=" << ps.size() << " file=" << out_path << "\n";
            return 0;
        }

        if (glb->parsed()) {
            ConfigFile c = load_config(config_path);
            sf::PointSet mu = sf::load_point_set(in_path);
            c.selection.dim = mu.dim;
            sf::SelectionOutcome outcome = sf::select_globes(mu, c.selection);
            std::ofstream out(out_path);
            out << globes_json(outcome).dump(2) << "\n";
            std::cout << "globes=" << outcome.globes.size() << " ether=" << outcome.ether_indices.size()
                      << "\n";
            return 0;
        }

        if (spl->parsed()) {
            ConfigFile c = load_config(config_path);
            sf::PointSet mu = sf::load_point_set(in_path);
            c.dim = mu.dim;
            c.selection.dim = mu.dim;
            if (lambda_prime > 0.0) c.lambda_prime = lambda_prime;

            sf::SplitResult res;
            if (mode_str == "factor") {
                res = sf::splitting_factor(mu, factor_config(c, sf::FactorMode::split_factor));
            } else if (mode_str == "randomized") {
                if (cli_seed < 0.0) throw CLI::ValidationError("randomized mode needs --seed");
                res = sf::randomized_split(mu, cli_seed, factor_config(c, sf::FactorMode::split_factor));
            } else if (mode_str == "finite") {
                if (cli_seed < 0.0) throw CLI::ValidationError("finite mode needs --seed");
                double mean = c.lambda * mu.window.volume();
                double alpha_blue = 1.0 - c.lambda_prime / c.lambda;
                sf::CouplingMatrix q;
                try {
                    q = sf::build_coupling(alpha_blue, mean, sf::default_truncation(mean));
                } catch (const sf::NegativeMass&) {
                    throw CLI::ValidationError("window volume below the feasibility threshold");
                }
                res = sf::gamma_split(mu.window, mu, cli_seed, q);
            } else {
                throw CLI::ValidationError("unknown split mode: " + mode_str);
            }

            sf::save_point_set(res.red, out_red);
            sf::save_point_set(res.blue, out_blue);
            if (!dump_assignment.empty() && mode_str == "factor") {
                sf::SelectionOutcome outcome = sf::select_globes(mu, c.selection);
                std::ofstream dump(dump_assignment);
                dump << assignment_dump(mu, outcome, c.selection).dump(2) << "\n";
            }
            std::cout << "red=" << res.red.size() << " blue=" << res.blue.size()
                      << " undetermined_keys=" << res.undetermined_key_count << "\n";
            if (mode_str == "factor" && (res.no_specials || res.undetermined_key_count > 0)) return 2;
            return 0;
        }

        if (thk->parsed()) {
            ConfigFile c = load_config(config_path);
            sf::PointSet mu = sf::load_point_set(in_path);
            c.dim = mu.dim;
            c.selection.dim = mu.dim;
            if (lambda_prime > 0.0) c.lambda_prime = lambda_prime;
            sf::FactorMode m = mode_str == "translation" ? sf::FactorMode::translation_homomorphism
                                                         : sf::FactorMode::homomorphism;
            sf::HomomorphismResult res;
            try {
                res = sf::homomorphism_factor(mu, factor_config(c, m));
            } catch (const sf::NoGlobes&) {
                std::cerr << "no globe in the window\n";
                return 2;
            }
            sf::save_point_set(res.output, out_path);
            std::cout << "points=" << res.output.size() << "\n";
            return 0;
        }

        if (cpl->parsed()) {
            std::uint64_t n = truncation > 0.0 ? static_cast<std::uint64_t>(truncation)
                                               : sf::default_truncation(lambda);
            sf::CouplingMatrix q = sf::build_coupling(alpha, lambda, n);
            std::ofstream out(out_path);
            sf::write_coupling_csv(out, q);
            std::cout << "truncation=" << q.truncation << " defect=" << q.marginal_defect() << "\n";
            return 0;
        }

        if (ver->parsed()) {
            double master = cli_seed >= 0.0 ? cli_seed : 0.123456789;
            std::vector<sf::TestReport> all;
            bool ok = true;
            for (int c : sf::criteria_for_suite(suite)) {
                auto reports = sf::run_criterion(c, master);
                for (const auto& r : reports) {
                    std::cout << r.to_line() << "\n";
                    all.push_back(r);
                }
                ok = ok && sf::all_pass(reports);
            }
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                out << sf::reports_to_json(all);
            }
            return ok ? 0 : 3;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
