#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "dragonshare/json_io.hpp"

namespace {

using dragonshare::Json;

Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dragonshare::ValidationError("cannot open " + path);
    Json j;
    in >> j;
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dragonshare::ValidationError("cannot write " + path);
    out << text;
}

int run_solve(const std::string& scenario, const std::string& config_path,
              std::string out_path, int threads_flag) {
    using namespace dragonshare;
    const Json cfg = load_json(config_path);
    if (cfg.contains("scenario") && cfg.at("scenario").get<std::string>() != scenario)
        throw ValidationError("config scenario disagrees with --scenario");

    SolveParams params = decode_params(cfg.value("params", Json::object()));
    if (const char* env = std::getenv("DRAGONSHARE_SEED"))
        params.seed = std::strtoull(env, nullptr, 10);
    const bool cfg_threads = cfg.contains("params") && cfg.at("params").contains("threads");
    if (threads_flag > 0)
        params.threads = threads_flag;
    else if (!cfg_threads)
        params.threads = std::max(1u, std::thread::hardware_concurrency());

    const ValuationProfile profile =
        cfg.contains("profile")
            ? decode_profile(cfg.at("profile"))
            : decode_profile(load_json(cfg.at("profile_path").get<std::string>()));

    if (out_path.empty()) out_path = cfg.value("out", "");
    if (out_path.empty())
        throw ValidationError("no output path given (--out or config \"out\")");

    ScenarioResult result;
    int code = 0;
    try {
        if (scenario == "kkm") {
            result = solve_kkm_result(profile, params);
        } else {
            const int r = cfg.at("r").get<int>();
            result = (scenario == "piece-grab")
                         ? solve_scenario_piece_classical(profile, r, params)
                         : solve_scenario_player_classical(profile, r, params);
        }
    } catch (const ScenarioInconclusive& e) {
        std::cerr << "inconclusive: " << e.what() << "\n";
        result = e.partial;
        code = 2;
    }
    for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
    write_text(out_path, dump_canonical(encode_scenario_result(result)));
    std::cout << "status " << result.status << ", residual " << result.residual
              << ", wrote " << out_path << "\n";
    return code;
}

int run_lemma(const std::string& in_path) {
    using namespace dragonshare;
    const SetFamily family = decode_family(load_json(in_path));
    try {
        const RepresentativeTree rep = spanning_tree_representatives(family);
        Json edges = Json::array();
        for (const auto& [a, b] : rep.pairs) edges.push_back({a, b});
        std::cout << dump_canonical(Json{{"edges", edges}});
        return 0;
    } catch (const ConditionViolation& cv) {
        std::cout << dump_canonical(Json{{"witness", cv.witness}});
        std::cerr << "dragon condition fails: " << cv.what() << "\n";
        return 1;
    }
}

int run_verify(const std::string& result_path, const std::string& profile_path, double tol) {
    using namespace dragonshare;
    const ScenarioResult result = decode_scenario_result(load_json(result_path));
    const ValuationProfile profile = decode_profile(load_json(profile_path));
    double min_margin = std::numeric_limits<double>::infinity();
    for (const OutcomeReport& o : result.outcomes) {
        const EnvyReport er =
            (result.scenario == ScenarioKind::Kkm)
                ? verify_envy_free(profile, result.classical_cut, o.assignment, tol)
                : verify_envy_free(profile, result.point, o.assignment, tol);
        min_margin = std::min(min_margin, er.min_margin);
        if (!er.pass) {
            std::cerr << "envy violation: dragon " << o.assignment.dragon << ", player "
                      << er.worst_player << ", margin " << er.min_margin << "\n";
            return 3;
        }
    }
    if (result.outcomes.empty())
        std::cout << "no outcomes to verify\n";
    else
        std::cout << "all outcomes envy-free; min margin " << min_margin << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"envy-free division of [0,1] against a dragon"};
    app.require_subcommand(1);

    auto* solve = app.add_subcommand("solve", "run a scenario solver on a config");
    std::string scenario, config_path, out_path;
    int threads_flag = 0;
    solve->add_option("--scenario", scenario, "piece-grab | player-swallow | kkm")
        ->required()
        ->check(CLI::IsMember({"piece-grab", "player-swallow", "kkm"}));
    solve->add_option("--config", config_path, "config JSON path")->required();
    solve->add_option("--out", out_path, "result JSON path");
    solve->add_option("--threads", threads_flag, "worker threads (never affects output)");

    auto* lemma = app.add_subcommand("lemma", "two-element representatives of a set family");
    std::string family_path;
    lemma->add_option("--in", family_path, "family JSON path")->required();

    auto* verify = app.add_subcommand("verify", "re-check envy-freeness of a result file");
    std::string result_path, profile_path;
    double tol = 1e-6;
    verify->add_option("--result", result_path, "result JSON path")->required();
    verify->add_option("--profile", profile_path, "profile JSON path")->required();
    verify->add_option("--tol", tol, "envy margin tolerance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve(scenario, config_path, out_path, threads_flag);
        if (lemma->parsed()) return run_lemma(family_path);
        return run_verify(result_path, profile_path, tol);
    } catch (const dragonshare::ConditionViolation& e) {
        std::cerr << "condition violation: " << e.what() << "\n";
        return 1;
    } catch (const dragonshare::EnvyFailure& e) {
        std::cerr << "envy failure: " << e.what() << " (player " << e.player << ", dragon "
                  << e.dragon << ", margin " << e.margin << ")\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
