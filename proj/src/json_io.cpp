#include "dragonshare/json_io.hpp"

namespace dragonshare {

Json encode_cut(const Cut& cut) { return Json(cut.points); }

Cut decode_cut(const Json& j) {
    Cut cut;
    cut.points = j.get<std::vector<double>>();
    validate_cut(cut);
    return cut;
}

Json encode_profile(const ValuationProfile& profile) {
    Json players = Json::array();
    for (const auto& d : profile.players)
        players.push_back({{"breakpoints", d.breakpoints}, {"values", d.values}});
    return Json{{"players", players},
                {"regime", profile.regime == Regime::Hungry ? "hungry" : "signed"}};
}

ValuationProfile decode_profile(const Json& j) {
    const std::string regime_name = j.at("regime").get<std::string>();
    Regime regime;
    if (regime_name == "hungry")
        regime = Regime::Hungry;
    else if (regime_name == "signed")
        regime = Regime::Signed;
    else
        throw ValidationError("unknown regime: " + regime_name);
    std::vector<PiecewiseDensity> players;
    for (const Json& p : j.at("players")) {
        PiecewiseDensity d;
        d.breakpoints = p.at("breakpoints").get<std::vector<double>>();
        d.values = p.at("values").get<std::vector<double>>();
        players.push_back(std::move(d));
    }
    return make_profile(std::move(players), regime);
}

Json encode_family(const SetFamily& family) {
    return Json{{"n", family.n}, {"sets", family.sets}};
}

SetFamily decode_family(const Json& j) {
    SetFamily family;
    family.n = j.at("n").get<int>();
    family.sets = j.at("sets").get<std::vector<std::vector<int>>>();
    return family;
}

Json encode_tree(const LabeledTree& tree) {
    Json edges = Json::array();
    for (const TreeEdge& e : tree.edges)
        edges.push_back({{"u", e.u}, {"w", e.w}, {"label", e.label}});
    return Json{{"vertices", tree.vertex_count}, {"edges", edges}};
}

LabeledTree decode_tree(const Json& j) {
    LabeledTree tree;
    tree.vertex_count = j.at("vertices").get<int>();
    for (const Json& e : j.at("edges"))
        tree.edges.push_back(
            {e.at("u").get<int>(), e.at("w").get<int>(), e.at("label").get<int>()});
    return tree;
}

namespace {

Json encode_shares(const std::map<int, int>& shares) {
    Json m = Json::object();
    for (const auto& [agent, box] : shares) m[std::to_string(agent)] = box;
    return m;
}

std::map<int, int> decode_shares(const Json& j) {
    std::map<int, int> shares;
    for (const auto& [key, val] : j.items()) shares[std::stoi(key)] = val.get<int>();
    return shares;
}

}  // namespace

Json encode_assignment(const Assignment& a) {
    return Json{{"dragon", a.dragon}, {"shares", encode_shares(a.shares)}};
}

Assignment decode_assignment(const Json& j) {
    Assignment a;
    a.dragon = j.at("dragon").get<int>();
    a.shares = decode_shares(j.at("shares"));
    return a;
}

Json encode_partition_allocation(const PartitionAllocation& pa) {
    return Json{{"cut", pa.cut.points}, {"alloc", pa.alloc.box_of}};
}

PartitionAllocation decode_partition_allocation(const Json& j) {
    PartitionAllocation pa;
    pa.cut.points = j.at("cut").get<std::vector<double>>();
    pa.alloc.box_of = j.at("alloc").get<std::vector<int>>();
    validate_partition_allocation(pa);
    return pa;
}

Json encode_chessboard_point(const ChessboardPoint& cp) {
    Json rooks = Json::array();
    for (const Rook& rk : cp.rooks)
        rooks.push_back({{"box", rk.box}, {"tile", rk.tile}, {"w", rk.weight}});
    return Json{{"rooks", rooks}};
}

ChessboardPoint decode_chessboard_point(const Json& j) {
    ChessboardPoint cp;
    for (const Json& r : j.at("rooks"))
        cp.rooks.push_back(
            {r.at("box").get<int>(), r.at("tile").get<int>(), r.at("w").get<double>()});
    validate_chessboard_point(cp);
    return cp;
}

Json encode_params(const SolveParams& params) {
    return Json{{"tol", params.tol},
                {"budget", params.budget},
                {"eps_fuzz", params.eps_fuzz},
                {"eps_sign", params.eps_sign},
                {"seed", params.seed}};
}

SolveParams decode_params(const Json& j) {
    SolveParams params;
    if (j.contains("tol")) params.tol = j.at("tol").get<double>();
    if (j.contains("budget")) params.budget = j.at("budget").get<double>();
    if (j.contains("eps_fuzz")) params.eps_fuzz = j.at("eps_fuzz").get<double>();
    if (j.contains("eps_sign")) params.eps_sign = j.at("eps_sign").get<double>();
    if (j.contains("seed")) params.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) params.threads = j.at("threads").get<int>();
    if (params.tol <= 0.0 || params.budget <= 0.0 || params.eps_fuzz <= 0.0 ||
        params.eps_sign < 0.0)
        throw ValidationError("params must be positive (eps_sign may be zero)");
    return params;
}

namespace {

std::string scenario_name(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::PieceGrab: return "piece-grab";
        case ScenarioKind::PlayerSwallow: return "player-swallow";
        case ScenarioKind::Kkm: return "kkm";
    }
    throw ValidationError("unknown scenario kind");
}

ScenarioKind scenario_kind(const std::string& name) {
    if (name == "piece-grab") return ScenarioKind::PieceGrab;
    if (name == "player-swallow") return ScenarioKind::PlayerSwallow;
    if (name == "kkm") return ScenarioKind::Kkm;
    throw ValidationError("unknown scenario: " + name);
}

}  // namespace

Json encode_scenario_result(const ScenarioResult& r) {
    Json j;
    j["scenario"] = scenario_name(r.scenario);
    if (r.scenario == ScenarioKind::Kkm) {
        j["cut"] = r.classical_cut.points;
    } else {
        j["cut"] = r.point.cut.points;
        j["alloc"] = r.point.alloc.box_of;
    }
    j["classical_cut"] = r.classical_cut.points;
    Json box_tile = Json::object();
    for (const auto& [box, tile] : r.box_to_classical_tile)
        box_tile[std::to_string(box)] = tile;
    j["box_tile"] = box_tile;
    j["residual"] = r.residual;
    j["final_fuzz"] = r.final_fuzz;
    j["status"] = r.status;
    j["tree"] = encode_tree(r.tree);
    Json outs = Json::array();
    for (const OutcomeReport& o : r.outcomes) {
        Json margins = Json::object();
        for (const auto& [player, m] : o.margins) margins[std::to_string(player)] = m;
        outs.push_back({{"dragon", o.assignment.dragon},
                        {"assignment", encode_shares(o.assignment.shares)},
                        {"margins", margins}});
    }
    j["outcomes"] = outs;
    j["params"] = encode_params(r.params);
    return j;
}

ScenarioResult decode_scenario_result(const Json& j) {
    ScenarioResult r;
    r.scenario = scenario_kind(j.at("scenario").get<std::string>());
    r.classical_cut.points = j.at("classical_cut").get<std::vector<double>>();
    if (r.scenario != ScenarioKind::Kkm) {
        r.point.cut.points = j.at("cut").get<std::vector<double>>();
        r.point.alloc.box_of = j.at("alloc").get<std::vector<int>>();
    }
    for (const auto& [key, val] : j.at("box_tile").items())
        r.box_to_classical_tile[std::stoi(key)] = val.get<int>();
    r.residual = j.at("residual").get<double>();
    r.final_fuzz = j.at("final_fuzz").get<double>();
    r.status = j.at("status").get<std::string>();
    r.tree = decode_tree(j.at("tree"));
    for (const Json& o : j.at("outcomes")) {
        OutcomeReport rep;
        rep.assignment.dragon = o.at("dragon").get<int>();
        rep.assignment.shares = decode_shares(o.at("assignment"));
        for (const auto& [key, val] : o.at("margins").items())
            rep.margins[std::stoi(key)] = val.get<double>();
        r.outcomes.push_back(std::move(rep));
    }
    r.params = decode_params(j.at("params"));
    return r;
}

std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace dragonshare
