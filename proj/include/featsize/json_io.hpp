#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "featsize/feature_reports.hpp"
#include "featsize/sampling.hpp"
#include "featsize/tda.hpp"

namespace featsize {

using Json = nlohmann::ordered_json;

// Every run is identified by its command line, its seed, and the tolerances it
// ran under; outputs carry the block so results can be regenerated bit for bit.
struct RunConfig {
    std::string command;
    std::map<std::string, std::string> flags;  // flag -> rendered value
    std::uint64_t seed = kDefaultSeed;
    int threads = 1;
    double tol_real = 1e-8;
    double tol_cluster = 1e-7;
    int max_order = 0;  // 0 = up to n+1
    std::string out_path;
    bool csv = false;
};

inline Json provenance_json(const RunConfig& cfg) {
    Json flags = Json::object();
    for (const auto& [k, v] : cfg.flags) flags[k] = v;
    return Json{{"command", cfg.command},
                {"config", flags},
                {"seed", cfg.seed},
                {"tolerances", Json{{"real", cfg.tol_real}, {"cluster", cfg.tol_cluster}}},
                {"version", kVersion}};
}

inline Json value_or_inf(double v) {
    if (std::isinf(v)) return "inf";
    if (std::isnan(v)) return nullptr;
    return v;
}

inline Json point_json(const RealPoint& p) {
    Json a = Json::array();
    for (double c : p) a.push_back(c);
    return a;
}

inline Json complex_point_json(const ComplexPoint& p) {
    Json a = Json::array();
    for (const Complex& c : p) a.push_back(Json::array({c.real(), c.imag()}));
    return a;
}

inline Json record_json(const CriticalRecord& r) {
    Json feet = Json::array();
    for (const auto& f : r.feet) feet.push_back(complex_point_json(f));
    return Json{{"value", r.value},
                {"order", r.order},
                {"multiplicity", r.multiplicity},
                {"real_witness", r.real_witness},
                {"is_singular", r.singular},
                {"note", r.note},
                {"center", complex_point_json(r.center)},
                {"feet", feet}};
}

inline Json report_json(const CriticalReport& rep) {
    Json records = Json::array();
    for (const auto& r : rep.records) records.push_back(record_json(r));
    Json j{{"quantity", to_string(rep.quantity)},
           {"lower_bound", std::isnan(rep.lower_bound) ? Json(nullptr) : Json(rep.lower_bound)},
           {"exact_value", rep.exact_value ? Json(*rep.exact_value) : Json(nullptr)},
           {"paths_tracked", rep.paths_tracked},
           {"distinct_count", rep.distinct_count},
           {"filtered_count", rep.filtered_count},
           {"records", records},
           {"caveats", rep.caveats}};
    return j;
}

inline Json table_json(const BottleneckTable& t) {
    Json orbits = Json::array();
    for (const auto& o : t.orbits)
        orbits.push_back(Json{{"value", std::isnan(o.value) ? Json(nullptr) : Json(o.value)},
                              {"raw", Json::array({o.raw.real(), o.raw.imag()})},
                              {"members", o.members},
                              {"tier", to_string(o.tier)},
                              {"is_singular", o.singular}});
    return Json{{"order", t.order},
                {"paths_tracked", t.paths_tracked},
                {"distinct_solutions", t.distinct_solutions},
                {"filtered", t.filtered},
                {"tiers", Json{{"algebraic", t.algebraic},
                               {"real_variety", t.real_variety},
                               {"real_x", t.real_x},
                               {"geometric", t.geometric}}},
                {"orbits", orbits},
                {"notes", t.notes}};
}

inline Json diagram_json(const PersistenceDiagram& dgm) {
    Json degrees = Json::array();
    for (std::size_t d = 0; d < dgm.by_degree.size(); ++d) {
        Json pts = Json::array();
        for (const auto& p : dgm.by_degree[d])
            pts.push_back(Json::array({p.birth, value_or_inf(p.death)}));
        degrees.push_back(Json{{"degree", d}, {"points", pts}});
    }
    return Json{{"degrees", degrees}};
}

inline std::string diagram_csv(const PersistenceDiagram& dgm) {
    std::string out = "degree,birth,death\n";
    for (std::size_t d = 0; d < dgm.by_degree.size(); ++d)
        for (const auto& p : dgm.by_degree[d]) {
            out += std::to_string(d) + "," + format_double(p.birth) + ",";
            out += std::isinf(p.death) ? "inf" : format_double(p.death);
            out += "\n";
        }
    return out;
}

inline Json sample_json(const PointSample& s, const SampleCheck& check) {
    return Json{{"points", s.points.size()},
                {"epsilon", s.epsilon},
                {"delta", s.delta},
                {"grid_resolution", s.grid_resolution},
                {"verification", Json{{"max_residual_distance", check.max_residual_distance},
                                      {"empirical_covering_radius", check.empirical_covering_radius},
                                      {"pass", check.pass}}}};
}

inline std::string scores_csv(const std::vector<ScoreRow>& rows) {
    std::string out = "lambda,cost,inference,wasserstein\n";
    for (const auto& r : rows) {
        out += format_double(r.lambda) + "," + std::to_string(r.cost) + ",";
        out += r.inference ? format_double(*r.inference) : std::string("nan");
        out += ",";
        out += r.wasserstein ? format_double(*r.wasserstein) : std::string("nan");
        out += "\n";
    }
    return out;
}

inline Json scores_json(const std::vector<ScoreRow>& rows) {
    Json arr = Json::array();
    for (const auto& r : rows)
        arr.push_back(Json{{"lambda", r.lambda},
                           {"cost", r.cost},
                           {"inference", r.inference ? Json(*r.inference) : Json(nullptr)},
                           {"wasserstein", r.wasserstein ? Json(*r.wasserstein) : Json(nullptr)}});
    return arr;
}

}  // namespace featsize
