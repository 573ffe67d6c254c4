#ifndef SBMOM_IO_HPP
#define SBMOM_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbmom/analysis.hpp"
#include "sbmom/gaussian.hpp"
#include "sbmom/indexing.hpp"
#include "sbmom/moments.hpp"
#include "sbmom/simulator.hpp"

// JSON/CSV serialisation and the small string parsers used by the CLI.

namespace sbmom {

using nlohmann::json;

// "const:K", "dirac:W" or "atoms:FILE" with FILE holding a JSON array of
// {"weight": w, "location": x} objects.
inline InitialCondition parse_initial_condition(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("initial condition must look like const:K, dirac:W or atoms:FILE");
    const std::string kind = spec.substr(0, colon);
    const std::string arg = spec.substr(colon + 1);
    if (kind == "const") return InitialCondition::constant_density(std::stod(arg));
    if (kind == "dirac") return InitialCondition::dirac(std::stod(arg));
    if (kind == "atoms") {
        std::ifstream in(arg);
        if (!in) throw std::invalid_argument("cannot open atom file: " + arg);
        json j;
        in >> j;
        std::vector<Atom> atoms;
        for (const auto& a : j)
            atoms.push_back({a.at("weight").get<double>(), a.at("location").get<double>()});
        return InitialCondition::atomic(std::move(atoms));
    }
    throw std::invalid_argument("unknown initial condition kind: " + kind);
}

inline json to_json(const InitialCondition& u0) {
    json j;
    if (u0.kind() == InitialCondition::Kind::ConstantDensity) {
        j["kind"] = "const";
        j["level"] = u0.level();
    } else {
        j["kind"] = "atoms";
        json atoms = json::array();
        for (const auto& a : u0.atoms())
            atoms.push_back({{"weight", a.weight}, {"location", a.location}});
        j["atoms"] = atoms;
    }
    return j;
}

inline json to_json(const IndexTriple& t) {
    json j;
    j["alpha"] = t.pair.alpha;
    j["beta"] = t.pair.beta;
    json tau = json::array();
    for (int v : t.pairing.tau) tau.push_back(v + 1);  // 1-based values
    j["tau"] = tau;
    return j;
}

inline json to_json(const KernelGraph& g) {
    json j;
    j["n_vars"] = g.n_vars();
    j["log_prefactor"] = g.log_prefactor();
    json factors = json::array();
    for (const auto& f : g.factors()) {
        auto end = [](const Endpoint& e) -> json {
            if (e.is_var) return {{"var", e.var + 1}};
            return {{"fixed", e.loc}};
        };
        factors.push_back(
            {{"variance", f.variance}, {"left", end(f.left)}, {"right", end(f.right)}});
    }
    j["factors"] = factors;
    return j;
}

inline json to_json(const MomentResult& r) {
    json j;
    j["value"] = r.value;
    j["std_error"] = r.std_error;
    j["triples_evaluated"] = r.triples_evaluated;
    json per = json::array();
    for (const auto& p : r.per_nprime)
        per.push_back({{"nprime", p.n_prime}, {"sum", p.sum}, {"std_error", p.std_error}});
    j["per_nprime"] = per;
    return j;
}

inline json to_json(const EmpiricalMoments& em) {
    json j;
    j["replicates"] = em.replicates;
    j["aborted"] = em.aborted;
    j["bandwidths"] = em.bandwidths;
    json per = json::array();
    for (std::size_t i = 0; i < em.per_bandwidth.size(); ++i) {
        json orders = json::array();
        for (const auto& e : em.per_bandwidth[i])
            orders.push_back({{"n", e.order}, {"mean", e.mean}, {"std_error", e.std_error}});
        per.push_back({{"bandwidth", em.bandwidths[i]}, {"orders", orders}});
    }
    j["moments"] = per;
    json ex = json::array();
    for (const auto& e : em.extrapolated)
        ex.push_back({{"n", e.order}, {"value", e.mean}, {"std_error", e.std_error}});
    j["extrapolated"] = ex;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

inline void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// Fixed-format float for CSV rows: shortest round-trip is not needed
// there, but the formatting must be locale-independent and stable.
inline std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    if (out.empty()) throw std::invalid_argument("empty list: " + csv);
    return out;
}

} // namespace sbmom

#endif
