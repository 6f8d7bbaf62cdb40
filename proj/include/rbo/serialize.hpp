#pragma once

// JSON forms of the public value types. Doubles survive a dump/parse cycle
// bit-exactly (shortest round-trip representation), which the profile
// interface requires.

#include <json.hpp>
#include <string>

#include "rbo/linop.hpp"
#include "rbo/waves.hpp"

namespace rbo {

using json = nlohmann::json;

inline json profile_to_json(const WaveProfile& p) {
    json j;
    j["kind"] = p.kind == WaveKind::rbo ? "rbo" : "bbm_cnoidal";
    j["N"] = p.grid.num_points();
    j["P"] = p.grid.period();
    j["speed"] = p.speed;
    j["tail_bound"] = p.tail_bound;
    if (p.kind == WaveKind::rbo) {
        j["params"] = {{"c", p.rbo.c}, {"L", p.rbo.L}, {"eta", p.rbo.eta}};
    } else {
        j["params"] = {{"c", p.bbm.c},         {"L", p.bbm.L},
                       {"k", p.bbm.k},         {"w", p.bbm.w},
                       {"a", p.bbm.a},         {"b", p.bbm.b},
                       {"d", p.bbm.d},         {"beta1", p.bbm.beta1},
                       {"beta2", p.bbm.beta2}, {"beta3", p.bbm.beta3},
                       {"branch", p.bbm.branch == BbmBranch::plus ? "plus" : "minus"}};
    }
    json coeffs = json::array();
    for (int n = p.grid.mode_min(); n <= p.grid.mode_max(); ++n) {
        const cplx c = p.field.coeff(n);
        coeffs.push_back(json::array({n, c.real(), c.imag()}));
    }
    j["coeffs"] = coeffs;
    return j;
}

inline WaveProfile profile_from_json(const json& j) {
    const PeriodicGrid grid(j.at("N").get<int>(), j.at("P").get<double>());
    SpectralField field(grid);
    for (const json& triple : j.at("coeffs"))
        field.set_coeff(triple.at(0).get<int>(),
                        cplx(triple.at(1).get<double>(), triple.at(2).get<double>()));
    WaveProfile p{WaveKind::rbo, grid, field, j.at("speed").get<double>(),
                  j.at("tail_bound").get<double>(), {}, {}};
    const json& params = j.at("params");
    if (j.at("kind").get<std::string>() == "rbo") {
        p.kind = WaveKind::rbo;
        p.rbo = {params.at("c").get<double>(), params.at("L").get<double>(),
                 params.at("eta").get<double>()};
    } else {
        p.kind = WaveKind::bbm_cnoidal;
        p.bbm.c = params.at("c").get<double>();
        p.bbm.L = params.at("L").get<double>();
        p.bbm.k = params.at("k").get<double>();
        p.bbm.w = params.at("w").get<double>();
        p.bbm.a = params.at("a").get<double>();
        p.bbm.b = params.at("b").get<double>();
        p.bbm.d = params.at("d").get<double>();
        p.bbm.beta1 = params.at("beta1").get<double>();
        p.bbm.beta2 = params.at("beta2").get<double>();
        p.bbm.beta3 = params.at("beta3").get<double>();
        p.bbm.branch = params.at("branch").get<std::string>() == "plus" ? BbmBranch::plus
                                                                        : BbmBranch::minus;
    }
    return p;
}

inline json eigen_report_to_json(const EigenReport& r) {
    json j;
    j["eigenvalues"] = r.eigenvalues;
    j["norm_A"] = r.norm_A;
    j["count_negative"] = r.count_negative;
    j["zero"] = {{"count", r.zero_count},
                 {"value", r.zero_value},
                 {"gap", r.zero_gap},
                 {"threshold", r.gap_threshold}};
    j["lambda2"] = r.lambda2;
    j["alignment_phi_prime"] = r.alignment_phi_prime;
    j["max_residual"] = r.max_residual;
    return j;
}

}  // namespace rbo
