#include "piml/domain.hpp"

#include <cmath>
#include <stdexcept>

namespace piml {

MaterialClass material_class(MaterialId id) {
    switch (id) {
        case MaterialId::Nylon:
        case MaterialId::CfAbs:
            return MaterialClass::Polymer;
        case MaterialId::AlSi10Mg:
        case MaterialId::Ti6Al4V:
            return MaterialClass::Metal;
    }
    throw std::logic_error("material_class: bad id");
}

std::string material_name(MaterialId id) {
    switch (id) {
        case MaterialId::Nylon: return "nylon";
        case MaterialId::CfAbs: return "cf-abs";
        case MaterialId::AlSi10Mg: return "alsi10mg";
        case MaterialId::Ti6Al4V: return "ti6al4v";
    }
    throw std::logic_error("material_name: bad id");
}

MaterialId material_from_name(const std::string& name) {
    if (name == "nylon") return MaterialId::Nylon;
    if (name == "cf-abs" || name == "cfabs") return MaterialId::CfAbs;
    if (name == "alsi10mg") return MaterialId::AlSi10Mg;
    if (name == "ti6al4v") return MaterialId::Ti6Al4V;
    throw DataError("unknown material: " + name);
}

ModelConfig ModelConfig::defaults_for(MaterialId id) {
    ModelConfig c;
    switch (id) {
        case MaterialId::Nylon:
        case MaterialId::CfAbs:
            c.seq_len_elastic = 2;
            c.seq_len_plastic = 10;
            break;
        case MaterialId::AlSi10Mg:
            c.seq_len_elastic = 5;
            c.seq_len_plastic = 5;
            break;
        case MaterialId::Ti6Al4V:
            c.seq_len_elastic = 10;
            c.seq_len_plastic = 10;
            break;
    }
    return c;
}

namespace {

bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

void check_positive(std::vector<std::string>& out, const std::string& field, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        out.push_back(field + ": must be finite and > 0");
    }
}

void check_constitutive(std::vector<std::string>& out, const std::string& prefix,
                        const ConstitutiveParams& p, MaterialClass cls) {
    check_positive(out, prefix + ".E", p.E);
    check_positive(out, prefix + ".eps_y", p.eps_y);
    check_positive(out, prefix + ".sigma_y", p.sigma_y);
    if (cls == MaterialClass::Polymer) {
        const auto* voce = std::get_if<VocePlastic>(&p.plastic);
        if (!voce) {
            out.push_back(prefix + ".plastic: polymer requires Voce parameters");
            return;
        }
        check_positive(out, prefix + ".a", voce->a);
        check_positive(out, prefix + ".b", voce->b);
    } else {
        const auto* hol = std::get_if<HollomonPlastic>(&p.plastic);
        if (!hol) {
            out.push_back(prefix + ".plastic: metal requires Hollomon parameters");
            return;
        }
        check_positive(out, prefix + ".K", hol->K);
        if (!(hol->n > 0.0 && hol->n <= 1.0)) {
            out.push_back(prefix + ".n: must lie in (0, 1]");
        }
    }
}

}  // namespace

std::vector<std::string> validate_sample(const Sample& sample) {
    std::vector<std::string> v;

    if (sample.id.empty()) v.push_back("id: empty");

    if (sample.params.values.size() != 2 ||
        sample.params.names.size() != sample.params.values.size()) {
        v.push_back("params: expected 2");
    } else {
        for (std::size_t i = 0; i < sample.params.values.size(); ++i) {
            double x = sample.params.values[i];
            if (!(x > 0.0) || !std::isfinite(x)) {
                v.push_back("params." + sample.params.names[i] +
                            ": must be finite and positive");
            }
        }
    }

    const auto& c = sample.curve;
    if (c.strain.size() != c.stress.size()) {
        v.push_back("curve: strain/stress length mismatch");
    }
    if (c.strain.size() < 4) v.push_back("curve: fewer than 4 points");
    if (!all_finite(c.strain) || !all_finite(c.stress)) {
        v.push_back("curve: non-finite value");
    }
    if (!c.strain.empty() && c.strain.front() < 0.0) {
        v.push_back("curve.strain: starts below 0");
    }
    for (std::size_t i = 0; i + 1 < c.strain.size(); ++i) {
        if (!(c.strain[i] < c.strain[i + 1])) {
            v.push_back("curve.strain: not strictly increasing");
            break;
        }
    }

    MaterialClass cls = material_class(sample.material);
    if (sample.truth_yield) {
        const auto& y = *sample.truth_yield;
        check_positive(v, "truth_yield.eps_y", y.eps_y);
        check_positive(v, "truth_yield.sigma_y", y.sigma_y);
        if (!c.strain.empty() &&
            !(y.eps_y > c.strain.front() && y.eps_y < c.strain.back())) {
            v.push_back("truth_yield.eps_y: outside the curve's open strain range");
        }
    }
    if (sample.truth_params) {
        check_constitutive(v, "truth_params", *sample.truth_params, cls);
    }
    // Synthetic samples carry both truth fields; experimental samples neither.
    if (sample.truth_yield.has_value() != sample.truth_params.has_value()) {
        v.push_back("truth: yield and params must be present together");
    }

    return v;
}

}  // namespace piml
