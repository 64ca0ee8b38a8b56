#include "ising_lab/io.hpp"

#include <fstream>
#include <sstream>

namespace ising_lab {

using nlohmann::json;

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw std::invalid_argument("expected a number or a [re, im] pair, got " + j.dump());
}

json lattice_to_json(const Lattice& lattice) {
    if (lattice.is_grid()) {
        const auto& s = *lattice.shape();
        json periodic = json::array();
        for (bool p : s.periodic) periodic.push_back(p);
        return {{"dims", s.extents}, {"periodic", periodic}};
    }
    json edges = json::array();
    for (const auto& e : lattice.edges()) edges.push_back({e.a, e.b});
    return {{"irregular", {{"vertices", lattice.size()}, {"edges", edges}}}};
}

Lattice lattice_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("lattice: expected an object");
    if (j.contains("irregular")) {
        const auto& ir = j.at("irregular");
        if (!ir.contains("vertices") || !ir.at("vertices").is_number_integer())
            throw std::invalid_argument("lattice.irregular.vertices: expected an integer");
        std::vector<Edge> edges;
        for (const auto& e : ir.value("edges", json::array())) {
            if (!e.is_array() || e.size() != 2)
                throw std::invalid_argument("lattice.irregular.edges: each edge must be [i, j]");
            edges.push_back({e[0].get<int>(), e[1].get<int>()});
        }
        return Lattice::irregular(ir.at("vertices").get<int>(), std::move(edges));
    }
    if (!j.contains("dims")) throw std::invalid_argument("lattice: needs \"dims\" or \"irregular\"");
    auto dims = j.at("dims").get<std::vector<int>>();
    std::vector<bool> periodic;
    if (j.contains("periodic"))
        for (const auto& p : j.at("periodic")) periodic.push_back(p.get<bool>());
    return Lattice::grid(std::move(dims), std::move(periodic));
}

namespace {

template <class T, class Conv>
BasicIsingModel<T> read_model(const json& j, Conv conv) {
    if (!j.is_object()) throw std::invalid_argument("model: expected an object");
    if (!j.contains("lattice")) throw std::invalid_argument("model: missing \"lattice\"");
    Lattice l = lattice_from_json(j.at("lattice"));
    std::vector<T> couplings, fields;
    if (j.contains("couplings")) {
        for (const auto& c : j.at("couplings")) couplings.push_back(conv(c, "couplings"));
    } else {
        couplings.assign(l.edge_count(), T(0));
    }
    if (j.contains("fields")) {
        for (const auto& h : j.at("fields")) fields.push_back(conv(h, "fields"));
    } else {
        fields.assign(l.size(), T(0));
    }
    return BasicIsingModel<T>(std::move(l), std::move(couplings), std::move(fields));
}

}  // namespace

json model_to_json(const IsingModel& model) {
    return {{"lattice", lattice_to_json(model.lattice)}, {"couplings", model.couplings}, {"fields", model.fields}};
}

json model_to_json(const ComplexIsingModel& model) {
    json c = json::array(), f = json::array();
    for (auto z : model.couplings) c.push_back(complex_to_json(z));
    for (auto z : model.fields) f.push_back(complex_to_json(z));
    return {{"lattice", lattice_to_json(model.lattice)}, {"couplings", c}, {"fields", f}};
}

IsingModel model_from_json(const json& j) {
    return read_model<double>(j, [](const json& v, const char* what) {
        if (!v.is_number()) throw std::invalid_argument(std::string(what) + ": expected real numbers");
        return v.get<double>();
    });
}

ComplexIsingModel complex_model_from_json(const json& j) {
    return read_model<cplx>(j, [](const json& v, const char*) { return complex_from_json(v); });
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text, bool force) {
    if (std::filesystem::exists(path) && !force)
        throw std::runtime_error(path.string() + " exists (use --force to overwrite)");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace ising_lab

namespace ising_lab {

namespace {

std::vector<cplx> cvec(const json& j, const std::string& what) {
    if (!j.is_array()) throw std::invalid_argument(what + ": expected an array");
    std::vector<cplx> out;
    for (const auto& v : j) out.push_back(complex_from_json(v));
    return out;
}

std::vector<std::vector<cplx>> cmat(const json& j, const std::string& what) {
    if (!j.is_array()) throw std::invalid_argument(what + ": expected an array of arrays");
    std::vector<std::vector<cplx>> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(cvec(j[k], what + "[" + std::to_string(k) + "]"));
    return out;
}

json cjson(const std::vector<cplx>& v) {
    json out = json::array();
    for (auto z : v) out.push_back(z.imag() == 0 ? json(z.real()) : complex_to_json(z));
    return out;
}

}  // namespace

json program_to_json(const CircuitProgram& program) {
    json layers = json::array();
    for (const auto& layer : program.layers) {
        std::visit(
            [&](const auto& l) {
                using L = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<L, DiagonalLayer>) {
                    json d = {{"kind", "diagonal"},
                              {"alpha", l.alpha.imag() == 0 ? json(l.alpha.real()) : complex_to_json(l.alpha)},
                              {"couplings", cjson(l.couplings)},
                              {"fields", cjson(l.fields)}};
                    if (!l.offsets.empty()) d["offsets"] = cjson(l.offsets);
                    layers.push_back(d);
                } else {
                    const char* kind = std::is_same_v<L, RotationLayer> ? "rotation"
                                       : std::is_same_v<L, PhaseLayer>  ? "phase"
                                                                        : "g";
                    layers.push_back({{"kind", kind}, {"angles", cjson(l.angles)}});
                }
            },
            layer);
    }
    return {{"lattice", lattice_to_json(program.lattice)}, {"layers", layers}};
}

LayeredSpec layered_from_json(const json& j, const Lattice& lattice) {
    LayeredSpec spec;
    spec.lattice = lattice;
    spec.alpha = cvec(j.at("alpha"), "layered.alpha");
    spec.couplings = cmat(j.at("couplings"), "layered.couplings");
    spec.fields = cmat(j.at("fields"), "layered.fields");
    if (j.contains("offsets")) spec.offsets = cmat(j.at("offsets"), "layered.offsets");
    spec.angles = cmat(j.value("angles", json::array()), "layered.angles");
    validate(spec);
    return spec;
}

CircuitProgram program_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw std::invalid_argument("program: expected an object");
    Lattice lattice;
    if (j.contains("lattice")) {
        lattice = lattice_from_json(j.at("lattice"));
    } else if (j.contains("model")) {
        std::filesystem::path p = j.at("model").get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        lattice = model_from_json(read_json_file(p)).lattice;
    } else {
        throw std::invalid_argument("program: needs \"lattice\" or \"model\"");
    }
    if (j.contains("layered")) return layered_program(layered_from_json(j.at("layered"), lattice));
    CircuitProgram p{lattice, {}};
    const auto& layers = j.value("layers", json::array());
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        const std::string where = "layers[" + std::to_string(k) + "]";
        const std::string kind = l.value("kind", "");
        if (kind == "diagonal") {
            DiagonalLayer d;
            d.alpha = l.contains("alpha") ? complex_from_json(l.at("alpha")) : cplx(1.0);
            d.couplings = cvec(l.value("couplings", json::array()), where + ".couplings");
            d.fields = cvec(l.value("fields", json::array()), where + ".fields");
            if (l.contains("offsets")) d.offsets = cvec(l.at("offsets"), where + ".offsets");
            p.layers.push_back(std::move(d));
        } else if (kind == "rotation") {
            p.layers.push_back(RotationLayer{cvec(l.at("angles"), where + ".angles")});
        } else if (kind == "phase") {
            p.layers.push_back(PhaseLayer{cvec(l.at("angles"), where + ".angles")});
        } else if (kind == "g") {
            p.layers.push_back(GLayer{cvec(l.at("angles"), where + ".angles")});
        } else {
            throw std::invalid_argument(where + ".kind: unknown layer kind \"" + kind + "\"");
        }
    }
    validate(p);
    return p;
}

}  // namespace ising_lab
