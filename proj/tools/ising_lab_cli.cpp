// ising-lab: command-line front end.
//
// Exit status: 0 success, 1 domain error (bad input data, caps, failed
// selftest), 2 usage error.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ising_lab/bqp.hpp"
#include "ising_lab/circuit.hpp"
#include "ising_lab/fidelity.hpp"
#include "ising_lab/fpras.hpp"
#include "ising_lab/io.hpp"
#include "ising_lab/ising_model.hpp"
#include "ising_lab/knots.hpp"
#include "ising_lab/reconstruction.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ising_lab;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string model, program, betas, name, out;
    std::optional<double> beta;
    std::optional<std::uint64_t> seed;
    int q = 2;
    std::uint64_t shots = 0;
    double noise = 0;
    double eta = 0.5;
    double eps = 0.1;
    unsigned threads = 1;
    bool force = false;
    bool selftest = false;
};

// "start:step:end", end inclusive up to rounding
std::vector<double> parse_range(const std::string& s) {
    std::vector<double> parts;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError("--betas: cannot parse '" + tok + "' in '" + s + "'");
        }
    }
    if (parts.size() == 1) return parts;
    if (parts.size() != 3 || !(parts[1] > 0) || parts[2] < parts[0])
        throw UsageError("--betas: expected start:step:end with step > 0 and end >= start");
    std::vector<double> out;
    const auto count = static_cast<long long>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9));
    if (count > 1000000) throw UsageError("--betas: more than 1e6 points");
    for (long long k = 0; k <= count; ++k) out.push_back(parts[0] + k * parts[1]);
    return out;
}

std::vector<double> betas_of(const Common& c) {
    if (!c.betas.empty()) return parse_range(c.betas);
    if (c.beta) return {*c.beta};
    throw UsageError("give --beta or --betas");
}

void need(const std::string& value, const char* flag) {
    if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

std::uint64_t need_seed(const Common& c) {
    if (!c.seed) throw UsageError("--seed is required for this stochastic command");
    return *c.seed;
}

IsingModel load_model(const std::string& path) {
    need(path, "--model");
    return model_from_json(read_json_file(path));
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    write_text_file(c.out, text, c.force);
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// cache of brute-force partition values
// ---------------------------------------------------------------------------

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

cplx cached_partition(const IsingModel& model, double beta, const EnumerationOptions& opts) {
    const char* dir = std::getenv("ISING_LAB_CACHE");
    if (!dir || !*dir) return partition_function(model, beta, Method::enumerate, opts);
    const std::string key = model_to_json(model).dump() + "|" + num(beta);
    char name[32];
    std::snprintf(name, sizeof name, "z-%016llx.json", static_cast<unsigned long long>(fnv1a(key)));
    const fs::path file = fs::path(dir) / name;
    if (fs::exists(file)) {
        const auto j = read_json_file(file);
        if (j.value("key", "") == key) return complex_from_json(j.at("Z"));
    }
    const cplx z = partition_function(model, beta, Method::enumerate, opts);
    write_text_file(file, json{{"key", key}, {"Z", complex_to_json(z)}}.dump() + "\n", true);
    return z;
}

// ---------------------------------------------------------------------------
// selftests
// ---------------------------------------------------------------------------

int report(const char* cmd, const std::vector<std::pair<std::string, bool>>& checks) {
    bool all = true;
    for (const auto& [what, ok] : checks) {
        std::cout << (ok ? "ok    " : "FAIL  ") << cmd << ": " << what << "\n";
        all = all && ok;
    }
    return all ? 0 : 1;
}

int selftest_partition() {
    const auto m = IsingModel::uniform(Lattice::chain(3), 1.0, 0.0);
    const auto free = IsingModel::uniform(Lattice::chain(4), 0.0, 0.5);
    return report("partition",
                  {{"Z(0) = 2^n", std::abs(partition_function(m, 0.0) - 8.0) < 1e-12},
                   {"J = 0 gives (2 cosh beta h)^n",
                    std::abs(partition_function(free, 1.0).real() / std::pow(2 * std::cosh(0.5), 4) - 1) < 1e-12}});
}

int selftest_amplitude() {
    const CircuitProgram empty{Lattice::chain(3), {}};
    const CircuitProgram phase{Lattice::chain(1), {PhaseLayer{{0.8}}}};
    return report("amplitude", {{"empty program has amplitude 1", std::abs(amplitude(empty) - 1.0) < 1e-15},
                                {"trace of a phase gate", std::abs(trace_amplitude(phase) - std::cos(0.8)) < 1e-15}});
}

int selftest_reconstruct() {
    const auto m = IsingModel::uniform(Lattice::chain(4), 1.0, 0.0);
    const OneStepProblem prob{m};
    const auto z = prob.plan().series(prob.sample().values);
    return report("reconstruct", {{"Z(0) = 2^n", std::abs(z.value(0.0) - 16.0) < 1e-9},
                                  {"noise-free data reproduce Z(1)",
                                   std::abs(z.value(1.0) / partition_function(m, 1.0) - 1.0) < 1e-9}});
}

int selftest_knot() {
    bool zero_temp = true;
    for (const auto& k : knot_catalog())
        for (int q = 1; q <= 3; ++q)
            zero_temp = zero_temp &&
                        std::abs(potts_partition(k.graph, {q, 0.0}) - std::pow(double(q), k.graph.vertices)) < 1e-9;
    return report("knot", {{"Potts sum at beta = 0 counts q^V colourings", zero_temp},
                           {"q = 2 invariant temperature is i pi / 2",
                            std::abs(invariant_beta(2) - cplx(0, pi / 2)) < 1e-12}});
}

int selftest_bqp() {
    const std::vector<TOperator> none{{false, false, false}};
    const auto inst = circuit_to_ising(none, 1);
    return report("bqp", {{"empty circuit reconstructs amplitude 1",
                           std::abs(reconstruct_amplitude(exact_oracle(inst.model), inst).amplitude - 1.0) < 1e-12}});
}

int selftest_fidelity() {
    const QuantumIsingParams p{Lattice::chain(2), 1.0, 1.0, 0.0};
    const auto plan = fixed_time_plan(p, 1.0, 2);
    return report("fidelity", {{"a state overlaps itself with 1",
                                std::abs(statevector_overlap(p, plan, p, plan) - 1.0) < 1e-12},
                               {"zero step has zero epsilon", transverse_epsilon(0.0) == 0.0}});
}

int selftest_fpras() {
    const auto s = schedule(1, 1, 9, 1);
    const auto m = IsingModel::uniform(Lattice::grid({2, 2}), 0.0, 0.0);
    const auto run = estimate_partition(exact_magnetization_oracle(), m, 1.0, 0.5, 0.1, 1);
    const double z = std::pow(2 * std::cosh(0.5), 4);
    return report("fpras", {{"schedule spacing is equal", s.L == 9 && std::abs(s.dh - 1.0 / 9) < 1e-15},
                            {"independent spins within eps", std::abs(run.z_hat - z) <= 0.1 * z}});
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

int cmd_partition(const Common& c, const std::string& method) {
    if (c.selftest) return selftest_partition();
    const auto model = load_model(c.model);
    EnumerationOptions opts;
    opts.threads = c.threads;
    const auto betas = betas_of(c);
    if (method != "enumerate" && method != "transfer") throw UsageError("--method must be enumerate or transfer");
    auto eval = [&](double b) {
        return method == "transfer" ? partition_function(model, b, Method::transfer) : cached_partition(model, b, opts);
    };
    if (c.betas.empty()) {
        emit(c, json{{"beta", betas[0]}, {"Z", complex_to_json(eval(betas[0]))}}.dump(2) + "\n");
        return 0;
    }
    std::string csv = "beta,Z_re,Z_im\n";
    for (double b : betas) {
        const cplx z = eval(b);
        csv += num(b) + "," + num(z.real()) + "," + num(z.imag()) + "\n";
    }
    emit(c, csv);
    return 0;
}

int cmd_amplitude(const Common& c, bool trace) {
    if (c.selftest) return selftest_amplitude();
    need(c.program, "--program");
    const auto prog = program_from_json(read_json_file(c.program), fs::path(c.program).parent_path());
    const cplx exact = trace ? trace_amplitude(prog) : amplitude(prog);
    json out{{"amplitude", complex_to_json(exact)}, {"trace", trace}};
    if (c.shots > 0) {
        ProtocolOptions po;
        po.trace = trace;
        po.threads = c.threads;
        const auto p2 = simulate_protocol(prog, Protocol::overlap, c.shots, need_seed(c), po);
        out["protocol2"] = {{"estimate", complex_to_json(p2.value)}, {"standard_error", p2.standard_error}};
        if (!trace) {
            const auto p1 = simulate_protocol(prog, Protocol::squared_overlap, c.shots, *c.seed, po);
            out["protocol1"] = {{"estimate", p1.value.real()}, {"standard_error", p1.standard_error}};
        }
        out["shots"] = c.shots;
        out["seed"] = *c.seed;
    }
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_reconstruct(const Common& c) {
    if (c.selftest) return selftest_reconstruct();
    const auto model = load_model(c.model);
    const auto betas = betas_of(c);
    if (c.noise < 0) throw UsageError("--noise must be non-negative");
    const OneStepProblem prob{model};
    const auto plan = prob.plan();
    auto samples = prob.sample(c.threads).values;
    if (c.noise > 0) samples = add_noise(samples, c.noise, need_seed(c), 0);
    const auto z = plan.series(samples);
    const std::vector<double> sig(plan.sample_count(), c.noise);
    std::string csv = "beta,Z,sigma,log_z_per_beta,energy,specific_heat\n";
    for (double b : betas) {
        const auto t = thermodynamics(z, b, model.size());
        csv += num(b) + "," + num(z.value(b).real()) + "," + num(plan.sigma(b, sig)) + "," +
               (b > 0 ? num(t.log_z_per_beta) : "nan") + "," + num(t.energy) + "," + num(t.specific_heat) + "\n";
    }
    emit(c, csv);
    return 0;
}

int cmd_knot(const Common& c) {
    if (c.selftest) return selftest_knot();
    need(c.name, "--name");
    if (c.q < 1) throw UsageError("--q must be at least 1");
    const cplx v = knot_invariant(c.name, c.q);
    json out{{"name", c.name}, {"q", c.q}, {"value", complex_to_json(v)}};
    const auto& entry = find_knot(c.name);
    if (c.q <= static_cast<int>(entry.reference.size())) out["reference"] = complex_to_json(entry.reference[c.q - 1]);
    emit(c, out.dump(2) + "\n");
    return 0;
}

// {"logical_qubits": n, "ops": [["cp", "phase", "h"], ...]}, application order
std::pair<std::vector<TOperator>, int> load_t_program(const std::string& path) {
    need(path, "--program");
    const auto j = read_json_file(path);
    const int n = j.at("logical_qubits").get<int>();
    std::vector<TOperator> ops;
    for (const auto& op : j.at("ops")) {
        TOperator t{false, false, false};
        for (const auto& f : op) {
            const auto s = f.get<std::string>();
            if (s == "cp") t.cp = true;
            else if (s == "phase") t.phase = true;
            else if (s == "h") t.hadamard = true;
            else throw std::invalid_argument("ops: unknown factor '" + s + "' (cp, phase, h)");
        }
        ops.push_back(t);
    }
    return {ops, n};
}

int cmd_bqp(const Common& c) {
    if (c.selftest) return selftest_bqp();
    const auto [ops, n] = load_t_program(c.program);
    const auto inst = circuit_to_ising(ops, n);
    const auto rec = reconstruct_amplitude(exact_oracle(inst.model), inst);
    json out{{"reconstructed", complex_to_json(rec.amplitude)},
             {"nodes", rec.nodes},
             {"instance", instance_sidecar(inst, rec.nodes)}};
    if (2 * n <= 20) out["statevector"] = complex_to_json(t_sequence_amplitude(ops, n));
    emit(c, out.dump(2) + "\n");
    return 0;
}

struct FidelityFlags {
    double h_perp = 1.0, h_perp_prime = 1.2;
    double time = 1.0, time_prime = 1.2;
    int steps = 2, steps_prime = 2;
    bool mesh = false;
};

double uniform_value(const std::vector<double>& v, const char* what) {
    if (v.empty()) return 0;
    for (double x : v)
        if (x != v[0]) throw std::invalid_argument(std::string("fidelity: model ") + what + " must be uniform");
    return v[0];
}

int cmd_fidelity(const Common& c, const FidelityFlags& f) {
    if (c.selftest) return selftest_fidelity();
    const auto m = load_model(c.model);
    const double J = uniform_value(m.couplings, "couplings"), h = uniform_value(m.fields, "fields");
    const QuantumIsingParams p{m.lattice, f.h_perp, J, h}, q{m.lattice, f.h_perp_prime, J, h};
    const auto plan = fixed_time_plan(p, f.time, f.steps), qplan = fixed_time_plan(q, f.time_prime, f.steps_prime);
    const auto inst = overlap_instance(p, plan, q, qplan);
    json out{{"statevector", complex_to_json(statevector_overlap(p, plan, q, qplan))},
             {"partition_function", complex_to_json(instance_overlap(inst))},
             {"couplings", json::array()},
             {"slab_sites", inst.model.size()}};
    for (const auto& b : inst.couplings.beta) out["couplings"].push_back(complex_to_json(b));
    if (f.mesh) {
        const auto mesh = MeshSpec::full(slab_degrees(inst.slab));
        const auto r = mesh_reconstruct(exact_slab_sampler(inst.slab), mesh, inst.couplings.beta, inst.prefactor,
                                        c.threads);
        out["mesh"] = complex_to_json(cplx(static_cast<double>(r.real()), static_cast<double>(r.imag())));
        out["mesh_points"] = mesh.size();
    }
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_fpras(const Common& c, double field) {
    if (c.selftest) return selftest_fpras();
    const auto m = load_model(c.model);
    if (!c.beta) throw UsageError("--beta is required");
    EstimatorOptions opts;
    opts.eta = c.eta;
    opts.enumeration.threads = c.threads;
    const auto run = estimate_partition(exact_magnetization_oracle(opts.enumeration), m, *c.beta, field, c.eps,
                                        need_seed(c), opts);
    auto out = to_json(run);
    out["seed"] = *c.seed;
    if (m.size() <= 26) out["z_exact"] = cached_partition(with_uniform_field(m, field), *c.beta, opts.enumeration).real();
    emit(c, out.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-circuit / classical-Ising duality toolkit"};
    app.require_subcommand(1);
    Common c;
    std::string method = "enumerate";
    bool trace = false;
    double field = 0;
    FidelityFlags ff;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", c.out, "output file (stdout if omitted)");
        sub->add_flag("--force", c.force, "overwrite an existing output file");
        sub->add_option("--threads", c.threads, "worker threads (results do not depend on it)")
            ->check(CLI::Range(1u, 256u));
        sub->add_flag("--selftest", c.selftest, "run this command's built-in checks");
    };

    auto* partition = app.add_subcommand("partition", "exact partition function");
    partition->add_option("--model", c.model, "model JSON");
    partition->add_option("--beta", c.beta);
    partition->add_option("--betas", c.betas, "start:step:end");
    partition->add_option("--method", method, "enumerate or transfer");
    common(partition);

    auto* amp = app.add_subcommand("amplitude", "circuit amplitude and simulated protocols");
    amp->add_option("--program", c.program, "program JSON");
    amp->add_option("--shots", c.shots);
    amp->add_option("--seed", c.seed);
    amp->add_flag("--trace", trace, "trace variant (maximally mixed input)");
    common(amp);

    auto* rec = app.add_subcommand("reconstruct", "Z(beta) from one-step imaginary-temperature data");
    rec->add_option("--model", c.model, "model JSON with integer couplings and fields");
    rec->add_option("--beta", c.beta);
    rec->add_option("--betas", c.betas, "start:step:end");
    rec->add_option("--noise", c.noise, "standard deviation added to Re and Im of each sample");
    rec->add_option("--seed", c.seed);
    common(rec);

    auto* knot = app.add_subcommand("knot", "knot invariant from the Potts partition function");
    knot->add_option("--name", c.name, "catalog name, e.g. 3_1");
    knot->add_option("--q", c.q);
    common(knot);

    auto* bqp = app.add_subcommand("bqp", "amplitude from real-temperature partition values");
    bqp->add_option("--program", c.program, "T-operator program JSON");
    common(bqp);

    auto* fid = app.add_subcommand("fidelity", "overlap of two Trotterized adiabatic states");
    fid->add_option("--model", c.model, "lattice with uniform J and h");
    fid->add_option("--h-perp", ff.h_perp);
    fid->add_option("--h-perp-prime", ff.h_perp_prime);
    fid->add_option("--time", ff.time);
    fid->add_option("--time-prime", ff.time_prime);
    fid->add_option("--steps", ff.steps)->check(CLI::PositiveNumber);
    fid->add_option("--steps-prime", ff.steps_prime)->check(CLI::PositiveNumber);
    fid->add_flag("--mesh", ff.mesh, "also run the six-axis mesh reconstruction");
    common(fid);

    auto* fp = app.add_subcommand("fpras", "telescoping estimator with the exact magnetization oracle");
    fp->add_option("--model", c.model, "model JSON");
    fp->add_option("--beta", c.beta);
    fp->add_option("--field", field, "uniform field added to the model");
    fp->add_option("--eps", c.eps);
    fp->add_option("--eta", c.eta);
    fp->add_option("--seed", c.seed);
    common(fp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*partition) return cmd_partition(c, method);
        if (*amp) return cmd_amplitude(c, trace);
        if (*rec) return cmd_reconstruct(c);
        if (*knot) return cmd_knot(c);
        if (*bqp) return cmd_bqp(c);
        if (*fid) return cmd_fidelity(c, ff);
        if (*fp) return cmd_fpras(c, field);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
