// Command-line front end: circuit simulation, fault enumeration, fault
// tables, test-set generation and verification, state/process distance
// measures, and tomographic reconstruction.
//
// Exit codes: 0 success, 1 usage or input error, 2 incomplete coverage
// under gen --require-complete.

#include "qatpg/atpg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

using namespace qatpg;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Circuit load_circuit(const std::string& path) {
    Circuit c = parse_circuit(read_file(path));
    if (c.name.empty()) c.name = path;
    return c;
}

void write_output(const std::string& out_path, const std::string& body) {
    if (out_path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << body;
}

std::vector<FaultClass> parse_classes(const std::string& spec) {
    if (spec.empty() || spec == "all") return all_fault_classes();
    std::vector<FaultClass> out;
    std::string cur;
    for (char ch : spec + ",") {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(fault_class_from_name(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    return out;
}

std::vector<Test> load_testset(const std::string& path, int width) {
    std::vector<Test> out;
    std::istringstream in(read_file(path));
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string prep, b1, b2;
        if (!(ls >> prep)) continue;
        if (!(ls >> b1 >> b2))
            throw ParseError(lineno, "expected <bits> <z|x> <z|x>");
        Test t{prep, basis_from_string(b1), basis_from_string(b2)};
        if (static_cast<int>(t.prep.size()) != width)
            throw ParseError(lineno, "preparation width does not match the circuit");
        bits_to_index(t.prep);   // validates characters
        out.push_back(t);
    }
    return out;
}

// ket grammar: |0>, |1>, |+>, |->, |y+>, |y->; juxtaposition is a tensor
// product and multi-label kets like |y+0> are read greedily.
CVector parse_ket(const std::string& spec) {
    std::string labels;
    size_t i = 0;
    while (i < spec.size()) {
        if (spec[i] != '|') throw std::invalid_argument("ket must look like |...>, got \"" + spec + "\"");
        auto close = spec.find('>', i);
        if (close == std::string::npos) throw std::invalid_argument("unterminated ket in \"" + spec + "\"");
        labels += spec.substr(i + 1, close - i - 1);
        i = close + 1;
    }
    if (labels.empty()) throw std::invalid_argument("empty ket \"" + spec + "\"");
    return detail::labeled_ket(labels);
}

std::string render_distribution(const OutcomeDistribution& dist, const std::string& format) {
    if (format == "json") {
        json j;
        for (const auto& [bits, p] : dist) j[bits] = p;
        return j.dump(2) + "\n";
    }
    std::string out;
    for (const auto& [bits, p] : dist) out += bits + ": " + format_double(p) + "\n";
    return out;
}

std::string render_counts(const std::map<std::string, long>& counts, const std::string& format) {
    if (format == "json") {
        json j;
        for (const auto& [bits, c] : counts) j[bits] = c;
        return j.dump(2) + "\n";
    }
    std::string out;
    for (const auto& [bits, c] : counts) out += bits + ": " + std::to_string(c) + "\n";
    return out;
}

std::string render_matrix(const CMatrix& m, const std::string& format) {
    if (format == "json") {
        json j = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                row.push_back({{"re", m(r, c).real()}, {"im", m(r, c).imag()}});
            j.push_back(row);
        }
        return j.dump(2) + "\n";
    }
    std::ostringstream ss;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%+.6f%+.6fi", m(r, c).real(), m(r, c).imag());
            ss << (c ? "  " : "") << buf;
        }
        ss << "\n";
    }
    return ss.str();
}

struct CommonOpts {
    std::string circuit;
    std::string classes = "all";
    double tau = kDefaultTau;
    std::string format = "text";
    std::string out;
    FaultParams params;
};

void add_param_flags(CLI::App* cmd, FaultParams& p) {
    cmd->add_option("--p", p.pauli_p, "placement probability for enumerated pauli faults");
    cmd->add_option("--theta", p.theta, "angle for enumerated init rotation faults");
    cmd->add_option("--gamma", p.gamma, "damping for enumerated stuck preparation faults");
    cmd->add_option("--eps", p.eps, "angle error for enumerated phase kick faults");
    cmd->add_option("--phi", p.phi, "angle for enumerated cz angle faults");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fault simulation and test generation for quantum switching networks"};
    app.require_subcommand(1);
    app.footer("Fault-table construction fans out across threads; set QATPG_THREADS to cap the\n"
               "worker count. Outputs are deterministic for identical inputs and seeds.");

    // --- sim ---------------------------------------------------------------
    std::string sim_prep, sim_basis = "z", sim_measure, sim_fault;
    long sim_shots = 0;
    std::uint64_t sim_seed = 0;
    bool sim_seed_set = false;
    bool sim_signature = false;
    CommonOpts sim;
    auto* cmd_sim = app.add_subcommand("sim", "run one test against a circuit");
    cmd_sim->add_option("--circuit", sim.circuit, "circuit file")->required();
    cmd_sim->add_option("--prep", sim_prep, "preparation bitstring")->required();
    cmd_sim->add_option("--basis", sim_basis, "preparation basis (z|x)");
    cmd_sim->add_option("--measure", sim_measure, "measurement basis (default: same as --basis)");
    cmd_sim->add_option("--fault", sim_fault, "fault spec to inject, e.g. \"meas q=0 v=1\"");
    cmd_sim->add_option("--shots", sim_shots, "sample counts instead of exact probabilities");
    cmd_sim->add_option("--seed", sim_seed, "sampling seed (required when --shots > 0)")
        ->each([&](const std::string&) { sim_seed_set = true; });
    cmd_sim->add_flag("--signature", sim_signature,
                      "print per-term signs of the conjugate-basis preparation run");
    cmd_sim->add_option("--format", sim.format, "text|json");
    cmd_sim->add_option("--out", sim.out, "write output to a file");

    // --- faults ------------------------------------------------------------
    CommonOpts fl;
    auto* cmd_faults = app.add_subcommand("faults", "list enumerated faults");
    cmd_faults->add_option("--circuit", fl.circuit, "circuit file")->required();
    cmd_faults->add_option("--classes", fl.classes, "comma list: pauli,initrot,initstuck,lostphase,kick,faded,forced,meas,czangle");
    cmd_faults->add_option("--format", fl.format, "text|json");
    cmd_faults->add_option("--out", fl.out, "write output to a file");
    add_param_flags(cmd_faults, fl.params);

    // --- table -------------------------------------------------------------
    CommonOpts tb;
    std::string tb_tests = "z";
    auto* cmd_table = app.add_subcommand("table", "build a fault table");
    cmd_table->add_option("--circuit", tb.circuit, "circuit file")->required();
    cmd_table->add_option("--classes", tb.classes, "fault classes");
    cmd_table->add_option("--tau", tb.tau, "detection threshold on total variation distance");
    cmd_table->add_option("--tests", tb_tests, "test vocabulary: z|x|zx");
    cmd_table->add_option("--format", tb.format, "text|json|csv");
    cmd_table->add_option("--out", tb.out, "write output to a file");
    add_param_flags(cmd_table, tb.params);

    // --- gen ---------------------------------------------------------------
    CommonOpts gn;
    bool gn_require_complete = false;
    auto* cmd_gen = app.add_subcommand("gen", "generate a minimal covering test set");
    cmd_gen->add_option("--circuit", gn.circuit, "circuit file")->required();
    cmd_gen->add_option("--classes", gn.classes, "fault classes");
    cmd_gen->add_option("--tau", gn.tau, "detection threshold");
    cmd_gen->add_flag("--require-complete", gn_require_complete, "exit 2 unless the set is complete");
    cmd_gen->add_option("--format", gn.format, "text|json");
    cmd_gen->add_option("--out", gn.out, "write output to a file");
    add_param_flags(cmd_gen, gn.params);

    // --- verify ------------------------------------------------------------
    CommonOpts vf;
    std::string vf_testset;
    auto* cmd_verify = app.add_subcommand("verify", "score a test-set file against faults");
    cmd_verify->add_option("--circuit", vf.circuit, "circuit file")->required();
    cmd_verify->add_option("--testset", vf_testset, "file of lines: <bits> <z|x> <z|x>")->required();
    cmd_verify->add_option("--classes", vf.classes, "fault classes");
    cmd_verify->add_option("--tau", vf.tau, "detection threshold");
    cmd_verify->add_option("--format", vf.format, "text|json");
    cmd_verify->add_option("--out", vf.out, "write output to a file");
    add_param_flags(cmd_verify, vf.params);

    // --- distance ----------------------------------------------------------
    std::string ds_a, ds_b, ds_real, ds_ideal;
    bool ds_fid = false, ds_trace = false, ds_bures = false, ds_angle = false;
    bool ds_sfid = false, ds_sdist = false;
    std::string ds_format = "text", ds_out;
    auto* cmd_dist = app.add_subcommand("distance", "state and process distance measures");
    cmd_dist->add_flag("--fidelity", ds_fid, "state fidelity");
    cmd_dist->add_flag("--trace-distance", ds_trace, "state trace distance");
    cmd_dist->add_flag("--bures", ds_bures, "Bures metric");
    cmd_dist->add_flag("--angle", ds_angle, "angle metric");
    cmd_dist->add_flag("--s-fidelity", ds_sfid, "worst-case process fidelity over the standard input set");
    cmd_dist->add_flag("--s-distance", ds_sdist, "worst-case process trace distance");
    cmd_dist->add_option("--a", ds_a, "left state as a ket, e.g. \"|0>|+>\"");
    cmd_dist->add_option("--b", ds_b, "right state as a ket");
    cmd_dist->add_option("--real", ds_real, "circuit file for the real process");
    cmd_dist->add_option("--ideal", ds_ideal, "circuit file for the ideal process");
    cmd_dist->add_option("--format", ds_format, "text|json");
    cmd_dist->add_option("--out", ds_out, "write output to a file");

    // --- tomo --------------------------------------------------------------
    CommonOpts tm;
    std::string tm_prep, tm_basis = "z", tm_fault;
    bool tm_process = false;
    auto* cmd_tomo = app.add_subcommand("tomo", "tomographic reconstruction of a circuit output");
    cmd_tomo->add_option("--circuit", tm.circuit, "circuit file (1 or 2 qubits)")->required();
    cmd_tomo->add_option("--prep", tm_prep, "preparation bitstring (default all zeros)");
    cmd_tomo->add_option("--basis", tm_basis, "preparation basis (z|x)");
    cmd_tomo->add_option("--fault", tm_fault, "fault spec to inject");
    cmd_tomo->add_flag("--process", tm_process, "reconstruct the full process map instead");
    cmd_tomo->add_option("--format", tm.format, "text|json");
    cmd_tomo->add_option("--out", tm.out, "write output to a file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*cmd_sim) {
            Circuit c = load_circuit(sim.circuit);
            Test t{sim_prep, basis_from_string(sim_basis),
                   basis_from_string(sim_measure.empty() ? sim_basis : sim_measure)};
            if (static_cast<int>(t.prep.size()) != c.width)
                throw std::invalid_argument("--prep width does not match the circuit");
            FaultedModel m = sim_fault.empty() ? gold_model(c)
                                               : apply_fault(c, fault_from_string(sim_fault, c));
            if (sim_signature) {
                const auto sig = phase_signature(m, sim_prep);
                if (sim.format == "json") {
                    json j;
                    for (const auto& [bits, sign] : sig) j[bits] = sign;
                    write_output(sim.out, j.dump(2) + "\n");
                } else {
                    std::string body;
                    for (const auto& [bits, sign] : sig)
                        body += bits + ": " + (sign > 0 ? "+1" : "-1") + "\n";
                    write_output(sim.out, body);
                }
            } else if (sim_shots > 0) {
                if (!sim_seed_set)
                    throw std::invalid_argument("--seed is required when --shots > 0");
                write_output(sim.out, render_counts(run_shots(m, t, sim_shots, sim_seed), sim.format));
            } else {
                write_output(sim.out, render_distribution(run_exact(m, t), sim.format));
            }
        } else if (*cmd_faults) {
            Circuit c = load_circuit(fl.circuit);
            FaultSet fs = enumerate_faults(c, parse_classes(fl.classes), fl.params);
            if (fl.format == "json") {
                json j = json::array();
                for (const Fault& f : fs.faults) j.push_back(fault_to_string(f));
                write_output(fl.out, j.dump(2) + "\n");
            } else {
                std::string body;
                for (const Fault& f : fs.faults) body += fault_to_string(f) + "\n";
                write_output(fl.out, body);
            }
        } else if (*cmd_table) {
            Circuit c = load_circuit(tb.circuit);
            FaultSet fs = enumerate_faults(c, parse_classes(tb.classes), tb.params);
            std::vector<Test> tests;
            if (c.width > 10) throw std::invalid_argument("table: circuit too wide");
            const unsigned dim = 1u << c.width;
            if (tb_tests == "z" || tb_tests == "zx")
                for (unsigned k = 0; k < dim; ++k)
                    tests.push_back({index_to_bits(c.width, k), MeasBasis::Z, MeasBasis::Z});
            if (tb_tests == "x" || tb_tests == "zx")
                for (unsigned k = 0; k < dim; ++k)
                    tests.push_back({index_to_bits(c.width, k), MeasBasis::X, MeasBasis::X});
            if (tests.empty()) throw std::invalid_argument("--tests must be z, x or zx");
            FaultTable ft = build_fault_table(c, fs, tests, tb.tau);
            if (tb.format == "json")
                write_output(tb.out, fault_table_json(ft).dump(2) + "\n");
            else
                write_output(tb.out, fault_table_csv(ft));
        } else if (*cmd_gen) {
            Circuit c = load_circuit(gn.circuit);
            FaultSet fs = enumerate_faults(c, parse_classes(gn.classes), gn.params);
            TestSetReport r = generate_complete_set(c, fs, gn.tau);
            FaultTable ft;   // for rendering fault names alongside coverage
            ft.faults = fs.faults;
            if (gn.format == "json") {
                write_output(gn.out, report_json(r, ft).dump(2) + "\n");
            } else {
                std::string body = "coverage " + format_double(r.coverage) + "\n";
                body += std::string("complete ") + (r.complete ? "yes" : "no") + "\n";
                for (size_t q = 0; q < 7; ++q)
                    body += "R" + std::to_string(q + 1) + " " +
                            ((*r.requirements)[q] ? "pass" : "fail") + "\n";
                for (const Test& t : r.chosen) body += "test " + test_to_string(t) + "\n";
                for (size_t k = 0; k < fs.faults.size(); ++k)
                    body += (r.covered[k] ? "covered " : "uncovered ") + fault_to_string(fs.faults[k]) +
                            (r.covered[k] ? " shots=" + std::to_string(r.shots_advice[k]) : "") + "\n";
                write_output(gn.out, body);
            }
            if (gn_require_complete && !r.complete) return 2;
        } else if (*cmd_verify) {
            Circuit c = load_circuit(vf.circuit);
            FaultSet fs = enumerate_faults(c, parse_classes(vf.classes), vf.params);
            std::vector<Test> tests = load_testset(vf_testset, c.width);
            FaultTable ft = build_fault_table(c, fs, tests, vf.tau);
            std::vector<size_t> rows(tests.size());
            for (size_t i = 0; i < rows.size(); ++i) rows[i] = i;
            TestSetReport r;
            detail::finish_report(r, ft, rows);
            r.requirements = check_requirements(c, tests, &fs, vf.tau);
            r.complete = r.coverage == 1.0 &&
                         std::all_of(r.requirements->begin(), r.requirements->end(),
                                     [](bool b) { return b; });
            if (vf.format == "json") {
                write_output(vf.out, report_json(r, ft).dump(2) + "\n");
            } else {
                std::string body = "coverage " + format_double(r.coverage) + "\n";
                body += std::string("complete ") + (r.complete ? "yes" : "no") + "\n";
                for (size_t k = 0; k < fs.faults.size(); ++k)
                    body += (r.covered[k] ? "covered " : "uncovered ") +
                            fault_to_string(fs.faults[k]) + "\n";
                write_output(vf.out, body);
            }
        } else if (*cmd_dist) {
            double value = 0.0;
            if (ds_fid || ds_trace || ds_bures || ds_angle) {
                if (ds_a.empty() || ds_b.empty())
                    throw std::invalid_argument("state measures need --a and --b");
                const CVector a = parse_ket(ds_a), b = parse_ket(ds_b);
                if (a.size() != b.size())
                    throw std::invalid_argument("states have different dimensions");
                const CMatrix ra = a * a.adjoint(), rb = b * b.adjoint();
                if (ds_fid) value = fidelity(ra, rb);
                else if (ds_trace) value = trace_distance(ra, rb);
                else if (ds_bures) value = bures(ra, rb);
                else value = angle(ra, rb);
            } else if (ds_sfid || ds_sdist) {
                if (ds_real.empty() || ds_ideal.empty())
                    throw std::invalid_argument("process measures need --real and --ideal");
                Circuit cr = load_circuit(ds_real), ci = load_circuit(ds_ideal);
                if (cr.width != ci.width || cr.width > 2)
                    throw std::invalid_argument("process measures support matching 1- or 2-qubit circuits");
                ProcessMap pr = process_of_unitary(unitary_of(cr));
                ProcessMap pi = process_of_unitary(unitary_of(ci));
                OperatorBasisSet basis = default_basis(cr.width);
                value = ds_sfid ? s_fidelity(pr, pi, basis) : s_distance(pr, pi, basis);
            } else {
                throw std::invalid_argument("pick one of --fidelity, --trace-distance, --bures, --angle, --s-fidelity, --s-distance");
            }
            if (ds_format == "json")
                write_output(ds_out, json{{"value", value}}.dump(2) + "\n");
            else
                write_output(ds_out, format_double(value) + "\n");
        } else if (*cmd_tomo) {
            Circuit c = load_circuit(tm.circuit);
            if (c.width > 2) throw std::invalid_argument("tomo supports 1- and 2-qubit circuits");
            FaultedModel m = tm_fault.empty() ? gold_model(c)
                                              : apply_fault(c, fault_from_string(tm_fault, c));
            if (tm_process) {
                ProcessMap p = process_characterize(
                    [&](const CMatrix& rho) { return evolve_density(m, rho); }, c.width);
                write_output(tm.out, render_matrix(p.superop, tm.format));
            } else {
                if (tm_prep.empty()) tm_prep.assign(static_cast<size_t>(c.width), '0');
                if (static_cast<int>(tm_prep.size()) != c.width)
                    throw std::invalid_argument("--prep width does not match the circuit");
                const Eigen::Index dim = Eigen::Index{1} << c.width;
                CMatrix rho = CMatrix::Zero(dim, dim);
                rho(bits_to_index(tm_prep), bits_to_index(tm_prep)) = 1.0;
                // preparation faults act before the basis rotation
                for (const Step& s : m.init_steps) detail::apply_step_density(rho, s, c.width);
                if (basis_from_string(tm_basis) == MeasBasis::X)
                    detail::hadamard_all_density(rho, c.width);
                for (const Step& s : m.stage_steps) detail::apply_step_density(rho, s, c.width);
                const CMatrix recon = state_tomography(pauli_expectations(rho), c.width);
                write_output(tm.out, render_matrix(recon, tm.format));
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
