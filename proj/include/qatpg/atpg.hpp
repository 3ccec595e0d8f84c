#pragma once

// Fault-table construction, the seven completeness requirements, greedy
// set-cover test extraction, and report rendering.  Detection is an exact
// total-variation-distance threshold between the gold and faulted outcome
// distributions of a test.

#include "qatpg/metrics.hpp"

#include <json.hpp>

#include <cstdlib>
#include <future>
#include <thread>

namespace qatpg {

inline constexpr double kDefaultTau = 0.5;

/// True when test `t` separates the faulted circuit from gold at threshold
/// `tau` on exact outcome distributions.
inline bool distinguishes(const Circuit& gc, const Fault& f, const Test& t,
                          double tau = kDefaultTau) {
    return tvd(run_exact(gc, t), run_exact(apply_fault(gc, f), t)) >= tau;
}

// ---------------------------------------------------------------------------
// fault table

struct FaultTable {
    std::vector<Test> tests;
    std::vector<Fault> faults;
    std::vector<std::vector<bool>> detects;   // [test][fault]
    std::vector<std::vector<double>> tvds;    // exact separations, same shape
    double tau = kDefaultTau;
};

namespace detail {

inline unsigned table_threads() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("QATPG_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

} // namespace detail

/// Rows in test order, columns in fault order; cells fan out to worker
/// threads (capped by QATPG_THREADS) and the matrix is identical for any
/// thread count.
inline FaultTable build_fault_table(const Circuit& gc, const FaultSet& fs,
                                    const std::vector<Test>& tests, double tau = kDefaultTau,
                                    unsigned threads = 0) {
    FaultTable ft;
    ft.tests = tests;
    ft.faults = fs.faults;
    ft.tau = tau;
    ft.detects.assign(tests.size(), std::vector<bool>(fs.faults.size(), false));
    ft.tvds.assign(tests.size(), std::vector<double>(fs.faults.size(), 0.0));

    std::vector<FaultedModel> models;
    models.reserve(fs.faults.size());
    for (const Fault& f : fs.faults) models.push_back(apply_fault(gc, f));

    if (threads == 0) threads = detail::table_threads();
    threads = std::min<unsigned>(threads, std::max<size_t>(tests.size(), 1));

    auto run_rows = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            const OutcomeDistribution gold = run_exact(gc, tests[i]);
            for (size_t j = 0; j < models.size(); ++j) {
                const double d = tvd(gold, run_exact(models[j], tests[i]));
                ft.tvds[i][j] = d;
                ft.detects[i][j] = d >= tau;
            }
        }
    };

    if (threads <= 1 || tests.size() <= 1) {
        run_rows(0, tests.size());
    } else {
        std::vector<std::future<void>> workers;
        const size_t chunk = (tests.size() + threads - 1) / threads;
        for (size_t begin = 0; begin < tests.size(); begin += chunk)
            workers.push_back(std::async(std::launch::async, run_rows, begin,
                                         std::min(begin + chunk, tests.size())));
        for (auto& w : workers) w.get();
    }
    return ft;
}

// ---------------------------------------------------------------------------
// reports

struct TestSetReport {
    std::vector<Test> chosen;
    std::vector<bool> covered;                  // per fault
    std::vector<size_t> uncovered;              // fault indices
    double coverage = 0.0;
    std::optional<std::array<bool, 7>> requirements;   // R1..R7 when evaluated
    bool complete = false;
    std::vector<double> best_tvd;               // per fault, over chosen tests
    std::vector<long> shots_advice;             // ceil(8 / tvd^2), 0 if uncovered
};

namespace detail {

inline void finish_report(TestSetReport& r, const FaultTable& ft,
                          const std::vector<size_t>& chosen_rows) {
    const size_t nf = ft.faults.size();
    r.chosen.clear();
    for (size_t i : chosen_rows) r.chosen.push_back(ft.tests[i]);
    r.covered.assign(nf, false);
    r.best_tvd.assign(nf, 0.0);
    for (size_t j = 0; j < nf; ++j)
        for (size_t i : chosen_rows)
            if (ft.detects[i][j]) {
                r.covered[j] = true;
                r.best_tvd[j] = std::max(r.best_tvd[j], ft.tvds[i][j]);
            }
    r.uncovered.clear();
    for (size_t j = 0; j < nf; ++j)
        if (!r.covered[j]) r.uncovered.push_back(j);
    r.coverage = nf == 0 ? 1.0
                         : static_cast<double>(nf - r.uncovered.size()) / static_cast<double>(nf);
    r.shots_advice.assign(nf, 0);
    for (size_t j = 0; j < nf; ++j)
        if (r.covered[j] && r.best_tvd[j] > 0.0)
            r.shots_advice[j] = static_cast<long>(std::ceil(8.0 / (r.best_tvd[j] * r.best_tvd[j])));
}

} // namespace detail

/// Greedy set cover: repeatedly take the test detecting the most uncovered
/// faults, ties resolved by row order.  Requirements are left unevaluated.
inline TestSetReport greedy_cover(const FaultTable& ft) {
    const size_t nt = ft.tests.size();
    const size_t nf = ft.faults.size();
    std::vector<bool> covered(nf, false);
    std::vector<size_t> chosen_rows;
    size_t remaining = nf;
    while (remaining > 0) {
        size_t best = nt;
        size_t best_gain = 0;
        for (size_t i = 0; i < nt; ++i) {
            size_t gain = 0;
            for (size_t j = 0; j < nf; ++j)
                if (!covered[j] && ft.detects[i][j]) ++gain;
            if (gain > best_gain) {
                best_gain = gain;
                best = i;
            }
        }
        if (best == nt) break;   // nothing left detectable
        chosen_rows.push_back(best);
        for (size_t j = 0; j < nf; ++j)
            if (ft.detects[best][j] && !covered[j]) {
                covered[j] = true;
                --remaining;
            }
    }
    TestSetReport r;
    detail::finish_report(r, ft, chosen_rows);
    r.complete = r.coverage == 1.0;
    return r;
}

// ---------------------------------------------------------------------------
// requirements R1..R7

namespace detail {

/// Faults whose detection must be demonstrated in the conjugate basis.
/// Scoped to `fs` when given, otherwise enumerated from the circuit.
inline std::vector<Fault> phase_faults_for(const Circuit& gc, const FaultSet* fs) {
    std::vector<Fault> out;
    if (fs) {
        for (const Fault& f : fs->faults)
            if (std::holds_alternative<LostPhaseControl>(f) || std::holds_alternative<LostPhaseGate>(f))
                out.push_back(f);
    } else {
        for (const Fault& f : enumerate_faults(gc, {FaultClass::LostPhase}).faults) out.push_back(f);
    }
    return out;
}

inline std::vector<Fault> z_faults_for(const Circuit& gc, const FaultSet* fs) {
    std::vector<Fault> out;
    if (fs) {
        for (const Fault& f : fs->faults)
            if (const auto* p = std::get_if<PauliFault>(&f); p && p->kind == PauliKind::Z)
                out.push_back(f);
    } else {
        for (const Fault& f : enumerate_faults(gc, {FaultClass::Pauli}).faults)
            if (std::get<PauliFault>(f).kind == PauliKind::Z) out.push_back(f);
    }
    return out;
}

inline bool is_x_test(const Test& t) {
    return t.basis == MeasBasis::X && t.measure == MeasBasis::X;
}

inline bool detected_by_x_test(const Circuit& gc, const Fault& f, const std::vector<Test>& tests,
                               double tau) {
    for (const Test& t : tests)
        if (is_x_test(t) && distinguishes(gc, f, t, tau)) return true;
    return false;
}

/// Deterministic gold output bits of a Z/Z test, when defined.
inline std::optional<std::string> gold_output_bits(const Circuit& gc, const Test& t) {
    if (t.basis != MeasBasis::Z || t.measure != MeasBasis::Z) return std::nullopt;
    if (auto idx = classical_run(gc, bits_to_index(t.prep)))
        return index_to_bits(gc.width, *idx);
    const OutcomeDistribution d = run_exact(gc, t);
    for (const auto& [bits, p] : d)
        if (p >= 1.0 - 1e-9) return bits;
    return std::nullopt;
}

} // namespace detail

/// R1..R7 for a test list against a circuit.  R2 and R4 check detection in
/// the conjugate basis for the phase-flip and lost-phase fault sets (taken
/// from `fs` when provided); the rest are structural drive checks evaluated
/// by propagating Z-basis preparations through the gold circuit.
inline std::array<bool, 7> check_requirements(const Circuit& gc, const std::vector<Test>& tests,
                                              const FaultSet* fs = nullptr,
                                              double tau = kDefaultTau) {
    std::array<bool, 7> r{};

    // R1: some computational-basis preparation read out in the same basis
    for (const Test& t : tests)
        if (t.basis == MeasBasis::Z && t.measure == MeasBasis::Z) { r[0] = true; break; }

    // R2 / R4: every phase-type fault caught by some conjugate-basis test;
    // vacuously true when the scoped fault set has no member of the class
    {
        auto all_x_detected = [&](const std::vector<Fault>& fl) {
            for (const Fault& f : fl)
                if (!detail::detected_by_x_test(gc, f, tests, tau)) return false;
            return true;
        };
        r[1] = all_x_detected(detail::z_faults_for(gc, fs));
        r[3] = all_x_detected(detail::phase_faults_for(gc, fs));
    }

    // R3: every qubit prepared as both 0 and 1 across the tests
    {
        std::vector<std::array<bool, 2>> seen(static_cast<size_t>(gc.width), {false, false});
        for (const Test& t : tests)
            for (int w = 0; w < gc.width && w < static_cast<int>(t.prep.size()); ++w)
                seen[static_cast<size_t>(w)][t.prep[static_cast<size_t>(w)] == '1'] = true;
        r[2] = gc.width > 0 && !tests.empty();
        for (const auto& s : seen) r[2] = r[2] && s[0] && s[1];
    }

    // R5 / R6: classical drive conditions per gate
    {
        const size_t ng = gc.stages.size();
        std::vector<bool> all_on(ng, false);
        std::vector<std::vector<bool>> each_off(ng);
        std::vector<std::array<bool, 2>> target_seen(ng, {false, false});
        for (size_t s = 0; s < ng; ++s)
            each_off[s].assign(gc.stages[s].controls.size(), false);

        for (const Test& t : tests) {
            if (t.basis != MeasBasis::Z) continue;
            const auto views = drive_views(gc, bits_to_index(t.prep));
            for (size_t s = 0; s < views.size(); ++s) {
                const auto& cv = views[s].control_values;
                const bool active = std::all_of(cv.begin(), cv.end(), [](int b) { return b == 1; });
                if (active) {
                    all_on[s] = true;
                    if (views[s].target_value >= 0) target_seen[s][views[s].target_value] = true;
                }
                for (size_t k = 0; k < cv.size(); ++k) {
                    bool others_on = cv[k] == 0;
                    for (size_t j = 0; j < cv.size() && others_on; ++j)
                        if (j != k && cv[j] != 1) others_on = false;
                    if (others_on) each_off[s][k] = true;
                }
            }
        }
        r[4] = !tests.empty();
        r[5] = !tests.empty();
        for (size_t s = 0; s < ng; ++s) {
            r[4] = r[4] && all_on[s] &&
                   std::all_of(each_off[s].begin(), each_off[s].end(), [](bool b) { return b; });
            r[5] = r[5] && target_seen[s][0] && target_seen[s][1];
        }
    }

    // R7: every qubit observed in both output values across the tests
    {
        std::vector<std::array<bool, 2>> seen(static_cast<size_t>(gc.width), {false, false});
        for (const Test& t : tests)
            if (auto bits = detail::gold_output_bits(gc, t))
                for (int w = 0; w < gc.width; ++w)
                    seen[static_cast<size_t>(w)][(*bits)[static_cast<size_t>(w)] == '1'] = true;
        r[6] = gc.width > 0 && !tests.empty();
        for (const auto& s : seen) r[6] = r[6] && s[0] && s[1];
    }

    return r;
}

// ---------------------------------------------------------------------------
// complete test set generation

/// All Z/Z tests followed by all X/X tests.  Beyond 6 wires an exhaustive
/// vocabulary is impractical; 64 preparations per basis are drawn instead
/// from a fixed-seed generator so runs stay reproducible.
inline std::vector<Test> candidate_vocabulary(int width) {
    std::vector<Test> out;
    if (width <= 6) {
        const unsigned dim = 1u << width;
        for (unsigned k = 0; k < dim; ++k)
            out.push_back({index_to_bits(width, k), MeasBasis::Z, MeasBasis::Z});
        for (unsigned k = 0; k < dim; ++k)
            out.push_back({index_to_bits(width, k), MeasBasis::X, MeasBasis::X});
        return out;
    }
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    for (MeasBasis b : {MeasBasis::Z, MeasBasis::X}) {
        std::vector<std::string> preps;
        while (preps.size() < 64) {
            std::string bits(static_cast<size_t>(width), '0');
            for (auto& ch : bits) ch = (rng() & 1) ? '1' : '0';
            if (std::find(preps.begin(), preps.end(), bits) == preps.end()) preps.push_back(bits);
        }
        for (const auto& p : preps) out.push_back({p, b, b});
    }
    return out;
}

namespace detail {

/// One unmet obligation of R1..R7, as a predicate a single extra test can
/// satisfy.  Requirements are monotone in the test set, so repairing
/// obligation by obligation never regresses another requirement.
using Obligation = std::function<bool(const Test&)>;

inline std::vector<Obligation> missing_obligations(const Circuit& gc, const FaultSet& fs,
                                                   const std::vector<Test>& tests, double tau) {
    std::vector<Obligation> out;

    bool have_zz = false;
    for (const Test& t : tests)
        if (t.basis == MeasBasis::Z && t.measure == MeasBasis::Z) { have_zz = true; break; }
    if (!have_zz)
        out.push_back([](const Test& t) { return t.basis == MeasBasis::Z && t.measure == MeasBasis::Z; });

    for (const Fault& f : z_faults_for(gc, &fs))
        if (!detected_by_x_test(gc, f, tests, tau))
            out.push_back([&gc, f, tau](const Test& t) {
                return is_x_test(t) && distinguishes(gc, f, t, tau);
            });
    for (const Fault& f : phase_faults_for(gc, &fs))
        if (!detected_by_x_test(gc, f, tests, tau))
            out.push_back([&gc, f, tau](const Test& t) {
                return is_x_test(t) && distinguishes(gc, f, t, tau);
            });

    {
        std::vector<std::array<bool, 2>> seen(static_cast<size_t>(gc.width), {false, false});
        for (const Test& t : tests)
            for (int w = 0; w < gc.width && w < static_cast<int>(t.prep.size()); ++w)
                seen[static_cast<size_t>(w)][t.prep[static_cast<size_t>(w)] == '1'] = true;
        for (int w = 0; w < gc.width; ++w)
            for (int v = 0; v < 2; ++v)
                if (!seen[static_cast<size_t>(w)][v])
                    out.push_back([w, v](const Test& t) {
                        return t.prep[static_cast<size_t>(w)] == static_cast<char>('0' + v);
                    });
    }

    {
        const size_t ng = gc.stages.size();
        std::vector<bool> all_on(ng, false);
        std::vector<std::vector<bool>> each_off(ng);
        std::vector<std::array<bool, 2>> target_seen(ng, {false, false});
        for (size_t s = 0; s < ng; ++s)
            each_off[s].assign(gc.stages[s].controls.size(), false);

        auto stage_views = [&](const Test& t) {
            return t.basis == MeasBasis::Z ? drive_views(gc, bits_to_index(t.prep))
                                           : std::vector<StageView>{};
        };
        auto drives_all_on = [](const StageView& v) {
            return std::all_of(v.control_values.begin(), v.control_values.end(),
                               [](int b) { return b == 1; });
        };
        auto drives_off_at = [](const StageView& v, size_t k) {
            if (v.control_values[k] != 0) return false;
            for (size_t j = 0; j < v.control_values.size(); ++j)
                if (j != k && v.control_values[j] != 1) return false;
            return true;
        };

        for (const Test& t : tests) {
            const auto views = stage_views(t);
            for (size_t s = 0; s < views.size(); ++s) {
                if (drives_all_on(views[s])) {
                    all_on[s] = true;
                    if (views[s].target_value >= 0) target_seen[s][views[s].target_value] = true;
                }
                for (size_t k = 0; k < views[s].control_values.size(); ++k)
                    if (drives_off_at(views[s], k)) each_off[s][k] = true;
            }
        }

        for (size_t s = 0; s < ng; ++s) {
            if (!all_on[s])
                out.push_back([s, stage_views, drives_all_on](const Test& t) {
                    const auto views = stage_views(t);
                    return s < views.size() && drives_all_on(views[s]);
                });
            for (size_t k = 0; k < each_off[s].size(); ++k)
                if (!each_off[s][k])
                    out.push_back([s, k, stage_views, drives_off_at](const Test& t) {
                        const auto views = stage_views(t);
                        return s < views.size() && drives_off_at(views[s], k);
                    });
            for (int tv = 0; tv < 2; ++tv)
                if (!target_seen[s][tv])
                    out.push_back([s, tv, stage_views, drives_all_on](const Test& t) {
                        const auto views = stage_views(t);
                        return s < views.size() && drives_all_on(views[s]) &&
                               views[s].target_value == tv;
                    });
        }
    }

    {
        std::vector<std::array<bool, 2>> seen(static_cast<size_t>(gc.width), {false, false});
        for (const Test& t : tests)
            if (auto bits = gold_output_bits(gc, t))
                for (int w = 0; w < gc.width; ++w)
                    seen[static_cast<size_t>(w)][(*bits)[static_cast<size_t>(w)] == '1'] = true;
        for (int w = 0; w < gc.width; ++w)
            for (int v = 0; v < 2; ++v)
                if (!seen[static_cast<size_t>(w)][v])
                    out.push_back([&gc, w, v](const Test& t) {
                        auto bits = gold_output_bits(gc, t);
                        return bits && (*bits)[static_cast<size_t>(w)] == static_cast<char>('0' + v);
                    });
    }

    return out;
}

} // namespace detail

/// Build the fault table over the candidate vocabulary, extract a greedy
/// cover, then extend the choice with vocabulary tests until every
/// satisfiable requirement obligation is met.  Complete means full
/// coverage and R1..R7.
inline TestSetReport generate_complete_set(const Circuit& gc, const FaultSet& fs,
                                           double tau = kDefaultTau) {
    const std::vector<Test> vocab = candidate_vocabulary(gc.width);
    const FaultTable ft = build_fault_table(gc, fs, vocab, tau);
    TestSetReport r = greedy_cover(ft);

    std::vector<size_t> rows;
    for (const Test& t : r.chosen)
        rows.push_back(static_cast<size_t>(std::find(vocab.begin(), vocab.end(), t) - vocab.begin()));

    auto in_rows = [&](size_t i) { return std::find(rows.begin(), rows.end(), i) != rows.end(); };
    auto current = [&]() {
        std::vector<Test> ts;
        for (size_t i : rows) ts.push_back(vocab[i]);
        return ts;
    };

    for (const auto& need : detail::missing_obligations(gc, fs, current(), tau)) {
        bool already = false;
        for (const Test& t : current())
            if (need(t)) { already = true; break; }
        if (already) continue;
        for (size_t i = 0; i < vocab.size(); ++i)
            if (!in_rows(i) && need(vocab[i])) {
                rows.push_back(i);
                break;
            }
    }

    detail::finish_report(r, ft, rows);
    r.requirements = check_requirements(gc, current(), &fs, tau);
    r.complete = r.coverage == 1.0 &&
                 std::all_of(r.requirements->begin(), r.requirements->end(),
                             [](bool b) { return b; });
    return r;
}

// ---------------------------------------------------------------------------
// rendering

inline nlohmann::json fault_table_json(const FaultTable& ft) {
    nlohmann::json j;
    j["tau"] = ft.tau;
    for (const Test& t : ft.tests) j["tests"].push_back(test_to_string(t));
    for (const Fault& f : ft.faults) j["faults"].push_back(fault_to_string(f));
    j["detects"] = nlohmann::json::array();
    for (const auto& row : ft.detects) {
        nlohmann::json r = nlohmann::json::array();
        for (bool b : row) r.push_back(b ? 1 : 0);
        j["detects"].push_back(r);
    }
    return j;
}

inline std::string fault_table_csv(const FaultTable& ft) {
    std::string out = "test";
    for (const Fault& f : ft.faults) out += "," + fault_to_string(f);
    out += "\n";
    for (size_t i = 0; i < ft.tests.size(); ++i) {
        out += test_to_string(ft.tests[i]);
        for (size_t j = 0; j < ft.faults.size(); ++j)
            out += ft.detects[i][j] ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

inline nlohmann::json report_json(const TestSetReport& r, const FaultTable& ft) {
    nlohmann::json j;
    j["coverage"] = r.coverage;
    j["complete"] = r.complete;
    j["chosen"] = nlohmann::json::array();
    for (const Test& t : r.chosen) j["chosen"].push_back(test_to_string(t));
    if (r.requirements) {
        nlohmann::json reqs;
        for (size_t q = 0; q < 7; ++q) reqs["R" + std::to_string(q + 1)] = (*r.requirements)[q];
        j["requirements"] = reqs;
    } else {
        j["requirements"] = nullptr;
    }
    j["faults"] = nlohmann::json::array();
    for (size_t k = 0; k < ft.faults.size(); ++k) {
        nlohmann::json f;
        f["fault"] = fault_to_string(ft.faults[k]);
        f["covered"] = static_cast<bool>(r.covered[k]);
        f["tvd"] = r.best_tvd[k];
        f["shots_advice"] = r.shots_advice[k];
        j["faults"].push_back(f);
    }
    return j;
}

} // namespace qatpg
