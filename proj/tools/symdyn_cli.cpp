#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "symdyn/analysis.hpp"
#include "symdyn/errors.hpp"
#include "symdyn/markov_refine.hpp"
#include "symdyn/sampling.hpp"
#include "symdyn/shadowing.hpp"

using namespace symdyn;
using json = nlohmann::ordered_json;

namespace {

struct Config {
    std::string map = "doubling";
    std::string map_file;
    std::string samples_file;
    double chi = 0.5 * std::log(2.0);
    double epsilon = 0.1;
    int depth = 40;
    int horizon = 40;
    int lo = 1;
    int hi = 20;
    int samples = 100;
    int periodic = 8;
    int branches = 2;
    int cover_level = 6;
    int paths_per_vertex = 2;
    int cover_window = 12;
    int n_max = 8;
    int regularity_samples = 10000;
    bool weak = false;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out;
};

struct UsageError : Error {
    explicit UsageError(const std::string& w) : Error("UsageError", w) {}
};

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class Session {
public:
    explicit Session(const Config& c) : cfg(c) {}

    const Config& cfg;

    MapPtr map() {
        if (map_) return map_;
        if (!cfg.map_file.empty()) {
            std::ifstream in(cfg.map_file);
            if (!in) throw UsageError("cannot read map file " + cfg.map_file);
            std::stringstream ss;
            ss << in.rdbuf();
            map_ = std::make_shared<const MapModel>(parse_map(ss.str()));
        } else {
            try {
                map_ = std::make_shared<const MapModel>(builtin_map(cfg.map));
            } catch (const std::invalid_argument& e) {
                throw UsageError(std::string(e.what()) + " (expected one of doubling, tent, quadratic, gauss)");
            }
        }
        return map_;
    }

    AlphabetOptions options() const {
        AlphabetOptions o;
        o.cfg.chi = cfg.chi;
        o.cfg.epsilon = cfg.epsilon;
        o.cfg.depth = cfg.depth;
        o.cfg.horizon = cfg.horizon;
        o.lo = cfg.lo;
        o.hi = cfg.hi;
        o.cover_level = cfg.cover_level;
        return o;
    }

    const std::vector<OrbitSample>& random_samples() {
        if (random_loaded_) return random_;
        random_loaded_ = true;
        if (!cfg.samples_file.empty()) {
            std::ifstream in(cfg.samples_file);
            if (!in) throw UsageError("cannot read samples file " + cfg.samples_file);
            std::string line;
            std::getline(in, line);
            if (line.rfind("# symdyn-samples v1", 0) != 0) throw UsageError("not a symdyn-samples v1 file");
            while (std::getline(in, line)) {
                const auto at = line.find("window v1");
                if (at == std::string::npos) continue;
                random_.push_back({OrbitWindow::deserialize(map(), line.substr(at)), LogReal::zero()});
            }
        } else {
            random_ = certified_samples(map(), static_cast<std::size_t>(cfg.samples), cfg.seed, options());
        }
        return random_;
    }

    const std::vector<OrbitSample>& periodic() {
        if (!periodic_loaded_) {
            periodic_ = periodic_library(map(), cfg.periodic, cfg.branches);
            periodic_loaded_ = true;
        }
        return periodic_;
    }

    std::vector<OrbitSample> all_samples() {
        std::vector<OrbitSample> s = periodic();
        const auto& r = random_samples();
        s.insert(s.end(), r.begin(), r.end());
        sort_canonical(s);
        return s;
    }

    std::shared_ptr<const Alphabet> alphabet() {
        if (!alpha_) alpha_ = std::make_shared<const Alphabet>(build_alphabet(all_samples(), options()));
        return alpha_;
    }

    const GpoGraph& graph() {
        if (!graph_) graph_ = std::make_unique<GpoGraph>(build_graph(alphabet(), cfg.weak));
        return *graph_;
    }

    const GpoGraph& relevant() {
        if (!relevant_) relevant_ = std::make_unique<GpoGraph>(prune_relevant(graph()));
        return *relevant_;
    }

    void emit(const std::string& name, const std::string& content) {
        if (cfg.out.empty()) {
            std::cout << content;
            if (!content.empty() && content.back() != '\n') std::cout << '\n';
            return;
        }
        std::filesystem::create_directories(cfg.out);
        const auto path = std::filesystem::path(cfg.out) / name;
        std::ofstream f(path, std::ios::binary);
        f << content;
        if (!f) throw UsageError("cannot write " + path.string());
        std::cout << "wrote " << path.string() << '\n';
    }

    std::string header(const std::string& format) {
        return "# " + format + " map=" + map()->name + " chi=" + fmt17(cfg.chi) + " eps=" + fmt17(cfg.epsilon) +
               " seed=" + std::to_string(cfg.seed);
    }

private:
    MapPtr map_;
    std::vector<OrbitSample> random_, periodic_;
    bool random_loaded_ = false, periodic_loaded_ = false;
    std::shared_ptr<const Alphabet> alpha_;
    std::unique_ptr<GpoGraph> graph_, relevant_;
};

// Results land in slot order, so the output does not depend on the worker count.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int workers, F fn) {
    std::vector<T> out(n);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) out[i] = fn(i);
    };
    const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    std::vector<std::thread> pool;
    for (int k = 1; k < w; ++k) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    return out;
}

int cmd_verify_map(Session& s) {
    const RegularityReport r = verify_regularity(*s.map(), static_cast<std::size_t>(s.cfg.regularity_samples), s.cfg.seed);
    json j;
    j["format"] = "symdyn-regularity v1";
    j["map"] = r.map;
    j["samples"] = r.samples;
    j["pass"] = r.all_pass();
    j["clauses"] = json::array();
    std::ostringstream txt;
    txt << "map " << r.map << " samples " << r.samples << '\n';
    for (const auto& c : r.clauses) {
        j["clauses"].push_back({{"clause", c.clause}, {"pass", c.pass}, {"worst", c.worst}, {"bound", c.bound},
                                {"witness", c.witness}, {"witness_distance", c.witness_distance}, {"checked", c.checked}});
        char buf[200];
        std::snprintf(buf, sizeof buf, "%-14s %s worst=%.6g bound=%.6g witness=%.10g d(witness,S)=%.3g\n",
                      c.clause.c_str(), c.pass ? "PASS" : "FAIL", c.worst, c.bound, c.witness, c.witness_distance);
        txt << buf;
    }
    txt << (r.all_pass() ? "regularity: PASS\n" : "regularity: FAIL\n");
    std::cout << txt.str();
    if (!s.cfg.out.empty()) s.emit("regularity.json", j.dump(1) + "\n");
    return r.all_pass() ? 0 : 3;
}

std::string samples_text(Session& s) {
    const auto& r = s.random_samples();
    std::ostringstream os;
    os << s.header("symdyn-samples v1") << " count=" << r.size() << '\n';
    const AlphabetOptions o = s.options();
    for (std::size_t i = 0; i < r.size(); ++i) {
        const Certificate c = expansion_certificate(r[i].w.shift(o.lo, o.cfg.depth + 1), o.cfg.chi, o.cfg.depth,
                                                    o.cfg.horizon, o.cfg.n_min);
        os << "sample " << i << " margin=" << fmt17(c.margin) << ' ' << r[i].w.serialize() << '\n';
    }
    return os.str();
}

int cmd_sample_orbits(Session& s) {
    s.emit("samples.txt", samples_text(s));
    return 0;
}

std::string alphabet_text(Session& s) {
    const Alphabet& A = *s.alphabet();
    std::ostringstream os;
    os << s.header("symdyn-alphabet v1") << " centers=" << A.centers.size() << " bins=" << A.groups.size()
       << " samples=" << A.samples_seen << '\n';
    for (std::size_t i = 0; i < A.centers.size(); ++i) {
        const Center& c = A.centers[i];
        os << "center " << i << " x0=" << fmt17(c.gamma.x[1]) << " offset=" << to_string(c.offset)
           << " u=" << fmt17(c.params.u) << " Q_index=" << c.params.Q_index << " p_index=" << c.p_min_index << ".."
           << c.p_max_index << " bin=" << c.key.str() << '\n';
    }
    return os.str();
}

// Vertices above each threshold, through the bin index and by a full scan.
std::string discreteness_text(Session& s) {
    const GpoGraph& g = s.graph();
    std::ostringstream os;
    os << "threshold\tindexed\tscan\n";
    bool ok = true;
    double top = 0, bottom = 0;
    for (std::size_t v = 0; v < g.size(); ++v) {
        const double l = g.log_p(static_cast<int>(v));
        top = v ? std::max(top, l) : l;
        bottom = v ? std::min(bottom, l) : l;
    }
    for (int k = 0; k <= 12; ++k) {
        const double t = top + 1.0 - (top + 1.0 - bottom) * k / 12.0;
        const std::size_t a = g.above(t).size();
        std::size_t b = 0;
        for (std::size_t v = 0; v < g.size(); ++v) b += g.log_p(static_cast<int>(v)) > t;
        ok = ok && a == b;
        os << fmt17(t) << '\t' << a << '\t' << b << '\n';
    }
    os << "discreteness: " << (ok ? "PASS" : "FAIL") << '\n';
    return os.str();
}

int cmd_alphabet(Session& s) {
    s.emit("alphabet.txt", alphabet_text(s));
    std::cout << discreteness_text(s);
    return 0;
}

int cmd_graph(Session& s) {
    const GpoGraph& g = s.graph();
    const GpoGraph& r = s.relevant();
    s.emit("graph.txt", export_graph(g));
    s.emit("graph_relevant.txt", export_graph(r));
    s.emit("graph_relevant.dot", export_dot(r));
    std::cout << "vertices " << g.size() << " strong " << g.strong_edge_count() << " relevant " << r.size() << '\n';
    return 0;
}

int cmd_shadow(Session& s) {
    const auto& samples = s.random_samples();
    const Alphabet& A = *s.alphabet();
    struct Item {
        std::string text;
        double slack = -INFINITY;
        std::string error;
    };
    auto items = parallel_map<Item>(samples.size(), s.cfg.workers, [&](std::size_t i) {
        Item it;
        try {
            const Gpo g = sufficiency_encode(samples[i].w, A);
            const ShadowResult r = shadow(g);
            std::ostringstream os;
            os << "gpo " << i << " lo=" << g.lo << " hi=" << g.hi() << " refs=";
            for (std::size_t k = 0; k < g.refs.size(); ++k)
                os << (k ? "," : "") << g.refs[k].center << ':' << g.refs[k].p_index;
            os << " broken=" << g.broken.size() << '\n' << r.serialize();
            it.text = os.str();
            for (int n = g.lo; n <= g.hi(); ++n) {
                const LogReal d = (LogReal::from_double(g.at(n).x0() - samples[i].w.x(n)) + r.disp_at(n)) *
                                  LogReal::from_double(g.at(n).params.u);
                if (!d.is_zero()) it.slack = std::max(it.slack, d.lg - g.at(n).log_p());
            }
        } catch (const Error& e) {
            it.error = e.kind + ": " + e.what();
        }
        return it;
    });
    std::ostringstream os;
    os << s.header("symdyn-shadow v1") << " count=" << items.size() << '\n';
    double worst = -INFINITY;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!items[i].error.empty()) {
            ++failed;
            os << "gpo " << i << " error " << items[i].error << '\n';
            continue;
        }
        os << items[i].text;
        worst = std::max(worst, items[i].slack);
    }
    s.emit("shadow.txt", os.str());
    std::cout << "shadowed " << items.size() - failed << " of " << items.size()
              << " worst log(|coordinate error| u / p)=" << (std::isfinite(worst) ? fmt17(worst) : "exact") << '\n';
    return failed ? 4 : 0;
}

int cmd_inverse_audit(Session& s) {
    const AlphabetOptions o = s.options();
    const auto& orbits = s.periodic();
    std::vector<OrbitSample> first = with_twins(orbits, o);
    std::vector<OrbitSample> second(first.rbegin(), first.rend());
    const Alphabet A1 = build_alphabet(first, o), A2 = build_alphabet(second, o);
    json j;
    j["format"] = "symdyn-inverse v1";
    j["orbits"] = orbits.size();
    json rows = json::array();
    std::size_t distinct = 0, failed = 0;
    for (std::size_t i = 0; i < orbits.size(); ++i) {
        const Gpo g1 = sufficiency_encode(orbits[i].w, A1), g2 = sufficiency_encode(orbits[i].w, A2);
        bool same = true;
        for (std::size_t k = 0; k < g1.charts.size(); ++k)
            same = same && g1.at(g1.lo + static_cast<int>(k)).offset.lg == g2.at(g2.lo + static_cast<int>(k)).offset.lg &&
                   g1.at(g1.lo + static_cast<int>(k)).offset.sign == g2.at(g2.lo + static_cast<int>(k)).offset.sign;
        if (same) continue;
        ++distinct;
        json row;
        row["orbit"] = i;
        try {
            const InverseReport r = inverse_check(g1, g2);
            row["pass"] = r.all_pass();
            row["worst_gap"] = to_string(r.worst_gap);
            row["threshold"] = to_string(r.proxy_threshold);
            for (const auto& c : r.clauses)
                row["clauses"][c.clause] = {{"pass", c.pass}, {"worst", c.worst > -1e300 ? json(c.worst) : json(nullptr)},
                                            {"witness", c.witness}};
            if (!r.all_pass()) {
                ++failed;
                row["diagnostic"] = r.diagnostic;
            }
        } catch (const NotDoubleCoding& e) {
            ++failed;
            row["pass"] = false;
            row["error"] = e.what();
        }
        rows.push_back(row);
    }
    j["double_codings"] = distinct;
    j["failed"] = failed;
    j["rows"] = rows;
    s.emit("inverse.json", j.dump(1) + "\n");
    std::cout << "double codings " << distinct << " failed " << failed << '\n';
    return failed ? 4 : 0;
}

struct Refined {
    Cover cover;
    std::vector<RefinedCell> cells;
    TmsGraph tms;
};

Refined run_refine(Session& s) {
    CoverOptions co;
    co.paths_per_vertex = s.cfg.paths_per_vertex;
    co.window = s.cfg.cover_window;
    co.seed = s.cfg.seed;
    Refined r;
    r.cover = build_cover(s.relevant(), co);
    r.cells = refine(r.cover);
    r.tms = hat_graph(r.cover, r.cells);
    return r;
}

int cmd_refine(Session& s) {
    const Refined r = run_refine(s);
    s.emit("partition.txt", export_partition(r.cover, r.cells, r.tms));
    const AuditReport a = audits(r.cover, r.cells, r.tms);
    s.emit("audit.txt", "# symdyn-audit v1\n" + a.text());
    return a.markov_failures ? 4 : 0;
}

std::string entropy_json(Session& s) {
    const GpoGraph& r = s.relevant();
    const Digraph d = Digraph::from(r);
    json j;
    j["format"] = "symdyn-entropy v1";
    j["map"] = s.map()->name;
    j["vertices"] = r.size();
    json comps = json::array();
    double best = 0;
    for (const auto& comp : strongly_connected_components(d)) {
        const int v = *std::min_element(comp.begin(), comp.end());
        const auto& o = d.out[static_cast<std::size_t>(v)];
        if (comp.size() == 1 && std::find(o.begin(), o.end(), v) == o.end()) continue;
        const EntropyEstimate e = gurevich_entropy(d, v);
        best = std::max(best, e.spectral);
        comps.push_back({{"vertex", v}, {"size", e.component_size}, {"period", e.period}, {"spectral", e.spectral},
                         {"loop_growth", e.loop_growth}, {"loop_n", e.loop_n}});
    }
    std::sort(comps.begin(), comps.end(), [](const json& a, const json& b) { return a["vertex"] < b["vertex"]; });
    j["components"] = comps.size();
    j["max_spectral"] = best;
    j["detail"] = comps;
    return j.dump(1) + "\n";
}

int cmd_entropy(Session& s) {
    s.emit("entropy.json", entropy_json(s));
    return 0;
}

int cmd_periodic_report(Session& s) {
    const GrowthReport g = growth_report(*s.map(), Digraph::from(s.relevant()), s.cfg.n_max, s.cfg.branches);
    std::cout << g.text();
    s.emit("growth.json", g.json() + "\n");
    return 0;
}

int cmd_full_pipeline(Session& s) {
    s.emit("samples.txt", samples_text(s));
    s.emit("alphabet.txt", alphabet_text(s));
    s.emit("discreteness.txt", discreteness_text(s));
    s.emit("graph.txt", export_graph(s.relevant()));
    s.emit("graph.dot", export_dot(s.relevant()));
    const Refined r = run_refine(s);
    s.emit("partition.txt", export_partition(r.cover, r.cells, r.tms));
    s.emit("audit.txt", "# symdyn-audit v1\n" + audits(r.cover, r.cells, r.tms).text());
    s.emit("entropy.json", entropy_json(s));
    const GrowthReport g = growth_report(*s.map(), Digraph::from(s.relevant()), s.cfg.n_max, s.cfg.branches);
    s.emit("growth.json", g.json() + "\n");
    return 0;
}

void print_error(const std::string& kind, const std::string& message) {
    json j;
    j["error"] = {{"kind", kind}, {"message", message}};
    std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbolic dynamics for nonuniformly expanding interval maps"};
    app.set_config("--config", "", "Configuration file (key = value lines)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();
    Config cfg;
    app.add_option("--map", cfg.map, "Built-in map: doubling, tent, quadratic, gauss");
    app.add_option("--map-file", cfg.map_file, "Map description file");
    app.add_option("--samples-file", cfg.samples_file, "Random samples written by sample-orbits");
    app.add_option("--chi", cfg.chi, "Expansion threshold");
    app.add_option("--eps,--epsilon", cfg.epsilon, "Chart resolution");
    app.add_option("--depth", cfg.depth, "Series depth N");
    app.add_option("--horizon", cfg.horizon, "Forward certificate range F");
    app.add_option("--lo", cfg.lo, "First orbit index used by the alphabet");
    app.add_option("--hi", cfg.hi, "Last orbit index used by the alphabet");
    app.add_option("--samples", cfg.samples, "Number of certified random orbit samples");
    app.add_option("--periodic", cfg.periodic, "Largest period in the periodic-orbit library");
    app.add_option("--branches", cfg.branches, "Branches used for periodic words");
    app.add_option("--cover-level", cfg.cover_level, "Dyadic level of the cover centers");
    app.add_option("--paths-per-vertex", cfg.paths_per_vertex, "Paths sampled per rectangle");
    app.add_option("--cover-window", cfg.cover_window, "Half-length of sampled paths");
    app.add_option("--n-max", cfg.n_max, "Largest period in the periodic report");
    app.add_option("--regularity-samples", cfg.regularity_samples, "Samples for verify-map");
    app.add_flag("--weak", cfg.weak, "Also compute weak edges");
    app.add_option("--seed", cfg.seed, "Random seed");
    app.add_option("--workers", cfg.workers, "Worker threads");
    app.add_option("--out", cfg.out, "Output directory (stdout when empty)");

    int rc = 0;
    Session session(cfg);
    auto sub = [&](const char* name, const char* help, int (*fn)(Session&)) {
        app.add_subcommand(name, help)->callback([&rc, &session, fn] { rc = fn(session); });
    };
    sub("verify-map", "Regularity report", cmd_verify_map);
    sub("sample-orbits", "Certified random orbit samples", cmd_sample_orbits);
    sub("alphabet", "Alphabet and discreteness audit", cmd_alphabet);
    sub("graph", "Edges and relevant part", cmd_graph);
    sub("shadow", "Encode and shadow the random samples", cmd_shadow);
    sub("inverse-audit", "Double codings from permuted alphabets", cmd_inverse_audit);
    sub("refine", "Cover, partition and refined graph", cmd_refine);
    sub("entropy", "Entropy estimates of the relevant graph", cmd_entropy);
    sub("periodic-report", "Periodic point growth", cmd_periodic_report);
    sub("full-pipeline", "All artifacts", cmd_full_pipeline);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        print_error("UsageError", e.what());
        return 2;
    } catch (const Error& e) {
        print_error(e.kind, e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error("InternalError", e.what());
        return 2;
    }
    return rc;
}
