#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "modloc/artifact.hpp"
#include "modloc/config.hpp"
#include "modloc/verification.hpp"

namespace fs = std::filesystem;
using namespace modloc;
using nlohmann::json;

namespace {

struct Overrides {
    std::string config;
    std::optional<double> k, beta;
    std::optional<int> M, grid_n;
    std::optional<double> grid_emax;
    std::vector<std::pair<double, double>> intervals;
    std::optional<std::string> bump, profile, out, format, artifact;
    std::vector<std::string> scope;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON config file (default: $MODLOC_CONFIG)");
    cmd->add_option("--k", o.k, "lowest weight, k >= 1/2");
    cmd->add_option("--beta", o.beta, "basis energy scale");
    cmd->add_option("--M", o.M, "basis truncation");
    cmd->add_option("--grid-n", o.grid_n, "interior grid points");
    cmd->add_option("--grid-emax", o.grid_emax, "grid energy cutoff");
    cmd->add_option("--interval", o.intervals, "localization interval A B (repeatable)");
    cmd->add_option("--bump", o.bump, "bump family: mollifier, sine-window, polynomial-window");
    cmd->add_option("--scope", o.scope, "check groups to run, or 'all'");
    cmd->add_option("--tol-profile", o.profile, "tolerance profile: strict, default, coarse");
    cmd->add_option("--seed", o.seed, "seed for random states");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--format", o.format, "json, csv or md")->check(CLI::IsMember({"json", "csv", "md"}));
    cmd->add_option("--artifact", o.artifact, "representation file to load instead of building");
}

RunConfig resolve(const Overrides& o) {
    RunConfig c;
    std::string path = o.config;
    if (path.empty())
        if (const char* env = std::getenv("MODLOC_CONFIG")) path = env;
    if (!path.empty()) c = load_config(path);
    if (o.k) c.rep.k = *o.k;
    if (o.beta) c.rep.beta = *o.beta;
    if (o.M) c.rep.M = *o.M;
    if (o.grid_n) c.grid.N = *o.grid_n;
    if (o.grid_emax) c.grid.E_max = *o.grid_emax;
    if (!o.intervals.empty()) {
        c.intervals.clear();
        for (auto [a, b] : o.intervals) c.intervals.push_back({a, b});
    }
    if (o.bump) c.bump_family = *o.bump;
    if (!o.scope.empty()) c.scope = o.scope;
    if (o.profile) c.profile = *o.profile;
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.out = *o.out;
    if (o.format) c.format = *o.format;
    if (o.artifact) c.artifact = *o.artifact;
    c.validate();
    ToleranceProfile::preset(c.profile);
    return c;
}

// ---------- tables ----------

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;
};

std::string cell(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    if (v.is_number_float()) {
        std::ostringstream os;
        os << std::setprecision(10) << v.get<double>();
        return os.str();
    }
    return v.dump();
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

std::string render(const Table& t, const std::string& format, const json& meta) {
    std::ostringstream os;
    if (format == "json") {
        json rows = json::array();
        for (const auto& r : t.rows) {
            json o = json::object();
            for (size_t i = 0; i < t.columns.size(); ++i) o[t.columns[i]] = r[i];
            rows.push_back(o);
        }
        json doc = meta;
        doc["rows"] = rows;
        os << doc.dump(2) << "\n";
    } else if (format == "csv") {
        os << "# format_version=" << kFormatVersion << " config=" << meta.at("config").dump() << "\n";
        for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
        os << "\n";
        for (const auto& r : t.rows) {
            for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_escape(cell(r[i]));
            os << "\n";
        }
    } else {
        os << "<!-- format_version=" << kFormatVersion << " config=" << meta.at("config").dump() << " -->\n\n";
        os << "|";
        for (const auto& c : t.columns) os << " " << c << " |";
        os << "\n|";
        for (size_t i = 0; i < t.columns.size(); ++i) os << "---|";
        os << "\n";
        for (const auto& r : t.rows) {
            os << "|";
            for (const auto& v : r) os << " " << cell(v) << " |";
            os << "\n";
        }
    }
    return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw FormatError("cannot write " + p.string());
    f << text;
}

std::string ext(const std::string& format) { return format == "md" ? ".md" : "." + format; }

json meta_for(const RunConfig& c, const std::string& kind) {
    return {{"format", kind}, {"format_version", kFormatVersion}, {"config", to_json(c)}};
}

std::shared_ptr<const GeneratorSet> load_artifact(const RunConfig& c) {
    if (c.artifact.empty()) return nullptr;
    return std::make_shared<const GeneratorSet>(read_representation(c.artifact));
}

// ---------- subcommands ----------

int cmd_build(const RunConfig& c) {
    const GeneratorSet g = build_generators(c.rep, c.quad_order);
    fs::create_directories(c.out);
    const fs::path path = fs::path(c.out) / "representation.mlr";
    write_representation(path.string(), g, to_json(c));
    std::cout << "k=" << g.spec.k << " beta=" << g.spec.beta << " M=" << g.spec.M << " quad_order=" << g.quad_order
              << "\nbuild asymmetry " << std::scientific << std::setprecision(3) << g.asymmetry << "\nwrote "
              << path.string() << "\n";
    return 0;
}

int cmd_localize(const RunConfig& c) {
    auto pre = load_artifact(c);
    RunConfig cfg = c;
    if (pre) cfg.rep = pre->spec;
    SuiteContext ctx(cfg, pre);
    fs::create_directories(fs::path(c.out) / "states");
    Table t{{"interval", "bump", "a", "b", "norm", "H", "C", "D", "T", "log_a", "log_b", "in_bounds", "error"}, {}};
    for (size_t i = 0; i < cfg.intervals.size(); ++i) {
        const auto I = cfg.intervals[i];
        const auto specs = fixtures_for(cfg, I.a, I.b);
        std::shared_ptr<SpectralContext> sc;
        try {
            sc = ctx.spectral(basis_for(cfg, I.a, I.b));
        } catch (const Error& e) {
            t.rows.push_back({static_cast<int>(i), nullptr, I.a, I.b, nullptr, nullptr, nullptr, nullptr, nullptr,
                              std::log(I.a), std::log(I.b), false, e.name() + ": " + e.what()});
            continue;
        }
        for (size_t j = 0; j < specs.size(); ++j) {
            try {
                StateVector v = positive_frequency(make_bump(specs[j]), basis_for(cfg, I.a, I.b));
                v.provenance["bump"] = to_json(specs[j]);
                const Expectations e = expectations(*sc, v.coeffs);
                std::ostringstream name;
                name << "I" << i << "_b" << std::setw(2) << std::setfill('0') << j << ".mls";
                write_state((fs::path(c.out) / "states" / name.str()).string(), v, to_json(cfg));
                const bool in = e.T >= std::log(I.a) - 1e-6 && e.T <= std::log(I.b) + 1e-6;
                t.rows.push_back({static_cast<int>(i), static_cast<int>(j), I.a, I.b, std::sqrt(e.norm2), e.H, e.C,
                                  e.D, e.T, std::log(I.a), std::log(I.b), in, ""});
            } catch (const Error& e) {
                t.rows.push_back({static_cast<int>(i), static_cast<int>(j), I.a, I.b, nullptr, nullptr, nullptr,
                                  nullptr, nullptr, std::log(I.a), std::log(I.b), false, e.name() + ": " + e.what()});
            }
        }
    }
    const std::string text = render(t, cfg.format, meta_for(cfg, "modloc-localize"));
    write_text(fs::path(c.out) / ("localize" + ext(cfg.format)), text);
    std::cout << text;
    return 0;
}

Table report_table(const json& doc) {
    Table t{{"name", "backend", "status", "residual", "tolerance", "params", "message"}, {}};
    for (const auto& r : doc.at("reports"))
        t.rows.push_back({r.at("name"), r.at("backend"), r.at("status"), r.at("residual"), r.at("tolerance"),
                          r.at("params").dump(), r.at("message")});
    return t;
}

void write_curves(const fs::path& dir, const std::vector<CheckReport>& reports) {
    std::ostringstream f, s;
    f << "interval_a,interval_b,fixture,alpha,F\n";
    s << "M,r\n";
    int fixture = 0;
    for (const auto& r : reports) {
        if (r.name == "F_alpha" && r.values.contains("alpha")) {
            const auto& al = r.values["alpha"];
            const auto& F = r.values["F"];
            for (size_t i = 0; i < al.size(); ++i)
                f << r.params["interval"][0] << "," << r.params["interval"][1] << "," << fixture << ","
                  << al[i].get<double>() << "," << std::setprecision(17) << F[i].get<double>() << "\n";
            ++fixture;
        }
        if (r.name == "S_invariance" && r.values.contains("r")) {
            const auto& Ms = r.params["M_ladder"];
            for (size_t i = 0; i < Ms.size(); ++i)
                s << Ms[i].get<int>() << "," << std::setprecision(17) << r.values["r"][i].get<double>() << "\n";
        }
    }
    write_text(dir / "F_alpha.csv", f.str());
    write_text(dir / "S_convergence.csv", s.str());
}

int cmd_verify(const RunConfig& c) {
    auto pre = load_artifact(c);
    RunConfig cfg = c;
    if (pre) {
        cfg.rep = pre->spec;
        cfg.quad_order = pre->quad_order;
    }
    const auto reports = run_suite(cfg, ToleranceProfile::preset(cfg.profile), cfg.scope, pre);
    const json doc = report_document(cfg, reports);
    fs::create_directories(c.out);
    write_text(fs::path(c.out) / "report.json", doc.dump(2) + "\n");
    const Table t = report_table(doc);
    const json meta = meta_for(cfg, "modloc-report");
    write_text(fs::path(c.out) / "report.csv", render(t, "csv", meta));
    if (cfg.format == "md") write_text(fs::path(c.out) / "report.md", render(t, "md", meta));
    write_curves(c.out, reports);
    const Aggregate a = aggregate(reports);
    for (const auto& r : reports)
        std::cout << std::left << std::setw(14) << to_string(r.status) << std::setw(24) << r.name << std::setw(18)
                  << r.backend << r.params.dump() << "\n";
    std::cout << "aggregate: " << (a.ok() ? "PASS" : "FAIL") << " (" << a.pass << " pass, " << a.fail << " fail, "
              << a.inconclusive << " inconclusive, " << a.error << " error)\n";
    return a.ok() ? 0 : 1;
}

int cmd_report(const RunConfig& c, const std::string& input) {
    const fs::path path = input.empty() ? fs::path(c.out) / "report.json" : fs::path(input);
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("bad report: ") + e.what());
    }
    if (doc.value("format", "") != "modloc-report") throw FormatError(path.string() + " is not a modloc report");
    json meta = {{"format", "modloc-report-summary"}, {"format_version", kFormatVersion}, {"config", doc.at("config")},
                 {"aggregate", doc.at("aggregate")}};
    std::cout << render(report_table(doc), c.format, meta);
    return doc.at("aggregate").at("pass").get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"modloc: modular localization numerics"};
    app.require_subcommand(1);
    Overrides o;
    std::string report_input;
    auto* build = app.add_subcommand("build", "build and store a truncated representation");
    auto* localize = app.add_subcommand("localize", "project local bumps and tabulate expectation values");
    auto* verify = app.add_subcommand("verify", "run the check suite; exit code 0 iff it passes");
    auto* report = app.add_subcommand("report", "render a stored report");
    for (auto* cmd : {build, localize, verify, report}) add_common(cmd, o);
    report->add_option("--input", report_input, "report JSON (default: <out>/report.json)");
    CLI11_PARSE(app, argc, argv);
    try {
        const RunConfig c = resolve(o);
        if (build->parsed()) return cmd_build(c);
        if (localize->parsed()) return cmd_localize(c);
        if (verify->parsed()) return cmd_verify(c);
        return cmd_report(c, report_input);
    } catch (const Error& e) {
        std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
